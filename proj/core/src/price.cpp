#include "bargain/price.hpp"

#include <cctype>
#include <string>

namespace bargain {

namespace {

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

// Reads digits with an optional 1-2 digit fraction starting at `pos`.
// Returns the end offset, or `pos` if nothing numeric starts there.
std::size_t scan_number(std::string_view text, std::size_t pos) {
  auto i = pos;
  while (i < text.size() && is_digit(text[i])) ++i;
  if (i == pos) return pos;
  if (i + 1 < text.size() && text[i] == '.' && is_digit(text[i + 1])) {
    auto j = i + 1;
    while (j < text.size() && is_digit(text[j])) ++j;
    if (j - i - 1 <= 2) return j;
  }
  return i;
}

bool starts_with_word_ci(std::string_view text, std::size_t pos, std::string_view word) {
  if (pos + word.size() > text.size()) return false;
  for (std::size_t k = 0; k < word.size(); ++k) {
    if (std::tolower(static_cast<unsigned char>(text[pos + k])) != word[k]) return false;
  }
  return true;
}

}  // namespace

std::vector<PriceMention> find_price_mentions(std::string_view text, std::size_t utterance_index,
                                              std::string_view currency_symbol) {
  std::vector<PriceMention> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!currency_symbol.empty() && text.substr(i, currency_symbol.size()) == currency_symbol) {
      auto start = i + currency_symbol.size();
      auto end = scan_number(text, start);
      if (end > start) {
        if (auto m = Money::parse(text.substr(start, end - start))) {
          out.push_back({*m, utterance_index, i, end});
        }
        i = end;
        continue;
      }
      i = start;
      continue;
    }
    if (is_digit(text[i]) && (i == 0 || !(is_digit(text[i - 1]) || text[i - 1] == '.'))) {
      auto end = scan_number(text, i);
      auto j = end;
      while (j < text.size() && (text[j] == ' ' || text[j] == '\t')) ++j;
      if (j > end && starts_with_word_ci(text, j, "dollar")) {
        auto word_end = j + 6;
        if (word_end < text.size() && (text[word_end] == 's' || text[word_end] == 'S')) ++word_end;
        if (word_end >= text.size() || !std::isalpha(static_cast<unsigned char>(text[word_end]))) {
          if (auto m = Money::parse(text.substr(i, end - i))) {
            out.push_back({*m, utterance_index, i, word_end});
          }
          i = word_end;
          continue;
        }
      }
      i = end;
      continue;
    }
    ++i;
  }
  return out;
}

std::optional<Money> extract_price(std::string_view text, std::string_view currency_symbol) {
  auto mentions = find_price_mentions(text, 0, currency_symbol);
  if (mentions.empty()) return std::nullopt;
  return mentions.back().amount;
}

std::optional<Money> extract_price(std::span<const Utterance> window,
                                   std::string_view currency_symbol) {
  if (window.empty()) return std::nullopt;
  const auto& accepting = window.back();
  if (auto p = extract_price(accepting.text, currency_symbol)) return p;
  for (auto it = window.rbegin() + 1; it != window.rend(); ++it) {
    if (it->speaker == accepting.speaker) continue;
    if (auto p = extract_price(it->text, currency_symbol)) return p;
  }
  return std::nullopt;
}

}  // namespace bargain
