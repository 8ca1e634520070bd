#include "bargain/money.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>

namespace bargain {

std::optional<Money> Money::parse(std::string_view text) {
  if (text.empty()) return std::nullopt;

  std::int64_t units = 0;
  std::size_t i = 0;
  for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
    units = units * 10 + (text[i] - '0');
    if (units > 100'000'000'000LL) return std::nullopt;
  }
  if (i == 0) return std::nullopt;

  std::int64_t cents = 0;
  if (i < text.size()) {
    if (text[i] != '.') return std::nullopt;
    auto frac = text.substr(i + 1);
    if (frac.empty() || frac.size() > 2) return std::nullopt;
    for (char c : frac) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    }
    cents = (frac[0] - '0') * 10 + (frac.size() == 2 ? frac[1] - '0' : 0);
  }
  auto total = units * 100 + cents;
  return Money(total);
}

std::string Money::to_string() const {
  auto abs = cents_ < 0 ? -cents_ : cents_;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%s%lld.%02lld", cents_ < 0 ? "-" : "",
                static_cast<long long>(abs / 100), static_cast<long long>(abs % 100));
  return buf;
}

std::string Money::to_compact_string() const {
  if (cents_ % 100 != 0) return to_string();
  return std::to_string(cents_ / 100);
}

Money rounded_mean(Money total, std::int64_t count) {
  auto t = total.cents();
  auto q = t / count;
  auto r = t % count;
  if (2 * std::llabs(r) >= count) q += (t < 0) ? -1 : 1;
  return Money::from_cents(q);
}

std::string signed_string(Money m) {
  return (m.cents() >= 0 ? "+" : "") + m.to_string();
}

}  // namespace bargain
