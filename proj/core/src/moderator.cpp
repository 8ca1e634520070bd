#include "bargain/moderator.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "bargain/price.hpp"
#include "bargain/scripted.hpp"

namespace bargain {

namespace {

constexpr std::string_view kDialogHeader = "Dialog:\n";

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::set<std::string> word_set(std::string_view text) {
  std::set<std::string> words;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '\'') {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      words.insert(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.insert(std::move(cur));
  return words;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t common = 0;
  for (const auto& w : a) common += b.count(w);
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

std::string_view strip_dialog_header(std::string_view text) {
  if (text.substr(0, kDialogHeader.size()) == kDialogHeader) text.remove_prefix(kDialogHeader.size());
  return text;
}

}  // namespace

std::string_view to_string(StateLabel label) {
  switch (label) {
    case StateLabel::OnGoing: return "ON-GOING";
    case StateLabel::Deal: return "DEAL";
    case StateLabel::NoDeal: return "NO DEAL";
  }
  return "ON-GOING";
}

std::optional<StateLabel> parse_label(std::string_view text) {
  auto u = upper(text);
  for (auto tag : {"NO DEAL", "NO-DEAL", "NODEAL", "NO_DEAL"}) {
    if (u.find(tag) != std::string::npos) return StateLabel::NoDeal;
  }
  for (auto tag : {"ON-GOING", "ONGOING", "ON GOING", "ON_GOING"}) {
    if (u.find(tag) != std::string::npos) return StateLabel::OnGoing;
  }
  if (u.find("DEAL") != std::string::npos) return StateLabel::Deal;
  return std::nullopt;
}

StateLabel label_of(const GameState& state) {
  if (std::holds_alternative<Deal>(state)) return StateLabel::Deal;
  if (std::holds_alternative<NoDeal>(state)) return StateLabel::NoDeal;
  return StateLabel::OnGoing;
}

GameState oracle_classify(std::span<const Utterance> window, std::string_view currency_symbol) {
  if (window.empty()) return OnGoing{};
  std::string_view last = window.back().text;
  if (last == kRefusalSentence) return NoDeal{NoDealReason::ModeratorClassified};

  std::string prefix = "I accept your offer of " + std::string(currency_symbol);
  if (last.size() > prefix.size() + 1 && last.substr(0, prefix.size()) == prefix &&
      last.back() == '.') {
    auto amount = last.substr(prefix.size(), last.size() - prefix.size() - 1);
    auto dot = amount.find('.');
    if (dot != std::string_view::npos && amount.size() - dot == 3) {
      if (auto price = Money::parse(amount)) return Deal{*price};
    }
  }
  return OnGoing{};
}

std::string window_text(std::span<const Utterance> window) {
  std::string out;
  for (std::size_t i = 0; i < window.size(); ++i) {
    if (i) out += "\n";
    out += render_dialog_line(window[i]);
  }
  return out;
}

std::vector<Utterance> parse_window_text(std::string_view text) {
  std::vector<Utterance> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty()) continue;
    auto colon = t.find(':');
    if (colon == std::string_view::npos) throw ParseError("dialog line without speaker: " + line);
    std::string name(trim(t.substr(0, colon)));
    for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    auto role = parse_role(name);
    if (!role || (*role != Role::Seller && *role != Role::Buyer)) {
      throw ParseError("unknown speaker '" + name + "'");
    }
    auto body = trim(t.substr(colon + 1));
    if (body.empty()) throw ParseError("empty utterance: " + line);
    out.push_back(Utterance::make(*role, std::string(body), 1, static_cast<int>(out.size())));
  }
  return out;
}

void DemoBank::validate() const {
  if (items.empty()) throw ConsistencyError("demo bank is empty");
  bool has_no_deal = std::any_of(items.begin(), items.end(), [](const LabeledWindow& w) {
    return w.label == StateLabel::NoDeal;
  });
  if (!has_no_deal) throw ConsistencyError("demo bank needs at least one NO DEAL demonstration");
}

DemoBank harden_demo_bank(const DemoBank& bank, std::span<const LabeledWindow> misclassified) {
  DemoBank out = bank;
  bool added = false;
  for (const auto& item : misclassified) {
    if (item.window.empty()) throw ConsistencyError("cannot add an empty window");
    auto key = window_text(item.window);
    auto it = std::find_if(out.items.begin(), out.items.end(), [&](const LabeledWindow& w) {
      return window_text(w.window) == key;
    });
    if (it != out.items.end()) {
      if (it->label != item.label) {
        throw ConsistencyError("window already labelled " + std::string(to_string(it->label)) +
                               ", new label " + std::string(to_string(item.label)) + ":\n" + key);
      }
      continue;
    }
    out.items.push_back(item);
    added = true;
  }
  if (added) ++out.version;
  return out;
}

DemoBank parse_demo_bank(std::string_view text) {
  DemoBank bank;
  std::istringstream in{std::string(text)};
  std::string line;
  std::optional<LabeledWindow> current;
  std::string block;
  int line_no = 0;

  auto flush = [&] {
    if (!current) return;
    current->window = parse_window_text(block);
    if (current->window.empty()) {
      throw ParseError("block ending at line " + std::to_string(line_no) + " has no dialog");
    }
    bank.items.push_back(std::move(*current));
    current.reset();
    block.clear();
  };

  while (std::getline(in, line)) {
    ++line_no;
    auto t = trim(line);
    if (t.empty()) {
      flush();
      continue;
    }
    if (t.front() == '#') {
      auto body = trim(t.substr(1));
      if (body.substr(0, 8) == "version:") bank.version = std::stoi(std::string(trim(body.substr(8))));
      continue;
    }
    if (t.front() == '[') {
      flush();
      if (t.back() != ']') throw ParseError("unterminated label at line " + std::to_string(line_no));
      auto name = upper(trim(t.substr(1, t.size() - 2)));
      std::optional<StateLabel> label;
      for (auto l : {StateLabel::OnGoing, StateLabel::Deal, StateLabel::NoDeal}) {
        if (name == to_string(l)) label = l;
      }
      if (!label) {
        throw ParseError("line " + std::to_string(line_no) + ": label '" + name +
                         "' is not ON-GOING, DEAL or NO DEAL");
      }
      current = LabeledWindow{{}, *label};
      continue;
    }
    if (!current) throw ParseError("line " + std::to_string(line_no) + ": dialog outside a block");
    block += std::string(t) + "\n";
  }
  flush();
  return bank;
}

std::string format_labeled_windows(std::span<const LabeledWindow> items) {
  std::string out;
  for (const auto& item : items) {
    out += "[" + std::string(to_string(item.label)) + "]\n";
    out += window_text(item.window) + "\n\n";
  }
  return out;
}

std::string format_demo_bank(const DemoBank& bank) {
  return "# version: " + std::to_string(bank.version) + "\n\n" + format_labeled_windows(bank.items);
}

DemoBank load_demo_bank(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_demo_bank(ss.str());
}

void save_demo_bank(const std::string& path, const DemoBank& bank) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << format_demo_bank(bank);
}

ChatRequest render_moderator_request(const DemoBank& bank, std::span<const Utterance> window,
                                     std::string_view instructions, double temperature) {
  ChatRequest req;
  req.system_prompt = std::string(instructions);
  req.temperature = temperature;
  for (const auto& demo : bank.items) {
    req.messages.push_back({ChatTag::User, std::string(kDialogHeader) + window_text(demo.window)});
    req.messages.push_back({ChatTag::Assistant, std::string(to_string(demo.label))});
  }
  req.messages.push_back({ChatTag::User, std::string(kDialogHeader) + window_text(window)});
  return req;
}

GameState classify_window(std::span<const Utterance> window, const DemoBank& bank,
                          ChatBackend& backend, std::string_view instructions, double temperature,
                          std::string_view currency_symbol) {
  if (window.empty()) throw ProtocolError("moderator window is empty");
  if (bank.items.empty()) throw ConfigError("moderator demo bank is empty");

  auto reply = backend.complete(render_moderator_request(bank, window, instructions, temperature));
  auto label = parse_label(reply.text);
  if (!label) {
    spdlog::warn("moderator reply has no state label, treating as ON-GOING: {}", reply.text);
    return OnGoing{};
  }
  switch (*label) {
    case StateLabel::Deal: return Deal{extract_price(window, currency_symbol)};
    case StateLabel::NoDeal: return NoDeal{NoDealReason::ModeratorClassified};
    case StateLabel::OnGoing: break;
  }
  return OnGoing{};
}

FewShotModerator::FewShotModerator(DemoBank bank, ChatBackend& backend, std::size_t window_limit,
                                   std::string instructions, double temperature,
                                   std::string currency_symbol)
    : bank_(std::move(bank)),
      backend_(backend),
      window_limit_(window_limit),
      instructions_(std::move(instructions)),
      temperature_(temperature),
      currency_(std::move(currency_symbol)) {
  bank_.validate();
}

GameState FewShotModerator::classify(std::span<const Utterance> window) {
  if (window.size() > window_limit_) {
    throw ProtocolError("moderator received " + std::to_string(window.size()) +
                        " utterances, limit is " + std::to_string(window_limit_));
  }
  return classify_window(window, bank_, backend_, instructions_, temperature_, currency_);
}

ChatResponse NearestDemoBackend::complete(const ChatRequest& request) {
  const auto& msgs = request.messages;
  if (msgs.empty()) throw ProtocolError("empty moderator request");
  auto query = word_set(strip_dialog_header(msgs.back().text));

  std::string best_label(to_string(StateLabel::OnGoing));
  double best = -1.0;
  for (std::size_t i = 0; i + 1 < msgs.size(); ++i) {
    if (msgs[i].tag != ChatTag::User || msgs[i + 1].tag != ChatTag::Assistant) continue;
    auto score = jaccard(query, word_set(strip_dialog_header(msgs[i].text)));
    if (score > best) {
      best = score;
      best_label = msgs[i + 1].text;
    }
  }
  return {best_label, count_chars(best_label)};
}

ChatResponse OracleChatBackend::complete(const ChatRequest& request) {
  if (request.messages.empty()) throw ProtocolError("empty moderator request");
  auto window = parse_window_text(strip_dialog_header(request.messages.back().text));
  std::string label(to_string(label_of(oracle_classify(window, currency_))));
  return {label, count_chars(label)};
}

EvaluationReport evaluate_moderator(Moderator& moderator, std::span<const LabeledWindow> corpus) {
  EvaluationReport report;
  for (const auto& item : corpus) {
    ++report.total;
    if (label_of(moderator.classify(item.window)) == item.label) {
      ++report.correct;
    } else {
      report.misclassified.push_back(item);
    }
  }
  return report;
}

}  // namespace bargain
