#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bargain/chat.hpp"
#include "bargain/game.hpp"

namespace bargain {

enum class StateLabel { OnGoing, Deal, NoDeal };

std::string_view to_string(StateLabel label);
std::optional<StateLabel> parse_label(std::string_view text);
StateLabel label_of(const GameState& state);

/// Exact classifier for transcripts made of the scripted protocol sentences.
/// Anything it does not recognise is ON-GOING.
GameState oracle_classify(std::span<const Utterance> window, std::string_view currency_symbol = "$");

class OracleModerator : public Moderator {
 public:
  explicit OracleModerator(std::string currency_symbol = "$") : currency_(std::move(currency_symbol)) {}
  GameState classify(std::span<const Utterance> window) override {
    return oracle_classify(window, currency_);
  }

 private:
  std::string currency_;
};

struct LabeledWindow {
  std::vector<Utterance> window;
  StateLabel label = StateLabel::OnGoing;

  bool operator==(const LabeledWindow&) const = default;
};

/// Window as "Seller: ...\nBuyer: ..." lines; also the deduplication key.
std::string window_text(std::span<const Utterance> window);
/// Inverse of window_text.
std::vector<Utterance> parse_window_text(std::string_view text);

struct DemoBank {
  std::vector<LabeledWindow> items;
  int version = 1;

  /// Throws ConsistencyError on a label outside the three states or when no
  /// NO DEAL demonstration exists.
  void validate() const;
};

/// Appends `misclassified` (already carrying corrected labels), skipping
/// windows already present with the same label. Bumps the version when
/// anything was added. A known window with a different label is a
/// ConsistencyError.
DemoBank harden_demo_bank(const DemoBank& bank, std::span<const LabeledWindow> misclassified);

/// Human-editable block format:
///   # version: 3
///   [NO DEAL]
///   Seller: How about $19.00?
///   Buyer: I'm walking away, no deal.
/// Blocks are separated by blank lines; one utterance per line.
DemoBank parse_demo_bank(std::string_view text);
std::string format_demo_bank(const DemoBank& bank);
std::string format_labeled_windows(std::span<const LabeledWindow> items);
DemoBank load_demo_bank(const std::string& path);
void save_demo_bank(const std::string& path, const DemoBank& bank);

inline constexpr std::string_view kDefaultModeratorPrompt =
    "You are the moderator of a bargaining game between a seller and a buyer. Read the most "
    "recent part of the dialog and decide the state of the negotiation. Answer with exactly one "
    "label: ON-GOING if they are still negotiating, DEAL if both have agreed on a price, NO DEAL "
    "if they have failed to reach a deal.";

/// Demonstrations as alternating user/assistant messages, then the window.
ChatRequest render_moderator_request(const DemoBank& bank, std::span<const Utterance> window,
                                     std::string_view instructions, double temperature);

/// Few-shot prompted classifier. Unparseable replies fall back to ON-GOING.
GameState classify_window(std::span<const Utterance> window, const DemoBank& bank,
                          ChatBackend& backend, std::string_view instructions = kDefaultModeratorPrompt,
                          double temperature = 1.0, std::string_view currency_symbol = "$");

class FewShotModerator : public Moderator {
 public:
  FewShotModerator(DemoBank bank, ChatBackend& backend, std::size_t window_limit = 4,
                   std::string instructions = std::string(kDefaultModeratorPrompt),
                   double temperature = 1.0, std::string currency_symbol = "$");

  GameState classify(std::span<const Utterance> window) override;

 private:
  DemoBank bank_;
  ChatBackend& backend_;
  std::size_t window_limit_;
  std::string instructions_;
  double temperature_;
  std::string currency_;
};

/// Offline stand-in for the moderator model: answers with the label of the
/// demonstration whose dialog shares the most words with the query.
class NearestDemoBackend : public ChatBackend {
 public:
  ChatResponse complete(const ChatRequest& request) override;
};

/// Runs oracle_classify on the dialog in the request's final message.
class OracleChatBackend : public ChatBackend {
 public:
  explicit OracleChatBackend(std::string currency_symbol = "$") : currency_(std::move(currency_symbol)) {}
  ChatResponse complete(const ChatRequest& request) override;

 private:
  std::string currency_;
};

struct EvaluationReport {
  std::size_t total = 0;
  std::size_t correct = 0;
  /// Items labelled wrongly, carrying the corpus (correct) label.
  std::vector<LabeledWindow> misclassified;

  double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / total; }
};

/// Accuracy is judged on the state kind only.
EvaluationReport evaluate_moderator(Moderator& moderator, std::span<const LabeledWindow> corpus);

}  // namespace bargain
