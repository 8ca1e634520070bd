#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "bargain/game.hpp"

namespace bargain {

/// Deterministic pricing schedule used in place of a language model.
struct ConcessionPolicy {
  enum class Direction { Decreasing, Increasing };

  Money opening;
  Money reserve;
  Money concession;
  Direction direction = Direction::Decreasing;

  static ConcessionPolicy seller(Money opening, Money reserve, Money concession) {
    return {opening, reserve, concession, Direction::Decreasing};
  }
  static ConcessionPolicy buyer(Money opening, Money reserve, Money concession) {
    return {opening, reserve, concession, Direction::Increasing};
  }

  void validate() const;

  /// Price quoted at the agent's t-th reply; t = 0 is the opener.
  Money quote(int exchange) const;

  /// Reserve moved `steps * shift` in the agent's favour (up for a seller,
  /// down for a buyer).
  ConcessionPolicy shifted(int steps, Money shift) const;

  bool operator==(const ConcessionPolicy&) const = default;
};

std::string accept_sentence(Money price, std::string_view currency_symbol = "$");
std::string counter_sentence(Money price, std::string_view currency_symbol = "$");
/// The one frozen refusal the oracle moderator recognises.
inline constexpr std::string_view kRefusalSentence = "I'm walking away, no deal.";

/// Accepts the counterparty's standing price if it is at least as good as the
/// policy's next quote, otherwise counters with that quote.
std::string scripted_respond(const ConcessionPolicy& policy, Role role,
                             std::span<const Utterance> history,
                             std::string_view currency_symbol = "$");

class ScriptedAgent : public Agent {
 public:
  ScriptedAgent(Role role, ConcessionPolicy policy, std::string currency_symbol = "$");
  std::string respond(std::span<const Utterance> history) override;
  const ConcessionPolicy& policy() const { return policy_; }

 private:
  Role role_;
  ConcessionPolicy policy_;
  std::string currency_;
};

/// Stored transcript shared by the two replay agents of one game.
class ReplayCursor {
 public:
  /// Openers (turn_index 0 and 1) are skipped; the game re-creates them.
  explicit ReplayCursor(std::vector<Utterance> transcript);

  std::string next(Role requester);
  bool exhausted() const { return pos_ >= stored_.size(); }

 private:
  std::vector<Utterance> stored_;
  std::size_t pos_ = 0;
};

std::string replay_respond(ReplayCursor& cursor, Role role, std::span<const Utterance> history);

class ReplayAgent : public Agent {
 public:
  ReplayAgent(Role role, std::shared_ptr<ReplayCursor> cursor);
  std::string respond(std::span<const Utterance> history) override;

 private:
  Role role_;
  std::shared_ptr<ReplayCursor> cursor_;
};

}  // namespace bargain
