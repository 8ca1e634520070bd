#include "bargain/scripted.hpp"

#include <algorithm>

#include "bargain/price.hpp"

namespace bargain {

void ConcessionPolicy::validate() const {
  if (concession.cents() <= 0) throw ConfigError("concession must be positive");
  if (opening.cents() <= 0 || reserve.cents() <= 0) {
    throw ConfigError("policy prices must be positive");
  }
  if (direction == Direction::Decreasing && opening < reserve) {
    throw ConfigError("seller opening " + opening.to_string() + " is below reserve " +
                      reserve.to_string());
  }
  if (direction == Direction::Increasing && opening > reserve) {
    throw ConfigError("buyer opening " + opening.to_string() + " is above reserve " +
                      reserve.to_string());
  }
}

Money ConcessionPolicy::quote(int exchange) const {
  if (direction == Direction::Decreasing) {
    return std::max(reserve, opening - concession * exchange);
  }
  return std::min(reserve, opening + concession * exchange);
}

ConcessionPolicy ConcessionPolicy::shifted(int steps, Money shift) const {
  auto out = *this;
  auto delta = shift * steps;
  if (direction == Direction::Decreasing) {
    out.reserve = std::min(opening, reserve + delta);
  } else {
    out.reserve = std::max(opening, reserve - delta);
  }
  return out;
}

std::string accept_sentence(Money price, std::string_view currency_symbol) {
  return "I accept your offer of " + std::string(currency_symbol) + price.to_string() + ".";
}

std::string counter_sentence(Money price, std::string_view currency_symbol) {
  return "How about " + std::string(currency_symbol) + price.to_string() + "?";
}

std::string scripted_respond(const ConcessionPolicy& policy, Role role,
                             std::span<const Utterance> history,
                             std::string_view currency_symbol) {
  if (history.empty() || history.back().speaker == role) {
    throw ProtocolError("scripted " + std::string(to_string(role)) +
                        " must reply to its counterparty");
  }
  auto standing = extract_price(history.back().text, currency_symbol);
  if (!standing) {
    throw ProtocolError("no price in counterparty utterance: \"" + history.back().text + "\"");
  }

  auto own_replies = std::count_if(history.begin(), history.end(), [&](const Utterance& u) {
    return u.speaker == role && u.turn_index >= 2;
  });
  auto next = policy.quote(static_cast<int>(own_replies) + 1);

  bool acceptable = policy.direction == ConcessionPolicy::Direction::Decreasing
                        ? *standing >= next
                        : *standing <= next;
  return acceptable ? accept_sentence(*standing, currency_symbol)
                    : counter_sentence(next, currency_symbol);
}

ScriptedAgent::ScriptedAgent(Role role, ConcessionPolicy policy, std::string currency_symbol)
    : role_(role), policy_(policy), currency_(std::move(currency_symbol)) {
  policy_.validate();
}

std::string ScriptedAgent::respond(std::span<const Utterance> history) {
  return scripted_respond(policy_, role_, history, currency_);
}

ReplayCursor::ReplayCursor(std::vector<Utterance> transcript) {
  for (auto& u : transcript) {
    if (u.turn_index >= 2) stored_.push_back(std::move(u));
  }
}

std::string ReplayCursor::next(Role requester) {
  if (exhausted()) throw ReplayError("replay transcript exhausted");
  const auto& u = stored_[pos_];
  if (u.speaker != requester) {
    throw ReplayError("replay expected " + std::string(to_string(u.speaker)) + " at turn " +
                      std::to_string(u.turn_index) + ", " + std::string(to_string(requester)) +
                      " asked");
  }
  ++pos_;
  return u.text;
}

std::string replay_respond(ReplayCursor& cursor, Role role, std::span<const Utterance>) {
  return cursor.next(role);
}

ReplayAgent::ReplayAgent(Role role, std::shared_ptr<ReplayCursor> cursor)
    : role_(role), cursor_(std::move(cursor)) {}

std::string ReplayAgent::respond(std::span<const Utterance> history) {
  return replay_respond(*cursor_, role_, history);
}

}  // namespace bargain
