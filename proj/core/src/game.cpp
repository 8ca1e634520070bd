#include "bargain/game.hpp"

#include <algorithm>
#include <utility>

namespace bargain {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::Seller: return "seller";
    case Role::Buyer: return "buyer";
    case Role::Critic: return "critic";
    case Role::Moderator: return "moderator";
  }
  return "unknown";
}

std::optional<Role> parse_role(std::string_view text) {
  for (auto r : {Role::Seller, Role::Buyer, Role::Critic, Role::Moderator}) {
    if (to_string(r) == text) return r;
  }
  return std::nullopt;
}

Role counterpart(Role role) {
  if (role == Role::Seller) return Role::Buyer;
  if (role == Role::Buyer) return Role::Seller;
  throw ProtocolError("only seller and buyer have a counterpart");
}

void PriceCorridor::validate() const {
  if (floor.cents() <= 0 || ceiling.cents() <= 0) {
    throw ConfigError("price corridor bounds must be strictly positive");
  }
  if (!(floor < ceiling)) {
    throw ConfigError("price corridor floor " + floor.to_string() + " must be below ceiling " +
                      ceiling.to_string());
  }
}

std::string PriceCorridor::quote(Money price) const {
  return currency_symbol + price.to_compact_string();
}

std::size_t count_chars(std::string_view text) {
  return static_cast<std::size_t>(std::count_if(text.begin(), text.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  }));
}

Utterance Utterance::make(Role speaker, std::string text, int round_index, int turn_index) {
  Utterance u;
  u.speaker = speaker;
  u.char_length = count_chars(text);
  u.text = std::move(text);
  u.round_index = round_index;
  u.turn_index = turn_index;
  return u;
}

bool is_terminal(const GameState& state) { return !std::holds_alternative<OnGoing>(state); }

bool is_deal(const GameState& state) { return std::holds_alternative<Deal>(state); }

std::optional<Money> deal_price(const GameState& state) {
  if (auto* d = std::get_if<Deal>(&state)) return d->price;
  return std::nullopt;
}

std::string describe(const GameState& state, std::string_view currency_symbol) {
  if (std::holds_alternative<OnGoing>(state)) return "ON-GOING";
  if (auto* d = std::get_if<Deal>(&state)) {
    return d->price ? "DEAL " + std::string(currency_symbol) + d->price->to_string()
                    : std::string("DEAL (no price)");
  }
  auto reason = std::get<NoDeal>(state).reason;
  return reason == NoDealReason::TurnCapReached ? "NO DEAL (turn cap)" : "NO DEAL";
}

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

}  // namespace

std::string render_template(std::string_view tmpl, const GameConfig& config) {
  std::string out(tmpl);
  replace_all(out, kProductPlaceholder, config.product_name);
  replace_all(out, kFloorPlaceholder, config.corridor.quote(config.corridor.floor));
  replace_all(out, kCeilingPlaceholder, config.corridor.quote(config.corridor.ceiling));
  return out;
}

void GameConfig::validate() const {
  corridor.validate();
  if (seller_opening.find(kCeilingPlaceholder) == std::string::npos) {
    throw ConfigError("seller opening template must contain {ceiling}");
  }
  if (buyer_opening.find(kFloorPlaceholder) == std::string::npos) {
    throw ConfigError("buyer opening template must contain {floor}");
  }
  if (product_name.empty()) throw ConfigError("product name must not be empty");
  if (max_exchanges <= 0) throw ConfigError("max_exchanges must be positive");
  if (moderator_window == 0) throw ConfigError("moderator_window must be positive");
}

std::string GameConfig::render_seller_opening() const { return render_template(seller_opening, *this); }

std::string GameConfig::render_buyer_opening() const { return render_template(buyer_opening, *this); }

RoundFlags compute_flags(const GameState& state, const PriceCorridor& corridor) {
  RoundFlags flags;
  if (auto* d = std::get_if<Deal>(&state)) {
    if (!d->price) {
      flags.price_missing = true;
    } else if (!corridor.contains(*d->price)) {
      flags.out_of_corridor = true;
    }
  }
  return flags;
}

Game::Game(GameConfig config, int round_index)
    : config_(std::move(config)), round_index_(round_index), state_(OnGoing{}) {
  config_.validate();
  transcript_.push_back(
      Utterance::make(Role::Seller, config_.render_seller_opening(), round_index_, 0));
  transcript_.push_back(
      Utterance::make(Role::Buyer, config_.render_buyer_opening(), round_index_, 1));
}

Role Game::next_speaker() const {
  return transcript_.size() % 2 == 0 ? Role::Seller : Role::Buyer;
}

const GameState& Game::step(Utterance next, GameState verdict) {
  if (is_terminal(state_)) {
    throw StateError("game already ended with " + describe(state_));
  }
  if (next.speaker != next_speaker()) {
    throw ProtocolError("expected " + std::string(to_string(next_speaker())) + " to speak, got " +
                        std::string(to_string(next.speaker)));
  }
  next.turn_index = static_cast<int>(transcript_.size());
  next.round_index = round_index_;
  next.char_length = count_chars(next.text);
  transcript_.push_back(std::move(next));

  if (!is_terminal(verdict) && exchanges() >= config_.max_exchanges) {
    state_ = NoDeal{NoDealReason::TurnCapReached};
  } else {
    state_ = std::move(verdict);
  }
  return state_;
}

std::span<const Utterance> Game::window() const {
  std::span<const Utterance> all(transcript_);
  auto n = std::min(all.size(), config_.moderator_window);
  return all.last(n);
}

Game open_game(const GameConfig& config, int round_index) { return Game(config, round_index); }

RoundRecord run_game(Agent& seller, Agent& buyer, Moderator& moderator, const GameConfig& config,
                     int round_index, Role improved_role) {
  Game game(config, round_index);
  std::vector<Utterance> pending;
  while (!is_terminal(game.state())) {
    auto speaker = game.next_speaker();
    auto& agent = speaker == Role::Seller ? seller : buyer;

    std::string text;
    try {
      text = agent.respond(game.transcript());
    } catch (const BackendError& e) {
      throw GameAborted(e.what(), game.transcript());
    }

    pending.assign(game.transcript().begin(), game.transcript().end());
    pending.push_back(Utterance::make(speaker, text, round_index,
                                      static_cast<int>(game.transcript().size())));
    std::span<const Utterance> view(pending);
    GameState verdict;
    try {
      verdict = moderator.classify(view.last(std::min(view.size(), config.moderator_window)));
    } catch (const BackendError& e) {
      throw GameAborted(e.what(), pending);
    }
    game.step(std::move(pending.back()), std::move(verdict));
  }

  RoundRecord record;
  record.round_index = round_index;
  record.transcript = game.transcript();
  record.terminal_state = game.state();
  record.improved_role = improved_role;
  record.flags = compute_flags(record.terminal_state, config.corridor);
  return record;
}

}  // namespace bargain
