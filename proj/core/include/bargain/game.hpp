#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bargain/errors.hpp"
#include "bargain/money.hpp"

namespace bargain {

enum class Role { Seller, Buyer, Critic, Moderator };

std::string_view to_string(Role role);
std::optional<Role> parse_role(std::string_view text);
Role counterpart(Role role);

struct PriceCorridor {
  Money floor = Money::from_units(10);
  Money ceiling = Money::from_units(20);
  std::string currency_symbol = "$";

  /// Throws ConfigError unless 0 < floor < ceiling.
  void validate() const;
  bool contains(Money price) const { return floor <= price && price <= ceiling; }
  /// "$20" for whole amounts, "$16.50" otherwise.
  std::string quote(Money price) const;

  bool operator==(const PriceCorridor&) const = default;
};

struct Utterance {
  Role speaker = Role::Seller;
  std::string text;
  int round_index = 1;
  int turn_index = 0;
  std::size_t char_length = 0;

  static Utterance make(Role speaker, std::string text, int round_index, int turn_index);

  bool operator==(const Utterance&) const = default;
};

/// Number of UTF-8 code points in `text`.
std::size_t count_chars(std::string_view text);

struct OnGoing {
  bool operator==(const OnGoing&) const = default;
};

struct Deal {
  /// Absent only when a free-text deal carried no parseable amount.
  std::optional<Money> price;
  bool operator==(const Deal&) const = default;
};

enum class NoDealReason { ModeratorClassified, TurnCapReached };

struct NoDeal {
  NoDealReason reason = NoDealReason::ModeratorClassified;
  bool operator==(const NoDeal&) const = default;
};

using GameState = std::variant<OnGoing, Deal, NoDeal>;

bool is_terminal(const GameState& state);
bool is_deal(const GameState& state);
std::optional<Money> deal_price(const GameState& state);
/// "ON-GOING", "DEAL $16.00", "NO DEAL (turn cap)" ...
std::string describe(const GameState& state, std::string_view currency_symbol = "$");

inline constexpr std::string_view kProductPlaceholder = "{product}";
inline constexpr std::string_view kFloorPlaceholder = "{floor}";
inline constexpr std::string_view kCeilingPlaceholder = "{ceiling}";

struct GameConfig {
  PriceCorridor corridor;
  std::string product_name = "balloon";
  std::string seller_opening = "This is a good {product} and its price is {ceiling}.";
  std::string buyer_opening = "Would you consider selling it for {floor}?";
  int max_exchanges = 20;
  std::size_t moderator_window = 4;

  void validate() const;
  std::string render_seller_opening() const;
  std::string render_buyer_opening() const;

  bool operator==(const GameConfig&) const = default;
};

/// Substitutes {product}, {floor} and {ceiling} in `tmpl`.
std::string render_template(std::string_view tmpl, const GameConfig& config);

struct RoundFlags {
  bool out_of_corridor = false;
  bool price_missing = false;
  bool operator==(const RoundFlags&) const = default;
};

struct RoundRecord {
  int round_index = 1;
  std::vector<Utterance> transcript;
  GameState terminal_state;
  /// Exactly three suggestions when present.
  std::optional<std::vector<std::string>> feedback;
  Role improved_role = Role::Seller;
  RoundFlags flags;

  bool operator==(const RoundRecord&) const = default;
};

RoundFlags compute_flags(const GameState& state, const PriceCorridor& corridor);

/// A player backend. Receives the full current-game history and returns its next line.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string respond(std::span<const Utterance> history) = 0;
};

/// Maps a trailing window of the dialog to a game state.
class Moderator {
 public:
  virtual ~Moderator() = default;
  virtual GameState classify(std::span<const Utterance> window) = 0;
};

/// A backend failure that aborted a game, with everything said so far.
class GameAborted : public BackendError {
 public:
  GameAborted(const std::string& what, std::vector<Utterance> partial)
      : BackendError(what), partial_(std::move(partial)) {}
  const std::vector<Utterance>& partial_transcript() const { return partial_; }

 private:
  std::vector<Utterance> partial_;
};

/// Single-game state machine. Construction performs the hard-coded openers.
class Game {
 public:
  explicit Game(GameConfig config, int round_index = 1);

  const GameConfig& config() const { return config_; }
  const std::vector<Utterance>& transcript() const { return transcript_; }
  const GameState& state() const { return state_; }
  int round_index() const { return round_index_; }

  /// Utterances after the two openers.
  int exchanges() const { return static_cast<int>(transcript_.size()) - 2; }
  Role next_speaker() const;

  /// Appends `next` and applies the moderator verdict, or forces
  /// NoDeal(TurnCapReached) when the cap is hit with the game still open.
  const GameState& step(Utterance next, GameState verdict);

  /// The last `moderator_window` utterances of the transcript.
  std::span<const Utterance> window() const;

 private:
  GameConfig config_;
  int round_index_;
  std::vector<Utterance> transcript_;
  GameState state_;
};

Game open_game(const GameConfig& config, int round_index = 1);

/// Drives alternating turns until a terminal state; feedback is left unset.
RoundRecord run_game(Agent& seller, Agent& buyer, Moderator& moderator, const GameConfig& config,
                     int round_index = 1, Role improved_role = Role::Seller);

}  // namespace bargain
