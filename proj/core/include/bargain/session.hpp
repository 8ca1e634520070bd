#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bargain/chat.hpp"
#include "bargain/game.hpp"

namespace bargain {

enum class FeedbackKind { None, AiCritic, HumanPool };

std::string_view to_string(FeedbackKind kind);
std::optional<FeedbackKind> parse_feedback_kind(std::string_view text);

struct FeedbackMode {
  FeedbackKind kind = FeedbackKind::AiCritic;
  /// HumanPool only.
  std::vector<std::string> pool;
  std::size_t sample_size = 3;
};

inline constexpr std::string_view kDefaultSellerPersona =
    "You are a seller negotiating the price of a {product} with a buyer. Your goal is to sell it "
    "at a higher price. Reply with one short message to the buyer at a time.";
inline constexpr std::string_view kDefaultBuyerPersona =
    "You are a buyer negotiating the price of a {product} with a seller. Your goal is to buy it "
    "at a lower price. Reply with one short message to the seller at a time.";
inline constexpr std::string_view kDefaultCriticPrompt =
    "You are a critic helping the {role} in a bargaining game about a {product}. Read the dialogs "
    "and the feedback from all previous rounds, then provide three suggestions to help the {role} "
    "get a more favorable price in the next game. Write them as a numbered list: 1. 2. 3.";

struct SessionConfig {
  Role improved_role = Role::Seller;
  EngineId improved_engine = EngineId::parse("gpt-3.5-turbo");
  EngineId rival_engine = EngineId::parse("gpt-3.5-turbo");
  /// Unset means "same engine as the improved player".
  std::optional<EngineId> critic_engine_override;
  EngineId moderator_engine = EngineId::parse("gpt-3.5-turbo");
  int rounds = 1;
  int runs = 1;
  FeedbackMode feedback;
  std::uint64_t seed = 0;
  std::size_t parallelism = 1;
  GameConfig game;
  std::string seller_persona = std::string(kDefaultSellerPersona);
  std::string buyer_persona = std::string(kDefaultBuyerPersona);
  std::string critic_prompt = std::string(kDefaultCriticPrompt);

  const EngineId& critic_engine() const {
    return critic_engine_override ? *critic_engine_override : improved_engine;
  }
  Role rival_role() const { return counterpart(improved_role); }
  std::string persona_for(Role role) const;

  void validate() const;
};

/// Seed of run `run_index`; independent of how many runs exist or run first.
std::uint64_t run_seed(std::uint64_t session_seed, std::size_t run_index);

/// Uniform draw without replacement, in random order.
std::vector<std::string> human_pool_feedback(std::span<const std::string> pool,
                                             std::size_t sample_size, std::mt19937_64& rng);

/// Exactly three "1." / "2)" style enumerated items, or FeedbackFormatError.
std::vector<std::string> parse_suggestions(std::string_view text);

ChatRequest render_critic_request(Role improved_role, const GameConfig& game,
                                  std::span<const PriorRound> history,
                                  std::string_view critic_template, double temperature);

/// Asks the critic for three suggestions given every past round and the
/// feedback already given.
std::vector<std::string> critic_feedback(std::span<const PriorRound> history, ChatBackend& critic,
                                         Role improved_role, const GameConfig& game,
                                         std::string_view critic_template = kDefaultCriticPrompt,
                                         double temperature = 1.0);

/// Players, critic and moderator for one run. Created once per run so that
/// per-run draws (scripted policies) stay fixed across its rounds.
class RunBackends {
 public:
  virtual ~RunBackends() = default;
  virtual std::unique_ptr<Agent> make_player(Role role, bool improved,
                                             const PlayerContext& context) = 0;
  virtual ChatBackend& critic() = 0;
  virtual Moderator& moderator() = 0;
};

class BackendFactory {
 public:
  virtual ~BackendFactory() = default;
  virtual std::unique_ptr<RunBackends> make_run(std::size_t run_index, std::uint64_t seed) = 0;
};

struct RunResult {
  std::size_t run_index = 0;
  std::uint64_t seed = 0;
  std::vector<RoundRecord> records;
  std::optional<std::string> abort_reason;

  bool operator==(const RunResult&) const = default;
};

/// Receives finished runs. May be called from several threads.
class RecordSink {
 public:
  virtual ~RecordSink() = default;
  virtual void on_run(const RunResult& run) = 0;
};

/// Forwards runs to `inner` one at a time in run-index order, whatever order
/// they finish in.
class OrderedSink : public RecordSink {
 public:
  explicit OrderedSink(RecordSink& inner) : inner_(inner) {}
  void on_run(const RunResult& run) override;

 private:
  RecordSink& inner_;
  std::mutex mu_;
  std::map<std::size_t, RunResult> pending_;
  std::size_t next_ = 0;
};

RunResult run_single(const SessionConfig& config, BackendFactory& factory, std::size_t run_index);

/// Plays every run, up to `parallelism` at once. Results are in run order.
std::vector<RunResult> run_session(const SessionConfig& config, BackendFactory& factory,
                                   RecordSink* sink = nullptr);

}  // namespace bargain
