#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bargain/moderator.hpp"
#include "bargain/remote.hpp"
#include "bargain/scripted.hpp"
#include "bargain/session.hpp"

namespace bargain {

/// Ranges a scripted player's policy is drawn from, once per run. Equal
/// bounds give a fixed policy.
struct ScriptedPolicySpec {
  /// Unset: the price the player's own opener quotes (corridor bound).
  std::optional<Money> opening;
  Money reserve_min;
  Money reserve_max;
  Money concession_min = Money::from_units(1);
  Money concession_max = Money::from_units(1);
  /// Reserve moved in the player's favour per feedback block it has received.
  Money reserve_shift_per_feedback;

  ConcessionPolicy draw(Role role, const PriceCorridor& corridor, std::mt19937_64& rng) const;
};

inline const std::vector<std::string> kScriptedCriticSuggestions = {
    "Stress how rare and special the {product} is before discussing price.",
    "Concede in smaller steps so the other side has to move first.",
    "Anchor every counter-offer close to your previous price."};

/// Critic stand-in that always returns the same three suggestions.
class ScriptedCriticBackend : public ChatBackend {
 public:
  explicit ScriptedCriticBackend(std::vector<std::string> suggestions = kScriptedCriticSuggestions)
      : suggestions_(std::move(suggestions)) {}
  ChatResponse complete(const ChatRequest& request) override;

 private:
  std::vector<std::string> suggestions_;
};

struct BackendSettings {
  ScriptedPolicySpec seller{std::nullopt, Money::from_units(12), Money::from_units(12),
                            Money::from_units(1), Money::from_units(1), Money{}};
  ScriptedPolicySpec buyer{std::nullopt, Money::from_units(18), Money::from_units(18),
                           Money::from_cents(150), Money::from_cents(150), Money{}};
  std::map<EngineFamily, ProviderSettings> providers;
  RetryPolicy retry;
  std::optional<DemoBank> demo_bank;
  std::string moderator_prompt = std::string(kDefaultModeratorPrompt);
  std::vector<std::string> scripted_critic_suggestions = kScriptedCriticSuggestions;
};

/// Builds players, critic and moderator from the engine names in a session
/// config: scripted/replay engines locally, everything else through
/// RemoteChatBackend over `transport`. Thread-safe.
class EngineBackendFactory : public BackendFactory {
 public:
  /// Throws ConfigError when a remote engine lacks an API key or the moderator
  /// needs a demo bank that was not given; nothing touches the network.
  EngineBackendFactory(const SessionConfig& config, BackendSettings settings, Transport& transport,
                       Clock& clock);

  std::unique_ptr<RunBackends> make_run(std::size_t run_index, std::uint64_t seed) override;

 private:
  friend class EngineRunBackends;
  SessionConfig config_;
  BackendSettings settings_;
  Transport& transport_;
  Clock& clock_;
  std::map<EngineFamily, std::shared_ptr<RateLimiter>> limiters_;
};

/// Fills API keys from the provider environment variables for every remote
/// engine used by `config`; keys already present are kept.
void resolve_api_keys(const SessionConfig& config, BackendSettings& settings);

}  // namespace bargain
