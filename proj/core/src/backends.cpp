#include "bargain/backends.hpp"

#include <cstdlib>

namespace bargain {

namespace {

Money draw_between(Money lo, Money hi, std::mt19937_64& rng) {
  if (hi < lo) throw ConfigError("range " + lo.to_string() + ".." + hi.to_string() + " is empty");
  std::uniform_int_distribution<std::int64_t> dist(lo.cents(), hi.cents());
  return Money::from_cents(dist(rng));
}

std::vector<EngineId> engines_of(const SessionConfig& config) {
  return {config.improved_engine, config.rival_engine, config.critic_engine(),
          config.moderator_engine};
}

}  // namespace

ConcessionPolicy ScriptedPolicySpec::draw(Role role, const PriceCorridor& corridor,
                                          std::mt19937_64& rng) const {
  auto reserve = draw_between(reserve_min, reserve_max, rng);
  auto concession = draw_between(concession_min, concession_max, rng);
  auto policy = role == Role::Seller
                    ? ConcessionPolicy::seller(opening.value_or(corridor.ceiling), reserve, concession)
                    : ConcessionPolicy::buyer(opening.value_or(corridor.floor), reserve, concession);
  policy.validate();
  return policy;
}

ChatResponse ScriptedCriticBackend::complete(const ChatRequest&) {
  std::string text;
  for (std::size_t i = 0; i < suggestions_.size(); ++i) {
    text += std::to_string(i + 1) + ". " + suggestions_[i] + "\n";
  }
  return {text, count_chars(text)};
}

void resolve_api_keys(const SessionConfig& config, BackendSettings& settings) {
  for (const auto& engine : engines_of(config)) {
    if (!engine.is_remote()) continue;
    auto& provider = settings.providers[engine.family];
    if (!provider.api_key.empty()) continue;
    if (const char* key = std::getenv(api_key_env_var(engine.family).c_str())) {
      provider.api_key = key;
    }
  }
}

class EngineRunBackends : public RunBackends {
 public:
  EngineRunBackends(EngineBackendFactory& factory, std::uint64_t seed)
      : factory_(factory), seed_(seed), rng_(seed ^ 0x5DEECE66DULL) {
    const auto& cfg = factory_.config_;
    const auto& corridor = cfg.game.corridor;
    // Draw both policies up front so the draw order never depends on engines.
    seller_policy_ = factory_.settings_.seller.draw(Role::Seller, corridor, rng_);
    buyer_policy_ = factory_.settings_.buyer.draw(Role::Buyer, corridor, rng_);

    const auto& critic_engine = cfg.critic_engine();
    if (critic_engine.is_remote()) {
      critic_ = remote(critic_engine);
    } else {
      auto suggestions = factory_.settings_.scripted_critic_suggestions;
      for (auto& s : suggestions) s = render_template(s, cfg.game);
      critic_ = std::make_unique<ScriptedCriticBackend>(std::move(suggestions));
    }

    const auto& mod = cfg.moderator_engine;
    const auto window = cfg.game.moderator_window;
    const auto& currency = corridor.currency_symbol;
    if (mod.family == EngineFamily::Scripted && mod.model_name != "scripted:stub") {
      moderator_ = std::make_unique<OracleModerator>(currency);
    } else {
      moderator_backend_ = mod.is_remote() ? remote(mod) : std::make_unique<NearestDemoBackend>();
      moderator_ = std::make_unique<FewShotModerator>(
          *factory_.settings_.demo_bank, *moderator_backend_, window,
          factory_.settings_.moderator_prompt, default_temperature(mod.family), currency);
    }
  }

  std::unique_ptr<Agent> make_player(Role role, bool improved,
                                     const PlayerContext& context) override {
    const auto& cfg = factory_.config_;
    const auto& engine = improved ? cfg.improved_engine : cfg.rival_engine;
    if (engine.family == EngineFamily::Scripted) {
      const auto& spec = role == Role::Seller ? factory_.settings_.seller : factory_.settings_.buyer;
      const auto& base = role == Role::Seller ? seller_policy_ : buyer_policy_;
      int received = 0;
      for (const auto& b : context.blocks) received += b.feedback.empty() ? 0 : 1;
      return std::make_unique<ScriptedAgent>(
          role, base.shifted(received, spec.reserve_shift_per_feedback),
          cfg.game.corridor.currency_symbol);
    }
    player_backends_.push_back(remote(engine));
    return std::make_unique<ChatAgent>(role, *player_backends_.back(), context,
                                       default_temperature(engine.family));
  }

  ChatBackend& critic() override { return *critic_; }
  Moderator& moderator() override { return *moderator_; }

 private:
  std::unique_ptr<ChatBackend> remote(const EngineId& engine) {
    return std::make_unique<RemoteChatBackend>(
        engine, factory_.settings_.providers.at(engine.family), factory_.settings_.retry,
        factory_.transport_, factory_.clock_, factory_.limiters_.at(engine.family),
        seed_ + ++backend_count_);
  }

  EngineBackendFactory& factory_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  std::uint64_t backend_count_ = 0;
  ConcessionPolicy seller_policy_;
  ConcessionPolicy buyer_policy_;
  std::unique_ptr<ChatBackend> critic_;
  std::unique_ptr<ChatBackend> moderator_backend_;
  std::unique_ptr<Moderator> moderator_;
  std::vector<std::unique_ptr<ChatBackend>> player_backends_;
};

EngineBackendFactory::EngineBackendFactory(const SessionConfig& config, BackendSettings settings,
                                           Transport& transport, Clock& clock)
    : config_(config), settings_(std::move(settings)), transport_(transport), clock_(clock) {
  config_.validate();
  for (const auto& engine : {config_.improved_engine, config_.rival_engine}) {
    if (engine.family == EngineFamily::Replay) {
      throw ConfigError("replay engines are only available through the replay command");
    }
  }
  for (const auto& engine : engines_of(config_)) {
    if (!engine.is_remote()) continue;
    auto& provider = settings_.providers[engine.family];
    if (provider.api_key.empty()) {
      throw ConfigError("missing API key for " + engine.model_name + " (set " +
                        api_key_env_var(engine.family) + ")");
    }
    if (provider.base_url.empty()) provider.base_url = default_base_url(engine.family);
    if (!limiters_.count(engine.family)) {
      limiters_[engine.family] = std::make_shared<RateLimiter>(provider.requests_per_minute, clock_);
    }
  }
  const auto& mod = config_.moderator_engine;
  bool few_shot = mod.is_remote() || mod.model_name == "scripted:stub";
  if (few_shot) {
    if (!settings_.demo_bank) throw ConfigError("the few-shot moderator needs a demo bank");
    settings_.demo_bank->validate();
  }
  if (mod.family == EngineFamily::Replay) throw ConfigError("replay cannot moderate");
}

std::unique_ptr<RunBackends> EngineBackendFactory::make_run(std::size_t, std::uint64_t seed) {
  return std::make_unique<EngineRunBackends>(*this, seed);
}

}  // namespace bargain
