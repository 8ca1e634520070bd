#include "bargain/session.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <thread>

namespace bargain {

namespace {

std::string_view trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

// Offset of the enumeration marker for `n` ("3." or "3)") at or after `from`,
// or npos. Markers must start a line or follow whitespace and be followed by
// whitespace.
std::size_t find_marker(std::string_view text, int n, std::size_t from, std::size_t& marker_len) {
  auto num = std::to_string(n);
  for (auto pos = text.find(num, from); pos != std::string_view::npos;
       pos = text.find(num, pos + 1)) {
    auto after = pos + num.size();
    if (pos > 0 && !std::isspace(static_cast<unsigned char>(text[pos - 1]))) continue;
    if (after + 1 >= text.size()) continue;
    if (text[after] != '.' && text[after] != ')') continue;
    if (!std::isspace(static_cast<unsigned char>(text[after + 1]))) continue;
    marker_len = num.size() + 1;
    return pos;
  }
  return std::string_view::npos;
}

}  // namespace

std::string_view to_string(FeedbackKind kind) {
  switch (kind) {
    case FeedbackKind::None: return "none";
    case FeedbackKind::AiCritic: return "ai_critic";
    case FeedbackKind::HumanPool: return "human_pool";
  }
  return "none";
}

std::optional<FeedbackKind> parse_feedback_kind(std::string_view text) {
  for (auto k : {FeedbackKind::None, FeedbackKind::AiCritic, FeedbackKind::HumanPool}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::string SessionConfig::persona_for(Role role) const {
  return render_template(role == Role::Seller ? seller_persona : buyer_persona, game);
}

void SessionConfig::validate() const {
  game.validate();
  if (improved_role != Role::Seller && improved_role != Role::Buyer) {
    throw ConfigError("improved role must be seller or buyer");
  }
  if (rounds <= 0) throw ConfigError("rounds must be positive");
  if (runs <= 0) throw ConfigError("runs must be positive");
  if (parallelism == 0) throw ConfigError("parallelism must be positive");
  if (feedback.kind == FeedbackKind::HumanPool) {
    // Records carry exactly three suggestions, whatever produced them.
    if (feedback.sample_size != 3) throw ConfigError("human feedback sample size must be 3");
    if (feedback.pool.size() < feedback.sample_size) {
      throw ConfigError("human feedback pool has " + std::to_string(feedback.pool.size()) +
                        " suggestions, need at least " + std::to_string(feedback.sample_size));
    }
  }
}

std::uint64_t run_seed(std::uint64_t session_seed, std::size_t run_index) {
  // splitmix64 finaliser over the pair
  std::uint64_t z = session_seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(run_index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<std::string> human_pool_feedback(std::span<const std::string> pool,
                                             std::size_t sample_size, std::mt19937_64& rng) {
  if (sample_size == 0 || pool.size() < sample_size) {
    throw ConfigError("cannot sample " + std::to_string(sample_size) + " suggestions from a pool of " +
                      std::to_string(pool.size()));
  }
  std::vector<std::string> out;
  out.reserve(sample_size);
  std::sample(pool.begin(), pool.end(), std::back_inserter(out), sample_size, rng);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

std::vector<std::string> parse_suggestions(std::string_view text) {
  std::vector<std::size_t> starts;
  std::vector<std::size_t> bodies;
  std::size_t from = 0;
  for (int n = 1;; ++n) {
    std::size_t len = 0;
    auto pos = find_marker(text, n, from, len);
    if (pos == std::string_view::npos) break;
    starts.push_back(pos);
    bodies.push_back(pos + len);
    from = pos + len;
  }
  if (starts.size() != 3) {
    throw FeedbackFormatError("expected 3 enumerated suggestions, found " +
                                  std::to_string(starts.size()),
                              std::string(text));
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < 3; ++i) {
    auto end = i + 1 < 3 ? starts[i + 1] : text.size();
    auto item = trim(text.substr(bodies[i], end - bodies[i]));
    if (item.empty()) throw FeedbackFormatError("suggestion " + std::to_string(i + 1) + " is empty",
                                                std::string(text));
    out.emplace_back(item);
  }
  return out;
}

ChatRequest render_critic_request(Role improved_role, const GameConfig& game,
                                  std::span<const PriorRound> history,
                                  std::string_view critic_template, double temperature) {
  ChatRequest req;
  req.temperature = temperature;
  req.system_prompt = render_template(critic_template, game);
  replace_all(req.system_prompt, "{role}", to_string(improved_role));
  std::string body;
  for (const auto& block : history) body += render_prior_block(block) + "\n";
  body += "Provide three suggestions for the " + std::string(to_string(improved_role)) +
          " for the next round.";
  req.messages.push_back({ChatTag::User, std::move(body)});
  return req;
}

std::vector<std::string> critic_feedback(std::span<const PriorRound> history, ChatBackend& critic,
                                         Role improved_role, const GameConfig& game,
                                         std::string_view critic_template, double temperature) {
  if (history.empty()) throw StateError("the critic needs at least one completed round");
  auto reply = critic.complete(
      render_critic_request(improved_role, game, history, critic_template, temperature));
  return parse_suggestions(reply.text);
}

void OrderedSink::on_run(const RunResult& run) {
  std::lock_guard lock(mu_);
  pending_.emplace(run.run_index, run);
  for (auto it = pending_.find(next_); it != pending_.end(); it = pending_.find(next_)) {
    inner_.on_run(it->second);
    pending_.erase(it);
    ++next_;
  }
}

RunResult run_single(const SessionConfig& config, BackendFactory& factory, std::size_t run_index) {
  RunResult result;
  result.run_index = run_index;
  result.seed = run_seed(config.seed, run_index);
  std::mt19937_64 rng(result.seed);

  auto backends = factory.make_run(run_index, result.seed);
  const auto improved_role = config.improved_role;
  const auto rival_role = config.rival_role();
  const auto critic_temperature = default_temperature(config.critic_engine().family);

  std::vector<PriorRound> blocks;
  try {
    for (int k = 1; k <= config.rounds; ++k) {
      PlayerContext improved_ctx{config.persona_for(improved_role), blocks};
      PlayerContext rival_ctx{config.persona_for(rival_role), {}};
      auto improved = backends->make_player(improved_role, true, improved_ctx);
      auto rival = backends->make_player(rival_role, false, rival_ctx);
      auto& seller = improved_role == Role::Seller ? *improved : *rival;
      auto& buyer = improved_role == Role::Seller ? *rival : *improved;

      auto record = run_game(seller, buyer, backends->moderator(), config.game, k, improved_role);
      blocks.push_back({k, record.transcript, record.terminal_state, {}});

      if (k < config.rounds && config.feedback.kind != FeedbackKind::None) {
        std::vector<std::string> feedback;
        if (config.feedback.kind == FeedbackKind::AiCritic) {
          feedback = critic_feedback(blocks, backends->critic(), improved_role, config.game,
                                     config.critic_prompt, critic_temperature);
        } else {
          feedback = human_pool_feedback(config.feedback.pool, config.feedback.sample_size, rng);
        }
        blocks.back().feedback = feedback;
        record.feedback = std::move(feedback);
      }
      result.records.push_back(std::move(record));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    result.abort_reason = e.what();
  }
  return result;
}

std::vector<RunResult> run_session(const SessionConfig& config, BackendFactory& factory,
                                   RecordSink* sink) {
  config.validate();
  auto runs = static_cast<std::size_t>(config.runs);
  std::vector<RunResult> results(runs);
  std::optional<OrderedSink> ordered;
  if (sink) ordered.emplace(*sink);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (auto i = next.fetch_add(1); i < runs; i = next.fetch_add(1)) {
      try {
        results[i] = run_single(config, factory, i);
        if (ordered) ordered->on_run(results[i]);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = runs;
      }
    }
  };

  auto workers = std::min(config.parallelism, runs);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace bargain
