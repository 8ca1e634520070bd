#include "bargain/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace bargain {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::string_view section, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(section) + " must be an object");
  std::set<std::string_view> ok(allowed);
  for (const auto& [key, _] : j.items()) {
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + std::string(section));
  }
}

Money to_money(const json& v, std::string_view what) {
  if (v.is_number()) return Money::from_cents(std::llround(v.get<double>() * 100.0));
  if (v.is_string()) {
    if (auto m = Money::parse(v.get<std::string>())) return *m;
  }
  throw ConfigError("bad amount for " + std::string(what) + ": " + v.dump());
}

// "12.00" or ["10.00", "14.00"].
std::pair<Money, Money> to_range(const json& v, std::string_view what) {
  if (v.is_array()) {
    if (v.size() != 2) throw ConfigError(std::string(what) + " range needs two bounds");
    return {to_money(v[0], what), to_money(v[1], what)};
  }
  auto m = to_money(v, what);
  return {m, m};
}

ScriptedPolicySpec parse_policy(const json& j, ScriptedPolicySpec spec, std::string_view name) {
  check_keys(j, name, {"opening", "reserve", "concession", "reserve_shift_per_feedback"});
  if (j.contains("opening")) spec.opening = to_money(j["opening"], "opening");
  if (j.contains("reserve")) std::tie(spec.reserve_min, spec.reserve_max) = to_range(j["reserve"], "reserve");
  if (j.contains("concession")) {
    std::tie(spec.concession_min, spec.concession_max) = to_range(j["concession"], "concession");
  }
  if (j.contains("reserve_shift_per_feedback")) {
    spec.reserve_shift_per_feedback = to_money(j["reserve_shift_per_feedback"], "reserve shift");
  }
  return spec;
}

std::optional<EngineFamily> family_named(std::string_view name) {
  for (auto f : {EngineFamily::Gpt, EngineFamily::Claude, EngineFamily::Cohere, EngineFamily::J2}) {
    if (to_string(f) == name) return f;
  }
  return std::nullopt;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<std::string> load_human_pool(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> pool;
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r");
    pool.push_back(line.substr(b, e - b + 1));
  }
  return pool;
}

RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  auto& s = cfg.session;
  auto& b = cfg.backends;

  try {
    check_keys(root, "config",
               {"game", "session", "engines", "prompts", "scripted", "providers", "retry", "moderator"});

    if (root.contains("game")) {
      const auto& g = root["game"];
      check_keys(g, "game", {"product", "floor", "ceiling", "currency", "seller_opening",
                             "buyer_opening", "max_exchanges", "moderator_window"});
      auto& game = s.game;
      game.product_name = g.value("product", game.product_name);
      if (g.contains("floor")) game.corridor.floor = to_money(g["floor"], "floor");
      if (g.contains("ceiling")) game.corridor.ceiling = to_money(g["ceiling"], "ceiling");
      game.corridor.currency_symbol = g.value("currency", game.corridor.currency_symbol);
      game.seller_opening = g.value("seller_opening", game.seller_opening);
      game.buyer_opening = g.value("buyer_opening", game.buyer_opening);
      game.max_exchanges = g.value("max_exchanges", game.max_exchanges);
      game.moderator_window = g.value("moderator_window", game.moderator_window);
    }

    if (root.contains("session")) {
      const auto& j = root["session"];
      check_keys(j, "session", {"improved_role", "rounds", "runs", "seed", "parallelism", "feedback",
                                "human_pool", "human_pool_file", "sample_size"});
      if (j.contains("improved_role")) {
        auto role = parse_role(j["improved_role"].get<std::string>());
        if (!role || (*role != Role::Seller && *role != Role::Buyer)) {
          throw ConfigError("improved_role must be seller or buyer");
        }
        s.improved_role = *role;
      }
      s.rounds = j.value("rounds", s.rounds);
      s.runs = j.value("runs", s.runs);
      s.seed = j.value("seed", s.seed);
      s.parallelism = j.value("parallelism", s.parallelism);
      if (j.contains("feedback")) {
        auto kind = parse_feedback_kind(j["feedback"].get<std::string>());
        if (!kind) throw ConfigError("feedback must be ai_critic, human_pool or none");
        s.feedback.kind = *kind;
      }
      if (j.contains("human_pool")) s.feedback.pool = j["human_pool"].get<std::vector<std::string>>();
      if (j.contains("human_pool_file")) {
        s.feedback.pool = load_human_pool(base_dir / j["human_pool_file"].get<std::string>());
      }
      s.feedback.sample_size = j.value("sample_size", s.feedback.sample_size);
    }

    if (root.contains("engines")) {
      const auto& j = root["engines"];
      check_keys(j, "engines", {"improved", "rival", "critic", "moderator"});
      if (j.contains("improved")) s.improved_engine = EngineId::parse(j["improved"].get<std::string>());
      if (j.contains("rival")) s.rival_engine = EngineId::parse(j["rival"].get<std::string>());
      if (j.contains("critic")) s.critic_engine_override = EngineId::parse(j["critic"].get<std::string>());
      if (j.contains("moderator")) s.moderator_engine = EngineId::parse(j["moderator"].get<std::string>());
    }

    if (root.contains("prompts")) {
      const auto& j = root["prompts"];
      check_keys(j, "prompts", {"seller_persona", "buyer_persona", "critic", "moderator"});
      s.seller_persona = j.value("seller_persona", s.seller_persona);
      s.buyer_persona = j.value("buyer_persona", s.buyer_persona);
      s.critic_prompt = j.value("critic", s.critic_prompt);
      b.moderator_prompt = j.value("moderator", b.moderator_prompt);
    }

    if (root.contains("scripted")) {
      const auto& j = root["scripted"];
      check_keys(j, "scripted", {"seller", "buyer", "critic_suggestions"});
      if (j.contains("seller")) b.seller = parse_policy(j["seller"], b.seller, "scripted.seller");
      if (j.contains("buyer")) b.buyer = parse_policy(j["buyer"], b.buyer, "scripted.buyer");
      if (j.contains("critic_suggestions")) {
        b.scripted_critic_suggestions = j["critic_suggestions"].get<std::vector<std::string>>();
        if (b.scripted_critic_suggestions.size() != 3) {
          throw ConfigError("scripted.critic_suggestions must hold exactly 3 entries");
        }
      }
    }

    if (root.contains("providers")) {
      for (const auto& [name, p] : root["providers"].items()) {
        auto family = family_named(name);
        if (!family) throw ConfigError("unknown provider family '" + name + "'");
        check_keys(p, "providers." + name, {"base_url", "requests_per_minute"});
        auto& settings = b.providers[*family];
        settings.base_url = p.value("base_url", settings.base_url);
        settings.requests_per_minute = p.value("requests_per_minute", settings.requests_per_minute);
      }
    }

    if (root.contains("retry")) {
      const auto& j = root["retry"];
      check_keys(j, "retry", {"max_attempts", "base_delay_ms"});
      b.retry.max_attempts = j.value("max_attempts", b.retry.max_attempts);
      b.retry.base_delay = std::chrono::milliseconds(j.value("base_delay_ms", b.retry.base_delay.count()));
    }

    if (root.contains("moderator")) {
      const auto& j = root["moderator"];
      check_keys(j, "moderator", {"demo_bank"});
      if (j.contains("demo_bank")) {
        try {
          b.demo_bank = load_demo_bank((base_dir / j["demo_bank"].get<std::string>()).string());
        } catch (const ParseError& e) {
          throw ConfigError(std::string("demo bank: ") + e.what());
        }
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config has a wrongly typed value: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace bargain
