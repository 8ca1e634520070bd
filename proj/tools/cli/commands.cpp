#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "bargain/backends.hpp"
#include "bargain/config.hpp"
#include "bargain/metrics.hpp"
#include "bargain/moderator.hpp"
#include "bargain/scripted.hpp"
#include "bargain/transcript_log.hpp"

namespace bargain::cli {

namespace fs = std::filesystem;

namespace {

struct RunOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> parallelism;
  bool offline = false;
  std::string out_dir = ".";
  std::string log_name = "transcripts.jsonl";
  std::optional<std::string> engine_improved;
  std::optional<std::string> engine_rival;
  std::optional<std::string> engine_critic;
  std::optional<std::string> engine_moderator;
  std::optional<int> runs;
  std::optional<int> rounds;
  std::optional<std::string> improved_role;
  std::optional<std::string> feedback;
};

struct AnalyzeOptions {
  std::string log_path;
  std::optional<std::string> role;
  std::optional<std::string> floor;
  std::optional<std::string> ceiling;
  std::string out_dir = ".";
};

struct ReplayOptions {
  std::string log_path;
  std::size_t run_index = 0;
  int round_index = 1;
};

struct EvalOptions {
  std::string demo_bank_path;
  std::string corpus_path;
  std::string backend = "stub";
  std::string engine = "gpt-3.5-turbo";
  std::optional<std::string> base_url;
  double threshold = 0.90;
  bool harden = false;
  std::optional<std::string> harden_out;
  bool offline = false;
};

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string session_id_for(const SessionConfig& s) {
  std::ostringstream key;
  key << to_string(s.improved_role) << '|' << s.improved_engine.model_name << '|'
      << s.rival_engine.model_name << '|' << s.critic_engine().model_name << '|'
      << s.moderator_engine.model_name << '|' << s.rounds << '|' << s.runs << '|' << s.seed << '|'
      << to_string(s.feedback.kind) << '|' << s.game.product_name << '|'
      << s.game.corridor.floor.to_string() << '|' << s.game.corridor.ceiling.to_string() << '|'
      << s.game.max_exchanges << '|' << s.game.moderator_window;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(key.str())));
  return buf;
}

void print_summary(std::ostream& out, const SessionReport& report) {
  out << "round  records  deals  success  mean_price  delta  mean_chars(" << to_string(report.length_role)
      << ")\n";
  for (const auto& r : report.rounds) {
    auto delta = r.round_index == 1 ? std::optional<Money>{} : report.delta_from_first(r.round_index);
    out << r.round_index << "      " << r.records << "        " << r.deals << "      "
        << fixed(r.deal_success_rate, 4) << "   "
        << (r.mean_deal_price ? r.mean_deal_price->to_string() : "-") << "       "
        << (delta ? signed_string(*delta) : "-") << "  "
        << (r.mean_response_length_chars ? fixed(*r.mean_response_length_chars, 2) : "-") << "\n";
  }
  out << "runs: " << report.run_count << ", aborted: " << report.aborted_run_count << "\n";
}

void write_reports(const fs::path& dir, const SessionReport& report) {
  fs::create_directories(dir);
  std::ofstream summary(dir / "summary.csv");
  summary << "round,records,deals,deal_success_rate,mean_deal_price,delta_vs_round_1\n";
  for (const auto& r : report.rounds) {
    auto delta = r.round_index == 1 ? std::optional<Money>{} : report.delta_from_first(r.round_index);
    summary << r.round_index << ',' << r.records << ',' << r.deals << ','
            << fixed(r.deal_success_rate, 4) << ','
            << (r.mean_deal_price ? r.mean_deal_price->to_string() : "") << ','
            << (delta ? signed_string(*delta) : "") << '\n';
  }

  std::ofstream hist(dir / "histogram.csv");
  hist << "round,bin,lower,upper,count\n";
  for (const auto& r : report.rounds) {
    const auto& h = r.histogram;
    for (std::size_t b = 0; b < kHistogramBins; ++b) {
      hist << r.round_index << ',' << b << ',' << h.bin_lower(b).to_string() << ','
           << h.bin_upper(b).to_string() << ',' << h.bins[b] << '\n';
    }
    hist << r.round_index << ",below,,," << h.below << '\n';
    hist << r.round_index << ",above,,," << h.above << '\n';
    hist << r.round_index << ",unpriced,,," << h.unpriced << '\n';
  }

  std::ofstream lengths(dir / "response_length.csv");
  lengths << "round,role,utterances,mean_chars\n";
  for (const auto& r : report.rounds) {
    lengths << r.round_index << ',' << to_string(report.length_role) << ',' << r.response_utterances
            << ',' << (r.mean_response_length_chars ? fixed(*r.mean_response_length_chars, 2) : "")
            << '\n';
  }
}

class CliHttp {
 public:
  CliHttp(CliContext& ctx, bool offline) {
    if (offline) {
      owned_ = std::make_unique<OfflineTransport>();
    } else if (!ctx.transport) {
      owned_ = make_http_transport();
    }
    transport_ = owned_ ? owned_.get() : ctx.transport;
    clock_ = ctx.clock ? ctx.clock : &system_clock_;
  }
  Transport& transport() { return *transport_; }
  Clock& clock() { return *clock_; }

 private:
  std::unique_ptr<Transport> owned_;
  Transport* transport_ = nullptr;
  SystemClock system_clock_;
  Clock* clock_ = nullptr;
};

int cmd_run(const RunOptions& opt, CliContext& ctx) {
  RunConfig cfg;
  try {
    cfg = load_config(opt.config_path);
    auto& s = cfg.session;
    if (opt.seed) s.seed = *opt.seed;
    if (opt.parallelism) s.parallelism = *opt.parallelism;
    if (opt.runs) s.runs = *opt.runs;
    if (opt.rounds) s.rounds = *opt.rounds;
    if (opt.engine_improved) s.improved_engine = EngineId::parse(*opt.engine_improved);
    if (opt.engine_rival) s.rival_engine = EngineId::parse(*opt.engine_rival);
    if (opt.engine_critic) s.critic_engine_override = EngineId::parse(*opt.engine_critic);
    if (opt.engine_moderator) s.moderator_engine = EngineId::parse(*opt.engine_moderator);
    if (opt.improved_role) {
      auto role = parse_role(*opt.improved_role);
      if (!role) throw ConfigError("--improved-role must be seller or buyer");
      s.improved_role = *role;
    }
    if (opt.feedback) {
      auto kind = parse_feedback_kind(*opt.feedback);
      if (!kind) throw ConfigError("--feedback must be ai_critic, human_pool or none");
      s.feedback.kind = *kind;
    }
    s.validate();
    if (opt.offline) {
      for (const EngineId* e : std::initializer_list<const EngineId*>{&s.improved_engine, &s.rival_engine, &s.critic_engine(), &s.moderator_engine}) {
        if (e->is_remote()) throw ConfigError("--offline forbids remote engine " + e->model_name);
      }
    }
    resolve_api_keys(s, cfg.backends);
  } catch (const Error& e) {
    ctx.err << "config error: " << e.what() << "\n";
    return kUsage;
  }

  CliHttp http(ctx, opt.offline);
  std::unique_ptr<EngineBackendFactory> factory;
  try {
    factory = std::make_unique<EngineBackendFactory>(cfg.session, cfg.backends, http.transport(),
                                                     http.clock());
  } catch (const Error& e) {
    ctx.err << "config error: " << e.what() << "\n";
    return kUsage;
  }

  fs::path log_path = fs::path(opt.out_dir) / opt.log_name;
  std::error_code ec;
  fs::create_directories(opt.out_dir, ec);
  std::ofstream log(log_path, std::ios::trunc);
  if (!log) {
    ctx.err << "cannot write " << log_path.string() << "\n";
    return kUsage;
  }

  TranscriptWriter writer(log, session_id_for(cfg.session), cfg.session.game);
  std::vector<RunResult> results;
  try {
    results = run_session(cfg.session, *factory, &writer);
  } catch (const Error& e) {
    ctx.err << "session failed: " << e.what() << "\n";
    return kUsage;
  }

  auto report = aggregate(results, cfg.session.game.corridor, cfg.session.improved_role);
  print_summary(ctx.out, report);
  ctx.out << "log: " << log_path.string() << " (" << writer.records_written() << " records)\n";
  for (const auto& r : results) {
    if (r.abort_reason) ctx.err << "run " << r.run_index << " aborted: " << *r.abort_reason << "\n";
  }
  return report.aborted_run_count == 0 ? kOk : kFailure;
}

int cmd_analyze(const AnalyzeOptions& opt, CliContext& ctx) {
  try {
    auto log = load_log(opt.log_path);
    if (log.rounds.empty()) throw AnalysisError("log " + opt.log_path + " has no round records");

    auto corridor = log.rounds.front().game.corridor;
    for (const auto& r : log.rounds) {
      if (!(r.game.corridor == corridor)) {
        throw AnalysisError("log mixes price corridors (" + corridor.floor.to_string() + "-" +
                            corridor.ceiling.to_string() + " vs " + r.game.corridor.floor.to_string() +
                            "-" + r.game.corridor.ceiling.to_string() + ")");
      }
    }
    if (opt.floor) {
      auto m = Money::parse(*opt.floor);
      if (!m) throw ConfigError("bad --floor");
      corridor.floor = *m;
    }
    if (opt.ceiling) {
      auto m = Money::parse(*opt.ceiling);
      if (!m) throw ConfigError("bad --ceiling");
      corridor.ceiling = *m;
    }
    corridor.validate();

    auto role = log.rounds.front().record.improved_role;
    if (opt.role) {
      auto r = parse_role(*opt.role);
      if (!r || (*r != Role::Seller && *r != Role::Buyer)) throw ConfigError("--role must be seller or buyer");
      role = *r;
    }

    auto runs = log.runs();
    auto report = aggregate(runs, corridor, role);
    write_reports(opt.out_dir, report);
    print_summary(ctx.out, report);
    ctx.out << "wrote summary.csv, histogram.csv, response_length.csv to " << opt.out_dir << "\n";
    return kOk;
  } catch (const Error& e) {
    ctx.err << "analysis error: " << e.what() << "\n";
    return kUsage;
  }
}

int cmd_replay(const ReplayOptions& opt, CliContext& ctx) {
  TranscriptLog log;
  try {
    log = load_log(opt.log_path);
  } catch (const Error& e) {
    ctx.err << "replay: " << e.what() << "\n";
    return kUsage;
  }
  const auto* stored = log.find(opt.run_index, opt.round_index);
  if (!stored) {
    ctx.err << "replay: no record for run " << opt.run_index << " round " << opt.round_index << "\n";
    return kUsage;
  }

  const auto& original = stored->record;
  auto cursor = std::make_shared<ReplayCursor>(original.transcript);
  ReplayAgent seller(Role::Seller, cursor);
  ReplayAgent buyer(Role::Buyer, cursor);
  OracleModerator moderator(stored->game.corridor.currency_symbol);

  RoundRecord replayed;
  try {
    replayed = run_game(seller, buyer, moderator, stored->game, original.round_index,
                        original.improved_role);
    replayed.feedback = original.feedback;
  } catch (const Error& e) {
    ctx.err << "divergence: " << e.what() << "\n";
    return kFailure;
  }

  for (const auto& u : replayed.transcript) ctx.out << render_dialog_line(u) << "\n";
  ctx.out << "state: " << describe(replayed.terminal_state) << "\n";

  auto digests = transcript_digests(replayed.transcript);
  auto n = std::max(digests.size(), stored->digests.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= digests.size() || i >= stored->digests.size() || digests[i] != stored->digests[i]) {
      ctx.err << "divergence at turn " << i << ": ";
      if (i >= digests.size()) {
        ctx.err << "replay ended before stored utterance \"" << original.transcript[i].text << "\"";
      } else if (i < original.transcript.size()) {
        ctx.err << "stored \"" << original.transcript[i].text << "\" does not match its digest";
      } else {
        ctx.err << "replay produced an utterance the log does not have";
      }
      ctx.err << "\n";
      return kFailure;
    }
  }
  if (!(replayed == original)) {
    ctx.err << "divergence at turn " << (original.transcript.size() - 1) << ": stored state "
            << describe(original.terminal_state) << ", replayed " << describe(replayed.terminal_state)
            << "\n";
    return kFailure;
  }
  ctx.out << "replay matches stored record\n";
  return kOk;
}

int cmd_moderator_eval(const EvalOptions& opt, CliContext& ctx) {
  DemoBank bank;
  DemoBank corpus;
  try {
    bank = load_demo_bank(opt.demo_bank_path);
    corpus = load_demo_bank(opt.corpus_path);
  } catch (const Error& e) {
    ctx.err << "parse error: " << e.what() << "\n";
    return kUsage;
  }

  CliHttp http(ctx, opt.offline);
  std::unique_ptr<ChatBackend> backend;
  std::unique_ptr<Moderator> moderator;
  try {
    if (opt.backend == "oracle") {
      moderator = std::make_unique<OracleModerator>();
    } else {
      if (opt.backend == "stub") {
        backend = std::make_unique<NearestDemoBackend>();
      } else if (opt.backend == "remote") {
        if (opt.offline) throw ConfigError("--offline forbids the remote backend");
        auto engine = EngineId::parse(opt.engine);
        ProviderSettings provider;
        provider.base_url = opt.base_url.value_or(default_base_url(engine.family));
        if (const char* key = std::getenv(api_key_env_var(engine.family).c_str())) provider.api_key = key;
        backend = std::make_unique<RemoteChatBackend>(engine, provider, RetryPolicy{}, http.transport(),
                                                      http.clock());
      } else {
        throw ConfigError("--backend must be oracle, stub or remote");
      }
      std::size_t window = 0;
      for (const auto& item : corpus.items) window = std::max(window, item.window.size());
      moderator = std::make_unique<FewShotModerator>(bank, *backend, std::max<std::size_t>(window, 1));
    }
  } catch (const Error& e) {
    ctx.err << "config error: " << e.what() << "\n";
    return kUsage;
  }

  EvaluationReport report;
  try {
    report = evaluate_moderator(*moderator, corpus.items);
  } catch (const Error& e) {
    ctx.err << "moderator error: " << e.what() << "\n";
    return kFailure;
  }

  ctx.out << "accuracy: " << fixed(report.accuracy(), 4) << " (" << report.correct << "/"
          << report.total << ")\n";
  if (!report.misclassified.empty()) {
    ctx.out << "# misclassified, with corrected labels:\n\n"
            << format_labeled_windows(report.misclassified);
  }

  if (opt.harden) {
    try {
      auto hardened = harden_demo_bank(bank, report.misclassified);
      auto target = opt.harden_out.value_or(opt.demo_bank_path);
      save_demo_bank(target, hardened);
      ctx.out << "demo bank version " << hardened.version << " (" << hardened.items.size()
              << " demonstrations) written to " << target << "\n";
    } catch (const Error& e) {
      ctx.err << "harden failed: " << e.what() << "\n";
      return kUsage;
    }
  }
  return report.accuracy() + 1e-12 >= opt.threshold ? kOk : kFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, CliContext& ctx) {
  CLI::App app{"Self-play bargaining harness with critic feedback"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Play a session and write a transcript log");
  run_cmd->add_option("--config", run.config_path, "Session config (JSON)")->required();
  run_cmd->add_option("--seed", run.seed, "Session seed");
  run_cmd->add_option("--parallelism", run.parallelism, "Runs played at once");
  run_cmd->add_flag("--offline", run.offline, "Refuse remote engines and all network access");
  run_cmd->add_option("--out-dir", run.out_dir, "Directory for the transcript log");
  run_cmd->add_option("--log-name", run.log_name, "Transcript log file name");
  run_cmd->add_option("--engine-improved", run.engine_improved, "Engine of the improved player");
  run_cmd->add_option("--engine-rival", run.engine_rival, "Engine of the rival");
  run_cmd->add_option("--engine-critic", run.engine_critic, "Engine of the critic");
  run_cmd->add_option("--engine-moderator", run.engine_moderator, "Engine of the moderator");
  run_cmd->add_option("--runs", run.runs, "Independent runs");
  run_cmd->add_option("--rounds", run.rounds, "Games per run");
  run_cmd->add_option("--improved-role", run.improved_role, "seller or buyer");
  run_cmd->add_option("--feedback", run.feedback, "ai_critic, human_pool or none");

  AnalyzeOptions analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Summarise a transcript log into CSV tables");
  analyze_cmd->add_option("log", analyze.log_path, "Transcript log")->required();
  analyze_cmd->add_option("--role", analyze.role, "Role whose response lengths are reported");
  analyze_cmd->add_option("--floor", analyze.floor, "Override corridor floor");
  analyze_cmd->add_option("--ceiling", analyze.ceiling, "Override corridor ceiling");
  analyze_cmd->add_option("--out-dir", analyze.out_dir, "Directory for the CSV tables");

  ReplayOptions replay;
  auto* replay_cmd = app.add_subcommand("replay", "Re-execute a stored game and verify it");
  replay_cmd->add_option("log", replay.log_path, "Transcript log")->required();
  replay_cmd->add_option("--run", replay.run_index, "Run index (0-based)")->required();
  replay_cmd->add_option("--round", replay.round_index, "Round index (1-based)")->required();

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("moderator-eval", "Score the moderator on a labelled corpus");
  eval_cmd->add_option("--demo-bank", eval.demo_bank_path, "Few-shot demonstrations")->required();
  eval_cmd->add_option("--corpus", eval.corpus_path, "Labelled evaluation windows")->required();
  eval_cmd->add_option("--backend", eval.backend, "oracle, stub or remote");
  eval_cmd->add_option("--engine", eval.engine, "Engine for --backend remote");
  eval_cmd->add_option("--base-url", eval.base_url, "Provider base URL for --backend remote");
  eval_cmd->add_option("--threshold", eval.threshold, "Minimum accuracy for exit 0");
  eval_cmd->add_flag("--harden", eval.harden, "Append misclassified windows to the demo bank");
  eval_cmd->add_option("--harden-out", eval.harden_out, "Write the hardened bank here instead");
  eval_cmd->add_flag("--offline", eval.offline, "Refuse all network access");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    ctx.out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    ctx.err << e.what() << "\n" << app.help();
    return kUsage;
  }

  if (*run_cmd) return cmd_run(run, ctx);
  if (*analyze_cmd) return cmd_analyze(analyze, ctx);
  if (*replay_cmd) return cmd_replay(replay, ctx);
  if (*eval_cmd) return cmd_moderator_eval(eval, ctx);
  return kUsage;
}

}  // namespace bargain::cli
