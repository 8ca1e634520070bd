#include <cstdlib>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "bargain/moderator.hpp"
#include "bargain/transcript_log.hpp"
#include "commands.hpp"
#include "fakes.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace bargain {
namespace {

namespace fs = std::filesystem;
using testing::usd;

const fs::path kData = BARGAIN_DATA_DIR;
const std::string kDemo = (kData / "configs" / "demo.json").string();

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args, Transport* transport = nullptr) {
  std::ostringstream out, err;
  testing::FakeClock clock;
  cli::CliContext ctx{out, err, transport, &clock};
  int code = cli::run_cli(args, ctx);
  return {code, out.str(), err.str()};
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

std::string write_log(const testing::TempDir& dir, const std::vector<RunResult>& runs,
                      const GameConfig& game = {}) {
  std::ostringstream out;
  TranscriptWriter writer(out, "fixture", game);
  for (const auto& r : runs) writer.on_run(r);
  auto path = (dir / "log.jsonl").string();
  testing::write_file(path, out.str());
  return path;
}

std::vector<std::vector<std::string>> csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"dance"}).code, 2);
  EXPECT_EQ(cli({"run"}).code, 2);
  EXPECT_EQ(cli({"run", "--config", kDemo, "--runs", "many"}).code, 2);
  EXPECT_EQ(cli({"replay", "x.jsonl"}).code, 2);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(Cli, RunWritesOneRecordPerGame) {
  testing::TempDir dir("cli-run");
  auto r = cli({"run", "--config", kDemo, "--engine-improved", "scripted", "--runs", "5", "--rounds",
                "2", "--seed", "7", "--out-dir", dir.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto text = testing::read_file(dir / "transcripts.jsonl");
  EXPECT_EQ(line_count(text), 10u);
  EXPECT_NE(r.out.find("(10 records)"), std::string::npos);
}

TEST(Cli, RunIsByteIdenticalAcrossRepeatsAndParallelism) {
  testing::TempDir dir("cli-det");
  auto base = std::vector<std::string>{"run", "--config", kDemo, "--seed", "3", "--runs", "8",
                                       "--out-dir", dir.path().string()};
  auto with = [&](std::vector<std::string> extra) {
    auto args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
  };
  ASSERT_EQ(cli(with({"--log-name", "a.jsonl", "--parallelism", "1"})).code, 0);
  ASSERT_EQ(cli(with({"--log-name", "b.jsonl", "--parallelism", "1"})).code, 0);
  ASSERT_EQ(cli(with({"--log-name", "c.jsonl", "--parallelism", "4"})).code, 0);
  auto a = testing::read_file(dir / "a.jsonl");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, testing::read_file(dir / "b.jsonl"));
  EXPECT_EQ(a, testing::read_file(dir / "c.jsonl"));
}

TEST(Cli, BadConfigExitsTwo) {
  testing::TempDir dir("cli-bad");
  testing::write_file(dir / "bad.json", R"({"session": {"rounds": 0}})");
  EXPECT_EQ(cli({"run", "--config", (dir / "bad.json").string()}).code, 2);
  EXPECT_EQ(cli({"run", "--config", (dir / "missing.json").string()}).code, 2);
  EXPECT_EQ(cli({"run", "--config", kDemo, "--feedback", "rlhf"}).code, 2);
}

TEST(Cli, MissingApiKeyExitsTwoBeforeAnyCall) {
  ::unsetenv(api_key_env_var(EngineFamily::Gpt).c_str());
  testing::TempDir dir("cli-key");
  testing::CountingTransport counter;
  auto r = cli({"run", "--config", kDemo, "--engine-rival", "gpt-3.5-turbo", "--out-dir",
                dir.path().string()},
               &counter);
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(counter.calls.load(), 0);
  EXPECT_FALSE(fs::exists(dir / "transcripts.jsonl"));
}

TEST(Cli, OfflineMakesNoConnections) {
  testing::TempDir dir("cli-offline");
  testing::CountingTransport counter;
  auto ok = cli({"run", "--config", kDemo, "--offline", "--runs", "3", "--out-dir", dir.path().string()},
                &counter);
  EXPECT_EQ(ok.code, 0) << ok.err;
  ::setenv(api_key_env_var(EngineFamily::Claude).c_str(), "k", 1);
  auto remote = cli({"run", "--config", kDemo, "--offline", "--engine-improved", "claude-v1.3",
                     "--out-dir", dir.path().string()},
                    &counter);
  ::unsetenv(api_key_env_var(EngineFamily::Claude).c_str());
  EXPECT_EQ(remote.code, 2);
  EXPECT_EQ(counter.calls.load(), 0);
}

TEST(Cli, AnalyzeReproducesDelta) {
  testing::TempDir dir("cli-analyze");
  auto log = write_log(dir, testing::two_round_fixture());
  auto r = cli({"analyze", log, "--out-dir", dir.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rows = csv(testing::read_file(dir / "summary.csv"));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"round", "records", "deals", "deal_success_rate",
                                               "mean_deal_price", "delta_vs_round_1"}));
  EXPECT_EQ(rows[1], (std::vector<std::string>{"1", "2", "2", "1.0000", "16.26", ""}));
  EXPECT_EQ(rows[2], (std::vector<std::string>{"2", "2", "2", "1.0000", "17.03", "+0.77"}));
}

TEST(Cli, AnalyzeHistogramSumsToDeals) {
  testing::TempDir dir("cli-hist");
  std::mt19937_64 rng(5);
  auto runs = testing::random_runs(rng, 200, 5);
  auto log = write_log(dir, runs);
  ASSERT_EQ(cli({"analyze", log, "--out-dir", dir.path().string()}).code, 0);
  auto brute = testing::brute_force_rounds(runs, PriceCorridor{}, Role::Seller);
  auto rows = csv(testing::read_file(dir / "histogram.csv"));
  ASSERT_EQ(rows[0], (std::vector<std::string>{"round", "bin", "lower", "upper", "count"}));
  std::map<int, std::size_t> sums;
  for (std::size_t i = 1; i < rows.size(); ++i) sums[std::stoi(rows[i][0])] += std::stoul(rows[i][4]);
  ASSERT_EQ(sums.size(), 5u);
  for (const auto& [round, sum] : sums) EXPECT_EQ(sum, brute.at(round).deals) << round;
  auto lengths = csv(testing::read_file(dir / "response_length.csv"));
  EXPECT_EQ(lengths[0], (std::vector<std::string>{"round", "role", "utterances", "mean_chars"}));
  EXPECT_EQ(lengths.size(), 6u);
}

TEST(Cli, AnalyzeErrorsExitTwo) {
  testing::TempDir dir("cli-analyze-err");
  testing::write_file(dir / "empty.jsonl", "");
  EXPECT_EQ(cli({"analyze", (dir / "empty.jsonl").string(), "--out-dir", dir.path().string()}).code, 2);

  std::ostringstream mixed;
  GameConfig other;
  other.corridor.ceiling = usd("30");
  mixed << serialize_round("s", 0, GameConfig{}, testing::make_deal(1, usd("15"))) << "\n"
        << serialize_round("s", 1, other, testing::make_deal(1, usd("15"))) << "\n";
  testing::write_file(dir / "mixed.jsonl", mixed.str());
  EXPECT_EQ(cli({"analyze", (dir / "mixed.jsonl").string(), "--out-dir", dir.path().string()}).code, 2);

  testing::write_file(dir / "junk.jsonl", "{oops\n");
  EXPECT_EQ(cli({"analyze", (dir / "junk.jsonl").string(), "--out-dir", dir.path().string()}).code, 2);
}

class ReplayTest : public ::testing::Test {
 protected:
  void SetUp() override {
    auto r = cli({"run", "--config", kDemo, "--runs", "3", "--rounds", "2", "--out-dir",
                  dir.path().string()});
    ASSERT_EQ(r.code, 0) << r.err;
    log = (dir / "transcripts.jsonl").string();
  }
  testing::TempDir dir{"cli-replay"};
  std::string log;
};

TEST_F(ReplayTest, StoredGamesMatch) {
  for (const char* run : {"0", "1", "2"}) {
    for (const char* round : {"1", "2"}) {
      auto r = cli({"replay", log, "--run", run, "--round", round});
      EXPECT_EQ(r.code, 0) << r.out << r.err;
      EXPECT_NE(r.out.find("replay matches stored record"), std::string::npos);
    }
  }
}

TEST_F(ReplayTest, TamperIsReportedAtItsTurn) {
  auto text = testing::read_file(log);
  auto first_line_end = text.find('\n');
  auto pos = text.find("How about $", 0);
  ASSERT_LT(pos, first_line_end);
  pos += std::string("How about $").size();
  text[pos] = text[pos] == '9' ? '8' : '9';
  testing::write_file(dir / "tampered.jsonl", text);
  auto r = cli({"replay", (dir / "tampered.jsonl").string(), "--run", "0", "--round", "1"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE((r.out + r.err).find("divergence at turn 2"), std::string::npos) << r.out << r.err;
}

TEST_F(ReplayTest, OutOfRangeExitsTwo) {
  EXPECT_EQ(cli({"replay", log, "--run", "99", "--round", "1"}).code, 2);
  EXPECT_EQ(cli({"replay", log, "--run", "0", "--round", "7"}).code, 2);
}

TEST(Cli, ModeratorEvalOracleIsExactOnProtocolCorpus) {
  testing::TempDir dir("cli-eval");
  std::mt19937_64 rng(8);
  auto items = testing::protocol_corpus(rng, 40);
  testing::write_file(dir / "corpus.txt", format_labeled_windows(items));
  auto r = cli({"moderator-eval", "--demo-bank", (kData / "moderator" / "demo_bank.txt").string(),
                "--corpus", (dir / "corpus.txt").string(), "--backend", "oracle", "--threshold", "1.0"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("accuracy: 1.0000"), std::string::npos) << r.out;
}

TEST(Cli, ModeratorEvalThresholdAndHardening) {
  testing::TempDir dir("cli-harden");
  auto bank = (kData / "moderator" / "demo_bank.txt").string();
  auto corpus = (kData / "moderator" / "corpus.txt").string();
  auto accuracy = [](const std::string& out) {
    auto pos = out.find("accuracy: ");
    return std::stod(out.substr(pos + 10, 6));
  };
  auto before = cli({"moderator-eval", "--demo-bank", bank, "--corpus", corpus, "--threshold", "0.99"});
  EXPECT_EQ(before.code, 1);
  auto hardened = (dir / "bank.txt").string();
  auto h = cli({"moderator-eval", "--demo-bank", bank, "--corpus", corpus, "--harden", "--harden-out",
                hardened});
  ASSERT_TRUE(fs::exists(hardened)) << h.err;
  auto after = cli({"moderator-eval", "--demo-bank", hardened, "--corpus", corpus, "--threshold", "0.90"});
  EXPECT_GE(accuracy(after.out), accuracy(before.out));
  EXPECT_EQ(after.code, 0) << after.out;
  EXPECT_GT(load_demo_bank(hardened).version, load_demo_bank(bank).version);
}

TEST(Cli, ModeratorEvalRejectsUnknownLabels) {
  testing::TempDir dir("cli-label");
  testing::write_file(dir / "corpus.txt", "[MAYBE]\nSeller: How about $17?\n");
  auto r = cli({"moderator-eval", "--demo-bank", (kData / "moderator" / "demo_bank.txt").string(),
                "--corpus", (dir / "corpus.txt").string()});
  EXPECT_EQ(r.code, 2);
}

}  // namespace
}  // namespace bargain
