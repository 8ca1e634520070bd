#include "fixtures.hpp"

#include <atomic>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace bargain::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("bargain-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

RoundRecord make_record(int round_index, GameState state, Role improved_role) {
  RoundRecord r;
  r.round_index = round_index;
  r.improved_role = improved_role;
  r.transcript = {
      Utterance::make(Role::Seller, "This is a good balloon and its price is $20.", round_index, 0),
      Utterance::make(Role::Buyer, "Would you consider selling it for $10?", round_index, 1),
      Utterance::make(Role::Seller, "How about $19.00?", round_index, 2),
  };
  r.terminal_state = state;
  r.flags = compute_flags(state, PriceCorridor{});
  return r;
}

RoundRecord make_deal(int round_index, Money price) { return make_record(round_index, Deal{price}); }

RoundRecord make_no_deal(int round_index) {
  return make_record(round_index, NoDeal{NoDealReason::ModeratorClassified});
}

std::vector<RunResult> runs_from_prices(const std::vector<std::vector<std::optional<Money>>>& by_run) {
  std::vector<RunResult> runs;
  for (std::size_t i = 0; i < by_run.size(); ++i) {
    RunResult run;
    run.run_index = i;
    for (std::size_t k = 0; k < by_run[i].size(); ++k) {
      int round = static_cast<int>(k) + 1;
      run.records.push_back(by_run[i][k] ? make_deal(round, *by_run[i][k]) : make_no_deal(round));
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

std::vector<RunResult> two_round_fixture() {
  return runs_from_prices({{usd("16.00"), usd("17.00")}, {usd("16.52"), usd("17.06")}});
}

std::vector<RunResult> random_runs(std::mt19937_64& rng, std::size_t runs, int rounds) {
  std::uniform_int_distribution<int> kind(0, 9);
  std::uniform_int_distribution<std::int64_t> cents(800, 2200);
  std::uniform_int_distribution<int> replies(0, 6);
  std::uniform_int_distribution<int> pad(0, 40);
  std::vector<RunResult> out;
  for (std::size_t i = 0; i < runs; ++i) {
    RunResult run;
    run.run_index = i;
    for (int k = 1; k <= rounds; ++k) {
      GameState state;
      int pick = kind(rng);
      if (pick < 6) {
        state = Deal{Money::from_cents(cents(rng))};
      } else if (pick == 6) {
        state = Deal{std::nullopt};
      } else if (pick == 7) {
        state = NoDeal{NoDealReason::TurnCapReached};
      } else {
        state = NoDeal{NoDealReason::ModeratorClassified};
      }
      auto rec = make_record(k, state);
      rec.transcript.resize(2);
      int n = replies(rng);
      for (int t = 0; t < n; ++t) {
        auto speaker = t % 2 == 0 ? Role::Seller : Role::Buyer;
        std::string text = "How about $" + Money::from_cents(cents(rng)).to_string() + "?" +
                           std::string(static_cast<std::size_t>(pad(rng)), '!');
        rec.transcript.push_back(Utterance::make(speaker, text, k, t + 2));
      }
      if (k < rounds) rec.feedback = std::vector<std::string>{"a", "b", "c"};
      run.records.push_back(std::move(rec));
    }
    out.push_back(std::move(run));
  }
  return out;
}

std::pair<ConcessionPolicy, ConcessionPolicy> random_policies(std::mt19937_64& rng) {
  // Cents-level reserves and concessions across and beyond the corridor.
  std::uniform_int_distribution<std::int64_t> reserve(1000, 2000);
  std::uniform_int_distribution<std::int64_t> step(1, 400);
  auto seller = ConcessionPolicy::seller(Money::from_units(20), Money::from_cents(reserve(rng)),
                                         Money::from_cents(step(rng)));
  auto buyer = ConcessionPolicy::buyer(Money::from_units(10), Money::from_cents(reserve(rng)),
                                       Money::from_cents(step(rng)));
  return {seller, buyer};
}

}  // namespace bargain::testing
