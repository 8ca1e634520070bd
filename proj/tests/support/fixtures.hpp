#pragma once

#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bargain/game.hpp"
#include "bargain/scripted.hpp"
#include "bargain/session.hpp"

namespace bargain::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

// Minimal record: openers, one seller line, then `state`.
RoundRecord make_record(int round_index, GameState state, Role improved_role = Role::Seller);
RoundRecord make_deal(int round_index, Money price);
RoundRecord make_no_deal(int round_index);

// Runs whose round-r deals have the given prices (nullopt = NO DEAL).
std::vector<RunResult> runs_from_prices(const std::vector<std::vector<std::optional<Money>>>& by_run);

// Two runs, two rounds: round-1 deals {16.00, 16.52}, round-2 deals
// {17.00, 17.06}; means 16.26 and 17.03.
std::vector<RunResult> two_round_fixture();

// Random records: priced, unpriced and out-of-corridor deals, NO DEALs, and
// replies of varying length from both sides.
std::vector<RunResult> random_runs(std::mt19937_64& rng, std::size_t runs, int rounds);

// Random policy pair with openings at the default corridor bounds.
std::pair<ConcessionPolicy, ConcessionPolicy> random_policies(std::mt19937_64& rng);

inline Money usd(const char* text) { return *Money::parse(text); }

}  // namespace bargain::testing
