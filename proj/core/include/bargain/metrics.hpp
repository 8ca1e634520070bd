#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "bargain/game.hpp"
#include "bargain/session.hpp"

namespace bargain {

inline constexpr std::size_t kHistogramBins = 10;

/// Ten equal bins over [floor, ceiling], left-closed/right-open except the
/// last, which also takes the ceiling. Everything else goes to overflow.
struct PriceHistogram {
  PriceCorridor corridor;
  std::array<std::size_t, kHistogramBins> bins{};
  std::size_t below = 0;
  std::size_t above = 0;
  /// Deals the moderator accepted without a readable price.
  std::size_t unpriced = 0;

  std::size_t total() const;
  Money bin_lower(std::size_t bin) const;
  Money bin_upper(std::size_t bin) const;
};

/// Bin of `price`, or nullopt when it lies outside the corridor.
std::optional<std::size_t> bin_index(Money price, const PriceCorridor& corridor);
PriceHistogram bin_prices(std::span<const Money> prices, const PriceCorridor& corridor);

struct RoundSummary {
  int round_index = 1;
  std::size_t records = 0;
  std::size_t deals = 0;
  std::size_t priced_deals = 0;
  double deal_success_rate = 0.0;
  /// Over priced deals only, rounded to cents.
  std::optional<Money> mean_deal_price;
  std::size_t response_utterances = 0;
  std::size_t response_chars = 0;
  std::optional<double> mean_response_length_chars;
  PriceHistogram histogram;
};

struct SessionReport {
  PriceCorridor corridor;
  Role length_role = Role::Seller;
  std::vector<RoundSummary> rounds;
  /// Round-2 mean minus round-1 mean, both rounded first.
  std::optional<Money> improvement_delta;
  std::size_t run_count = 0;
  std::size_t aborted_run_count = 0;

  /// Mean of round `round_index` minus the round-1 mean.
  std::optional<Money> delta_from_first(int round_index) const;
};

/// Per-round prices, success rates, lengths and histograms. NO DEAL rounds
/// count toward success rate and length only. Throws AnalysisError on empty
/// input.
SessionReport aggregate(std::span<const RunResult> runs, const PriceCorridor& corridor,
                        Role length_role = Role::Seller);

/// Mean character count of `role`'s non-opener utterances, per round
/// (index 0 is round 1). Rounds without such utterances are absent.
std::vector<std::optional<double>> response_length_curve(std::span<const RoundRecord> records,
                                                         Role role);

}  // namespace bargain
