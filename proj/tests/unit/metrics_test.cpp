#include <random>

#include <gtest/gtest.h>

#include "bargain/errors.hpp"
#include "bargain/metrics.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace bargain {
namespace {

using testing::usd;

TEST(Aggregate, MeanOfTwoDeals) {
  auto runs = testing::runs_from_prices({{usd("16.00")}, {usd("16.52")}});
  auto report = aggregate(runs, PriceCorridor{});
  ASSERT_EQ(report.rounds.size(), 1u);
  EXPECT_EQ(report.rounds[0].mean_deal_price, usd("16.26"));
  EXPECT_DOUBLE_EQ(report.rounds[0].deal_success_rate, 1.0);
  EXPECT_FALSE(report.improvement_delta);
}

TEST(Aggregate, ImprovementDeltaOnTwoRoundFixture) {
  auto runs = testing::two_round_fixture();
  auto report = aggregate(runs, PriceCorridor{});
  ASSERT_EQ(report.rounds.size(), 2u);
  EXPECT_EQ(report.rounds[0].mean_deal_price->to_string(), "16.26");
  EXPECT_EQ(report.rounds[1].mean_deal_price->to_string(), "17.03");
  ASSERT_TRUE(report.improvement_delta);
  EXPECT_EQ(signed_string(*report.improvement_delta), "+0.77");
  EXPECT_EQ(report.delta_from_first(2), report.improvement_delta);
  EXPECT_EQ(report.run_count, 2u);
}

TEST(Aggregate, SuccessRateCountsNoDeals) {
  std::vector<std::vector<std::optional<Money>>> by_run;
  for (int i = 0; i < 200; ++i) {
    std::vector<std::optional<Money>> rounds(5, usd("15"));
    if (i % 5 == 0 && i / 5 < 37) rounds[4] = std::nullopt;
    by_run.push_back(rounds);
  }
  auto runs = testing::runs_from_prices(by_run);
  auto brute = testing::brute_force_rounds(runs, PriceCorridor{}, Role::Seller);
  ASSERT_EQ(brute.at(5).records - brute.at(5).deals, 37u);
  auto report = aggregate(runs, PriceCorridor{});
  EXPECT_DOUBLE_EQ(report.rounds[4].deal_success_rate, brute.at(5).success_rate);
  EXPECT_DOUBLE_EQ(report.rounds[4].deal_success_rate, 0.815);
  EXPECT_EQ(report.rounds[4].histogram.total(), 163u);
  EXPECT_EQ(report.rounds[4].mean_deal_price, usd("15"));
}

TEST(Aggregate, NoDealRoundsHaveNoMean) {
  auto runs = testing::runs_from_prices({{std::nullopt}, {std::nullopt}});
  auto report = aggregate(runs, PriceCorridor{});
  EXPECT_FALSE(report.rounds[0].mean_deal_price);
  EXPECT_DOUBLE_EQ(report.rounds[0].deal_success_rate, 0.0);
}

TEST(Aggregate, EmptyInputIsAnalysisError) {
  std::vector<RunResult> none;
  EXPECT_THROW(aggregate(none, PriceCorridor{}), AnalysisError);
  std::vector<RunResult> hollow(3);
  EXPECT_THROW(aggregate(hollow, PriceCorridor{}), AnalysisError);
}

TEST(Aggregate, AbortedRunsAreCounted) {
  auto runs = testing::two_round_fixture();
  RunResult aborted;
  aborted.run_index = 2;
  aborted.abort_reason = "provider down";
  runs.push_back(aborted);
  auto report = aggregate(runs, PriceCorridor{});
  EXPECT_EQ(report.run_count, 3u);
  EXPECT_EQ(report.aborted_run_count, 1u);
}

TEST(Aggregate, UnpricedDealsCountAsSuccessOnly) {
  std::vector<RunResult> runs(2);
  runs[0].records.push_back(testing::make_deal(1, usd("15")));
  runs[1].run_index = 1;
  runs[1].records.push_back(testing::make_record(1, Deal{std::nullopt}));
  auto report = aggregate(runs, PriceCorridor{});
  const auto& r = report.rounds[0];
  EXPECT_EQ(r.deals, 2u);
  EXPECT_EQ(r.priced_deals, 1u);
  EXPECT_EQ(r.mean_deal_price, usd("15"));
  EXPECT_EQ(r.histogram.unpriced, 1u);
  EXPECT_EQ(r.histogram.total(), 2u);
}

// Every field against an independent recount, over random record sets.
TEST(Aggregate, MatchesBruteForceRecount) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    auto runs = testing::random_runs(rng, 1 + rng() % 60, 1 + static_cast<int>(rng() % 5));
    for (Role role : {Role::Seller, Role::Buyer}) {
      auto report = aggregate(runs, PriceCorridor{}, role);
      auto brute = testing::brute_force_rounds(runs, PriceCorridor{}, role);
      ASSERT_EQ(report.rounds.size(), brute.size());
      for (const auto& r : report.rounds) {
        const auto& b = brute.at(r.round_index);
        EXPECT_EQ(r.records, b.records);
        EXPECT_EQ(r.deals, b.deals);
        EXPECT_EQ(r.priced_deals, b.priced);
        EXPECT_DOUBLE_EQ(r.deal_success_rate, b.success_rate);
        ASSERT_EQ(r.mean_deal_price.has_value(), b.mean_cents.has_value());
        if (b.mean_cents) {
          EXPECT_EQ(r.mean_deal_price->cents(), *b.mean_cents);
        }
        for (std::size_t i = 0; i < kHistogramBins; ++i) EXPECT_EQ(r.histogram.bins[i], b.bins[i]);
        EXPECT_EQ(r.histogram.below, b.below);
        EXPECT_EQ(r.histogram.above, b.above);
        EXPECT_EQ(r.histogram.unpriced, b.unpriced);
        EXPECT_EQ(r.histogram.total(), r.deals);
        EXPECT_EQ(r.response_utterances, b.length_utterances);
        EXPECT_EQ(r.response_chars, b.length_chars);
        if (b.length_utterances == 0) {
          EXPECT_FALSE(r.mean_response_length_chars);
        } else {
          EXPECT_DOUBLE_EQ(*r.mean_response_length_chars,
                           static_cast<double>(b.length_chars) / static_cast<double>(b.length_utterances));
        }
      }
    }
  }
}

TEST(Bins, EdgesAndOverflow) {
  PriceCorridor c;
  EXPECT_EQ(bin_index(usd("10"), c), 0u);
  EXPECT_EQ(bin_index(usd("20"), c), 9u);
  EXPECT_EQ(bin_index(usd("10.99"), c), 0u);
  EXPECT_EQ(bin_index(usd("11"), c), 1u);
  EXPECT_EQ(bin_index(usd("19.99"), c), 9u);
  EXPECT_FALSE(bin_index(usd("9.99"), c));
  EXPECT_FALSE(bin_index(usd("20.01"), c));
}

TEST(Bins, MidCorridorMeansLandInMiddleBins) {
  std::vector<Money> prices = {usd("14.74"), usd("15.98")};
  auto h = bin_prices(prices, PriceCorridor{});
  EXPECT_EQ(h.bins[4], 1u);
  EXPECT_EQ(h.bins[5], 1u);
  EXPECT_EQ(h.total(), 2u);
}

TEST(Bins, MatchesRationalBinningOnOddCorridor) {
  PriceCorridor c{usd("3.33"), usd("17.01")};
  for (std::int64_t cents = 300; cents <= 1750; ++cents) {
    auto p = Money::from_cents(cents);
    EXPECT_EQ(bin_index(p, c), testing::brute_bin(p, c)) << p.to_string();
  }
}

TEST(Bins, BoundsCoverCorridor) {
  PriceHistogram h;
  EXPECT_EQ(h.bin_lower(0), usd("10"));
  EXPECT_EQ(h.bin_upper(9), usd("20"));
  EXPECT_EQ(h.bin_lower(4), usd("14"));
  EXPECT_EQ(h.bin_upper(4), usd("15"));
}

RoundRecord with_seller_replies(int round, std::vector<std::size_t> lengths) {
  auto rec = testing::make_record(round, NoDeal{});
  rec.transcript.resize(2);
  int turn = 2;
  for (auto n : lengths) {
    rec.transcript.push_back(Utterance::make(Role::Seller, std::string(n, 'x'), round, turn++));
    rec.transcript.push_back(Utterance::make(Role::Buyer, "How about $11?", round, turn++));
  }
  return rec;
}

TEST(LengthCurve, MeanOfReplies) {
  std::vector<RoundRecord> recs = {with_seller_replies(1, {40, 60})};
  auto curve = response_length_curve(recs, Role::Seller);
  ASSERT_EQ(curve.size(), 1u);
  EXPECT_DOUBLE_EQ(*curve[0], 50.0);
}

TEST(LengthCurve, OpenersAreExcluded) {
  std::vector<RoundRecord> recs = {with_seller_replies(1, {})};
  auto curve = response_length_curve(recs, Role::Seller);
  ASSERT_EQ(curve.size(), 1u);
  EXPECT_FALSE(curve[0]);
}

TEST(LengthCurve, GrowingRepliesGiveIncreasingCurve) {
  std::vector<RoundRecord> recs;
  for (int k = 1; k <= 5; ++k) {
    for (int run = 0; run < 3; ++run) {
      recs.push_back(with_seller_replies(k, {static_cast<std::size_t>(20 + 10 * k + run),
                                             static_cast<std::size_t>(30 + 10 * k)}));
    }
  }
  auto curve = response_length_curve(recs, Role::Seller);
  ASSERT_EQ(curve.size(), 5u);
  for (int k = 1; k <= 5; ++k) {
    // brute: (20+10k + 21+10k + 22+10k + 3*(30+10k)) / 6
    double want = (3.0 * (20 + 10 * k) + 3 + 3.0 * (30 + 10 * k)) / 6.0;
    EXPECT_DOUBLE_EQ(*curve[k - 1], want);
    if (k > 1) {
      EXPECT_GT(*curve[k - 1], *curve[k - 2]);
    }
  }
}

}  // namespace
}  // namespace bargain
