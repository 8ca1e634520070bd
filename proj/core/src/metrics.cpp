#include "bargain/metrics.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace bargain {

namespace {

struct LengthTally {
  std::size_t utterances = 0;
  std::size_t chars = 0;
};

void tally_lengths(const RoundRecord& record, Role role, LengthTally& tally) {
  for (const auto& u : record.transcript) {
    if (u.turn_index < 2 || u.speaker != role) continue;
    ++tally.utterances;
    tally.chars += u.char_length;
  }
}

}  // namespace

std::size_t PriceHistogram::total() const {
  return std::accumulate(bins.begin(), bins.end(), std::size_t{0}) + below + above + unpriced;
}

Money PriceHistogram::bin_lower(std::size_t bin) const {
  auto span = corridor.ceiling.cents() - corridor.floor.cents();
  return Money::from_cents(corridor.floor.cents() +
                           span * static_cast<std::int64_t>(bin) / kHistogramBins);
}

Money PriceHistogram::bin_upper(std::size_t bin) const { return bin_lower(bin + 1); }

std::optional<std::size_t> bin_index(Money price, const PriceCorridor& corridor) {
  if (!corridor.contains(price)) return std::nullopt;
  auto span = corridor.ceiling.cents() - corridor.floor.cents();
  auto offset = price.cents() - corridor.floor.cents();
  auto bin = static_cast<std::size_t>(offset * static_cast<std::int64_t>(kHistogramBins) / span);
  return std::min(bin, kHistogramBins - 1);
}

PriceHistogram bin_prices(std::span<const Money> prices, const PriceCorridor& corridor) {
  PriceHistogram h;
  h.corridor = corridor;
  for (auto p : prices) {
    if (auto bin = bin_index(p, corridor)) {
      ++h.bins[*bin];
    } else if (p < corridor.floor) {
      ++h.below;
    } else {
      ++h.above;
    }
  }
  return h;
}

std::optional<Money> SessionReport::delta_from_first(int round_index) const {
  if (rounds.empty()) return std::nullopt;
  auto first = std::find_if(rounds.begin(), rounds.end(),
                            [](const RoundSummary& r) { return r.round_index == 1; });
  auto target = std::find_if(rounds.begin(), rounds.end(), [&](const RoundSummary& r) {
    return r.round_index == round_index;
  });
  if (first == rounds.end() || target == rounds.end()) return std::nullopt;
  if (!first->mean_deal_price || !target->mean_deal_price) return std::nullopt;
  return *target->mean_deal_price - *first->mean_deal_price;
}

SessionReport aggregate(std::span<const RunResult> runs, const PriceCorridor& corridor,
                        Role length_role) {
  SessionReport report;
  report.corridor = corridor;
  report.length_role = length_role;
  report.run_count = runs.size();

  std::map<int, std::vector<const RoundRecord*>> by_round;
  for (const auto& run : runs) {
    if (run.abort_reason) ++report.aborted_run_count;
    for (const auto& rec : run.records) by_round[rec.round_index].push_back(&rec);
  }
  if (by_round.empty()) throw AnalysisError("no round records to analyse");

  for (const auto& [round, records] : by_round) {
    RoundSummary s;
    s.round_index = round;
    s.records = records.size();
    std::vector<Money> prices;
    LengthTally lengths;
    for (const auto* rec : records) {
      tally_lengths(*rec, length_role, lengths);
      if (!is_deal(rec->terminal_state)) continue;
      ++s.deals;
      if (auto p = deal_price(rec->terminal_state)) prices.push_back(*p);
    }
    s.priced_deals = prices.size();
    s.deal_success_rate = static_cast<double>(s.deals) / static_cast<double>(s.records);
    if (!prices.empty()) {
      auto total = std::accumulate(prices.begin(), prices.end(), Money{});
      s.mean_deal_price = rounded_mean(total, static_cast<std::int64_t>(prices.size()));
    }
    s.response_utterances = lengths.utterances;
    s.response_chars = lengths.chars;
    if (lengths.utterances > 0) {
      s.mean_response_length_chars =
          static_cast<double>(lengths.chars) / static_cast<double>(lengths.utterances);
    }
    s.histogram = bin_prices(prices, corridor);
    s.histogram.unpriced = s.deals - s.priced_deals;
    report.rounds.push_back(std::move(s));
  }
  report.improvement_delta = report.delta_from_first(2);
  return report;
}

std::vector<std::optional<double>> response_length_curve(std::span<const RoundRecord> records,
                                                         Role role) {
  int max_round = 0;
  for (const auto& r : records) max_round = std::max(max_round, r.round_index);
  std::vector<LengthTally> tallies(static_cast<std::size_t>(max_round));
  for (const auto& r : records) {
    if (r.round_index >= 1) tally_lengths(r, role, tallies[static_cast<std::size_t>(r.round_index - 1)]);
  }
  std::vector<std::optional<double>> curve;
  for (const auto& t : tallies) {
    if (t.utterances == 0) {
      curve.push_back(std::nullopt);
    } else {
      curve.push_back(static_cast<double>(t.chars) / static_cast<double>(t.utterances));
    }
  }
  return curve;
}

}  // namespace bargain
