#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bargain/game.hpp"
#include "bargain/money.hpp"

namespace bargain {

/// One currency amount found in an utterance. `begin`/`end` are byte offsets.
struct PriceMention {
  Money amount;
  std::size_t utterance_index = 0;
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const PriceMention&) const = default;
};

/// Scans for "$16", "$16.50", "16 dollars", "16.50 dollars". Spelled-out numbers
/// are not recognised.
std::vector<PriceMention> find_price_mentions(std::string_view text, std::size_t utterance_index = 0,
                                              std::string_view currency_symbol = "$");

/// Last amount mentioned in `text`.
std::optional<Money> extract_price(std::string_view text, std::string_view currency_symbol = "$");

/// Deal price read off a window: the accepting (final) utterance's mention if
/// it has one, otherwise the latest mention by the other speaker.
std::optional<Money> extract_price(std::span<const Utterance> window,
                                   std::string_view currency_symbol = "$");

}  // namespace bargain
