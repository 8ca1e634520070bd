#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace bargain {

/// Currency amount stored as a whole number of cents.
class Money {
 public:
  constexpr Money() = default;

  static constexpr Money from_cents(std::int64_t cents) { return Money(cents); }
  static constexpr Money from_units(std::int64_t units) { return Money(units * 100); }

  /// Parses "16", "16.5" or "16.50". Returns nullopt on anything else.
  static std::optional<Money> parse(std::string_view text);

  constexpr std::int64_t cents() const { return cents_; }

  /// Always two decimals: "16.00".
  std::string to_string() const;
  /// Drops a zero fraction: "20" for 20.00, "16.50" otherwise.
  std::string to_compact_string() const;

  constexpr auto operator<=>(const Money&) const = default;

  constexpr Money operator+(Money o) const { return Money(cents_ + o.cents_); }
  constexpr Money operator-(Money o) const { return Money(cents_ - o.cents_); }
  constexpr Money operator*(std::int64_t k) const { return Money(cents_ * k); }
  constexpr Money operator-() const { return Money(-cents_); }

 private:
  constexpr explicit Money(std::int64_t cents) : cents_(cents) {}
  std::int64_t cents_ = 0;
};

/// Mean of `total` over `count` items rounded half away from zero to cents.
Money rounded_mean(Money total, std::int64_t count);

/// "+0.77" / "-1.20" / "+0.00".
std::string signed_string(Money m);

}  // namespace bargain
