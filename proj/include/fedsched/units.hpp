#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace fedsched {

using i128 = __int128;

// Integer microseconds. All durations in the engine are exact.
struct Micros {
  std::int64_t us = 0;

  static constexpr Micros from_us(std::int64_t v) { return Micros{v}; }
  static Micros from_seconds(double s);
  double seconds() const { return static_cast<double>(us) / 1e6; }

  constexpr auto operator<=>(const Micros&) const = default;
  constexpr Micros operator+(Micros o) const { return Micros{us + o.us}; }
  constexpr Micros operator-(Micros o) const { return Micros{us - o.us}; }
  constexpr Micros& operator+=(Micros o) { us += o.us; return *this; }
  constexpr Micros operator*(std::int64_t k) const { return Micros{us * k}; }
};

inline constexpr std::int64_t kMicro = 1'000'000;

// 1 tick = 1/3.6e16 dollar, so that micro-$/hour x microseconds and
// bytes x micro-$/GB both land on whole ticks.
inline constexpr std::int64_t kTicksPerMicroDollar = 36'000'000'000LL;
inline constexpr i128 kTicksPerDollar = i128{kTicksPerMicroDollar} * kMicro;

struct Money {
  i128 ticks = 0;

  static Money from_dollars(double d);
  static Money from_micro_dollars(std::int64_t m) { return Money{i128{m} * kTicksPerMicroDollar}; }
  double dollars() const;

  constexpr auto operator<=>(const Money&) const = default;
  constexpr Money operator+(Money o) const { return Money{ticks + o.ticks}; }
  constexpr Money operator-(Money o) const { return Money{ticks - o.ticks}; }
  constexpr Money& operator+=(Money o) { ticks += o.ticks; return *this; }
  constexpr Money operator*(std::int64_t k) const { return Money{ticks * k}; }
};

// micro-dollars per hour
struct HourlyPrice {
  std::int64_t micro_per_hour = 0;

  static HourlyPrice from_dollars(double per_hour);
  double dollars_per_hour() const { return static_cast<double>(micro_per_hour) / 1e6; }
  double dollars_per_second() const { return dollars_per_hour() / 3600.0; }
  constexpr auto operator<=>(const HourlyPrice&) const = default;
};

// micro-dollars per gigabyte (1e9 bytes)
struct TransferRate {
  std::int64_t micro_per_gb = 0;

  static TransferRate from_dollars(double per_gb);
  double dollars_per_gb() const { return static_cast<double>(micro_per_gb) / 1e6; }
  constexpr auto operator<=>(const TransferRate&) const = default;
};

struct Bytes {
  std::int64_t n = 0;

  static Bytes from_gb(double gb);
  double gb() const { return static_cast<double>(n) / 1e9; }
  constexpr auto operator<=>(const Bytes&) const = default;
  constexpr Bytes operator+(Bytes o) const { return Bytes{n + o.n}; }
};

// Dimensionless factor in millionths (slowdowns, alpha, multipliers).
struct Ratio {
  std::int64_t micro = 0;

  static Ratio from_double(double v);
  static constexpr Ratio one() { return Ratio{kMicro}; }
  double value() const { return static_cast<double>(micro) / 1e6; }
  constexpr auto operator<=>(const Ratio&) const = default;
};

// Price x duration. Exact.
Money charge(HourlyPrice p, Micros t);
// Bytes x rate. Exact.
Money transfer_charge(Bytes b, TransferRate r);
// t x factor, rounded half away from zero to the microsecond.
Micros scale(Micros t, Ratio f);
// num/den as a Ratio, rounded to the nearest millionth.
Ratio ratio_of(Micros num, Micros den);

// round(a / b) for non-negative values, b > 0
i128 div_round(i128 a, i128 b);
// a*b; throws std::overflow_error instead of wrapping.
i128 mul_checked(i128 a, i128 b);

// "H:MM:SS", floored to whole seconds.
std::string format_hms(Micros t);
// "$"-less fixed-point dollars with the given number of decimals (rounded).
std::string format_dollars(Money m, int decimals = 2);
std::string format_seconds(Micros t);  // "123.456789"
std::string to_string(i128 v);

}  // namespace fedsched
