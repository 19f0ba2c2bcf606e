#include "fedsched/units.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace fedsched {

namespace {

std::int64_t round_micro(double v, const char* what) {
  const double scaled = std::round(v * 1e6);
  if (!std::isfinite(scaled) || std::fabs(scaled) > 9.0e18) {
    throw std::out_of_range(std::string("value out of range for ") + what);
  }
  return static_cast<std::int64_t>(scaled);
}

}  // namespace

Micros Micros::from_seconds(double s) { return Micros{round_micro(s, "duration")}; }

Money Money::from_dollars(double d) { return from_micro_dollars(round_micro(d, "money")); }

double Money::dollars() const {
  const i128 whole = ticks / kTicksPerDollar;
  const i128 frac = ticks % kTicksPerDollar;
  return static_cast<double>(whole) + static_cast<double>(frac) / static_cast<double>(kTicksPerDollar);
}

HourlyPrice HourlyPrice::from_dollars(double per_hour) { return {round_micro(per_hour, "price")}; }

TransferRate TransferRate::from_dollars(double per_gb) { return {round_micro(per_gb, "transfer rate")}; }

Bytes Bytes::from_gb(double gb) {
  const double b = std::round(gb * 1e9);
  if (!std::isfinite(b) || std::fabs(b) > 9.0e18) throw std::out_of_range("message size out of range");
  return Bytes{static_cast<std::int64_t>(b)};
}

Ratio Ratio::from_double(double v) { return Ratio{round_micro(v, "ratio")}; }

Money charge(HourlyPrice p, Micros t) {
  // micro$/h * us = 1e-12 $*h/3600 ... = 10 ticks
  return Money{i128{p.micro_per_hour} * t.us * 10};
}

Money transfer_charge(Bytes b, TransferRate r) {
  // bytes * micro$/GB = 1e-15 $ = 36 ticks
  return Money{i128{b.n} * r.micro_per_gb * 36};
}

i128 div_round(i128 a, i128 b) {
  if (a < 0) return -div_round(-a, b);
  return (a + b / 2) / b;
}

Micros scale(Micros t, Ratio f) {
  return Micros{static_cast<std::int64_t>(div_round(i128{t.us} * f.micro, kMicro))};
}

Ratio ratio_of(Micros num, Micros den) {
  if (den.us <= 0) throw std::domain_error("ratio with non-positive denominator");
  return Ratio{static_cast<std::int64_t>(div_round(i128{num.us} * kMicro, den.us))};
}

i128 mul_checked(i128 a, i128 b) {
  i128 out;
  if (__builtin_mul_overflow(a, b, &out)) throw std::overflow_error("128-bit overflow in objective arithmetic");
  return out;
}

std::string format_hms(Micros t) {
  const bool neg = t.us < 0;
  std::int64_t s = (neg ? -t.us : t.us) / kMicro;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%lld:%02lld:%02lld", neg ? "-" : "", static_cast<long long>(s / 3600),
                static_cast<long long>(s / 60 % 60), static_cast<long long>(s % 60));
  return buf;
}

std::string to_string(i128 v) {
  if (v == 0) return "0";
  const bool neg = v < 0;
  std::string out;
  // avoid negating INT128_MIN
  while (v != 0) {
    int digit = static_cast<int>(v % 10);
    out.insert(out.begin(), static_cast<char>('0' + (digit < 0 ? -digit : digit)));
    v /= 10;
  }
  if (neg) out.insert(out.begin(), '-');
  return out;
}

std::string format_dollars(Money m, int decimals) {
  i128 unit = 1;
  for (int i = 0; i < decimals; ++i) unit *= 10;
  const i128 scaled = div_round(m.ticks, kTicksPerDollar / unit);
  const bool neg = scaled < 0;
  const i128 mag = neg ? -scaled : scaled;
  std::string out = (neg ? "-" : "") + to_string(mag / unit);
  if (decimals > 0) {
    std::string frac = to_string(mag % unit);
    out += "." + std::string(static_cast<std::size_t>(decimals) - frac.size(), '0') + frac;
  }
  return out;
}

std::string format_seconds(Micros t) {
  const bool neg = t.us < 0;
  const std::int64_t mag = neg ? -t.us : t.us;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%lld.%06lld", neg ? "-" : "", static_cast<long long>(mag / kMicro),
                static_cast<long long>(mag % kMicro));
  return buf;
}

}  // namespace fedsched
