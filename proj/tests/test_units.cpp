#include <gtest/gtest.h>

#include "fedsched/units.hpp"

using namespace fedsched;

TEST(Units, SecondsRoundTrip) {
  EXPECT_EQ(Micros::from_seconds(616.5).us, 616'500'000);
  EXPECT_EQ(Micros::from_seconds(0.3333334).us, 333'333);
  EXPECT_DOUBLE_EQ(Micros{1'500'000}.seconds(), 1.5);
}

TEST(Units, ChargeIsExactForHourlyPrices) {
  // $0.752/h for one hour
  EXPECT_EQ(charge(HourlyPrice::from_dollars(0.752), Micros::from_seconds(3600)), Money::from_dollars(0.752));
  // one microsecond of $1/h is 1e6 micro-dollars / 3.6e9 us
  EXPECT_EQ(charge(HourlyPrice{1'000'000}, Micros{1}).ticks * 3'600'000'000LL, kTicksPerDollar);
}

TEST(Units, TransferChargeIsExact) {
  EXPECT_EQ(transfer_charge(Bytes::from_gb(1.0), TransferRate::from_dollars(0.12)), Money::from_dollars(0.12));
  EXPECT_EQ(transfer_charge(Bytes{0}, TransferRate::from_dollars(0.12)).ticks, 0);
}

TEST(Units, ScaleRoundsHalfAwayFromZero) {
  EXPECT_EQ(scale(Micros{3}, Ratio{500'000}).us, 2);
  EXPECT_EQ(scale(Micros{1}, Ratio{499'999}).us, 0);
  EXPECT_EQ(scale(Micros{27'260'000}, Ratio{340'000}).us, 9'268'400);
}

TEST(Units, RatioOf) {
  EXPECT_EQ(ratio_of(Micros{97}, Micros{233}).micro, 416'309);
  EXPECT_THROW(ratio_of(Micros{1}, Micros{0}), std::domain_error);
}

TEST(Units, MulCheckedDetectsOverflow) {
  const i128 big = i128{1} << 100;
  EXPECT_THROW(mul_checked(big, big), std::overflow_error);
  EXPECT_EQ(mul_checked(-3, 7), -21);
}

TEST(Units, Formatting) {
  EXPECT_EQ(format_hms(Micros::from_seconds(616.5)), "0:10:16");
  EXPECT_EQ(format_hms(Micros::from_seconds(104.998)), "0:01:44");
  EXPECT_EQ(format_hms(Micros::from_seconds(36000)), "10:00:00");
  EXPECT_EQ(format_dollars(Money::from_dollars(13.838), 2), "13.84");
  EXPECT_EQ(format_dollars(Money::from_dollars(0.005), 2), "0.01");
  EXPECT_EQ(format_seconds(Micros{1'234'567}), "1.234567");
  EXPECT_EQ(to_string(i128{-42}), "-42");
}
