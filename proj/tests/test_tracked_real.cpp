#include <gtest/gtest.h>

#include <cstring>
#include <limits>
#include <random>

#include <caustic/tracked_real.hpp>

using caustic::TrackedReal;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

} // namespace

TEST(TrackedReal, RoundTripIsExact) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::uint64_t> bits;
    int checked = 0;
    while (checked < 200000) {
        const std::uint64_t b = bits(rng);
        double v;
        std::memcpy(&v, &b, sizeof v);
        if (!std::isfinite(v)) continue;
        ASSERT_TRUE(same_bits(TrackedReal(v).to_double(), v)) << v;
        ++checked;
    }
    for (double v : {0.0, 1.0, -1.0, std::numeric_limits<double>::min(), std::numeric_limits<double>::denorm_min(),
                      std::numeric_limits<double>::max(), -std::numeric_limits<double>::denorm_min()})
        EXPECT_TRUE(same_bits(TrackedReal(v).to_double(), v)) << v;
}

TEST(TrackedReal, MantissaRangeAndZero) {
    for (double v : {3.0, -0.1, 1e-300, 7e300}) {
        TrackedReal t(v);
        EXPECT_GE(std::fabs(t.mantissa()), 1.0);
        EXPECT_LT(std::fabs(t.mantissa()), 2.0);
    }
    TrackedReal z(0.0);
    EXPECT_TRUE(z.is_zero());
    EXPECT_EQ(z.mantissa(), 0.0);
}

TEST(TrackedReal, ArithmeticBeyondDoubleRange) {
    const TrackedReal a = TrackedReal::exp_of(-5000.0);
    const TrackedReal b = TrackedReal::exp_of(-5001.0);
    EXPECT_NEAR((a * TrackedReal::exp_of(5000.0)).to_double(), 1.0, 1e-12);
    EXPECT_NEAR(((a + b) / a).to_double(), 1.0 + std::exp(-1.0), 1e-13);
    EXPECT_NEAR(((a - b) / a).to_double(), 1.0 - std::exp(-1.0), 1e-13);
    EXPECT_NEAR(a.log_abs(), -5000.0, 1e-9);
    EXPECT_NEAR(caustic::sqrt(a).log_abs(), -2500.0, 1e-9);
    EXPECT_TRUE(b < a);
}

TEST(TrackedReal, ProductsExactToOneUlp) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng), y = u(rng);
        const double p = (TrackedReal(x) * TrackedReal(y)).to_double();
        EXPECT_LE(std::fabs(p - x * y), std::fabs(x * y) * std::numeric_limits<double>::epsilon());
    }
}
