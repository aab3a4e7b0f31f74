#include <gtest/gtest.h>

#include <random>

#include <boost/math/special_functions/airy.hpp>

#include <caustic/airy.hpp>

using namespace caustic;

namespace {

double tol_scale(double v) { return std::max(1.0, std::fabs(v)); }

} // namespace

TEST(Ai, ValueAtZero) {
    EXPECT_NEAR(ai(0.0), 0.35502805388781723926, 1e-16);
    EXPECT_NEAR(ai(0.0), std::pow(3.0, -2.0 / 3) / std::tgamma(2.0 / 3), 1e-15);
}

TEST(Ai, MatchesIndependentImplementation) {
    double worst = 0;
    for (int i = -2000; i <= 2000; ++i) {
        const double s = i * 0.01;
        worst = std::max(worst, std::fabs(ai(s) - boost::math::airy_ai(s)));
    }
    EXPECT_LT(worst, 1e-12);
}

TEST(Ai, PositiveAndDecreasingOnHalfLine) {
    double prev = ai(0.0);
    for (int i = 1; i <= 1000; ++i) {
        const double v = ai(i * 0.01);
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, prev) << i * 0.01;
        prev = v;
    }
}

TEST(Ai, FirstZero) {
    double a = -3, b = -1;
    ASSERT_LT(ai(a) * ai(b), 0);
    while (b - a > 1e-12) {
        const double m = 0.5 * (a + b);
        (ai(a) * ai(m) <= 0 ? b : a) = m;
    }
    EXPECT_NEAR(0.5 * (a + b), -2.33810741045976703849, 1e-8);
}

TEST(AiK, WeightZeroIsAi) {
    for (double s : {-3.0, 0.0, 2.0}) EXPECT_NEAR(ai_k(0, s), ai(s), 1e-10) << s;
}

TEST(AiK, IntegralOfAi) {
    EXPECT_NEAR(ai_k(-1, 0, AiryMethod::gamma_integral), 1.0 / 3, 1e-12);
    EXPECT_NEAR(ai_k(-1, 0, AiryMethod::contour), 1.0 / 3, 1e-12);
}

TEST(AiK, HalfWeightAtZero) {
    const double expect = std::sqrt(2 * detail::kPi) * std::pow(2.0, 1.0 / 6) * ai(0) * ai(0);
    EXPECT_NEAR(ai_k(-0.5, 0), expect, 1e-12);
    EXPECT_NEAR(ai_k(-0.5, 0, AiryMethod::gamma_integral), expect, 1e-10);
}

TEST(AiK, MinusTwoIsMinusDerivativeAtZero) {
    EXPECT_NEAR(ai_k(-2, 0), -boost::math::airy_ai_prime(0.0), 1e-13);
    EXPECT_NEAR(ai_k(1, 0), -boost::math::airy_ai_prime(0.0), 1e-13);
}

TEST(AiK, GammaMethodNeedsNegativeWeight) {
    EXPECT_THROW(ai_k(0.0, 1.0, AiryMethod::gamma_integral), std::invalid_argument);
    EXPECT_THROW(ai_k(0.5, 1.0, AiryMethod::gamma_integral), std::invalid_argument);
    EXPECT_NO_THROW(ai_k(-1.5, -4.0, AiryMethod::automatic, true));
}

TEST(AiKAsymptotic, LargePositive) {
    const double exact = ai_k(-1, 25);
    EXPECT_LT(std::fabs(ai_k_asymptotic(-1, 25) / exact - 1), 1e-4);
    // the single-correction form carries an s^{-3} error
    for (double w : {-0.5, -1.0, -2.0}) {
        const double e25 = std::fabs(ai_k_asymptotic(w, 25, 1) / ai_k(w, 25) - 1);
        const double e50 = std::fabs(ai_k_asymptotic(w, 50, 1) / ai_k(w, 50) - 1);
        EXPECT_LT(e25, 10.0 / std::pow(25.0, 3)) << w;
        EXPECT_NEAR(e25 / e50, 8.0, 1.6) << w;
    }
}

TEST(AiKAsymptotic, LargeNegative) {
    const double amp = std::pow(25.0, -0.75) / detail::kSqrtPi;
    EXPECT_LT(std::fabs(ai_k_asymptotic(-1, -25) - ai_k(-1, -25)), 0.1 * amp);
    EXPECT_LT(std::fabs(ai_k_asymptotic(-2, -25) - ai_k(-2, -25)), 0.1 * std::pow(25.0, -1.25) / detail::kSqrtPi);
    // with the phase exponent 2/3 in place of 3/2 the expansion misses by O(amplitude)
    const double x = 25, kappa = 1;
    const double wrong = std::pow(x, kappa - 1) / std::tgamma(kappa) +
                         std::sin(2 * std::pow(x, 2.0 / 3) / 3 - (2 * kappa - 1) * detail::kPi / 4) /
                             (detail::kSqrtPi * std::pow(x, (2 * kappa + 1) / 4));
    EXPECT_GT(std::fabs(wrong - ai_k(-1, -25)), 0.5 * amp);
}

TEST(AiKAsymptotic, AiryLimit) {
    EXPECT_NEAR(ai_k_asymptotic(0, 10) / ai(10), 1.0, 5e-4);
    EXPECT_THROW(ai_k_asymptotic(-1, 7.9), std::domain_error);
    EXPECT_THROW(ai_k_asymptotic(-1, -3), std::domain_error);
}

TEST(AiryProperties, DerivativeLadder) {
    const double h = 1e-5;
    for (double k : {-2.0, -1.5, -1.0, 0.0})
        for (double s : {-4.0, -1.0, 0.0, 1.0, 3.0}) {
            const double fd = (ai_k(k, s + h) - ai_k(k, s - h)) / (2 * h);
            EXPECT_NEAR(fd, -ai_k(k + 1, s), 1e-6) << k << " " << s;
        }
}

TEST(AiryProperties, ReconstructionIntegral) {
    for (double k : {-2.0, -1.5, -1.0, 0.0})
        for (double s : {-4.0, -1.0, 0.0, 1.0, 3.0}) {
            double total = 0;
            for (int p = 0; p < 40; ++p)
                total += integrate_adaptive([&](double t) { return ai_k(k + 1, t); }, s + p, s + p + 1, 1e-11);
            EXPECT_NEAR(total, ai_k(k, s), 1e-6 * tol_scale(total)) << k << " " << s;
        }
}

TEST(AiryProperties, PositivityOfHalfIntegerWeights) {
    for (int d = 2; d <= 6; ++d)
        for (int i = 0; i <= 800; ++i) {
            const double s = -30 + 0.05 * i;
            ASSERT_GT(ai_k(-0.5 * d, s), 0.0) << "d=" << d << " s=" << s;
        }
}

TEST(AiryProperties, ProductFormulaDiagonal) {
    for (int i = -50; i <= 50; ++i) {
        const double x = 0.1 * i;
        const double rhs = std::pow(2.0, -1.0 / 6) / std::sqrt(2 * detail::kPi) * ai_k(-0.5, std::pow(2.0, 2.0 / 3) * x);
        EXPECT_NEAR(ai(x) * ai(x), rhs, 1e-8) << x;
    }
}

TEST(AiryProperties, ProductFormulaOffDiagonal) {
    // T = 2^{-1/3} tau turns the kernel exp(2T^3/3 - (x+y)T - (x-y)^2/(8T)) / sqrt(2 pi T)
    // into the standard Airy phase with weight tau^{-1/2} exp(-q/tau)
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-4, 3);
    for (int i = 0; i < 10; ++i) {
        const double x = u(rng), y = u(rng);
        const double s = std::pow(2.0, -1.0 / 3) * (x + y);
        const double q = std::pow(2.0, 1.0 / 3) * (x - y) * (x - y) / 8;
        const double rhs = std::pow(2.0, -1.0 / 6) / std::sqrt(2 * detail::kPi) *
                           airy_contour([q](std::complex<double> t) { return std::exp(-q / t) / std::sqrt(t); }, s);
        EXPECT_NEAR(ai(x) * ai(y), rhs, 1e-6) << x << " " << y;
    }
}

TEST(AiryProperties, MethodAgreement) {
    for (double k : {-0.5, -1.0, -1.5, -2.0, -2.5})
        for (int i = -40; i <= 40; ++i) {
            const double s = 0.25 * i;
            const double c = ai_k(k, s, AiryMethod::contour), g = ai_k(k, s, AiryMethod::gamma_integral);
            EXPECT_NEAR(c, g, 1e-8 * tol_scale(g)) << k << " " << s;
        }
}
