#ifndef CAUSTIC_TRACKED_REAL_HPP
#define CAUSTIC_TRACKED_REAL_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>

namespace caustic {

// Real number stored as mantissa * 2^exponent with |mantissa| in [1,2) or 0.
// The exponent is a 64-bit integer so magnitudes like e^{-10^6} stay representable.
class TrackedReal {
public:
    constexpr TrackedReal() = default;

    explicit TrackedReal(double v) { assign(v, 0); }

    static TrackedReal from_parts(double mantissa, std::int64_t exponent) {
        TrackedReal t;
        t.assign(mantissa, exponent);
        return t;
    }

    // e^a without forming e^a in floating point.
    static TrackedReal exp_of(double a) {
        if (std::isnan(a)) return TrackedReal(a);
        // Cody-Waite split of ln 2
        constexpr double ln2_hi = 6.93147180369123816490e-01;
        constexpr double ln2_lo = 1.90821492927058770002e-10;
        const double n = std::floor(a * 1.4426950408889634074);
        const double r = (a - n * ln2_hi) - n * ln2_lo;
        return from_parts(std::exp(r), static_cast<std::int64_t>(n));
    }

    double mantissa() const { return m_; }
    std::int64_t exponent() const { return e_; }
    bool is_zero() const { return m_ == 0.0; }
    int sign() const { return (m_ > 0) - (m_ < 0); }

    double to_double() const {
        if (m_ == 0.0) return 0.0;
        if (e_ > 2000) return std::copysign(std::numeric_limits<double>::infinity(), m_);
        if (e_ < -2000) return std::copysign(0.0, m_);
        return std::ldexp(m_, static_cast<int>(e_));
    }

    // value * 2^{-shift}, used when factoring out a common exponent
    double to_double_shifted(std::int64_t shift) const {
        return TrackedReal::from_parts(m_, e_ - shift).to_double();
    }

    // natural log of |value|
    double log_abs() const {
        if (m_ == 0.0) return -std::numeric_limits<double>::infinity();
        return std::log(std::fabs(m_)) + static_cast<double>(e_) * 0.69314718055994530942;
    }

    TrackedReal abs() const { return from_parts(std::fabs(m_), e_); }
    TrackedReal ldexp(std::int64_t k) const { return m_ == 0.0 ? *this : from_parts(m_, e_ + k); }

    TrackedReal operator-() const {
        TrackedReal t = *this;
        t.m_ = -t.m_;
        return t;
    }

    TrackedReal& operator*=(const TrackedReal& o) {
        assign(m_ * o.m_, e_ + o.e_);
        return *this;
    }
    TrackedReal& operator*=(double s) {
        assign(m_ * s, e_);
        return *this;
    }
    TrackedReal& operator/=(const TrackedReal& o) {
        assign(m_ / o.m_, e_ - o.e_);
        return *this;
    }
    TrackedReal& operator+=(const TrackedReal& o) {
        if (o.m_ == 0.0) return *this;
        if (m_ == 0.0) return *this = o;
        if (e_ >= o.e_) {
            assign(m_ + shift_down(o.m_, e_ - o.e_), e_);
        } else {
            assign(o.m_ + shift_down(m_, o.e_ - e_), o.e_);
        }
        return *this;
    }
    TrackedReal& operator-=(const TrackedReal& o) { return *this += -o; }

    friend TrackedReal operator*(TrackedReal a, const TrackedReal& b) { return a *= b; }
    friend TrackedReal operator*(TrackedReal a, double b) { return a *= b; }
    friend TrackedReal operator*(double a, TrackedReal b) { return b *= a; }
    friend TrackedReal operator/(TrackedReal a, const TrackedReal& b) { return a /= b; }
    friend TrackedReal operator+(TrackedReal a, const TrackedReal& b) { return a += b; }
    friend TrackedReal operator-(TrackedReal a, const TrackedReal& b) { return a -= b; }

    friend bool operator==(const TrackedReal& a, const TrackedReal& b) {
        return a.m_ == b.m_ && (a.m_ == 0.0 || a.e_ == b.e_);
    }

    // compares signed values
    friend bool operator<(const TrackedReal& a, const TrackedReal& b) { return (a - b).sign() < 0; }
    friend bool operator>(const TrackedReal& a, const TrackedReal& b) { return b < a; }

    friend std::ostream& operator<<(std::ostream& os, const TrackedReal& t) {
        return os << t.m_ << "*2^" << t.e_;
    }

private:
    static double shift_down(double m, std::int64_t k) {
        return k > 1100 ? 0.0 : std::ldexp(m, -static_cast<int>(k));
    }

    void assign(double m, std::int64_t e) {
        if (m == 0.0 || !std::isfinite(m)) {
            m_ = m;
            e_ = 0;
            return;
        }
        int k = 0;
        double f = std::frexp(m, &k); // |f| in [0.5,1)
        m_ = f * 2.0;
        e_ = e + k - 1;
    }

    double m_ = 0.0;
    std::int64_t e_ = 0;
};

inline TrackedReal sqrt(const TrackedReal& t) {
    if (t.is_zero()) return t;
    std::int64_t e = t.exponent();
    double m = t.mantissa();
    if (e % 2 != 0) {
        m *= 2.0;
        e -= 1;
    }
    return TrackedReal::from_parts(std::sqrt(m), e / 2);
}

} // namespace caustic

#endif
