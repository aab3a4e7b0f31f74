#ifndef CAUSTIC_CONFIG_HPP
#define CAUSTIC_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "csv.hpp"

namespace caustic::config {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t a = 0;
    for (;;) {
        const auto b = s.find(sep, a);
        out.push_back(trim(s.substr(a, b == std::string::npos ? std::string::npos : b - a)));
        if (b == std::string::npos) return out;
        a = b + 1;
    }
}

inline constexpr std::size_t kMaxRange = 10'000'000;

namespace detail {

// digits after the decimal point of a plain decimal token, or -1 when it has an exponent
inline int decimals(const std::string& t) {
    if (t.find_first_of("eE") != std::string::npos) return -1;
    const auto p = t.find('.');
    return p == std::string::npos ? 0 : static_cast<int>(t.size() - p - 1);
}

} // namespace detail

// "a:b:h" arithmetic, "a:b:*r" geometric, "a,b,c" list, or a single value
inline std::vector<double> parse_range(const std::string& spec) {
    const std::string s = trim(spec);
    if (s.empty()) throw std::invalid_argument("range: empty");
    std::vector<double> out;
    if (s.find(':') == std::string::npos) {
        for (const auto& t : split(s, ',')) out.push_back(csv::parse_number(t));
    } else {
        const auto p = split(s, ':');
        if (p.size() != 3) throw std::invalid_argument("range: expected start:stop:step");
        const double a = csv::parse_number(p[0]), b = csv::parse_number(p[1]);
        if (!p[2].empty() && p[2][0] == '*') {
            const double r = csv::parse_number(p[2].substr(1));
            if (!(a > 0 && b > 0 && r > 0 && r != 1)) throw std::invalid_argument("range: bad geometric progression");
            const double n = std::floor(std::log(b / a) / std::log(r) + 1e-9);
            if (!(n >= 0) || n + 1 > kMaxRange) throw std::invalid_argument("range: empty or too long");
            for (int i = 0; i <= static_cast<int>(n); ++i) out.push_back(a * std::pow(r, i));
        } else {
            const double h = csv::parse_number(p[2]);
            if (!(h != 0) || !std::isfinite(h)) throw std::invalid_argument("range: step must be nonzero");
            const double n = std::floor((b - a) / h + 1e-9);
            if (!(n >= 0) || n + 1 > kMaxRange) throw std::invalid_argument("range: empty or too long");
            // exact decimal arithmetic when the tokens allow it, so -3:3:0.1 gives -2.9 and not -2.9000000000000004
            int dec = 0;
            for (const auto& t : p) dec = (detail::decimals(t) < 0 || dec < 0) ? -1 : std::max(dec, detail::decimals(t));
            const double K = dec >= 0 && dec <= 9 ? std::pow(10.0, dec) : 0.0;
            const double A = std::round(a * K), H = std::round(h * K);
            const bool exact = K > 0 && std::fabs(A) < 1e15 && std::fabs(H) < 1e15;
            for (std::int64_t i = 0; i <= static_cast<std::int64_t>(n); ++i)
                out.push_back(exact ? (A + static_cast<double>(i) * H) / K : a + static_cast<double>(i) * h);
        }
    }
    for (double v : out)
        if (!std::isfinite(v)) throw std::invalid_argument("range: non-finite value");
    return out;
}

inline std::vector<int> parse_int_range(const std::string& spec) {
    std::vector<int> out;
    for (double v : parse_range(spec)) {
        const double r = std::round(v);
        if (std::fabs(r - v) > 1e-9 * std::max(1.0, std::fabs(v)) || std::fabs(r) > 2e9)
            throw std::invalid_argument("range: expected integers in '" + spec + "'");
        out.push_back(static_cast<int>(r));
    }
    return out;
}

// plain key=value lines, '#' starts a comment
inline std::vector<std::pair<std::string, std::string>> read_key_values(std::istream& is) {
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int no = 0;
    while (std::getline(is, line)) {
        ++no;
        const auto h = line.find('#');
        if (h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos || trim(line.substr(0, eq)).empty())
            throw std::invalid_argument("config line " + std::to_string(no) + ": expected key=value");
        out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

} // namespace caustic::config

#endif
