#ifndef CAUSTIC_CSV_HPP
#define CAUSTIC_CSV_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

namespace caustic::csv {

// shortest representation that reads back to the same double
inline std::string number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline std::string number(std::int64_t v) { return std::to_string(v); }
inline std::string number(int v) { return std::to_string(v); }
inline std::string number(std::uint64_t v) { return std::to_string(v); }

inline double parse_number(const std::string& s) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw std::invalid_argument("csv: not a number: '" + s + "'");
    return v;
}

// RFC 4180 with a leading block of '#' comment lines
struct Table {
    std::vector<std::string> comments;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) {
        if (row.size() != header.size()) throw std::logic_error("csv: row width does not match the header");
        rows.push_back(std::move(row));
    }
    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw std::out_of_range("csv: no column '" + name + "'");
    }
    std::vector<double> numbers(const std::string& name) const {
        const auto c = column(name);
        std::vector<double> v;
        for (const auto& r : rows) v.push_back(parse_number(r[c]));
        return v;
    }
};

inline std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

inline void write(std::ostream& os, const Table& t) {
    for (const auto& c : t.comments) os << "# " << c << "\r\n";
    auto line = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << quote(r[i]);
        os << "\r\n";
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
}

inline Table read(std::istream& is) {
    Table t;
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    std::size_t i = 0;
    // comment block
    while (i < text.size() && text[i] == '#') {
        std::size_t e = text.find('\n', i);
        if (e == std::string::npos) e = text.size();
        std::string c = text.substr(i + 1, e - i - 1);
        if (!c.empty() && c.back() == '\r') c.pop_back();
        if (!c.empty() && c.front() == ' ') c.erase(0, 1);
        t.comments.push_back(c);
        i = e + 1;
    }
    std::vector<std::vector<std::string>> recs;
    std::vector<std::string> rec;
    std::string field;
    bool quoted = false, any = false;
    for (; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            rec.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (any || !field.empty()) {
                rec.push_back(std::move(field));
                recs.push_back(std::move(rec));
            }
            rec.clear();
            field.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (quoted) throw std::invalid_argument("csv: unterminated quote");
    if (any || !field.empty()) {
        rec.push_back(std::move(field));
        recs.push_back(std::move(rec));
    }
    if (recs.empty()) throw std::invalid_argument("csv: missing header row");
    t.header = recs.front();
    for (std::size_t r = 1; r < recs.size(); ++r) {
        if (recs[r].size() != t.header.size()) throw std::invalid_argument("csv: ragged row " + std::to_string(r));
        t.rows.push_back(std::move(recs[r]));
    }
    return t;
}

} // namespace caustic::csv

#endif
