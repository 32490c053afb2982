#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>

namespace chanscope {

/// Base error for every validation or contract failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input-format failure; carries the 1-based line number of the offending record.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

enum class Label : int { neutral = 0, abusive = 1 };

inline constexpr int index_of(Label l) noexcept { return static_cast<int>(l); }

inline std::string_view to_string(Label l) noexcept {
    return l == Label::abusive ? "abusive" : "neutral";
}

inline Label parse_label(std::string_view s) {
    if (s == "abusive") return Label::abusive;
    if (s == "neutral") return Label::neutral;
    throw Error("unknown label '" + std::string(s) + "'");
}

struct MessageKey {
    std::string channel_id;
    std::int64_t message_id = 0;

    friend auto operator<=>(const MessageKey&, const MessageKey&) = default;
    friend bool operator==(const MessageKey&, const MessageKey&) = default;
};

/// "channel:id", splitting at the last colon.
inline std::string to_string(const MessageKey& k) {
    return k.channel_id + ":" + std::to_string(k.message_id);
}

inline MessageKey parse_message_key(std::string_view s) {
    auto pos = s.rfind(':');
    if (pos == std::string_view::npos || pos == 0 || pos + 1 == s.size())
        throw Error("malformed message key '" + std::string(s) + "'");
    MessageKey k;
    k.channel_id = std::string(s.substr(0, pos));
    auto tail = s.substr(pos + 1);
    auto [p, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), k.message_id);
    if (ec != std::errc{} || p != tail.data() + tail.size())
        throw Error("malformed message id in key '" + std::string(s) + "'");
    return k;
}

// ---------------------------------------------------------------------------
// Time. All instants are UTC with millisecond resolution.

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

namespace detail {

inline bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
        v = v * 10 + (s[i] - '0');
    }
    out = v;
    return true;
}

} // namespace detail

/// Parses RFC 3339 ("2020-05-01T12:00:00Z", optional fraction, Z or +hh:mm offset).
inline std::optional<Timestamp> parse_timestamp(std::string_view s) {
    using namespace std::chrono;
    int y, mo, d, h, mi, se;
    if (!detail::read_int(s, 0, 4, y) || s.size() < 20 || s[4] != '-' ||
        !detail::read_int(s, 5, 2, mo) || s[7] != '-' || !detail::read_int(s, 8, 2, d) ||
        (s[10] != 'T' && s[10] != 't' && s[10] != ' ') || !detail::read_int(s, 11, 2, h) ||
        s[13] != ':' || !detail::read_int(s, 14, 2, mi) || s[16] != ':' ||
        !detail::read_int(s, 17, 2, se))
        return std::nullopt;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || se > 59) return std::nullopt;

    std::size_t pos = 19;
    std::int64_t millis = 0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        std::size_t digits = 0;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
            if (digits < 3) millis = millis * 10 + (s[pos] - '0');
            ++digits;
            ++pos;
        }
        if (digits == 0) return std::nullopt;
        for (std::size_t i = digits; i < 3; ++i) millis *= 10;
    }
    int offset_minutes = 0;
    if (pos < s.size() && (s[pos] == 'Z' || s[pos] == 'z')) {
        ++pos;
    } else if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
        int oh, om;
        if (!detail::read_int(s, pos + 1, 2, oh) || pos + 3 >= s.size() || s[pos + 3] != ':' ||
            !detail::read_int(s, pos + 4, 2, om) || oh > 23 || om > 59)
            return std::nullopt;
        offset_minutes = (oh * 60 + om) * (s[pos] == '+' ? 1 : -1);
        pos += 6;
    } else {
        return std::nullopt;
    }
    if (pos != s.size()) return std::nullopt;

    auto t = sys_days{ymd} + hours{h} + minutes{mi} + seconds{se} + milliseconds{millis} -
             minutes{offset_minutes};
    return time_point_cast<milliseconds>(t);
}

/// Canonical RFC 3339 UTC rendering; the fraction is printed only when non-zero.
inline std::string format_timestamp(Timestamp t) {
    using namespace std::chrono;
    auto day_point = floor<days>(t);
    year_month_day ymd{day_point};
    auto rest = t - day_point;
    auto h = duration_cast<hours>(rest);
    rest -= h;
    auto mi = duration_cast<minutes>(rest);
    rest -= mi;
    auto se = duration_cast<seconds>(rest);
    rest -= se;
    char buf[40];
    int n = std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                          static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                          static_cast<int>(h.count()), static_cast<int>(mi.count()),
                          static_cast<int>(se.count()));
    std::string out(buf, static_cast<std::size_t>(n));
    if (rest.count() != 0) {
        std::snprintf(buf, sizeof buf, ".%03d", static_cast<int>(rest.count()));
        out += buf;
    }
    out += 'Z';
    return out;
}

inline Timestamp make_timestamp(int y, unsigned mo, unsigned d, int h = 0, int mi = 0, int s = 0) {
    using namespace std::chrono;
    return time_point_cast<milliseconds>(sys_days{year{y} / month{mo} / day{d}} + hours{h} +
                                         minutes{mi} + seconds{s});
}

/// Calendar month used for bucketing.
struct YearMonth {
    int year = 1970;
    unsigned month = 1; // 1..12

    friend auto operator<=>(const YearMonth&, const YearMonth&) = default;
    friend bool operator==(const YearMonth&, const YearMonth&) = default;

    YearMonth next() const { return month == 12 ? YearMonth{year + 1, 1} : YearMonth{year, month + 1}; }

    Timestamp start() const { return make_timestamp(year, month, 1); }

    static YearMonth of(Timestamp t) {
        std::chrono::year_month_day ymd{std::chrono::floor<std::chrono::days>(t)};
        return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month())};
    }
};

inline std::string to_string(const YearMonth& ym) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u", ym.year, ym.month);
    return buf;
}

inline std::optional<YearMonth> parse_year_month(std::string_view s) {
    int y, m;
    if (s.size() != 7 || s[4] != '-' || !detail::read_int(s, 0, 4, y) || !detail::read_int(s, 5, 2, m) ||
        m < 1 || m > 12)
        return std::nullopt;
    return YearMonth{y, static_cast<unsigned>(m)};
}

/// Shortest round-trip decimal rendering of a double.
inline std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

/// Fixed-precision rendering used in human-facing reports.
inline std::string format_fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

} // namespace chanscope
