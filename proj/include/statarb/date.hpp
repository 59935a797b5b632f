// date.hpp
// Minimal calendar date: a serial day count with ISO parsing/formatting and
// weekday arithmetic. No timezones, no intraday time.
#pragma once

#include <charconv>
#include <compare>
#include <string>
#include <string_view>

#include "statarb/common.hpp"

namespace statarb {

class Date {
public:
    Date() = default;
    explicit Date(int serial) : serial_(serial) {}

    // Days since 1970-01-01 (negative before the epoch).
    static Date from_ymd(int y, int m, int d) {
        if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m))
            fail("invalid calendar date {:04d}-{:02d}-{:02d}", y, m, d);
        // Howard Hinnant's days-from-civil algorithm.
        y -= m <= 2;
        const int era = (y >= 0 ? y : y - 399) / 400;
        const unsigned yoe = static_cast<unsigned>(y - era * 400);              // [0, 399]
        const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 + static_cast<unsigned>(d) - 1;
        const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;             // [0, 146096]
        return Date(era * 146097 + static_cast<int>(doe) - 719468);
    }

    // Accepts exactly "YYYY-MM-DD".
    static Date parse(std::string_view s) {
        auto bad = [&] { fail("unparseable date '{}' (expected YYYY-MM-DD)", s); };
        if (s.size() != 10 || s[4] != '-' || s[7] != '-') bad();
        int y = 0, m = 0, d = 0;
        auto num = [&](size_t pos, size_t len, int& out) {
            auto [p, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, out);
            if (ec != std::errc{} || p != s.data() + pos + len) bad();
        };
        num(0, 4, y);
        num(5, 2, m);
        num(8, 2, d);
        return from_ymd(y, m, d);
    }

    struct Ymd {
        int year, month, day;
    };

    Ymd ymd() const {
        // Howard Hinnant's civil-from-days algorithm.
        int z = serial_ + 719468;
        const int era = (z >= 0 ? z : z - 146096) / 146097;
        const unsigned doe = static_cast<unsigned>(z - era * 146097);           // [0, 146096]
        const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
        const int y = static_cast<int>(yoe) + era * 400;
        const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);           // [0, 365]
        const unsigned mp = (5 * doy + 2) / 153;                                // [0, 11]
        const unsigned d = doy - (153 * mp + 2) / 5 + 1;                        // [1, 31]
        const unsigned m = mp + (mp < 10 ? 3 : static_cast<unsigned>(-9));      // [1, 12]
        return Ymd{y + (m <= 2), static_cast<int>(m), static_cast<int>(d)};
    }

    std::string iso() const {
        auto [y, m, d] = ymd();
        return fmt::format("{:04d}-{:02d}-{:02d}", y, m, d);
    }

    int serial() const { return serial_; }

    // 0 = Sunday ... 6 = Saturday. 1970-01-01 was a Thursday.
    int weekday() const {
        int w = (serial_ + 4) % 7;
        return w < 0 ? w + 7 : w;
    }

    bool is_weekday() const {
        int w = weekday();
        return w != 0 && w != 6;
    }

    Date next_weekday() const {
        Date d(serial_ + 1);
        while (!d.is_weekday()) d = Date(d.serial_ + 1);
        return d;
    }

    friend Date operator+(Date a, int days) { return Date(a.serial_ + days); }
    friend int operator-(Date a, Date b) { return a.serial_ - b.serial_; }
    auto operator<=>(const Date&) const = default;

private:
    static bool is_leap(int y) { return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0); }
    static int days_in_month(int y, int m) {
        static constexpr int len[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
        return m == 2 && is_leap(y) ? 29 : len[m - 1];
    }

    int serial_ = 0;
};

}  // namespace statarb
