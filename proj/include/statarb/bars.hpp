// bars.hpp
// Daily bar storage: a dense (calendar x ticker) panel of open/close/volume
// with NaN marking absent bars, plus the CSV loader and validation rules.
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "statarb/common.hpp"
#include "statarb/date.hpp"

namespace statarb {

struct BarPanel {
    std::vector<Date> calendar;        // strictly increasing trading dates
    std::vector<std::string> tickers;  // sorted, unique
    // days x tickers; NaN where the (date, ticker) bar is absent.
    Eigen::MatrixXd open, close, volume;

    int days() const { return static_cast<int>(calendar.size()); }
    int size() const { return static_cast<int>(tickers.size()); }

    bool has_bar(int t, int i) const { return std::isfinite(close(t, i)); }

    // Index of `d` in the calendar, or -1 when the date is not a trading day.
    int date_index(Date d) const {
        auto it = std::lower_bound(calendar.begin(), calendar.end(), d);
        if (it == calendar.end() || *it != d) return -1;
        return static_cast<int>(it - calendar.begin());
    }

    int ticker_index(std::string_view ticker) const {
        auto it = std::lower_bound(tickers.begin(), tickers.end(), ticker);
        if (it == tickers.end() || *it != ticker) return -1;
        return static_cast<int>(it - tickers.begin());
    }

    // Every ticker must be present on a contiguous run of calendar dates:
    // once listed it has a bar every day until it drops out for good.
    void validate_contiguous() const {
        for (int i = 0; i < size(); ++i) {
            int first = -1, last = -1;
            for (int t = 0; t < days(); ++t) {
                if (!has_bar(t, i)) continue;
                if (first < 0) first = t;
                last = t;
            }
            if (first < 0) fail("ticker {} has no bars", tickers[i]);
            for (int t = first; t <= last; ++t)
                if (!has_bar(t, i))
                    fail("ticker {} has a gap at {} (bars must cover a contiguous date range)",
                         tickers[i], calendar[t].iso());
        }
    }
};

namespace detail {

// Close-to-close returns for panel column `i` over the `len` closes ending at
// calendar index `end` (inclusive): len-1 values. nullopt if any bar missing.
inline std::optional<Eigen::VectorXd> window_returns(const BarPanel& panel, int i, int end, int len) {
    int first = end - len + 1;
    if (first < 0 || end >= panel.days()) return std::nullopt;
    for (int t = first; t <= end; ++t)
        if (!panel.has_bar(t, i)) return std::nullopt;
    Eigen::VectorXd r(len - 1);
    for (int t = first + 1; t <= end; ++t)
        r(t - first - 1) = panel.close(t, i) / panel.close(t - 1, i) - 1.0;
    return r;
}

struct BarRow {
    Date date;
    int ticker = -1;
    double open = 0, close = 0, volume = 0;
    int line = 0;
};

inline double parse_positive(std::string_view field, const char* what, const std::filesystem::path& path,
                             int line, bool allow_zero) {
    double v = 0;
    auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || p != field.data() + field.size() || !std::isfinite(v))
        fail("{}:{}: unparseable {} '{}'", path.string(), line, what, field);
    if (v < 0 || (!allow_zero && v == 0))
        fail("{}:{}: {} must be {} (got '{}')", path.string(), line, what,
             allow_zero ? "non-negative" : "positive", field);
    return v;
}

}  // namespace detail

// Loads a bar CSV with header "date,ticker,open,close,volume". Rows may come
// in any order; duplicate (date, ticker) pairs, malformed fields, non-positive
// prices, negative volumes and mid-history gaps are hard errors.
inline BarPanel load_bars(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open bar file {}", path.string());

    std::string line;
    if (!std::getline(in, line)) fail("{}: empty bar file", path.string());
    // Tolerate a UTF-8 BOM and trailing CR.
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "date,ticker,open,close,volume")
        fail("{}: expected header 'date,ticker,open,close,volume', got '{}'", path.string(), line);

    std::vector<detail::BarRow> rows;
    std::unordered_map<std::string, int> ticker_ids;
    std::vector<std::string> ticker_names;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::string_view fields[5];
        std::string_view rest = line;
        for (int f = 0; f < 5; ++f) {
            size_t comma = rest.find(',');
            if (f < 4) {
                if (comma == std::string_view::npos)
                    fail("{}:{}: expected 5 comma-separated fields, got '{}'", path.string(), lineno, line);
                fields[f] = rest.substr(0, comma);
                rest.remove_prefix(comma + 1);
            } else {
                if (comma != std::string_view::npos)
                    fail("{}:{}: expected 5 comma-separated fields, got '{}'", path.string(), lineno, line);
                fields[f] = rest;
            }
        }
        detail::BarRow row;
        try {
            row.date = Date::parse(fields[0]);
        } catch (const Error& e) {
            fail("{}:{}: {}", path.string(), lineno, e.what());
        }
        if (fields[1].empty()) fail("{}:{}: empty ticker", path.string(), lineno);
        auto [it, inserted] = ticker_ids.try_emplace(std::string(fields[1]),
                                                     static_cast<int>(ticker_names.size()));
        if (inserted) ticker_names.emplace_back(fields[1]);
        row.ticker = it->second;
        row.open = detail::parse_positive(fields[2], "open", path, lineno, false);
        row.close = detail::parse_positive(fields[3], "close", path, lineno, false);
        row.volume = detail::parse_positive(fields[4], "volume", path, lineno, true);
        row.line = lineno;
        rows.push_back(row);
    }
    if (rows.empty()) fail("{}: no bar rows", path.string());

    BarPanel panel;
    {
        std::vector<Date> dates;
        dates.reserve(rows.size());
        for (const auto& r : rows) dates.push_back(r.date);
        std::sort(dates.begin(), dates.end());
        dates.erase(std::unique(dates.begin(), dates.end()), dates.end());
        panel.calendar = std::move(dates);
    }
    // Remap tickers to sorted order.
    std::vector<int> order(ticker_names.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return ticker_names[a] < ticker_names[b]; });
    std::vector<int> new_id(ticker_names.size());
    panel.tickers.resize(ticker_names.size());
    for (size_t pos = 0; pos < order.size(); ++pos) {
        new_id[order[pos]] = static_cast<int>(pos);
        panel.tickers[pos] = std::move(ticker_names[order[pos]]);
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    panel.open.setConstant(panel.days(), panel.size(), nan);
    panel.close.setConstant(panel.days(), panel.size(), nan);
    panel.volume.setConstant(panel.days(), panel.size(), nan);
    for (const auto& r : rows) {
        int t = panel.date_index(r.date);
        int i = new_id[r.ticker];
        if (std::isfinite(panel.close(t, i)))
            fail("{}:{}: duplicate bar for ({}, {})", path.string(), r.line,
                 r.date.iso(), panel.tickers[i]);
        panel.open(t, i) = r.open;
        panel.close(t, i) = r.close;
        panel.volume(t, i) = r.volume;
    }
    panel.validate_contiguous();
    return panel;
}

// Writes a panel back out in the loader's format (absent bars are skipped).
inline void write_bars_csv(const std::filesystem::path& path, const BarPanel& panel) {
    std::ofstream out(path);
    if (!out) fail("cannot write bar file {}", path.string());
    out << "date,ticker,open,close,volume\n";
    for (int t = 0; t < panel.days(); ++t) {
        std::string day = panel.calendar[t].iso();
        for (int i = 0; i < panel.size(); ++i) {
            if (!panel.has_bar(t, i)) continue;
            out << fmt::format("{},{},{},{},{}\n", day, panel.tickers[i], panel.open(t, i),
                               panel.close(t, i), panel.volume(t, i));
        }
    }
    if (!out) fail("failed writing bar file {}", path.string());
}

}  // namespace statarb
