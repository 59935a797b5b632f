// backtest.hpp
// Strategy-cell types and the four performance metrics. The daily loop itself
// lives in engine.hpp; everything here is pure arithmetic on P&L series.
#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "statarb/date.hpp"
#include "statarb/signals.hpp"

namespace statarb {

enum class ClassKind { fundamental, statistical };
enum class Constructor { reg, opt };

constexpr std::string_view to_string(ClassKind c) {
    return c == ClassKind::fundamental ? "SIC" : "STAT";
}
constexpr std::string_view to_string(Constructor c) {
    return c == Constructor::reg ? "REG" : "OPT";
}

// One Table-style strategy cell: which signal, which classification, which
// construction, and whether trading costs are charged.
struct StrategySpec {
    ReturnKind ret = ReturnKind::c2c1;
    ClassKind cls = ClassKind::fundamental;
    Constructor cons = Constructor::reg;
    bool costs = false;
};

inline std::string cell_name(const StrategySpec& s) {
    return fmt::format("{}_{}_{}_{}", to_string(s.ret), to_string(s.cls), to_string(s.cons),
                       s.costs ? "Y" : "N");
}

struct DrawdownResult {
    double percent = 0;  // peak-to-trough decline as % of capital (>= 0)
    Date trough;         // first date attaining the maximum decline
    Date start, end;     // window actually used
};

struct CellMetrics {
    double roc = 0;               // annualized return on capital, %
    std::optional<double> sharpe; // annualized; empty when P&L std is zero
    std::optional<double> cps;    // cents per share; empty when no shares traded
    DrawdownResult drawdown;
};

struct BacktestResult {
    StrategySpec spec;
    std::vector<Date> dates;  // P&L dates (one fewer than the backtest window)
    std::vector<double> pnl, traded_dollars, traded_shares;
    CellMetrics metrics;
};

// ------------------------------------------------------------------ metrics

// Annualized return on capital in percent: mean daily P&L * 252 / capital * 100.
inline double roc(const std::vector<double>& pnl, double capital) {
    if (pnl.empty()) fail("roc needs a nonempty P&L series");
    if (capital <= 0) fail("roc needs positive capital, got {}", capital);
    double mean = 0;
    for (double p : pnl) mean += p;
    mean /= static_cast<double>(pnl.size());
    return mean * 252.0 / capital * 100.0;
}

// Annualized Sharpe ratio: mean/std * sqrt(252), std with n-1 divisor.
// Zero-variance series have no Sharpe; that is a sentinel, not a zero.
inline std::optional<double> sharpe(const std::vector<double>& pnl) {
    const size_t n = pnl.size();
    if (n < 2) fail("sharpe needs at least 2 observations, got {}", n);
    double mean = 0;
    for (double p : pnl) mean += p;
    mean /= static_cast<double>(n);
    double ss = 0;
    for (double p : pnl) ss += (p - mean) * (p - mean);
    double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd == 0) return std::nullopt;
    return mean / sd * std::sqrt(252.0);
}

// Cents of total P&L per share traded.
inline std::optional<double> cps(const std::vector<double>& pnl, const std::vector<double>& shares) {
    double total_pnl = 0, total_shares = 0;
    for (double p : pnl) total_pnl += p;
    for (double s : shares) total_shares += s;
    if (total_shares <= 0) return std::nullopt;
    return total_pnl * 100.0 / total_shares;
}

// Maximum peak-to-trough decline of cumulative P&L over [start, end]
// (dates inclusive), as a percent of capital.
inline DrawdownResult max_drawdown(const std::vector<Date>& dates, const std::vector<double>& pnl,
                                   Date start, Date end, double capital) {
    if (dates.size() != pnl.size()) fail("drawdown: {} dates vs {} P&L values", dates.size(), pnl.size());
    if (capital <= 0) fail("drawdown needs positive capital, got {}", capital);
    double cum = 0, peak = 0, worst = 0;
    bool in_window = false;
    DrawdownResult res;
    res.start = start;
    res.end = end;
    for (size_t t = 0; t < dates.size(); ++t) {
        cum += pnl[t];
        if (dates[t] < start || dates[t] > end) continue;
        if (!in_window) {
            in_window = true;
            peak = cum;
            res.trough = dates[t];
        }
        peak = std::max(peak, cum);
        if (peak - cum > worst) {
            worst = peak - cum;
            res.trough = dates[t];
        }
    }
    if (!in_window) fail("drawdown window {}..{} contains no P&L dates", start.iso(), end.iso());
    res.percent = worst / capital * 100.0;
    return res;
}

// All four metrics for a finished cell. The drawdown window defaults to the
// last `dd_days` P&L dates when no explicit window is given.
inline CellMetrics compute_metrics(const std::vector<Date>& dates, const std::vector<double>& pnl,
                                   const std::vector<double>& shares, double capital,
                                   std::optional<Date> dd_start = {}, std::optional<Date> dd_end = {},
                                   int dd_days = 23) {
    if (dates.empty()) fail("metrics need a nonempty P&L series");
    CellMetrics m;
    m.roc = roc(pnl, capital);
    m.sharpe = sharpe(pnl);
    m.cps = cps(pnl, shares);
    Date s = dd_start ? *dd_start
                      : dates[dates.size() - std::min(dates.size(), static_cast<size_t>(std::max(dd_days, 1)))];
    Date e = dd_end ? *dd_end : dates.back();
    m.drawdown = max_drawdown(dates, pnl, s, e, capital);
    return m;
}

}  // namespace statarb
