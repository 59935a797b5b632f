// universe.hpp
// Liquidity-ranked universe selection and the periodic refresh schedule.
// All trailing windows end the day BEFORE the as-of date: a universe picked
// for date r is built only from data available at r's open.
#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "statarb/bars.hpp"
#include "statarb/mathutil.hpp"

namespace statarb {

struct Universe {
    Date effective_start;       // first trading date governed by this universe
    std::vector<int> members;   // panel ticker indices, most liquid first
    Eigen::VectorXd addv;       // average daily dollar volume per member
    Eigen::VectorXd sigma2;     // trailing close-to-close return variance (raw, unfloored)
};

// Average close*volume over the `lookback` days ending the day before `asof`.
// NaN for tickers without full coverage of that window.
inline Eigen::VectorXd compute_addv(const BarPanel& panel, Date asof, int lookback = 21) {
    int a = panel.date_index(asof);
    if (a < 0) fail("as-of date {} is not a trading day in the panel", asof.iso());
    if (a < lookback)
        fail("as-of date {} has only {} prior trading days, need {}", asof.iso(), a, lookback);
    Eigen::VectorXd addv = Eigen::VectorXd::Constant(panel.size(), std::numeric_limits<double>::quiet_NaN());
    for (int i = 0; i < panel.size(); ++i) {
        double sum = 0;
        bool full = true;
        for (int t = a - lookback; t < a; ++t) {
            if (!panel.has_bar(t, i)) {
                full = false;
                break;
            }
            sum += panel.close(t, i) * panel.volume(t, i);
        }
        if (full) addv(i) = sum / lookback;
    }
    return addv;
}

// Top `size` tickers by ADDV among those with full lookback coverage and
// positive dollar volume. Ties break toward the lexicographically smaller
// ticker so selection is deterministic.
inline Universe select_universe(const BarPanel& panel, Date asof, int size = 2000, int lookback = 21) {
    if (size < 1) fail("universe size must be positive, got {}", size);
    Eigen::VectorXd addv = compute_addv(panel, asof, lookback);
    int a = panel.date_index(asof);

    std::vector<int> eligible;
    for (int i = 0; i < panel.size(); ++i)
        if (std::isfinite(addv(i)) && addv(i) > 0) eligible.push_back(i);
    if (eligible.empty()) fail("no tickers eligible for the {} universe", asof.iso());
    if (static_cast<int>(eligible.size()) < size)
        warn("only {} tickers eligible at {} for a size-{} universe", eligible.size(), asof.iso(), size);

    std::sort(eligible.begin(), eligible.end(), [&](int x, int y) {
        if (addv(x) != addv(y)) return addv(x) > addv(y);
        return panel.tickers[x] < panel.tickers[y];
    });
    if (static_cast<int>(eligible.size()) > size) eligible.resize(size);

    Universe u;
    u.effective_start = asof;
    u.members = std::move(eligible);
    int m = static_cast<int>(u.members.size());
    u.addv.resize(m);
    u.sigma2.resize(m);
    for (int k = 0; k < m; ++k) {
        int i = u.members[k];
        u.addv(k) = addv(i);
        auto r = detail::window_returns(panel, i, a - 1, lookback);
        // Eligibility already guarantees coverage of this exact window.
        u.sigma2(k) = detail::sample_variance(*r);
    }
    return u;
}

// Close-to-close return history for a member list: (len-1) x members matrix of
// returns over the `len` closes ending at calendar index `end`. Hard error if
// any member lacks coverage (callers pass universe members, which have it).
inline Eigen::MatrixXd member_returns(const BarPanel& panel, const std::vector<int>& members,
                                      int end, int len) {
    Eigen::MatrixXd out(len - 1, static_cast<int>(members.size()));
    for (size_t k = 0; k < members.size(); ++k) {
        auto r = detail::window_returns(panel, members[k], end, len);
        if (!r) fail("ticker {} lacks bar coverage for the {}-day window ending {}",
                     panel.tickers[members[k]], len, panel.calendar[end].iso());
        out.col(static_cast<int>(k)) = *r;
    }
    return out;
}

// Refresh dates: every `period`-th trading day of the backtest span, starting
// at its first day. The backtest span is the last `backtest_days` dates.
inline std::vector<Date> rebalance_schedule(const std::vector<Date>& calendar, int backtest_days = 252,
                                            int period = 21) {
    if (backtest_days < 1 || period < 1)
        fail("backtest_days and refresh period must be positive (got {}, {})", backtest_days, period);
    if (static_cast<int>(calendar.size()) < backtest_days)
        fail("calendar has {} days, backtest needs {}", calendar.size(), backtest_days);
    int start = static_cast<int>(calendar.size()) - backtest_days;
    std::vector<Date> refreshes;
    for (int k = 0; k < backtest_days; k += period) refreshes.push_back(calendar[start + k]);
    return refreshes;
}

}  // namespace statarb
