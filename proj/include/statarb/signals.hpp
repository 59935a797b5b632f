// signals.hpp
// Per-member trading signals. Every signal for trading day t uses only
// information available at t's open: trailing closes, the previous session,
// or (for the overnight kind) today's open itself.
#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "statarb/bars.hpp"
#include "statarb/mathutil.hpp"

namespace statarb {

enum class ReturnKind { c2c1, c2c5, c2c10, c2c20, mom1, d0 };
enum class Direction { mean_reversion, momentum };

constexpr ReturnKind all_return_kinds[] = {ReturnKind::c2c1, ReturnKind::c2c5, ReturnKind::c2c10,
                                           ReturnKind::c2c20, ReturnKind::mom1, ReturnKind::d0};

// Yesterday's winners are faded by every kind except the open-to-close
// momentum signal, which is chased.
constexpr Direction direction_of(ReturnKind k) {
    return k == ReturnKind::mom1 ? Direction::momentum : Direction::mean_reversion;
}

constexpr std::string_view to_string(ReturnKind k) {
    switch (k) {
        case ReturnKind::c2c1: return "C2C1";
        case ReturnKind::c2c5: return "C2C5";
        case ReturnKind::c2c10: return "C2C10";
        case ReturnKind::c2c20: return "C2C20";
        case ReturnKind::mom1: return "MOM1";
        case ReturnKind::d0: return "D0";
    }
    return "?";
}

inline ReturnKind return_kind_from_string(std::string_view s) {
    for (ReturnKind k : all_return_kinds)
        if (to_string(k) == s) return k;
    fail("unknown return kind '{}'", s);
}

struct SignalVector {
    Date asof;
    ReturnKind kind;
    Direction direction;
    Eigen::VectorXd values;  // one per member; NaN where history is missing
};

namespace detail {

inline int trading_index(const BarPanel& panel, Date asof) {
    int t = panel.date_index(asof);
    if (t < 0) fail("as-of date {} is not a trading day in the panel", asof.iso());
    return t;
}

}  // namespace detail

// Mean of the last `d` close-to-close returns, ending at yesterday's close.
inline SignalVector c2c_signal(const BarPanel& panel, const std::vector<int>& members, Date asof, int d) {
    if (d < 1) fail("c2c depth must be positive, got {}", d);
    int t = detail::trading_index(panel, asof);
    ReturnKind kind = d == 1    ? ReturnKind::c2c1
                      : d == 5  ? ReturnKind::c2c5
                      : d == 10 ? ReturnKind::c2c10
                      : d == 20 ? ReturnKind::c2c20
                                : ReturnKind::c2c1;
    SignalVector s{asof, kind, Direction::mean_reversion,
                   Eigen::VectorXd::Constant(static_cast<int>(members.size()),
                                             std::numeric_limits<double>::quiet_NaN())};
    for (size_t k = 0; k < members.size(); ++k) {
        auto r = detail::window_returns(panel, members[k], t - 1, d + 1);
        if (r) s.values(static_cast<int>(k)) = r->mean();
    }
    return s;
}

// Previous session's open-to-close return.
inline SignalVector mom1_signal(const BarPanel& panel, const std::vector<int>& members, Date asof) {
    int t = detail::trading_index(panel, asof);
    SignalVector s{asof, ReturnKind::mom1, Direction::momentum,
                   Eigen::VectorXd::Constant(static_cast<int>(members.size()),
                                             std::numeric_limits<double>::quiet_NaN())};
    if (t < 1) return s;
    for (size_t k = 0; k < members.size(); ++k) {
        int i = members[k];
        if (panel.has_bar(t - 1, i))
            s.values(static_cast<int>(k)) = panel.close(t - 1, i) / panel.open(t - 1, i) - 1.0;
    }
    return s;
}

// Overnight gap: today's open over yesterday's close. Known at the open, so
// usable with zero delay.
inline SignalVector d0_signal(const BarPanel& panel, const std::vector<int>& members, Date asof) {
    int t = detail::trading_index(panel, asof);
    SignalVector s{asof, ReturnKind::d0, Direction::mean_reversion,
                   Eigen::VectorXd::Constant(static_cast<int>(members.size()),
                                             std::numeric_limits<double>::quiet_NaN())};
    if (t < 1) return s;
    for (size_t k = 0; k < members.size(); ++k) {
        int i = members[k];
        if (panel.has_bar(t - 1, i) && panel.has_bar(t, i))
            s.values(static_cast<int>(k)) = panel.open(t, i) / panel.close(t - 1, i) - 1.0;
    }
    return s;
}

inline SignalVector compute_signal(const BarPanel& panel, const std::vector<int>& members, Date asof,
                                   ReturnKind kind) {
    switch (kind) {
        case ReturnKind::c2c1: return c2c_signal(panel, members, asof, 1);
        case ReturnKind::c2c5: return c2c_signal(panel, members, asof, 5);
        case ReturnKind::c2c10: return c2c_signal(panel, members, asof, 10);
        case ReturnKind::c2c20: return c2c_signal(panel, members, asof, 20);
        case ReturnKind::mom1: return mom1_signal(panel, members, asof);
        case ReturnKind::d0: return d0_signal(panel, members, asof);
    }
    fail("unknown return kind");
}

// Trailing close-to-close return variance over `lookback` closes ending the
// day before `asof`, floored away from zero so downstream 1/sigma^2 weights
// stay finite. NaN where history is incomplete.
inline Eigen::VectorXd historical_variance(const BarPanel& panel, const std::vector<int>& members,
                                           Date asof, int lookback = 21, double floor = 1e-8) {
    int t = detail::trading_index(panel, asof);
    Eigen::VectorXd v = Eigen::VectorXd::Constant(static_cast<int>(members.size()),
                                                  std::numeric_limits<double>::quiet_NaN());
    for (size_t k = 0; k < members.size(); ++k) {
        auto r = detail::window_returns(panel, members[k], t - 1, lookback);
        if (r) v(static_cast<int>(k)) = std::max(detail::sample_variance(*r), floor);
    }
    return v;
}

}  // namespace statarb
