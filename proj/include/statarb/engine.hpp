// engine.hpp
// The backtest driver: builds per-refresh context (universe, variances,
// classifications, risk models, cost model) and runs the establish-at-open /
// liquidate-at-close daily loop for each strategy cell. Refresh contexts are
// shared across cells; cells and refreshes may run concurrently.
#pragma once

#include <atomic>
#include <memory>
#include <optional>
#include <thread>
#include <vector>

#include "statarb/backtest.hpp"
#include "statarb/classify.hpp"
#include "statarb/construct.hpp"
#include "statarb/costs.hpp"
#include "statarb/riskmodel.hpp"
#include "statarb/signals.hpp"
#include "statarb/universe.hpp"

namespace statarb {

struct BacktestParams {
    int universe_size = 2000;
    int lookback = 21;
    int backtest_days = 252;
    int refresh_period = 21;
    double gross = 2.0e7;
    double bound_fraction = 0.01;             // position/trading bound as a fraction of ADDV
    std::vector<int> stat_levels = {100, 30, 10};
    std::uint64_t seed = 1;
    double cost_linear_bps = 5.0;
    double cost_target_bps = 10.0;
    // Drawdown window; when unset, the last 23 trading days of the backtest.
    std::optional<Date> drawdown_start, drawdown_end;
    int drawdown_days = 23;
    OptimizerConfig optimizer;
    const Classification* fundamental = nullptr;  // needed by SIC cells
};

// Which shared structures the strategy grid actually needs.
struct EngineNeeds {
    bool fundamental = false;
    bool statistical = false;
    bool opt = false;
};

inline EngineNeeds needs_of(const std::vector<StrategySpec>& specs) {
    EngineNeeds n;
    for (const auto& s : specs) {
        (s.cls == ClassKind::fundamental ? n.fundamental : n.statistical) = true;
        if (s.cons == Constructor::opt) n.opt = true;
    }
    return n;
}

// Everything rebuilt on the refresh schedule and frozen for the next period.
struct RefreshContext {
    Date refresh_date;
    int first_day = 0, last_day = 0;  // calendar index range governed (inclusive)
    Universe universe;
    std::vector<std::string> member_tickers;
    Eigen::VectorXd variance;     // floored trailing variance (regression weights)
    Eigen::VectorXd cost_sigma;   // raw trailing daily volatility (cost model input)
    Eigen::VectorXd bounds;       // bound_fraction * ADDV
    CostModel cost_model;
    std::optional<DummyMatrix> fundamental_dummy, statistical_dummy;
    std::optional<RiskModel> fundamental_risk, statistical_risk;
    std::optional<Classification> statistical_cls;
};

namespace detail {

// Run fn(0..count-1) on up to `jobs` threads. Exceptions propagate.
template <typename Fn>
void parallel_for(int count, int jobs, Fn&& fn) {
    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::max(1, std::min(jobs, count));
    if (jobs == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<size_t>(jobs));
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                errors[static_cast<size_t>(w)] = std::current_exception();
                next.store(count);  // drain remaining work
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace detail

inline std::vector<RefreshContext> build_refresh_contexts(const BarPanel& panel,
                                                          const BacktestParams& params,
                                                          const EngineNeeds& needs, int jobs = 1) {
    if (panel.days() < params.backtest_days + params.lookback)
        fail("panel has {} days; backtest needs {} plus {} lookback", panel.days(),
             params.backtest_days, params.lookback);
    if (needs.fundamental && params.fundamental == nullptr)
        fail("strategy grid includes fundamental-classification cells but no classification was provided");

    std::vector<Date> refreshes = rebalance_schedule(panel.calendar, params.backtest_days,
                                                     params.refresh_period);
    const int n_ref = static_cast<int>(refreshes.size());
    const int last_idx = panel.days() - 1;
    std::vector<RefreshContext> contexts(static_cast<size_t>(n_ref));

    detail::parallel_for(n_ref, jobs, [&](int r) {
        RefreshContext& ctx = contexts[static_cast<size_t>(r)];
        ctx.refresh_date = refreshes[static_cast<size_t>(r)];
        ctx.first_day = panel.date_index(ctx.refresh_date);
        ctx.last_day = r + 1 < n_ref
                           ? panel.date_index(refreshes[static_cast<size_t>(r + 1)]) - 1
                           : last_idx;
        ctx.universe = select_universe(panel, ctx.refresh_date, params.universe_size, params.lookback);
        const int m = static_cast<int>(ctx.universe.members.size());
        ctx.member_tickers.reserve(m);
        for (int i : ctx.universe.members) ctx.member_tickers.push_back(panel.tickers[i]);
        ctx.variance = ctx.universe.sigma2.cwiseMax(1e-8);
        ctx.cost_sigma = ctx.universe.sigma2.cwiseMax(0.0).cwiseSqrt();
        ctx.bounds = params.bound_fraction * ctx.universe.addv;
        ctx.cost_model = calibrate_cost_model(ctx.universe, params.gross, params.cost_linear_bps,
                                              params.cost_target_bps);

        std::optional<Eigen::MatrixXd> trailing;  // lookback-window member returns
        auto trailing_returns = [&]() -> const Eigen::MatrixXd& {
            if (!trailing)
                trailing = member_returns(panel, ctx.universe.members, ctx.first_day - 1, params.lookback);
            return *trailing;
        };

        if (needs.fundamental) {
            ctx.fundamental_dummy = dummy_matrix(*params.fundamental, 0, ctx.member_tickers);
            if (needs.opt)
                ctx.fundamental_risk = build_risk_model(trailing_returns(), *ctx.fundamental_dummy);
        }
        if (needs.statistical) {
            ctx.statistical_cls = build_statistical_classification(
                ctx.member_tickers, trailing_returns(), params.stat_levels,
                detail::mix_seed(params.seed, static_cast<uint64_t>(r)));
            ctx.statistical_dummy = dummy_matrix(*ctx.statistical_cls, 0, ctx.member_tickers);
            if (needs.opt)
                ctx.statistical_risk = build_risk_model(trailing_returns(), *ctx.statistical_dummy);
        }
    });
    return contexts;
}

// Daily loop for one strategy cell over prebuilt contexts.
inline BacktestResult run_cell(const BarPanel& panel, const StrategySpec& spec,
                               const BacktestParams& params,
                               const std::vector<RefreshContext>& contexts) {
    if (contexts.empty()) fail("run_cell needs at least one refresh context");
    BacktestResult res;
    res.spec = spec;
    const int start = contexts.front().first_day;
    const int last = contexts.back().last_day;
    const Direction direction = direction_of(spec.ret);

    size_t ctx_idx = 0;
    for (int t = start + 1; t <= last; ++t) {
        while (t > contexts[ctx_idx].last_day) ++ctx_idx;
        const RefreshContext& ctx = contexts[ctx_idx];
        const Date day = panel.calendar[t];
        res.dates.push_back(day);

        SignalVector sig = compute_signal(panel, ctx.universe.members, day, spec.ret);
        std::vector<int> live;  // indices into ctx member arrays
        live.reserve(ctx.universe.members.size());
        for (size_t k = 0; k < ctx.universe.members.size(); ++k)
            if (std::isfinite(sig.values(static_cast<int>(k))) &&
                panel.has_bar(t, ctx.universe.members[k]) && ctx.bounds(static_cast<int>(k)) > 0)
                live.push_back(static_cast<int>(k));

        if (live.size() < 2) {
            warn("{} {}: {} tradable members; holding nothing", cell_name(spec), day.iso(), live.size());
            res.pnl.push_back(0);
            res.traded_dollars.push_back(0);
            res.traded_shares.push_back(0);
            continue;
        }

        const int m = static_cast<int>(live.size());
        Eigen::VectorXd R(m), var(m), B(m);
        for (int k = 0; k < m; ++k) {
            R(k) = sig.values(live[k]);
            var(k) = ctx.variance(live[k]);
            B(k) = ctx.bounds(live[k]);
        }
        const DummyMatrix& dm_full = spec.cls == ClassKind::fundamental ? *ctx.fundamental_dummy
                                                                        : *ctx.statistical_dummy;
        DummyMatrix dm = dm_full.restrict(live);

        Holdings holdings;
        if (spec.cons == Constructor::reg) {
            holdings = regression_portfolio(R, dm, var, B, direction, params.gross, day);
        } else {
            Eigen::VectorXd eps = weighted_regression_residuals(R, dm, var.cwiseInverse());
            Eigen::VectorXd E = direction == Direction::mean_reversion ? (-eps).eval() : eps;
            const RiskModel& model_full = spec.cls == ClassKind::fundamental ? *ctx.fundamental_risk
                                                                             : *ctx.statistical_risk;
            RiskModel model = model_full.restrict(live);
            holdings = optimize_portfolio(E, model, B, params.gross, params.optimizer, nullptr, day);
        }

        double pnl = 0, dollars = 0, shares = 0;
        for (int k = 0; k < m; ++k) {
            const double d = holdings.dollars(k);
            if (d == 0) continue;
            const int col = ctx.universe.members[live[k]];
            const double open = panel.open(t, col), close = panel.close(t, col);
            pnl += d * (close - open) / open;
            const double traded = std::abs(d);
            dollars += 2 * traded;
            shares += traded / open + traded / close;
            if (spec.costs)
                pnl -= 2 * trade_cost(traded, ctx.universe.addv(live[k]), ctx.cost_sigma(live[k]),
                                      ctx.cost_model);
        }
        res.pnl.push_back(pnl);
        res.traded_dollars.push_back(dollars);
        res.traded_shares.push_back(shares);
    }

    res.metrics = compute_metrics(res.dates, res.pnl, res.traded_shares, params.gross,
                                  params.drawdown_start, params.drawdown_end, params.drawdown_days);
    return res;
}

// One-call convenience: builds contexts for just this spec and runs it.
inline BacktestResult run_backtest(const BarPanel& panel, const StrategySpec& spec,
                                   const BacktestParams& params) {
    auto contexts = build_refresh_contexts(panel, params, needs_of({spec}));
    return run_cell(panel, spec, params, contexts);
}

// All cells against shared contexts; cells run concurrently.
inline std::vector<BacktestResult> run_grid(const BarPanel& panel,
                                            const std::vector<StrategySpec>& specs,
                                            const BacktestParams& params, int jobs = 1) {
    if (specs.empty()) fail("strategy grid is empty");
    auto contexts = build_refresh_contexts(panel, params, needs_of(specs), jobs);
    std::vector<BacktestResult> results(specs.size());
    detail::parallel_for(static_cast<int>(specs.size()), jobs,
                         [&](int i) { results[static_cast<size_t>(i)] = run_cell(panel, specs[static_cast<size_t>(i)], params, contexts); });
    return results;
}

// The full Table-style grid: SIC/REG, SIC/OPT, STAT/OPT blocks; within each,
// returns ordered D0, MOM1, C2C1, C2C5, C2C10, C2C20 with costs off then on.
inline std::vector<StrategySpec> full_grid() {
    const ReturnKind order[] = {ReturnKind::d0, ReturnKind::mom1, ReturnKind::c2c1,
                                ReturnKind::c2c5, ReturnKind::c2c10, ReturnKind::c2c20};
    std::vector<StrategySpec> grid;
    for (auto [cls, cons] : {std::pair{ClassKind::fundamental, Constructor::reg},
                             std::pair{ClassKind::fundamental, Constructor::opt},
                             std::pair{ClassKind::statistical, Constructor::opt}})
        for (ReturnKind r : order)
            for (bool costs : {false, true}) grid.push_back({r, cls, cons, costs});
    return grid;
}

}  // namespace statarb
