// construct.hpp
// Signal -> dollar holdings. REG: bounded industry-neutral weighted
// regression. OPT: bounded dollar-neutral mean-variance optimization against
// the factor risk model. Both target gross I before bounding and never
// rescale gross back up after bounds bind.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "statarb/classify.hpp"
#include "statarb/date.hpp"
#include "statarb/riskmodel.hpp"
#include "statarb/signals.hpp"

namespace statarb {

struct Holdings {
    Date asof;
    Eigen::VectorXd dollars;       // signed position per member
    double gross_target = 2.0e7;   // I
    Eigen::VectorXd bounds;        // per-member |D_i| cap
};

struct OptimizerConfig {
    int max_iterations = 300;      // active-set iteration cap
    double kkt_tolerance = 1e-8;   // relative KKT residual required for convergence
};

struct OptimizeDiag {
    double lambda = 0;             // risk aversion actually used
    int iterations = 0;
    bool converged = true;
    double kkt_residual = 0;
};

// ---------------------------------------------------------------- residuals

// epsilon = R minus the member's cluster mean, means fitted by weighted least
// squares on the binary dummy matrix (per-cluster weighted means).
inline Eigen::VectorXd weighted_regression_residuals(const Eigen::VectorXd& R, const DummyMatrix& dm,
                                                     const Eigen::VectorXd& w) {
    const int n = dm.rows();
    if (R.size() != n || w.size() != n)
        fail("residuals: sizes disagree (R {}, w {}, members {})", R.size(), w.size(), n);
    if (!R.allFinite()) fail("residuals: R must be finite");
    if (!(w.array() > 0).all()) fail("residuals: weights must be positive");
    Eigen::VectorXd num = Eigen::VectorXd::Zero(dm.cols());
    Eigen::VectorXd den = Eigen::VectorXd::Zero(dm.cols());
    for (int i = 0; i < n; ++i) {
        num(dm.cluster_of[i]) += w(i) * R(i);
        den(dm.cluster_of[i]) += w(i);
    }
    Eigen::VectorXd eps(n);
    for (int i = 0; i < n; ++i) eps(i) = R(i) - num(dm.cluster_of[i]) / den(dm.cluster_of[i]);
    return eps;
}

namespace detail {

// Exact solve of sum_i clip(target_i - mu*decay_i, +-B_i) = 0 for mu.
// The sum is piecewise linear and nonincreasing in mu, so walk its
// breakpoints and solve the crossing segment in closed form.
inline double solve_balance_multiplier(const Eigen::VectorXd& target, const Eigen::VectorXd& decay,
                                       const Eigen::VectorXd& bounds) {
    const int m = static_cast<int>(target.size());
    struct Event {
        double mu;
        double w;
        bool activate;  // member leaves its upper clamp (true) / enters lower clamp (false)
    };
    std::vector<Event> events;
    events.reserve(2 * static_cast<size_t>(m));
    double g = 0;  // value at mu = -inf: everything clipped at +B
    for (int i = 0; i < m; ++i) {
        g += bounds(i);
        events.push_back({(target(i) - bounds(i)) / decay(i), decay(i), true});
        events.push_back({(target(i) + bounds(i)) / decay(i), decay(i), false});
    }
    if (g == 0) return 0;  // all bounds zero: holdings identically zero
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.mu < b.mu; });

    double slope = 0;       // sum of decay over members currently in their linear region
    double mu_prev = events.front().mu;
    for (const Event& e : events) {
        double g_next = g - slope * (e.mu - mu_prev);
        if (g_next <= 0) {
            if (g <= 0) return mu_prev;
            return mu_prev + g / slope;  // slope > 0 here since g dropped through 0
        }
        g = g_next;
        mu_prev = e.mu;
        slope += e.activate ? e.w : -e.w;
    }
    // g(+inf) = -sum(B) < 0, so the crossing always happens above.
    return mu_prev + (slope > 0 ? g / slope : 0.0);
}

inline Eigen::VectorXd clip_with_multiplier(const Eigen::VectorXd& target, const Eigen::VectorXd& decay,
                                            const Eigen::VectorXd& bounds, double mu) {
    Eigen::VectorXd out(target.size());
    for (int i = 0; i < target.size(); ++i)
        out(i) = std::clamp(target(i) - mu * decay(i), -bounds(i), bounds(i));
    return out;
}

// Euclidean projection onto { sum x = 0, |x_i| <= B_i }.
inline Eigen::VectorXd project_neutral_box(const Eigen::VectorXd& y, const Eigen::VectorXd& bounds) {
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(y.size());
    double mu = solve_balance_multiplier(y, ones, bounds);
    return clip_with_multiplier(y, ones, bounds, mu);
}

}  // namespace detail

// --------------------------------------------------------------------- REG

// Unbounded regression portfolio: D*_i = s * eta * eps_i / sigma2_i with eta
// scaled so gross equals I. Exposed so oracles can share the exact target.
inline Eigen::VectorXd regression_target(const Eigen::VectorXd& R, const DummyMatrix& dm,
                                         const Eigen::VectorXd& sigma2, Direction direction,
                                         double gross) {
    if (!(sigma2.array() > 0).all()) fail("regression target: variances must be positive");
    Eigen::VectorXd w = sigma2.cwiseInverse();
    Eigen::VectorXd eps = weighted_regression_residuals(R, dm, w);
    Eigen::VectorXd raw = eps.cwiseProduct(w);
    if (direction == Direction::mean_reversion) raw = -raw;
    double denom = raw.cwiseAbs().sum();
    if (denom == 0) return Eigen::VectorXd::Zero(R.size());
    return raw * (gross / denom);
}

// Bounded industry-neutral portfolio: per cluster, the exact minimizer of
// sum sigma2_i (D_i - D*_i)^2 subject to the cluster net being zero and
// |D_i| <= B_i. Each cluster's KKT system reduces to one multiplier mu with
// D_i = clip(D*_i - mu/sigma2_i, +-B_i); solved exactly per cluster.
inline Holdings regression_portfolio(const Eigen::VectorXd& R, const DummyMatrix& dm,
                                     const Eigen::VectorXd& sigma2, const Eigen::VectorXd& bounds,
                                     Direction direction, double gross = 2.0e7, Date asof = {}) {
    const int n = dm.rows();
    if (bounds.size() != n || sigma2.size() != n)
        fail("regression portfolio: sizes disagree (bounds {}, sigma2 {}, members {})",
             bounds.size(), sigma2.size(), n);
    if (!(bounds.array() >= 0).all() || !bounds.allFinite())
        fail("regression portfolio: bounds must be finite and non-negative");
    if (gross <= 0) fail("regression portfolio: gross target must be positive, got {}", gross);

    Holdings h{asof, Eigen::VectorXd::Zero(n), gross, bounds};
    Eigen::VectorXd target = regression_target(R, dm, sigma2, direction, gross);
    if ((target.array() == 0).all()) return h;
    Eigen::VectorXd w = sigma2.cwiseInverse();

    for (const auto& members : dm.groups()) {
        const int m = static_cast<int>(members.size());
        Eigen::VectorXd t(m), d(m), b(m);
        for (int a = 0; a < m; ++a) {
            t(a) = target(members[a]);
            d(a) = w(members[a]);
            b(a) = bounds(members[a]);
        }
        double mu = detail::solve_balance_multiplier(t, d, b);
        Eigen::VectorXd sol = detail::clip_with_multiplier(t, d, b, mu);
        // The zero portfolio is always cluster-feasible, so the exact solve
        // cannot fail; treat residual imbalance as a defect and drop the
        // cluster rather than ship a non-neutral slice.
        if (std::abs(sol.sum()) > 1e-9 * std::max(1.0, b.sum())) {
            warn("cluster {} balance residual {:.3e}; dropping its members for the day",
                 dm.cluster_ids[dm.cluster_of[members[0]]], sol.sum());
            continue;
        }
        for (int a = 0; a < m; ++a) h.dollars(members[a]) = sol(a);
    }
    return h;
}

// --------------------------------------------------------------------- OPT

namespace detail {

// Applies Gamma_FF^{-1} on the free subset via the push-through identity
// Gamma^{-1} = Xi^{-1} - Xi^{-1} Omega (I + Phi Omega' Xi^{-1} Omega)^{-1} Phi Omega' Xi^{-1},
// which stays valid when Phi is singular. Cost: O(n_F + K^2) per apply after
// an O(K^3) factorization.
class FreeSetSolver {
public:
    FreeSetSolver(const RiskModel& model, const std::vector<int>& free) : model_(model), free_(free) {
        const int kf = model.factors();
        Eigen::MatrixXd S = Eigen::MatrixXd::Zero(kf, kf);
        const int K = kf - 1;
        for (int i : free_) {
            const int a = model.industry_of[i];
            const double li = model.loadings(i, a);
            const double mi = model.loadings(i, K);
            const double wi = 1.0 / model.specific_var(i);
            S(a, a) += wi * li * li;
            S(a, K) += wi * li * mi;
            S(K, K) += wi * mi * mi;
        }
        for (int a = 0; a < K; ++a) S(K, a) = S(a, K);
        lu_.compute(Eigen::MatrixXd::Identity(kf, kf) + model.factor_cov * S);
    }

    // b and the result are indexed like free_.
    Eigen::VectorXd apply(const Eigen::VectorXd& b) const {
        const int K = model_.factors() - 1;
        Eigen::VectorXd xb(free_.size());
        Eigen::VectorXd t = Eigen::VectorXd::Zero(model_.factors());
        for (size_t r = 0; r < free_.size(); ++r) {
            const int i = free_[r];
            xb(r) = b(static_cast<int>(r)) / model_.specific_var(i);
            t(model_.industry_of[i]) += model_.loadings(i, model_.industry_of[i]) * xb(r);
            t(K) += model_.loadings(i, K) * xb(r);
        }
        Eigen::VectorXd u = lu_.solve(model_.factor_cov * t);
        Eigen::VectorXd out(free_.size());
        for (size_t r = 0; r < free_.size(); ++r) {
            const int i = free_[r];
            out(r) = xb(r) - (model_.loadings(i, model_.industry_of[i]) * u(model_.industry_of[i]) +
                              model_.loadings(i, K) * u(K)) /
                                 model_.specific_var(i);
        }
        return out;
    }

private:
    const RiskModel& model_;
    const std::vector<int>& free_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

}  // namespace detail

// Mean-variance objective E'D - (lambda/2) D' Gamma D.
inline double mv_objective(const RiskModel& model, const Eigen::VectorXd& E, double lambda,
                           const Eigen::VectorXd& D) {
    return E.dot(D) - 0.5 * lambda * D.dot(model.covariance_times(D));
}

// Maximize E'D - (lambda/2) D' Gamma D subject to sum D = 0 and |D_i| <= B_i.
// lambda is calibrated so the unbounded dollar-neutral solution has gross
// exactly I (closed form: gross scales as 1/lambda). Bounds are then enforced
// by an active-set iteration on the factor-form reduced system, releasing
// clamped members whose KKT multipliers turn the wrong way.
inline Holdings optimize_portfolio(const Eigen::VectorXd& E, const RiskModel& model,
                                   const Eigen::VectorXd& bounds, double gross = 2.0e7,
                                   const OptimizerConfig& cfg = {}, OptimizeDiag* diag_out = nullptr,
                                   Date asof = {}) {
    const int n = model.size();
    if (E.size() != n || bounds.size() != n)
        fail("optimizer: sizes disagree (E {}, bounds {}, model {})", E.size(), bounds.size(), n);
    if (!E.allFinite()) fail("optimizer: expected returns must be finite");
    if (!(bounds.array() >= 0).all() || !bounds.allFinite())
        fail("optimizer: bounds must be finite and non-negative");
    if (gross <= 0) fail("optimizer: gross target must be positive, got {}", gross);

    OptimizeDiag diag;
    Holdings h{asof, Eigen::VectorXd::Zero(n), gross, bounds};
    auto finish = [&](const Eigen::VectorXd& d) {
        h.dollars = d;
        if (diag_out) *diag_out = diag;
        return h;
    };
    if (E.lpNorm<Eigen::Infinity>() == 0.0) {
        diag.lambda = 1.0;
        return finish(Eigen::VectorXd::Zero(n));
    }

    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;

    // Unbounded dollar-neutral solution at lambda = 1; its gross g1 fixes
    // lambda = g1/I, since the neutral solution scales exactly as 1/lambda.
    detail::FreeSetSolver full(model, all);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd ge = full.apply(E);
    Eigen::VectorXd g1v = full.apply(ones);
    double mu0 = ge.dot(ones) / g1v.dot(ones);
    Eigen::VectorXd unbounded = ge - mu0 * g1v;
    double g1 = unbounded.cwiseAbs().sum();
    if (g1 == 0) {
        diag.lambda = 1.0;
        return finish(Eigen::VectorXd::Zero(n));
    }
    diag.lambda = g1 / gross;

    // Outer loop only re-runs when bounds somehow push gross above I; the
    // usual path runs the active set once.
    Eigen::VectorXd D = Eigen::VectorXd::Zero(n);
    for (int outer = 0; outer < 8; ++outer) {
        const double lambda = diag.lambda;
        std::vector<signed char> state(n, 0);  // 0 free, +1 at +B, -1 at -B

        // Optimum of the equality-constrained subproblem with st's clamps held
        // at their bounds, written into `out`; neutral by construction. False
        // when nothing is free.
        auto equality_solve = [&](const std::vector<signed char>& st, Eigen::VectorXd& out) {
            std::vector<int> fr;
            fr.reserve(n);
            Eigen::VectorXd cl = Eigen::VectorXd::Zero(n);
            for (int i = 0; i < n; ++i) {
                if (st[i] == 0) fr.push_back(i);
                else cl(i) = st[i] > 0 ? bounds(i) : -bounds(i);
            }
            if (fr.empty()) return false;
            detail::FreeSetSolver solver(model, fr);
            Eigen::VectorXd gamma_clamped = model.covariance_times(cl);
            Eigen::VectorXd rhs(fr.size()), ones_f = Eigen::VectorXd::Ones(fr.size());
            for (size_t r = 0; r < fr.size(); ++r)
                rhs(static_cast<int>(r)) = E(fr[r]) / lambda - gamma_clamped(fr[r]);
            Eigen::VectorXd y = solver.apply(rhs);
            Eigen::VectorXd z = solver.apply(ones_f);
            double mu = (y.sum() + cl.sum()) / z.sum();
            out = cl;
            for (size_t r = 0; r < fr.size(); ++r)
                out(fr[r]) = y(static_cast<int>(r)) - mu * z(static_cast<int>(r));
            return true;
        };

        // Feasible start: neutral and inside the box. Every later iterate
        // stays feasible because each move stops at the first blocking bound,
        // and directions sum to zero.
        D = detail::project_neutral_box(unbounded / lambda, bounds);

        // Warm start: greedily clamp every violator of the equality solve and
        // re-solve, which usually lands on the optimal active set in a handful
        // of factorizations. Only a candidate that is already inside the box
        // (hence feasible and neutral) is adopted; otherwise the loop below
        // starts from the projection with nothing clamped.
        {
            std::vector<signed char> greedy(n, 0);
            Eigen::VectorXd cand(n);
            for (int pass = 0; pass < 64 && equality_solve(greedy, cand); ++pass) {
                bool violated = false;
                for (int i = 0; i < n; ++i) {
                    if (greedy[i] != 0) continue;
                    if (std::abs(cand(i)) > bounds(i) * (1 + 1e-12)) {
                        greedy[i] = cand(i) > 0 ? 1 : -1;
                        violated = true;
                    }
                }
                if (!violated) {
                    state = greedy;
                    D = cand;
                    break;
                }
            }
        }
        diag.converged = false;

        for (diag.iterations = 1; diag.iterations <= cfg.max_iterations; ++diag.iterations) {
            std::vector<int> free;
            free.reserve(n);
            for (int i = 0; i < n; ++i)
                if (state[i] == 0) free.push_back(i);

            // An empty free set is only reached through blocking steps from a
            // feasible point, so that vertex is already neutral: stay put and
            // let the dual check decide.
            Eigen::VectorXd sub = D;
            equality_solve(state, sub);

            Eigen::VectorXd p = sub - D;
            if (p.lpNorm<Eigen::Infinity>() > 1e-13 * std::max(1.0, D.cwiseAbs().maxCoeff())) {
                // Walk toward the subproblem optimum, stopping at the first
                // bound a free member hits.
                double alpha = 1.0;
                int blocker = -1;
                for (int i : free) {
                    if (p(i) == 0) continue;
                    double room = p(i) > 0 ? bounds(i) - D(i) : -bounds(i) - D(i);
                    double limit = std::max(0.0, room / p(i));  // fp can leave room barely negative
                    if (limit < alpha) {
                        alpha = limit;
                        blocker = i;
                    }
                }
                D += alpha * p;
                if (blocker >= 0) {
                    state[blocker] = p(blocker) > 0 ? 1 : -1;
                    D(blocker) = state[blocker] > 0 ? bounds(blocker) : -bounds(blocker);
                    continue;
                }
                // alpha == 1: subproblem optimum reached; fall through.
            }

            // Subproblem optimal and primal feasible: check dual feasibility
            // of the clamps.
            Eigen::VectorXd grad = E - lambda * model.covariance_times(D);
            double nu;
            if (!free.empty()) {
                // Stationarity on free members fixes the neutrality multiplier.
                double s = 0;
                for (int i : free) s += grad(i);
                nu = s / static_cast<double>(free.size());
            } else {
                // All clamped: any nu in [max grad over -B, min grad over +B]
                // certifies optimality; the midpoint spreads slack evenly.
                double lo = -std::numeric_limits<double>::infinity();
                double hi = std::numeric_limits<double>::infinity();
                for (int i = 0; i < n; ++i) {
                    if (state[i] > 0) hi = std::min(hi, grad(i));
                    else lo = std::max(lo, grad(i));
                }
                if (!std::isfinite(lo)) lo = hi;
                if (!std::isfinite(hi)) hi = lo;
                nu = 0.5 * (lo + hi);
            }
            double scale = std::max({E.lpNorm<Eigen::Infinity>(),
                                     lambda * model.covariance_times(D).lpNorm<Eigen::Infinity>(),
                                     std::abs(nu), 1e-300});
            int worst = -1;
            double worst_violation = cfg.kkt_tolerance * 0.1 * scale;
            for (int i = 0; i < n; ++i) {
                if (state[i] == 0) continue;
                double mult = state[i] > 0 ? grad(i) - nu : nu - grad(i);
                if (-mult > worst_violation) {
                    worst_violation = -mult;
                    worst = i;
                }
            }
            if (worst < 0) {
                double resid = 0;
                for (int i = 0; i < n; ++i) {
                    if (state[i] == 0) resid = std::max(resid, std::abs(grad(i) - nu));
                    else resid = std::max(resid, std::max(0.0, -(state[i] > 0 ? grad(i) - nu : nu - grad(i))));
                }
                diag.kkt_residual = resid / scale;
                diag.converged = diag.kkt_residual <= cfg.kkt_tolerance;
                break;
            }
            state[worst] = 0;  // release the worst mispriced clamp
        }

        // The iterate is feasible and its objective never decreased, so it is
        // the best point seen even when the iteration cap was hit.
        if (!diag.converged)
            warn("optimizer hit the {}-iteration cap; returning best feasible iterate", cfg.max_iterations);
        double g = D.cwiseAbs().sum();
        if (g <= gross * (1 + 1e-9)) break;
        // Rare: bounds redistribution pushed gross above target. Stiffen
        // lambda proportionally and re-run.
        diag.lambda *= (g / gross) * (1 + 1e-9);
        if (outer == 7) {
            warn("optimizer gross {} still above target {}; scaling down", g, gross);
            D *= gross / g;
        }
    }
    return finish(D);
}

}  // namespace statarb
