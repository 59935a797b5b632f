// costs.hpp
// Trading-cost model: linear rate plus a volatility- and participation-driven
// impact term, cost = T * (a + b*sigma*(T/addv)^(3/5)). The impact coefficient
// is calibrated so trading an equally-weighted portfolio once costs a target
// average rate (default 10 bps with a = 5 bps linear).
#pragma once

#include <cmath>

#include "statarb/universe.hpp"

namespace statarb {

struct CostModel {
    double linear = 5e-4;              // a, cost rate independent of size
    double impact = 0.0;               // b, coefficient on sigma*(T/addv)^(3/5)
    static constexpr double exponent = 0.6;
    // Calibration record: the participation and volatility the target rate
    // was anchored at (averages over the calibration universe).
    double ref_participation = 0.0;
    double ref_sigma = 0.0;
};

// Cost in dollars of trading T dollars of a name with the given liquidity and
// daily volatility.
inline double trade_cost(double traded_dollars, double addv, double sigma, const CostModel& model) {
    if (!(addv > 0)) fail("trade cost needs positive ADDV, got {}", addv);
    if (traded_dollars < 0) fail("trade cost needs unsigned dollars, got {}", traded_dollars);
    if (traded_dollars == 0) return 0.0;
    return traded_dollars *
           (model.linear + model.impact * sigma * std::pow(traded_dollars / addv, CostModel::exponent));
}

// Solve for b so that an equally-weighted portfolio of gross I, traded once,
// has an average cost rate of target_bps across members. The average rate is
// affine in b, so bisection on an expanding bracket converges exactly.
inline CostModel calibrate_cost_model(const Universe& universe, double gross, double linear_bps = 5.0,
                                      double target_bps = 10.0) {
    const int n = static_cast<int>(universe.members.size());
    if (n == 0) fail("cost calibration needs a nonempty universe");
    if (gross <= 0) fail("cost calibration needs positive gross, got {}", gross);
    if (linear_bps < 0 || target_bps < linear_bps)
        fail("cost calibration needs 0 <= linear ({} bps) <= target ({} bps)", linear_bps, target_bps);

    CostModel model;
    model.linear = linear_bps * 1e-4;
    const double per_name = gross / n;
    double impact_base = 0.0;  // mean of sigma_i * (T_i/addv_i)^(3/5)
    for (int k = 0; k < n; ++k)
        impact_base += std::sqrt(std::max(universe.sigma2(k), 0.0)) *
                       std::pow(per_name / universe.addv(k), CostModel::exponent);
    impact_base /= n;
    model.ref_participation = (Eigen::VectorXd::Constant(n, per_name).array() / universe.addv.array()).mean();
    model.ref_sigma = universe.sigma2.cwiseMax(0.0).cwiseSqrt().mean();

    const double target = target_bps * 1e-4;
    if (impact_base <= 0) {
        warn("cost calibration: all member volatilities are zero; impact term disabled, average rate {} bps",
             linear_bps);
        model.impact = 0.0;
        return model;
    }
    auto avg_rate = [&](double b) { return model.linear + b * impact_base; };
    double lo = 0.0, hi = 1.0;
    while (avg_rate(hi) < target) hi *= 2;
    for (int it = 0; it < 200 && (hi - lo) > 1e-16 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (avg_rate(mid) < target ? lo : hi) = mid;
    }
    model.impact = 0.5 * (lo + hi);
    return model;
}

}  // namespace statarb
