// riskmodel.hpp
// Factor risk model: one factor per granular industry plus a market factor.
// Industry loadings come from the first principal component of each
// intra-industry correlation matrix, factor returns from a daily weighted
// cross-sectional regression, and specific variances from the exact
// diagonal-match rule diag(Gamma) = sample variance.
#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "statarb/classify.hpp"
#include "statarb/mathutil.hpp"

namespace statarb {

struct RiskModelConfig {
    double floor_fraction = 0.05;  // specific variance >= this fraction of sample variance
    double var_floor = 1e-8;       // keeps 1/sigma^2 regression weights finite
};

struct RiskModel {
    // n x (K+1); column K is the market factor. Row i is zero outside columns
    // {industry_of[i], K}.
    Eigen::MatrixXd loadings;
    Eigen::MatrixXd factor_cov;    // (K+1) x (K+1) symmetric PSD
    Eigen::VectorXd specific_var;  // per member, strictly positive
    Eigen::VectorXd sample_var;    // per member (floored) trailing variance
    std::vector<int> industry_of;  // per member, industry factor column

    int size() const { return static_cast<int>(specific_var.size()); }
    int factors() const { return static_cast<int>(factor_cov.rows()); }

    // Gamma * x via the factor form: O(n + K^2), never materializes Gamma.
    Eigen::VectorXd covariance_times(const Eigen::VectorXd& x) const {
        if (x.size() != size()) fail("covariance_times: vector size {} vs model size {}", x.size(), size());
        const int K = factors() - 1;
        Eigen::VectorXd fx = Eigen::VectorXd::Zero(factors());
        for (int i = 0; i < size(); ++i) {
            fx(industry_of[i]) += loadings(i, industry_of[i]) * x(i);
            fx(K) += loadings(i, K) * x(i);
        }
        Eigen::VectorXd phi_fx = factor_cov * fx;
        Eigen::VectorXd y = specific_var.cwiseProduct(x);
        for (int i = 0; i < size(); ++i)
            y(i) += loadings(i, industry_of[i]) * phi_fx(industry_of[i]) + loadings(i, K) * phi_fx(K);
        return y;
    }

    // Dense Gamma, for small-n tests and oracles.
    Eigen::MatrixXd dense_covariance() const {
        Eigen::MatrixXd g = loadings * factor_cov * loadings.transpose();
        g.diagonal() += specific_var;
        return g;
    }

    // Model on a member subset (rows re-indexed, factors untouched).
    RiskModel restrict(const std::vector<int>& rows) const {
        RiskModel out;
        int m = static_cast<int>(rows.size());
        out.loadings.resize(m, factors());
        out.specific_var.resize(m);
        out.sample_var.resize(m);
        out.industry_of.resize(m);
        out.factor_cov = factor_cov;
        for (int r = 0; r < m; ++r) {
            out.loadings.row(r) = loadings.row(rows[r]);
            out.specific_var(r) = specific_var(rows[r]);
            out.sample_var(r) = sample_var(rows[r]);
            out.industry_of[r] = industry_of[rows[r]];
        }
        return out;
    }
};

// `returns` is (days x members); `industries` maps those members to granular
// clusters. Model covariance: Gamma = Omega Phi Omega^T + diag(xi^2).
inline RiskModel build_risk_model(const Eigen::MatrixXd& returns, const DummyMatrix& industries,
                                  const RiskModelConfig& cfg = {}) {
    const int T = static_cast<int>(returns.rows());
    const int n = static_cast<int>(returns.cols());
    if (n == 0) fail("risk model needs at least one member");
    if (T < 2) fail("risk model needs >= 2 return observations, got {}", T);
    if (industries.rows() != n)
        fail("industry map covers {} members, returns have {}", industries.rows(), n);
    if (!returns.allFinite()) fail("risk model input returns must be finite");
    if (cfg.floor_fraction <= 0 || cfg.floor_fraction >= 1)
        fail("specific-variance floor fraction must lie in (0,1), got {}", cfg.floor_fraction);

    const int K = industries.cols();
    RiskModel model;
    model.industry_of = industries.cluster_of;
    model.sample_var.resize(n);
    Eigen::MatrixXd centered = returns.rowwise() - returns.colwise().mean();
    for (int i = 0; i < n; ++i)
        model.sample_var(i) = std::max(centered.col(i).squaredNorm() / (T - 1), cfg.var_floor);
    Eigen::VectorXd sigma = model.sample_var.cwiseSqrt();

    // Industry loadings: sigma_i times the i-th component of the industry's
    // first correlation PC (sign fixed so the components sum >= 0).
    model.loadings = Eigen::MatrixXd::Zero(n, K + 1);
    for (const auto& members : industries.groups()) {
        const int m = static_cast<int>(members.size());
        const int col = industries.cluster_of[members[0]];
        Eigen::VectorXd v;
        if (m == 1) {
            v = Eigen::VectorXd::Ones(1);
        } else {
            Eigen::MatrixXd corr(m, m);
            for (int a = 0; a < m; ++a) {
                corr(a, a) = 1.0;
                for (int b = a + 1; b < m; ++b) {
                    double cov = centered.col(members[a]).dot(centered.col(members[b])) / (T - 1);
                    corr(a, b) = corr(b, a) = cov / (sigma(members[a]) * sigma(members[b]));
                }
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr);
            if (es.info() != Eigen::Success || !corr.allFinite()) {
                warn("industry {}: correlation eigen-decomposition failed, using equal-weight loadings",
                     industries.cluster_ids[industries.cluster_of[members[0]]]);
                v = Eigen::VectorXd::Constant(m, 1.0 / std::sqrt(static_cast<double>(m)));
            } else {
                v = es.eigenvectors().col(m - 1);  // largest eigenvalue last
                double s = v.sum();
                if (s < 0) v = -v;
                else if (s == 0) {
                    for (int a = 0; a < m; ++a) {
                        if (v(a) != 0) {
                            if (v(a) < 0) v = -v;
                            break;
                        }
                    }
                }
            }
        }
        for (int a = 0; a < m; ++a) model.loadings(members[a], col) = sigma(members[a]) * v(a);
    }
    for (int i = 0; i < n; ++i) model.loadings(i, K) = sigma(i);

    // Daily factor returns from the weighted cross-sectional regression
    // r_t ~ Omega f_t with weights 1/sigma^2. The normal matrix A is rank
    // deficient whenever the market column is (nearly) spanned by industry
    // columns, so take the minimal-norm solution.
    Eigen::VectorXd w = model.sample_var.cwiseInverse();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(K + 1, K + 1);
    for (int i = 0; i < n; ++i) {
        const int a = model.industry_of[i];
        const double li = model.loadings(i, a);
        A(a, a) += w(i) * li * li;
        A(a, K) += w(i) * li * sigma(i);
        A(K, K) += w(i) * sigma(i) * sigma(i);
    }
    for (int a = 0; a < K; ++a) A(K, a) = A(a, K);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);

    Eigen::MatrixXd factor_returns(T, K + 1);
    for (int t = 0; t < T; ++t) {
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(K + 1);
        for (int i = 0; i < n; ++i) {
            const int a = model.industry_of[i];
            rhs(a) += w(i) * model.loadings(i, a) * returns(t, i);
            rhs(K) += returns(t, i) / sigma(i);
        }
        factor_returns.row(t) = cod.solve(rhs).transpose();
    }
    Eigen::MatrixXd phi = detail::sample_covariance(factor_returns);

    // Exact diagonal match: xi^2 = sigma^2 - (Omega Phi Omega^T)_ii, with
    // xi^2 floored at floor_fraction*sigma^2. If the floor would bind, shrink
    // Phi's off-diagonal toward zero by the minimal alpha, then rescale Phi
    // as a whole if the diagonal part alone still overshoots.
    auto factor_quadratic = [&](const Eigen::MatrixXd& p, int i) {
        const int a = model.industry_of[i];
        const double li = model.loadings(i, a);
        return li * li * p(a, a) + sigma(i) * sigma(i) * p(K, K) + 2.0 * li * sigma(i) * p(a, K);
    };
    Eigen::VectorXd cap = (1.0 - cfg.floor_fraction) * model.sample_var;
    double alpha = 1.0;
    for (int i = 0; i < n; ++i) {
        const int a = model.industry_of[i];
        double diag_part = model.loadings(i, a) * model.loadings(i, a) * phi(a, a) +
                           sigma(i) * sigma(i) * phi(K, K);
        double off_part = factor_quadratic(phi, i) - diag_part;
        if (diag_part + off_part > cap(i) && off_part > 0)
            alpha = std::min(alpha, std::max(0.0, (cap(i) - diag_part) / off_part));
    }
    if (alpha < 1.0) {
        Eigen::VectorXd d = phi.diagonal();
        phi *= alpha;
        phi.diagonal() = d;
    }
    double overshoot = 0.0;
    for (int i = 0; i < n; ++i) overshoot = std::max(overshoot, factor_quadratic(phi, i) / cap(i));
    if (overshoot > 1.0) phi /= overshoot;

    model.factor_cov = std::move(phi);
    model.specific_var.resize(n);
    for (int i = 0; i < n; ++i) {
        model.specific_var(i) = model.sample_var(i) - factor_quadratic(model.factor_cov, i);
        if (!(model.specific_var(i) > 0))
            fail("specific variance non-positive for member {} (floor logic breached)", i);
    }
    return model;
}

}  // namespace statarb
