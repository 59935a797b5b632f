// mathutil.hpp
// Small numeric helpers shared across modules.
#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "statarb/common.hpp"

namespace statarb::detail {

inline double sample_variance(const Eigen::VectorXd& x) {
    int n = static_cast<int>(x.size());
    if (n < 2) fail("sample variance needs at least 2 observations, got {}", n);
    double mean = x.mean();
    return (x.array() - mean).square().sum() / (n - 1);
}

// Sample covariance (n-1 divisor) of series held in columns.
inline Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& series) {
    int T = static_cast<int>(series.rows());
    if (T < 2) fail("sample covariance needs at least 2 observations, got {}", T);
    Eigen::MatrixXd centered = series.rowwise() - series.colwise().mean();
    return (centered.transpose() * centered) / (T - 1);
}

// splitmix64 step; decorrelates derived RNG streams from one base seed.
inline uint64_t mix_seed(uint64_t seed, uint64_t salt) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace statarb::detail
