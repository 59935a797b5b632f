// synth.hpp
// Seeded synthetic market generator. Normal regime: one market factor,
// industry factors with planted memberships, and AR(1) mean-reverting
// residuals. Selloff regime: the market factor picks up a negative drift,
// factor volatilities are multiplied harder than idiosyncratic ones (so
// pairwise correlations spike), residual mean reversion shuts off, and a
// fraction of tickers are silently reassigned to new industries so
// historically estimated correlations and the planted labels both go stale.
// Dispersion in market exposures turns the drift into a persistent
// cross-sectional trend: high-beta names keep losing relative to low-beta
// ones, which is what rewards momentum and bleeds reversion in the crash.
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "statarb/bars.hpp"
#include "statarb/date.hpp"

namespace statarb {

struct SynthConfig {
    int tickers = 200;
    int industries = 20;
    int days = 300;
    Date start = Date::from_ymd(2019, 1, 2);

    double market_vol = 0.01;
    double industry_vol = 0.01;
    double idio_vol = 0.02;
    double phi = -0.3;                 // AR(1) coefficient of the residual, in (-1, 0]
    double split = 0.3;                // overnight share of each day's return

    // Exposures beta_i (market) and gamma_i (industry) are uniform on this
    // range; the dispersion is what makes a drifting market bleed into
    // cross-sectional residuals.
    double exposure_min = 0.25;
    double exposure_max = 1.75;

    int selloff_start = -1;            // day index of the first selloff day; -1 = never
    int selloff_days = 0;
    double selloff_drift = -0.035;     // added to the market factor each selloff day
    double selloff_vol_mult = 3.0;     // multiplies market and industry factor vol
    double selloff_idio_mult = 1.25;   // multiplies idio vol; below the factor multiplier
    double selloff_phi = 0.0;          // residual AR(1) coefficient while the selloff lasts
    double scramble_fraction = 0.5;    // tickers rewired to a random industry at the switch

    double init_price_min = 10.0;
    double init_price_max = 200.0;
    double volume_log_mean = 13.1;     // ~5e5 shares/day median
    double volume_log_sd = 1.0;

    std::uint64_t seed = 1;

    void validate() const {
        if (tickers < 1 || industries < 1 || days < 1)
            fail("synth config needs positive tickers/industries/days");
        if (market_vol < 0 || industry_vol < 0 || idio_vol < 0) fail("synth volatilities must be >= 0");
        if (!(phi > -1.0 && phi <= 0.0)) fail("synth phi must lie in (-1, 0], got {}", phi);
        if (split < 0 || split > 1) fail("synth split must lie in [0,1], got {}", split);
        if (exposure_min <= 0 || exposure_max < exposure_min) fail("synth exposure range invalid");
        if (scramble_fraction < 0 || scramble_fraction > 1) fail("synth scramble fraction must lie in [0,1]");
        if (selloff_vol_mult < 0 || selloff_idio_mult < 0) fail("synth vol multiplier must be >= 0");
        if (!(selloff_phi > -1.0 && selloff_phi < 1.0))
            fail("synth selloff phi must lie in (-1, 1), got {}", selloff_phi);
        if (selloff_days < 0 || (selloff_days > 0 && (selloff_start < 0 || selloff_start + selloff_days > days)))
            fail("synth selloff window [{}, {}) must lie within {} days", selloff_start,
                 selloff_start + selloff_days, days);
        if (init_price_min <= 0 || init_price_max < init_price_min) fail("synth price range invalid");
    }
};

struct SynthMarket {
    BarPanel panel;
    std::vector<int> planted_industry;  // per panel ticker, the pre-scramble label
};

inline SynthMarket generate_market(const SynthConfig& cfg) {
    cfg.validate();
    const int n = cfg.tickers, G = cfg.industries, T = cfg.days;
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    SynthMarket mkt;
    mkt.panel.tickers.resize(n);
    for (int i = 0; i < n; ++i) mkt.panel.tickers[i] = fmt::format("T{:04d}", i + 1);
    mkt.panel.calendar.resize(T);
    Date d = cfg.start.is_weekday() ? cfg.start : cfg.start.next_weekday();
    for (int t = 0; t < T; ++t) {
        mkt.panel.calendar[t] = d;
        d = d.next_weekday();
    }

    // Setup draws, in fixed order: exposures, initial prices, volumes, AR(1)
    // residual states. Industry membership is round-robin so sizes are even.
    mkt.planted_industry.resize(n);
    std::vector<int> industry(n);
    for (int i = 0; i < n; ++i) mkt.planted_industry[i] = industry[i] = i % G;
    Eigen::VectorXd beta(n), gamma(n), price(n), volume(n), u(n);
    for (int i = 0; i < n; ++i) beta(i) = cfg.exposure_min + (cfg.exposure_max - cfg.exposure_min) * unif(rng);
    for (int i = 0; i < n; ++i) gamma(i) = cfg.exposure_min + (cfg.exposure_max - cfg.exposure_min) * unif(rng);
    for (int i = 0; i < n; ++i)
        price(i) = cfg.init_price_min * std::exp(std::log(cfg.init_price_max / cfg.init_price_min) * unif(rng));
    for (int i = 0; i < n; ++i) volume(i) = std::exp(cfg.volume_log_mean + cfg.volume_log_sd * normal(rng));
    const double u_sd0 = cfg.idio_vol / std::sqrt(1.0 - cfg.phi * cfg.phi);
    for (int i = 0; i < n; ++i) u(i) = u_sd0 * normal(rng);

    mkt.panel.open.resize(T, n);
    mkt.panel.close.resize(T, n);
    mkt.panel.volume.resize(T, n);

    Eigen::VectorXd g(G);
    for (int t = 0; t < T; ++t) {
        const bool selloff = cfg.selloff_days > 0 && t >= cfg.selloff_start &&
                             t < cfg.selloff_start + cfg.selloff_days;
        if (selloff && t == cfg.selloff_start && cfg.scramble_fraction > 0) {
            // Correlation breakdown: rewire exposures; labels stay stale.
            for (int i = 0; i < n; ++i)
                if (unif(rng) < cfg.scramble_fraction)
                    industry[i] = static_cast<int>(rng() % static_cast<uint64_t>(G));
        }
        const double vm = selloff ? cfg.selloff_vol_mult : 1.0;
        const double vmi = selloff ? cfg.selloff_idio_mult : 1.0;
        const double ph = selloff ? cfg.selloff_phi : cfg.phi;
        const double drift = selloff ? cfg.selloff_drift : 0.0;
        const double m = drift + vm * cfg.market_vol * normal(rng);
        for (int a = 0; a < G; ++a) g(a) = vm * cfg.industry_vol * normal(rng);
        for (int i = 0; i < n; ++i) {
            u(i) = ph * u(i) + vmi * cfg.idio_vol * normal(rng);
            double r = std::max(beta(i) * m + gamma(i) * g(industry[i]) + u(i), -0.95);
            mkt.panel.open(t, i) = price(i) * (1.0 + cfg.split * r);
            mkt.panel.close(t, i) = price(i) * (1.0 + r);
            mkt.panel.volume(t, i) = std::floor(volume(i)) + 1.0;
            price(i) = mkt.panel.close(t, i);
        }
    }
    return mkt;
}

// Planted labels in the fundamental "ticker,code" format.
inline void write_labels_csv(const std::filesystem::path& path, const SynthMarket& mkt) {
    std::ofstream out(path);
    if (!out) fail("cannot write labels file {}", path.string());
    out << "ticker,code\n";
    for (size_t i = 0; i < mkt.panel.tickers.size(); ++i)
        out << fmt::format("{},{:03d}\n", mkt.panel.tickers[i], mkt.planted_industry[i]);
    if (!out) fail("failed writing labels file {}", path.string());
}

}  // namespace statarb
