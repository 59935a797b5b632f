#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "statarb/backtest.hpp"

using statarb::ClassKind;
using statarb::Constructor;
using statarb::Date;
using statarb::Error;
using statarb::ReturnKind;
using statarb::StrategySpec;

namespace {

std::vector<Date> weekday_dates(int n, std::string_view first = "2020-01-02") {
    std::vector<Date> out;
    Date d = Date::parse(first);
    for (int i = 0; i < n; ++i) {
        out.push_back(d);
        d = d.next_weekday();
    }
    return out;
}

}  // namespace

TEST_CASE("return on capital annualizes the mean daily P&L", "[backtest]") {
    std::vector<double> pnl(251, 1e4);
    CHECK(statarb::roc(pnl, 2e7) == Catch::Approx(12.6).epsilon(1e-12));

    // Sign and scale: half the capital doubles the number.
    CHECK(statarb::roc(pnl, 1e7) == Catch::Approx(25.2).epsilon(1e-12));
    CHECK(statarb::roc({-1e4, -1e4}, 2e7) == Catch::Approx(-12.6).epsilon(1e-12));

    CHECK_THROWS_WITH(statarb::roc({}, 2e7), Catch::Matchers::ContainsSubstring("nonempty"));
    CHECK_THROWS_WITH(statarb::roc(pnl, 0.0), Catch::Matchers::ContainsSubstring("positive capital"));
}

TEST_CASE("sharpe uses the sample standard deviation and trades 252 days", "[backtest]") {
    auto s = statarb::sharpe({1.0, 2.0, 3.0});
    REQUIRE(s.has_value());
    CHECK(*s == Catch::Approx(2.0 * std::sqrt(252.0)).epsilon(1e-12));
    CHECK(*s == Catch::Approx(31.7490157327751).epsilon(1e-9));

    CHECK_FALSE(statarb::sharpe({5.0, 5.0, 5.0}).has_value());
    CHECK_THROWS_WITH(statarb::sharpe({1.0}), Catch::Matchers::ContainsSubstring("at least 2"));

    auto neg = statarb::sharpe({-1.0, -2.0, -3.0});
    REQUIRE(neg.has_value());
    CHECK(*neg == Catch::Approx(-2.0 * std::sqrt(252.0)).epsilon(1e-12));
}

TEST_CASE("cents per share divides total P&L by total shares", "[backtest]") {
    auto c = statarb::cps({0.75, 0.25}, {30.0, 20.0});
    REQUIRE(c.has_value());
    CHECK(*c == 2.0);

    auto tiny = statarb::cps({-5.0, 1.0}, {100.0, 300.0});
    REQUIRE(tiny.has_value());
    CHECK(*tiny == Catch::Approx(-1.0).epsilon(1e-12));

    CHECK_FALSE(statarb::cps({1.0, 2.0}, {0.0, 0.0}).has_value());
    CHECK_FALSE(statarb::cps({}, {}).has_value());
}

TEST_CASE("max drawdown finds the worst peak-to-trough decline", "[backtest]") {
    auto dates = weekday_dates(4);
    std::vector<double> pnl = {5.0, -3.0, -7.0, 2.0};  // cumulative: 5, 2, -5, -3

    auto dd = statarb::max_drawdown(dates, pnl, dates.front(), dates.back(), 100.0);
    CHECK(dd.percent == Catch::Approx(10.0).epsilon(1e-12));
    CHECK(dd.trough.iso() == dates[2].iso());
    CHECK(dd.start.iso() == dates.front().iso());
    CHECK(dd.end.iso() == dates.back().iso());

    // Windows restrict the peak: over the last three dates the peak is the
    // window's first cumulative value.
    dd = statarb::max_drawdown(dates, pnl, dates[1], dates.back(), 100.0);
    CHECK(dd.percent == Catch::Approx(7.0).epsilon(1e-12));
    CHECK(dd.trough.iso() == dates[2].iso());

    // Monotone recovery inside the window: no decline at all.
    dd = statarb::max_drawdown(dates, pnl, dates[2], dates.back(), 100.0);
    CHECK(dd.percent == 0.0);
    CHECK(dd.trough.iso() == dates[2].iso());

    CHECK_THROWS_WITH(statarb::max_drawdown(dates, {1.0}, dates.front(), dates.back(), 100.0),
                      Catch::Matchers::ContainsSubstring("dates vs"));
    CHECK_THROWS_WITH(statarb::max_drawdown(dates, pnl, dates.front(), dates.back(), 0.0),
                      Catch::Matchers::ContainsSubstring("positive capital"));
    CHECK_THROWS_WITH(statarb::max_drawdown(dates, pnl, Date::parse("1999-01-04"),
                                            Date::parse("1999-01-08"), 100.0),
                      Catch::Matchers::ContainsSubstring("contains no P&L dates"));
}

TEST_CASE("ties go to the first date attaining the maximum decline", "[backtest]") {
    auto dates = weekday_dates(5);
    // cumulative: 10, 0, 5, 0, 3 -> decline 10 first reached at index 1.
    std::vector<double> pnl = {10.0, -10.0, 5.0, -5.0, 3.0};
    auto dd = statarb::max_drawdown(dates, pnl, dates.front(), dates.back(), 100.0);
    CHECK(dd.percent == Catch::Approx(10.0).epsilon(1e-12));
    CHECK(dd.trough.iso() == dates[1].iso());
}

TEST_CASE("compute_metrics wires the default drawdown window", "[backtest]") {
    const int n = 30;
    auto dates = weekday_dates(n);
    std::vector<double> pnl(n, 10.0);
    pnl[2] = -500.0;  // early crash, outside the trailing 23-day window
    pnl[20] = -40.0;  // small dip inside the window
    std::vector<double> shares(n, 100.0);

    auto m = statarb::compute_metrics(dates, pnl, shares, 1e4);
    auto dd = statarb::max_drawdown(dates, pnl, dates[n - 23], dates.back(), 1e4);
    CHECK(m.drawdown.percent == dd.percent);
    CHECK(m.drawdown.trough.iso() == dd.trough.iso());
    CHECK(m.drawdown.percent == Catch::Approx(0.4).epsilon(1e-12));  // the -40 dip only

    // Explicit window overrides the default and sees the crash.
    auto wide = statarb::compute_metrics(dates, pnl, shares, 1e4, dates.front(), dates.back());
    CHECK(wide.drawdown.percent == Catch::Approx(5.0).epsilon(1e-12));

    CHECK(m.roc == Catch::Approx(statarb::roc(pnl, 1e4)).epsilon(1e-15));
    CHECK(m.sharpe.has_value());
    CHECK(m.cps.has_value());
    CHECK_THROWS_WITH(statarb::compute_metrics({}, {}, {}, 1e4),
                      Catch::Matchers::ContainsSubstring("nonempty"));
}

TEST_CASE("cell names concatenate the four strategy axes", "[backtest]") {
    CHECK(statarb::cell_name({ReturnKind::c2c1, ClassKind::fundamental, Constructor::reg, false}) ==
          "C2C1_SIC_REG_N");
    CHECK(statarb::cell_name({ReturnKind::d0, ClassKind::statistical, Constructor::opt, true}) ==
          "D0_STAT_OPT_Y");
    CHECK(statarb::cell_name({ReturnKind::mom1, ClassKind::fundamental, Constructor::opt, true}) ==
          "MOM1_SIC_OPT_Y");
    CHECK(statarb::cell_name({ReturnKind::c2c20, ClassKind::statistical, Constructor::reg, false}) ==
          "C2C20_STAT_REG_N");
}
