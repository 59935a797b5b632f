#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "statarb/universe.hpp"
#include "test_support.hpp"

using statarb::BarPanel;
using statarb::Date;
using statarb::Error;
using test_support::WarnCapture;

namespace {

// Four tickers, five days, engineered so dollar volume per day is constant
// per ticker: AAA 1e4, BBB 3e3, CCC 3e4, DDD 3e4 (CCC ties DDD).
BarPanel sample_panel() {
    std::vector<std::string> tickers = {"AAA", "BBB", "CCC", "DDD"};
    Eigen::MatrixXd close(5, 4), volume(5, 4);
    close << 10, 40, 10, 30,
             8, 40, 10, 30,
             10, 40, 10, 30,
             20, 40, 10, 30,
             21, 40, 10, 30;
    volume << 1000, 75, 3000, 1000,
              1250, 75, 3000, 1000,
              1000, 75, 3000, 1000,
              500, 75, 3000, 1000,
              400, 75, 3000, 1000;
    Eigen::MatrixXd open = close.array() - 0.5;
    return test_support::make_panel(tickers, open, close, volume);
}

}  // namespace

TEST_CASE("addv averages close*volume over the window before asof", "[universe]") {
    BarPanel p = sample_panel();
    Eigen::VectorXd addv = statarb::compute_addv(p, p.calendar[4], 2);
    REQUIRE(addv.size() == 4);
    CHECK(addv(0) == Catch::Approx(1e4).epsilon(1e-12));
    CHECK(addv(1) == Catch::Approx(3e3).epsilon(1e-12));
    CHECK(addv(2) == Catch::Approx(3e4).epsilon(1e-12));
    CHECK(addv(3) == Catch::Approx(3e4).epsilon(1e-12));

    CHECK_THROWS_AS(statarb::compute_addv(p, p.calendar[1], 2), Error);  // too little history
    CHECK_THROWS_AS(statarb::compute_addv(p, Date::parse("2021-01-04"), 2), Error);
}

TEST_CASE("addv requires full window coverage", "[universe]") {
    std::vector<std::string> tickers = {"AAA", "BBB"};
    Eigen::MatrixXd close(4, 2), volume(4, 2), open(4, 2);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    close << nan, 10, 5, 10, 5, 10, 5, 10;  // AAA lists late
    open = close;
    volume.setConstant(100);
    volume(0, 0) = nan;
    BarPanel p = test_support::make_panel(tickers, open, close, volume);
    Eigen::VectorXd addv = statarb::compute_addv(p, p.calendar[3], 3);
    CHECK(std::isnan(addv(0)));
    CHECK(addv(1) == Catch::Approx(1000.0));
}

TEST_CASE("universe ranks by liquidity with lexicographic ties", "[universe]") {
    BarPanel p = sample_panel();
    // As-of day 4 with a 3-day window: days 1..3 in every average below.
    statarb::Universe u = statarb::select_universe(p, p.calendar[4], 3, 3);
    REQUIRE(u.members.size() == 3);
    // CCC and DDD tie at 3e4; CCC wins the tie; BBB (3e3) drops out.
    CHECK(p.tickers[u.members[0]] == "CCC");
    CHECK(p.tickers[u.members[1]] == "DDD");
    CHECK(p.tickers[u.members[2]] == "AAA");
    CHECK(u.effective_start == p.calendar[4]);
    CHECK(u.addv(0) == Catch::Approx(3e4).epsilon(1e-12));
    CHECK(u.addv(2) == Catch::Approx(1e4).epsilon(1e-12));

    // sigma2: AAA window closes 8,10,20 -> returns 0.25, 1.0 -> sample
    // variance 0.28125. Constant-price CCC has zero variance.
    CHECK(u.sigma2(2) == Catch::Approx(0.28125).epsilon(1e-12));
    CHECK(u.sigma2(0) == 0.0);
}

TEST_CASE("universe warns when eligibility falls short", "[universe]") {
    BarPanel p = sample_panel();
    WarnCapture warns;
    statarb::Universe u = statarb::select_universe(p, p.calendar[4], 10, 3);
    CHECK(u.members.size() == 4);
    CHECK(warns.any_contains("only 4 tickers eligible"));
}

TEST_CASE("member returns demand coverage", "[universe]") {
    std::vector<std::string> tickers = {"AAA", "BBB"};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    Eigen::MatrixXd close(4, 2), volume(4, 2);
    close << nan, 10, 5, 11, 6, 12, 7, 13;
    volume.setConstant(100);
    volume(0, 0) = nan;
    Eigen::MatrixXd open = close;
    BarPanel p = test_support::make_panel(tickers, open, close, volume);

    Eigen::MatrixXd r = statarb::member_returns(p, {0, 1}, 3, 3);
    REQUIRE(r.rows() == 2);
    REQUIRE(r.cols() == 2);
    CHECK(r(0, 0) == Catch::Approx(0.2));  // 6/5 - 1
    CHECK(r(1, 1) == Catch::Approx(13.0 / 12.0 - 1.0));
    CHECK_THROWS_WITH(statarb::member_returns(p, {0, 1}, 3, 4),
                      Catch::Matchers::ContainsSubstring("AAA"));
}

TEST_CASE("rebalance schedule covers the backtest span", "[universe]") {
    std::vector<Date> calendar;
    Date d = Date::parse("2019-01-02");
    for (int i = 0; i < 300; ++i) {
        calendar.push_back(d);
        d = d.next_weekday();
    }
    auto refreshes = statarb::rebalance_schedule(calendar, 252, 21);
    REQUIRE(refreshes.size() == 12);
    CHECK(refreshes[0] == calendar[48]);
    CHECK(refreshes[1] == calendar[69]);
    CHECK(refreshes[11] == calendar[48 + 21 * 11]);

    auto single = statarb::rebalance_schedule(calendar, 10, 40);
    REQUIRE(single.size() == 1);
    CHECK(single[0] == calendar[290]);

    CHECK_THROWS_AS(statarb::rebalance_schedule(calendar, 301, 21), Error);
    CHECK_THROWS_AS(statarb::rebalance_schedule(calendar, 0, 21), Error);
    CHECK_THROWS_AS(statarb::rebalance_schedule(calendar, 252, 0), Error);
}
