#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "statarb/signals.hpp"
#include "test_support.hpp"

using statarb::BarPanel;
using statarb::Direction;
using statarb::ReturnKind;

namespace {

// One ticker with closes 100,110,99,132,66,99,108.9 and a second flat one.
// Close-to-close returns of AAA: 0.1, -0.1, 1/3, -0.5, 0.5, 0.1.
BarPanel two_ticker_panel() {
    Eigen::MatrixXd close(7, 2);
    close << 100, 50, 110, 50, 99, 50, 132, 50, 66, 50, 99, 50, 108.9, 50;
    return test_support::panel_from_closes({"AAA", "BBB"}, close);
}

}  // namespace

TEST_CASE("c2c signal is the mean of trailing returns ending yesterday", "[signals]") {
    BarPanel p = two_ticker_panel();
    std::vector<int> members = {0, 1};

    // At t=6, C2C1 = AAA's day-5 return = 0.5.
    auto s1 = statarb::compute_signal(p, members, p.calendar[6], ReturnKind::c2c1);
    CHECK(s1.values(0) == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(s1.values(1) == Catch::Approx(0.0).margin(1e-15));
    CHECK(s1.direction == Direction::mean_reversion);

    // At t=6, C2C5 = mean of returns over days 1..5 = (0.1-0.1+1/3-0.5+0.5)/5 = 1/15.
    auto s5 = statarb::c2c_signal(p, members, p.calendar[6], 5);
    CHECK(s5.values(0) == Catch::Approx(1.0 / 15.0).epsilon(1e-12));

    // Insufficient history -> NaN, present members still fine.
    auto s5_early = statarb::c2c_signal(p, members, p.calendar[3], 5);
    CHECK(std::isnan(s5_early.values(0)));
    auto s20 = statarb::compute_signal(p, members, p.calendar[6], ReturnKind::c2c20);
    CHECK(std::isnan(s20.values(0)));
}

TEST_CASE("mom1 is yesterday's open-to-close move", "[signals]") {
    BarPanel p = two_ticker_panel();
    // Opens are the previous close, so mom1 at t equals the close-to-close
    // return of day t-1: at t=4 that is day 3's 132/99 - 1 = 1/3.
    auto s = statarb::compute_signal(p, {0, 1}, p.calendar[4], ReturnKind::mom1);
    CHECK(s.values(0) == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(s.direction == Direction::momentum);

    auto s0 = statarb::mom1_signal(p, {0, 1}, p.calendar[0]);
    CHECK(std::isnan(s0.values(0)));  // no previous session
}

TEST_CASE("d0 is the overnight gap known at the open", "[signals]") {
    Eigen::MatrixXd close(3, 1), open(3, 1), volume(3, 1);
    close << 100, 101, 99;
    open << 100, 102, 101.505;
    volume.setConstant(1000);
    BarPanel p = test_support::make_panel({"AAA"}, open, close, volume);

    auto s1 = statarb::compute_signal(p, {0}, p.calendar[1], ReturnKind::d0);
    CHECK(s1.values(0) == Catch::Approx(0.02).epsilon(1e-12));  // 102/100 - 1
    auto s2 = statarb::d0_signal(p, {0}, p.calendar[2]);
    CHECK(s2.values(0) == Catch::Approx(0.005).epsilon(1e-12));  // 101.505/101 - 1
    CHECK(s2.direction == Direction::mean_reversion);
    auto s0 = statarb::d0_signal(p, {0}, p.calendar[0]);
    CHECK(std::isnan(s0.values(0)));
}

TEST_CASE("signals never read today's close", "[signals]") {
    BarPanel p = two_ticker_panel();
    BarPanel q = p;
    q.close(6, 0) *= 5.0;  // tamper with today's close
    q.open(6, 0) *= 3.0;   // and today's open
    for (ReturnKind k : {ReturnKind::c2c1, ReturnKind::c2c5, ReturnKind::mom1}) {
        auto a = statarb::compute_signal(p, {0, 1}, p.calendar[6], k);
        auto b = statarb::compute_signal(q, {0, 1}, q.calendar[6], k);
        CHECK(a.values(0) == b.values(0));
    }
    // d0 may read today's open (zero-delay), but never today's close.
    BarPanel r = p;
    r.close(6, 0) *= 5.0;
    auto a = statarb::compute_signal(p, {0, 1}, p.calendar[6], ReturnKind::d0);
    auto b = statarb::compute_signal(r, {0, 1}, r.calendar[6], ReturnKind::d0);
    CHECK(a.values(0) == b.values(0));
}

TEST_CASE("return kind names round trip", "[signals]") {
    using statarb::return_kind_from_string;
    using statarb::to_string;
    for (ReturnKind k : statarb::all_return_kinds) CHECK(return_kind_from_string(to_string(k)) == k);
    CHECK(to_string(ReturnKind::c2c10) == "C2C10");
    CHECK_THROWS_AS(return_kind_from_string("C2C7"), statarb::Error);
    CHECK(statarb::direction_of(ReturnKind::mom1) == Direction::momentum);
    CHECK(statarb::direction_of(ReturnKind::d0) == Direction::mean_reversion);
    CHECK(statarb::direction_of(ReturnKind::c2c20) == Direction::mean_reversion);
}

TEST_CASE("historical variance matches the two-return hand value", "[signals]") {
    Eigen::MatrixXd close(4, 2);
    close << 100, 70, 100, 70, 102, 70, 55, 70;
    BarPanel p = test_support::panel_from_closes({"AAA", "BBB"}, close);
    // Window ends the day before t=3: closes 100,100,102 -> returns 0, 0.02.
    Eigen::VectorXd v = statarb::historical_variance(p, {0, 1}, p.calendar[3], 3);
    CHECK(v(0) == Catch::Approx(2e-4).epsilon(1e-12));
    // Flat series floors at 1e-8 so inverse-variance weights stay finite.
    CHECK(v(1) == 1e-8);
    // Day t=3's crash must not leak into the variance at t=3.
    BarPanel q = p;
    q.close(3, 0) = 10.0;
    CHECK(statarb::historical_variance(q, {0, 1}, q.calendar[3], 3)(0) == v(0));
}
