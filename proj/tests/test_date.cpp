#include <catch2/catch_amalgamated.hpp>

#include "statarb/date.hpp"

using statarb::Date;
using statarb::Error;

TEST_CASE("date parse and iso round trip", "[date]") {
    Date d = Date::parse("2020-03-16");
    CHECK(d.iso() == "2020-03-16");
    auto [y, m, day] = d.ymd();
    CHECK(y == 2020);
    CHECK(m == 3);
    CHECK(day == 16);
    CHECK(Date::from_ymd(2020, 3, 16) == d);

    CHECK(Date::parse("1970-01-01").serial() == 0);
    CHECK(Date(0).iso() == "1970-01-01");
    CHECK(Date::parse("1969-12-31").serial() == -1);
}

TEST_CASE("date rejects malformed input", "[date]") {
    CHECK_THROWS_AS(Date::parse("2020-13-01"), Error);
    CHECK_THROWS_AS(Date::parse("2020-00-10"), Error);
    CHECK_THROWS_AS(Date::parse("2020-02-30"), Error);
    CHECK_THROWS_AS(Date::parse("2019-02-29"), Error);
    CHECK_THROWS_AS(Date::parse("2020/01/02"), Error);
    CHECK_THROWS_AS(Date::parse("2020-1-02"), Error);
    CHECK_THROWS_AS(Date::parse("garbage"), Error);
    CHECK_THROWS_AS(Date::parse(""), Error);
    CHECK_THROWS_AS(Date::parse("2020-01-021"), Error);
    CHECK_NOTHROW(Date::parse("2020-02-29"));  // leap year
}

TEST_CASE("date weekday arithmetic", "[date]") {
    CHECK(Date::parse("1970-01-01").weekday() == 4);  // Thursday
    CHECK(Date::parse("2019-01-02").weekday() == 3);  // Wednesday
    CHECK(Date::parse("2020-03-14").weekday() == 6);  // Saturday
    CHECK_FALSE(Date::parse("2020-03-14").is_weekday());
    CHECK(Date::parse("2020-03-16").is_weekday());

    // Friday -> Monday.
    CHECK(Date::parse("2020-03-13").next_weekday() == Date::parse("2020-03-16"));
    // Mid-week just advances one day.
    CHECK(Date::parse("2020-03-16").next_weekday() == Date::parse("2020-03-17"));

    Date a = Date::parse("2020-01-02");
    CHECK((a + 7) - a == 7);
    CHECK(a < a + 1);
    CHECK(a + 366 == Date::parse("2021-01-02"));  // 2020 is a leap year
}

TEST_CASE("date covers century boundaries", "[date]") {
    CHECK(Date::parse("2000-02-29").iso() == "2000-02-29");    // 400-year leap
    CHECK_THROWS_AS(Date::parse("1900-02-29"), Error);         // 100-year non-leap
    Date d = Date::parse("1999-12-31");
    CHECK((d + 1).iso() == "2000-01-01");
}
