#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "statarb/classify.hpp"
#include "test_support.hpp"

using statarb::Classification;
using statarb::DummyMatrix;
using statarb::Error;
using test_support::TempDir;
using test_support::WarnCapture;
using test_support::write_text;

TEST_CASE("fundamental classification loads and densifies codes", "[classify]") {
    TempDir dir("classify");
    auto path = dir.file("labels.csv");
    write_text(path,
               "ticker,code\n"
               "CCC,20\n"
               "AAA,7310\n"
               "BBB,080\n"
               "DDD,20\n"
               "EEE,9999\n");
    Classification cls = statarb::load_fundamental_classification(path, {"AAA", "BBB", "CCC", "DDD"});
    CHECK(cls.kind == Classification::Kind::fundamental);
    REQUIRE(cls.num_levels() == 1);
    // Codes sort as strings: "080" < "20" < "7310" < "9999".
    CHECK(cls.levels[0].at("BBB") == 0);
    CHECK(cls.levels[0].at("CCC") == 1);
    CHECK(cls.levels[0].at("DDD") == 1);
    CHECK(cls.levels[0].at("AAA") == 2);
    CHECK(cls.levels[0].at("EEE") == 3);
    CHECK(cls.cluster_count(0) == 4);
}

TEST_CASE("fundamental classification rejects conflicts and gaps", "[classify]") {
    TempDir dir("classify");
    auto conflicted = dir.file("conflict.csv");
    write_text(conflicted, "AAA,10\nAAA,20\n");
    CHECK_THROWS_WITH(statarb::load_fundamental_classification(conflicted, {"AAA"}),
                      Catch::Matchers::ContainsSubstring("mapped to both"));

    auto partial = dir.file("partial.csv");
    write_text(partial, "AAA,10\n");
    CHECK_THROWS_WITH(statarb::load_fundamental_classification(partial, {"AAA", "BBB"}),
                      Catch::Matchers::ContainsSubstring("BBB"));

    auto malformed = dir.file("bad.csv");
    write_text(malformed, "AAA\n");
    CHECK_THROWS_AS(statarb::load_fundamental_classification(malformed, {}), Error);
    CHECK_THROWS_AS(statarb::load_fundamental_classification(dir.file("nope.csv"), {}), Error);
}

TEST_CASE("dummy matrix orders columns by cluster id", "[classify]") {
    Classification cls;
    cls.levels.emplace_back();
    cls.levels[0] = {{"AAA", 2}, {"BBB", 0}, {"CCC", 2}, {"DDD", 5}};
    DummyMatrix dm = statarb::dummy_matrix(cls, 0, {"AAA", "BBB", "CCC", "DDD"});
    REQUIRE(dm.rows() == 4);
    REQUIRE(dm.cols() == 3);
    CHECK(dm.cluster_ids == std::vector<int>{0, 2, 5});
    CHECK(dm.cluster_of == std::vector<int>{1, 0, 1, 2});

    Eigen::MatrixXd dense = dm.dense();
    for (int i = 0; i < 4; ++i) CHECK(dense.row(i).sum() == 1.0);
    CHECK(dense(0, 1) == 1.0);

    auto groups = dm.groups();
    REQUIRE(groups.size() == 3);
    CHECK(groups[1] == std::vector<int>{0, 2});

    // Restriction drops clusters that lose every member.
    DummyMatrix r = dm.restrict({0, 2, 3});
    CHECK(r.rows() == 3);
    CHECK(r.cols() == 2);
    CHECK(r.cluster_ids == std::vector<int>{2, 5});
    CHECK(r.cluster_of == std::vector<int>{0, 0, 1});

    CHECK_THROWS_WITH(statarb::dummy_matrix(cls, 0, {"ZZZ"}),
                      Catch::Matchers::ContainsSubstring("ZZZ"));
    CHECK_THROWS_AS(statarb::dummy_matrix(cls, 1, {"AAA"}), Error);
}

TEST_CASE("k-means recovers well-separated clusters deterministically", "[classify]") {
    Eigen::MatrixXd points(1, 8);
    points << 0.0, 0.1, 10.0, 10.1, 20.0, 20.1, 30.0, 30.1;
    auto res = statarb::detail::kmeans(points, 4, 12345);
    auto labels = statarb::detail::canonical_labels(res.assignment);
    CHECK(labels == std::vector<int>{0, 0, 1, 1, 2, 2, 3, 3});
    CHECK(res.inertia == Catch::Approx(4 * 0.005).epsilon(1e-9));

    auto res2 = statarb::detail::kmeans(points, 4, 12345);
    CHECK(res.assignment == res2.assignment);

    // k >= n degenerates to singletons.
    auto singles = statarb::detail::kmeans(points, 8, 7);
    CHECK(singles.assignment == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
    CHECK_THROWS_AS(statarb::detail::kmeans(points, 0, 7), Error);
}

TEST_CASE("statistical classification recovers planted groups and nests", "[classify]") {
    // 30 tickers in 3 groups driven by strong group factors.
    const int n = 30, T = 60;
    std::mt19937_64 rng(99);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd group_factor(T, 3);
    for (int t = 0; t < T; ++t)
        for (int g = 0; g < 3; ++g) group_factor(t, g) = normal(rng);
    Eigen::MatrixXd returns(T, n);
    std::vector<std::string> tickers(n);
    std::vector<int> truth(n);
    for (int i = 0; i < n; ++i) {
        tickers[i] = fmt::format("S{:02d}", i);
        truth[i] = i % 3;
        for (int t = 0; t < T; ++t) returns(t, i) = group_factor(t, truth[i]) + 0.3 * normal(rng);
    }

    Classification cls = statarb::build_statistical_classification(tickers, returns, {3, 2}, 42);
    CHECK(cls.kind == Classification::Kind::statistical);
    REQUIRE(cls.num_levels() == 2);
    CHECK(cls.cluster_count(0) == 3);
    CHECK(cls.cluster_count(1) == 2);
    cls.validate_nested();

    // Same planted group <=> same level-1 cluster.
    int agree = 0, total = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            bool same_truth = truth[i] == truth[j];
            bool same_cluster = cls.levels[0].at(tickers[i]) == cls.levels[0].at(tickers[j]);
            agree += same_truth == same_cluster;
            ++total;
        }
    CHECK(agree == total);

    // Determinism in the seed.
    Classification cls2 = statarb::build_statistical_classification(tickers, returns, {3, 2}, 42);
    CHECK(cls.levels[0] == cls2.levels[0]);
    CHECK(cls.levels[1] == cls2.levels[1]);
}

TEST_CASE("statistical classification clamps oversized level counts", "[classify]") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd returns(10, 4);
    for (int t = 0; t < 10; ++t)
        for (int i = 0; i < 4; ++i) returns(t, i) = normal(rng);
    WarnCapture warns;
    Classification cls = statarb::build_statistical_classification({"A", "B", "C", "D"}, returns,
                                                                   {100, 30, 10}, 1);
    CHECK(warns.any_contains("clamping"));
    CHECK(cls.cluster_count(0) <= 4);
    cls.validate_nested();
}

TEST_CASE("classification csv round trips and validates nesting", "[classify]") {
    TempDir dir("classify");
    Classification cls;
    cls.kind = Classification::Kind::statistical;
    cls.levels.resize(2);
    cls.levels[0] = {{"AAA", 0}, {"BBB", 1}, {"CCC", 2}, {"DDD", 1}};
    cls.levels[1] = {{"AAA", 0}, {"BBB", 0}, {"CCC", 1}, {"DDD", 0}};
    auto path = dir.file("stat.csv");
    statarb::write_classification_csv(path, cls);

    std::string text = test_support::read_text(path);
    CHECK(text ==
          "ticker,level1,level2\n"
          "AAA,0,0\n"
          "BBB,1,0\n"
          "CCC,2,1\n"
          "DDD,1,0\n");

    Classification back = statarb::load_statistical_classification(path);
    CHECK(back.levels[0] == cls.levels[0]);
    CHECK(back.levels[1] == cls.levels[1]);

    // A non-nested file is rejected.
    auto bad = dir.file("bad.csv");
    write_text(bad,
               "ticker,level1,level2\n"
               "AAA,0,0\n"
               "BBB,0,1\n");
    CHECK_THROWS_WITH(statarb::load_statistical_classification(bad),
                      Catch::Matchers::ContainsSubstring("not nested"));

    auto dup = dir.file("dup.csv");
    write_text(dup,
               "ticker,level1\n"
               "AAA,0\n"
               "AAA,0\n");
    CHECK_THROWS_WITH(statarb::load_statistical_classification(dup),
                      Catch::Matchers::ContainsSubstring("duplicate ticker"));

    auto badid = dir.file("badid.csv");
    write_text(badid,
               "ticker,level1\n"
               "AAA,x\n");
    CHECK_THROWS_WITH(statarb::load_statistical_classification(badid),
                      Catch::Matchers::ContainsSubstring("bad cluster id"));
}

TEST_CASE("nesting validation catches split clusters", "[classify]") {
    Classification cls;
    cls.levels.resize(2);
    cls.levels[0] = {{"AAA", 0}, {"BBB", 0}};
    cls.levels[1] = {{"AAA", 0}, {"BBB", 1}};
    CHECK_THROWS_WITH(cls.validate_nested(), Catch::Matchers::ContainsSubstring("not nested"));

    Classification missing;
    missing.levels.resize(2);
    missing.levels[0] = {{"AAA", 0}};
    missing.levels[1] = {};
    CHECK_THROWS_AS(missing.validate_nested(), Error);
}
