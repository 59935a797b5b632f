// classify.hpp
// Industry classifications: load a fundamental ticker->code file, or build a
// nested statistical classification by k-means on volatility-normalized
// trailing returns, and render either as a binary industry dummy matrix.
#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <charconv>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "statarb/common.hpp"
#include "statarb/mathutil.hpp"

namespace statarb {

struct Classification {
    enum class Kind { fundamental, statistical };
    Kind kind = Kind::fundamental;
    // levels[0] is the most granular. Each maps ticker -> cluster id; ids are
    // dense per level. Multi-level classifications are nested: all tickers of
    // a level-k cluster share one level-(k+1) cluster.
    std::vector<std::unordered_map<std::string, int>> levels;

    int num_levels() const { return static_cast<int>(levels.size()); }

    int cluster_count(int level) const {
        int hi = -1;
        for (const auto& [_, c] : levels.at(level)) hi = std::max(hi, c);
        return hi + 1;
    }

    void validate_nested() const {
        for (int l = 0; l + 1 < num_levels(); ++l) {
            std::unordered_map<int, int> parent;
            for (const auto& [ticker, c] : levels[l]) {
                auto it = levels[l + 1].find(ticker);
                if (it == levels[l + 1].end())
                    fail("ticker {} mapped at level {} but not level {}", ticker, l, l + 1);
                auto [p, inserted] = parent.try_emplace(c, it->second);
                if (!inserted && p->second != it->second)
                    fail("classification not nested: level-{} cluster {} spans level-{} clusters {} and {}",
                         l, c, l + 1, p->second, it->second);
            }
        }
    }
};

// Binary membership of universe members in one level's clusters. Stored as the
// member -> column map; every member has exactly one column and every column
// has at least one member.
struct DummyMatrix {
    std::vector<int> cluster_of;  // per member row, column index
    std::vector<int> cluster_ids; // column -> cluster id in the classification
    int rows() const { return static_cast<int>(cluster_of.size()); }
    int cols() const { return static_cast<int>(cluster_ids.size()); }

    Eigen::MatrixXd dense() const {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows(), cols());
        for (int i = 0; i < rows(); ++i) m(i, cluster_of[i]) = 1.0;
        return m;
    }

    std::vector<std::vector<int>> groups() const {
        std::vector<std::vector<int>> g(cols());
        for (int i = 0; i < rows(); ++i) g[cluster_of[i]].push_back(i);
        return g;
    }

    // Submatrix on a row subset, dropping clusters that lose all members.
    DummyMatrix restrict(const std::vector<int>& keep_rows) const {
        DummyMatrix out;
        out.cluster_of.reserve(keep_rows.size());
        std::vector<int> col_map(cols(), -1);
        for (int r : keep_rows) {
            int c = cluster_of.at(r);
            if (col_map[c] < 0) {
                col_map[c] = static_cast<int>(out.cluster_ids.size());
                out.cluster_ids.push_back(cluster_ids[c]);
            }
            out.cluster_of.push_back(col_map[c]);
        }
        return out;
    }
};

// -------------------------------------------------------------------- k-means

namespace detail {

struct KmeansResult {
    std::vector<int> assignment;  // per point, cluster in [0, k)
    Eigen::MatrixXd centroids;    // dim x k
    double inertia = 0;
};

// Lloyd's algorithm, greedy farthest-point seeding, deterministic tie-breaks
// (lowest index wins everywhere). points are columns.
inline KmeansResult kmeans_once(const Eigen::MatrixXd& points, int k, uint64_t seed, int max_iter) {
    const int n = static_cast<int>(points.cols());
    std::mt19937_64 rng(seed);
    std::vector<int> centers;
    centers.push_back(static_cast<int>(rng() % static_cast<uint64_t>(n)));
    Eigen::VectorXd nearest = (points.colwise() - points.col(centers[0])).colwise().squaredNorm();
    while (static_cast<int>(centers.size()) < k) {
        int far = 0;
        for (int i = 1; i < n; ++i)
            if (nearest(i) > nearest(far)) far = i;
        centers.push_back(far);
        nearest = nearest.cwiseMin((points.colwise() - points.col(far)).colwise().squaredNorm().transpose());
    }

    KmeansResult res;
    res.centroids.resize(points.rows(), k);
    for (int c = 0; c < k; ++c) res.centroids.col(c) = points.col(centers[c]);
    res.assignment.assign(n, -1);

    for (int iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = (points.col(i) - res.centroids.col(0)).squaredNorm();
            for (int c = 1; c < k; ++c) {
                double d = (points.col(i) - res.centroids.col(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (res.assignment[i] != best) {
                res.assignment[i] = best;
                changed = true;
            }
        }
        if (!changed) break;

        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(points.rows(), k);
        std::vector<int> counts(k, 0);
        for (int i = 0; i < n; ++i) {
            sums.col(res.assignment[i]) += points.col(i);
            ++counts[res.assignment[i]];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                res.centroids.col(c) = sums.col(c) / counts[c];
            } else {
                // Empty cluster: seize the point currently farthest from its
                // own centroid.
                int far = -1;
                double far_d = -1;
                for (int i = 0; i < n; ++i) {
                    double d = (points.col(i) - res.centroids.col(res.assignment[i])).squaredNorm();
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                res.centroids.col(c) = points.col(far);
                res.assignment[far] = c;
            }
        }
    }

    res.inertia = 0;
    for (int i = 0; i < n; ++i)
        res.inertia += (points.col(i) - res.centroids.col(res.assignment[i])).squaredNorm();
    return res;
}

inline KmeansResult kmeans(const Eigen::MatrixXd& points, int k, uint64_t seed, int restarts = 10,
                           int max_iter = 100) {
    const int n = static_cast<int>(points.cols());
    if (k < 1) fail("k-means needs k >= 1, got {}", k);
    if (k >= n) {
        // Singletons; no iteration needed and the outcome is seed-free.
        KmeansResult res;
        res.assignment.resize(n);
        std::iota(res.assignment.begin(), res.assignment.end(), 0);
        res.centroids = points;
        return res;
    }
    KmeansResult best;
    for (int r = 0; r < restarts; ++r) {
        KmeansResult cand = kmeans_once(points, k, mix_seed(seed, static_cast<uint64_t>(r)), max_iter);
        if (r == 0 || cand.inertia < best.inertia) best = std::move(cand);
    }
    return best;
}

// Relabel clusters by first appearance so ids are stable and dense.
inline std::vector<int> canonical_labels(const std::vector<int>& assignment, int* count_out = nullptr) {
    std::unordered_map<int, int> remap;
    std::vector<int> out(assignment.size());
    for (size_t i = 0; i < assignment.size(); ++i) {
        auto [it, inserted] = remap.try_emplace(assignment[i], static_cast<int>(remap.size()));
        out[i] = it->second;
    }
    if (count_out) *count_out = static_cast<int>(remap.size());
    return out;
}

}  // namespace detail

// ------------------------------------------------------- fundamental source

// CSV "ticker,code" (header optional). Every requested universe ticker must be
// mapped; extra tickers in the file are fine. Codes become dense cluster ids
// in sorted-code order.
inline Classification load_fundamental_classification(const std::filesystem::path& path,
                                                      const std::vector<std::string>& universe_tickers) {
    std::ifstream in(path);
    if (!in) fail("cannot open classification file {}", path.string());
    std::map<std::string, std::string> code_of;  // ticker -> code
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (lineno == 1 && (line == "ticker,code" || line == "ticker,industry")) continue;
        size_t comma = line.find(',');
        if (comma == std::string::npos || comma == 0 || comma + 1 == line.size())
            fail("{}:{}: expected 'ticker,code', got '{}'", path.string(), lineno, line);
        std::string ticker = line.substr(0, comma);
        std::string code = line.substr(comma + 1);
        if (code.find(',') != std::string::npos)
            fail("{}:{}: expected 'ticker,code', got '{}'", path.string(), lineno, line);
        auto [it, inserted] = code_of.try_emplace(std::move(ticker), code);
        if (!inserted && it->second != code)
            fail("{}:{}: ticker {} mapped to both {} and {}", path.string(), lineno, it->first,
                 it->second, code);
    }

    std::vector<std::string> missing;
    for (const auto& t : universe_tickers)
        if (!code_of.count(t)) missing.push_back(t);
    if (!missing.empty()) {
        std::string shown;
        for (size_t i = 0; i < missing.size() && i < 10; ++i)
            shown += (i ? ", " : "") + missing[i];
        fail("{}: {} universe tickers unmapped (e.g. {})", path.string(), missing.size(), shown);
    }

    std::map<std::string, int> cluster_of_code;
    for (const auto& [_, code] : code_of) cluster_of_code.try_emplace(code, 0);
    int next = 0;
    for (auto& [_, id] : cluster_of_code) id = next++;

    Classification cls;
    cls.kind = Classification::Kind::fundamental;
    cls.levels.emplace_back();
    for (const auto& [ticker, code] : code_of) cls.levels[0][ticker] = cluster_of_code[code];
    return cls;
}

// ------------------------------------------------------- statistical source

// k-means over volatility-normalized return vectors; coarser levels cluster
// the finer level's centroids so nesting holds by construction.
// `returns` is (observations x tickers), column i belonging to tickers[i].
inline Classification build_statistical_classification(const std::vector<std::string>& tickers,
                                                       const Eigen::MatrixXd& returns,
                                                       const std::vector<int>& level_counts = {100, 30, 10},
                                                       uint64_t seed = 0) {
    const int n = static_cast<int>(tickers.size());
    if (returns.cols() != n) fail("returns have {} columns for {} tickers", returns.cols(), n);
    if (returns.rows() < 2) fail("statistical classification needs >= 2 return observations");
    if (level_counts.empty()) fail("statistical classification needs at least one level");
    if (!returns.allFinite()) fail("statistical classification input returns must be finite");

    // Normalize each ticker's series by its sample standard deviation so
    // distances compare shapes, not volatility levels. Flat series stay zero.
    Eigen::MatrixXd points(returns.rows(), n);
    for (int i = 0; i < n; ++i) {
        double sd = std::sqrt(detail::sample_variance(returns.col(i)));
        points.col(i) = sd > 0 ? (returns.col(i) / sd).eval() : Eigen::VectorXd::Zero(returns.rows()).eval();
    }

    Classification cls;
    cls.kind = Classification::Kind::statistical;

    int k0 = level_counts[0];
    if (k0 > n) {
        warn("level-1 cluster count {} exceeds ticker count {}; clamping", k0, n);
        k0 = n;
    }
    auto lvl0 = detail::kmeans(points, k0, detail::mix_seed(seed, 0));
    int count0 = 0;
    std::vector<int> labels0 = detail::canonical_labels(lvl0.assignment, &count0);
    cls.levels.emplace_back();
    for (int i = 0; i < n; ++i) cls.levels[0][tickers[i]] = labels0[i];

    // Centroids of the canonical clusters, in canonical order.
    Eigen::MatrixXd centroids(points.rows(), count0);
    {
        std::vector<int> counts(count0, 0);
        centroids.setZero();
        for (int i = 0; i < n; ++i) {
            centroids.col(labels0[i]) += points.col(i);
            ++counts[labels0[i]];
        }
        for (int c = 0; c < count0; ++c) centroids.col(c) /= counts[c];
    }

    std::vector<int> prev_labels = labels0;  // per ticker
    Eigen::MatrixXd prev_centroids = centroids;
    int prev_count = count0;
    for (size_t l = 1; l < level_counts.size(); ++l) {
        int k = level_counts[l];
        if (k > prev_count) {
            warn("level-{} cluster count {} exceeds available {} clusters; clamping", l + 1, k, prev_count);
            k = prev_count;
        }
        auto lvl = detail::kmeans(prev_centroids, k, detail::mix_seed(seed, l));
        int count = 0;
        std::vector<int> centroid_label = detail::canonical_labels(lvl.assignment, &count);

        std::vector<int> labels(n);
        for (int i = 0; i < n; ++i) labels[i] = centroid_label[prev_labels[i]];
        cls.levels.emplace_back();
        for (int i = 0; i < n; ++i) cls.levels[l][tickers[i]] = labels[i];

        Eigen::MatrixXd next_centroids = Eigen::MatrixXd::Zero(points.rows(), count);
        std::vector<int> counts(count, 0);
        for (int c = 0; c < prev_count; ++c) {
            next_centroids.col(centroid_label[c]) += prev_centroids.col(c);
            ++counts[centroid_label[c]];
        }
        for (int c = 0; c < count; ++c) next_centroids.col(c) /= counts[c];
        prev_centroids = std::move(next_centroids);
        prev_labels = std::move(labels);
        prev_count = count;
    }

    cls.validate_nested();
    return cls;
}

// --------------------------------------------------------------- rendering

inline DummyMatrix dummy_matrix(const Classification& cls, int level,
                                const std::vector<std::string>& member_tickers) {
    if (level < 0 || level >= cls.num_levels())
        fail("classification has {} levels, requested level {}", cls.num_levels(), level);
    const auto& map = cls.levels[level];
    std::vector<int> raw(member_tickers.size());
    for (size_t i = 0; i < member_tickers.size(); ++i) {
        auto it = map.find(member_tickers[i]);
        if (it == map.end()) fail("ticker {} not covered by the classification", member_tickers[i]);
        raw[i] = it->second;
    }
    // Columns in ascending cluster-id order, only for clusters present.
    std::vector<int> ids = raw;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    DummyMatrix dm;
    dm.cluster_ids = ids;
    dm.cluster_of.resize(raw.size());
    for (size_t i = 0; i < raw.size(); ++i)
        dm.cluster_of[i] = static_cast<int>(std::lower_bound(ids.begin(), ids.end(), raw[i]) - ids.begin());
    return dm;
}

// ------------------------------------------------------------ serialization

// "ticker,level1[,level2,...]" with one row per ticker, sorted by ticker.
inline void write_classification_csv(const std::filesystem::path& path, const Classification& cls) {
    std::ofstream out(path);
    if (!out) fail("cannot write classification file {}", path.string());
    out << "ticker";
    for (int l = 0; l < cls.num_levels(); ++l) out << fmt::format(",level{}", l + 1);
    out << "\n";
    std::vector<std::string> tickers;
    for (const auto& [t, _] : cls.levels.at(0)) tickers.push_back(t);
    std::sort(tickers.begin(), tickers.end());
    for (const auto& t : tickers) {
        out << t;
        for (int l = 0; l < cls.num_levels(); ++l) {
            auto it = cls.levels[l].find(t);
            if (it == cls.levels[l].end()) fail("ticker {} missing at level {}", t, l + 1);
            out << ',' << it->second;
        }
        out << "\n";
    }
    if (!out) fail("failed writing classification file {}", path.string());
}

inline Classification load_statistical_classification(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open classification file {}", path.string());
    std::string line;
    if (!std::getline(in, line)) fail("{}: empty classification file", path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("ticker,level1", 0) != 0)
        fail("{}: expected header 'ticker,level1[,level2,...]', got '{}'", path.string(), line);
    int levels = static_cast<int>(std::count(line.begin(), line.end(), ','));

    Classification cls;
    cls.kind = Classification::Kind::statistical;
    cls.levels.resize(levels);
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        size_t pos = 0;
        while (true) {
            size_t comma = line.find(',', pos);
            fields.push_back(line.substr(pos, comma == std::string::npos ? comma : comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (static_cast<int>(fields.size()) != levels + 1)
            fail("{}:{}: expected {} fields, got {}", path.string(), lineno, levels + 1, fields.size());
        for (int l = 0; l < levels; ++l) {
            int id = 0;
            auto [p, ec] = std::from_chars(fields[l + 1].data(), fields[l + 1].data() + fields[l + 1].size(), id);
            if (ec != std::errc{} || p != fields[l + 1].data() + fields[l + 1].size() || id < 0)
                fail("{}:{}: bad cluster id '{}'", path.string(), lineno, fields[l + 1]);
            if (!cls.levels[l].try_emplace(fields[0], id).second)
                fail("{}:{}: duplicate ticker {}", path.string(), lineno, fields[0]);
        }
    }
    if (cls.levels.empty() || cls.levels[0].empty()) fail("{}: no classification rows", path.string());
    cls.validate_nested();
    return cls;
}

}  // namespace statarb
