// config.hpp
// Flat key=value run configuration. Every pipeline constant is a key with its
// standard default; unknown keys are hard errors so typos cannot silently
// fall back to defaults.
#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "statarb/engine.hpp"
#include "statarb/synth.hpp"

namespace statarb {

namespace detail {

inline const std::set<std::string>& known_config_keys() {
    static const std::set<std::string> keys = {
        "data", "classification", "out", "grid", "jobs", "seed",
        "universe_size", "lookback", "backtest_days", "refresh_period", "gross", "bound_fraction",
        "stat_levels", "cost_linear_bps", "cost_target_bps",
        "drawdown_start", "drawdown_end", "drawdown_days",
        "opt_max_iterations", "opt_kkt_tolerance",
        "synth_tickers", "synth_industries", "synth_days", "synth_start",
        "synth_market_vol", "synth_industry_vol", "synth_idio_vol", "synth_phi", "synth_split",
        "synth_exposure_min", "synth_exposure_max",
        "synth_selloff_start", "synth_selloff_days", "synth_selloff_drift",
        "synth_selloff_vol_mult", "synth_selloff_idio_mult", "synth_selloff_phi", "synth_scramble",
        "synth_price_min", "synth_price_max", "synth_volume_log_mean", "synth_volume_log_sd",
    };
    return keys;
}

inline std::string trim(std::string_view s) {
    size_t b = s.find_first_not_of(" \t");
    size_t e = s.find_last_not_of(" \t");
    return b == std::string_view::npos ? std::string() : std::string(s.substr(b, e - b + 1));
}

}  // namespace detail

struct RunConfig {
    std::filesystem::path source;        // the config file itself
    std::filesystem::path data;          // bar CSV for backtests
    std::filesystem::path classification;// fundamental ticker,code file (optional)
    std::filesystem::path out = "out";
    std::string grid = "full";
    int jobs = 0;                        // 0 = hardware concurrency
    BacktestParams params;
    SynthConfig synth;

    static RunConfig load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) fail("cannot open config file {}", path.string());
        std::map<std::string, std::string> kv;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            std::string stripped = detail::trim(line.substr(0, line.find('#')));
            if (stripped.empty()) continue;
            size_t eq = stripped.find('=');
            if (eq == std::string::npos)
                fail("{}:{}: expected 'key = value', got '{}'", path.string(), lineno, line);
            std::string key = detail::trim(std::string_view(stripped).substr(0, eq));
            std::string value = detail::trim(std::string_view(stripped).substr(eq + 1));
            if (!detail::known_config_keys().count(key))
                fail("{}:{}: unknown config key '{}'", path.string(), lineno, key);
            if (!kv.emplace(key, value).second)
                fail("{}:{}: duplicate config key '{}'", path.string(), lineno, key);
        }
        return from_map(kv, path);
    }

    static RunConfig from_map(const std::map<std::string, std::string>& kv,
                              const std::filesystem::path& source = "<inline>") {
        RunConfig c;
        c.source = source;
        auto str = [&](const char* key, std::string def) {
            auto it = kv.find(key);
            return it == kv.end() ? def : it->second;
        };
        auto num = [&](const char* key, double def) {
            auto it = kv.find(key);
            if (it == kv.end()) return def;
            double v = 0;
            auto [p, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
            if (ec != std::errc{} || p != it->second.data() + it->second.size())
                fail("{}: config key '{}' has non-numeric value '{}'", source.string(), key, it->second);
            return v;
        };
        auto integer = [&](const char* key, int def) {
            double v = num(key, def);
            int i = static_cast<int>(v);
            if (i != v) fail("{}: config key '{}' must be an integer", source.string(), key);
            return i;
        };
        auto date = [&](const char* key) -> std::optional<Date> {
            auto it = kv.find(key);
            if (it == kv.end()) return std::nullopt;
            return Date::parse(it->second);
        };

        c.data = str("data", "");
        c.classification = str("classification", "");
        c.out = str("out", "out");
        c.grid = str("grid", "full");
        c.jobs = integer("jobs", 0);

        c.params.universe_size = integer("universe_size", 2000);
        c.params.lookback = integer("lookback", 21);
        c.params.backtest_days = integer("backtest_days", 252);
        c.params.refresh_period = integer("refresh_period", 21);
        c.params.gross = num("gross", 2.0e7);
        c.params.bound_fraction = num("bound_fraction", 0.01);
        c.params.seed = static_cast<uint64_t>(num("seed", 1));
        c.params.cost_linear_bps = num("cost_linear_bps", 5.0);
        c.params.cost_target_bps = num("cost_target_bps", 10.0);
        c.params.drawdown_start = date("drawdown_start");
        c.params.drawdown_end = date("drawdown_end");
        c.params.drawdown_days = integer("drawdown_days", 23);
        c.params.optimizer.max_iterations = integer("opt_max_iterations", 300);
        c.params.optimizer.kkt_tolerance = num("opt_kkt_tolerance", 1e-8);
        {
            std::string levels = str("stat_levels", "100,30,10");
            c.params.stat_levels.clear();
            size_t pos = 0;
            while (pos <= levels.size()) {
                size_t comma = levels.find(',', pos);
                std::string f = detail::trim(std::string_view(levels).substr(
                    pos, comma == std::string::npos ? std::string::npos : comma - pos));
                int v = 0;
                auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
                if (ec != std::errc{} || p != f.data() + f.size() || v < 1)
                    fail("{}: config key 'stat_levels' has bad entry '{}'", source.string(), f);
                c.params.stat_levels.push_back(v);
                if (comma == std::string::npos) break;
                pos = comma + 1;
            }
        }

        c.synth.tickers = integer("synth_tickers", 200);
        c.synth.industries = integer("synth_industries", 20);
        c.synth.days = integer("synth_days", 300);
        if (auto d = date("synth_start")) c.synth.start = *d;
        c.synth.market_vol = num("synth_market_vol", 0.01);
        c.synth.industry_vol = num("synth_industry_vol", 0.01);
        c.synth.idio_vol = num("synth_idio_vol", 0.02);
        c.synth.phi = num("synth_phi", -0.3);
        c.synth.split = num("synth_split", 0.3);
        c.synth.exposure_min = num("synth_exposure_min", 0.25);
        c.synth.exposure_max = num("synth_exposure_max", 1.75);
        c.synth.selloff_start = integer("synth_selloff_start", -1);
        c.synth.selloff_days = integer("synth_selloff_days", 0);
        c.synth.selloff_drift = num("synth_selloff_drift", -0.035);
        c.synth.selloff_vol_mult = num("synth_selloff_vol_mult", 3.0);
        c.synth.selloff_idio_mult = num("synth_selloff_idio_mult", 1.25);
        c.synth.selloff_phi = num("synth_selloff_phi", 0.0);
        c.synth.scramble_fraction = num("synth_scramble", 0.5);
        c.synth.init_price_min = num("synth_price_min", 10.0);
        c.synth.init_price_max = num("synth_price_max", 200.0);
        c.synth.volume_log_mean = num("synth_volume_log_mean", 13.1);
        c.synth.volume_log_sd = num("synth_volume_log_sd", 1.0);
        c.synth.seed = c.params.seed;
        return c;
    }

    // "full" or a semicolon list of RET:CLS:CONS:COSTS cells.
    std::vector<StrategySpec> strategy_grid() const {
        if (grid == "full") return full_grid();
        std::vector<StrategySpec> specs;
        size_t pos = 0;
        while (pos <= grid.size()) {
            size_t semi = grid.find(';', pos);
            std::string cell = detail::trim(std::string_view(grid).substr(
                pos, semi == std::string::npos ? std::string::npos : semi - pos));
            if (!cell.empty()) {
                std::vector<std::string> parts;
                size_t p2 = 0;
                while (p2 <= cell.size()) {
                    size_t colon = cell.find(':', p2);
                    parts.push_back(cell.substr(p2, colon == std::string::npos ? std::string::npos : colon - p2));
                    if (colon == std::string::npos) break;
                    p2 = colon + 1;
                }
                if (parts.size() != 4)
                    fail("{}: grid cell '{}' must be RET:CLS:CONS:COSTS", source.string(), cell);
                StrategySpec s;
                s.ret = return_kind_from_string(parts[0]);
                if (parts[1] == "SIC") s.cls = ClassKind::fundamental;
                else if (parts[1] == "STAT") s.cls = ClassKind::statistical;
                else fail("{}: grid cell '{}': classification must be SIC or STAT", source.string(), cell);
                if (parts[2] == "REG") s.cons = Constructor::reg;
                else if (parts[2] == "OPT") s.cons = Constructor::opt;
                else fail("{}: grid cell '{}': constructor must be REG or OPT", source.string(), cell);
                if (parts[3] == "Y") s.costs = true;
                else if (parts[3] == "N") s.costs = false;
                else fail("{}: grid cell '{}': costs must be Y or N", source.string(), cell);
                specs.push_back(s);
            }
            if (semi == std::string::npos) break;
            pos = semi + 1;
        }
        if (specs.empty()) fail("{}: strategy grid is empty", source.string());
        return specs;
    }
};

}  // namespace statarb
