// statarb command-line driver: synth / backtest / report subcommands.
#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "statarb/config.hpp"
#include "statarb/report.hpp"

namespace fs = std::filesystem;
using namespace statarb;

namespace {

// Tracks artifacts written by one command so a failing run can remove its
// partial outputs instead of leaving a half-written result tree.
class ArtifactTracker {
public:
    std::ofstream create(const fs::path& p) {
        files_.push_back(p);
        std::ofstream out(p);
        if (!out) fail("cannot write {}", p.string());
        return out;
    }
    void note(const fs::path& p) { files_.push_back(p); }
    void note_dir(const fs::path& p) { dirs_.push_back(p); }
    void discard() noexcept {
        std::error_code ec;
        for (const auto& f : files_) fs::remove(f, ec);
        // Newest directories first so nested empties unwind.
        for (auto it = dirs_.rbegin(); it != dirs_.rend(); ++it)
            if (fs::is_empty(*it, ec)) fs::remove(*it, ec);
    }

private:
    std::vector<fs::path> files_, dirs_;
};

void make_dir(const fs::path& p, ArtifactTracker& tracker) {
    if (!fs::exists(p)) {
        fs::create_directories(p);
        tracker.note_dir(p);
    }
}

const std::vector<ReturnKind> panel_order = {ReturnKind::c2c20, ReturnKind::c2c10, ReturnKind::c2c5,
                                             ReturnKind::c2c1, ReturnKind::mom1, ReturnKind::d0};

// Per-(classification, construction, costs) multi-panel cumulative P&L chart.
void write_group_panels(const fs::path& out_dir, const std::vector<BacktestResult>& results,
                        ArtifactTracker& tracker) {
    struct GroupKey {
        ClassKind cls;
        Constructor cons;
        bool costs;
        bool operator<(const GroupKey& o) const {
            return std::tie(cls, cons, costs) < std::tie(o.cls, o.cons, o.costs);
        }
    };
    std::map<GroupKey, std::vector<const BacktestResult*>> groups;
    for (const auto& r : results) groups[{r.spec.cls, r.spec.cons, r.spec.costs}].push_back(&r);
    for (const auto& [key, members] : groups) {
        std::vector<PlotPanel> panels;
        for (ReturnKind kind : panel_order)
            for (const BacktestResult* r : members)
                if (r->spec.ret == kind)
                    panels.push_back({std::string(to_string(kind)), r->dates, cumulative_pnl(r->pnl)});
        if (panels.empty()) continue;
        std::string heading = fmt::format("{} / {} / costs {}", to_string(key.cls), to_string(key.cons),
                                          key.costs ? "Y" : "N");
        fs::path path = out_dir / fmt::format("panels_{}_{}_{}.svg", to_string(key.cls),
                                              to_string(key.cons), key.costs ? "Y" : "N");
        tracker.note(path);
        write_svg(path, render_svg(panels, 3, heading));
    }
}

void write_cell_outputs(const fs::path& out_dir, const BacktestResult& r, ArtifactTracker& tracker) {
    fs::path dir = out_dir / "cells" / cell_name(r.spec);
    make_dir(dir, tracker);
    tracker.note(dir / "daily_pnl.csv");
    write_daily_pnl_csv(dir / "daily_pnl.csv", r);
    tracker.note(dir / "summary.csv");
    write_summary_csv(dir / "summary.csv", {r});
    tracker.note(dir / "pnl.svg");
    write_svg(dir / "pnl.svg",
              render_svg({{cell_name(r.spec), r.dates, cumulative_pnl(r.pnl)}}, 1));
}

int cmd_synth(const RunConfig& cfg) {
    ArtifactTracker tracker;
    try {
        make_dir(cfg.out, tracker);
        SynthMarket mkt = generate_market(cfg.synth);
        tracker.note(cfg.out / "bars.csv");
        write_bars_csv(cfg.out / "bars.csv", mkt.panel);
        tracker.note(cfg.out / "labels.csv");
        write_labels_csv(cfg.out / "labels.csv", mkt);
        fmt::print("wrote {} and {} ({} tickers x {} days, seed {})\n",
                   (cfg.out / "bars.csv").string(), (cfg.out / "labels.csv").string(),
                   mkt.panel.size(), mkt.panel.days(), cfg.synth.seed);
        return 0;
    } catch (...) {
        tracker.discard();
        throw;
    }
}

int cmd_backtest(const RunConfig& cfg) {
    ArtifactTracker tracker;
    try {
        if (cfg.data.empty()) fail("{}: config key 'data' is required for backtests", cfg.source.string());
        BarPanel panel = load_bars(cfg.data);
        std::vector<StrategySpec> specs = cfg.strategy_grid();
        EngineNeeds needs = needs_of(specs);

        BacktestParams params = cfg.params;
        Classification fundamental;
        if (needs.fundamental) {
            if (cfg.classification.empty())
                fail("{}: grid has SIC cells but no 'classification' file is configured", cfg.source.string());
            // Coverage of each refresh universe is enforced when the dummy
            // matrix is built, so no ticker list is pinned here.
            fundamental = load_fundamental_classification(cfg.classification, {});
            params.fundamental = &fundamental;
        }

        auto contexts = build_refresh_contexts(panel, params, needs, cfg.jobs);
        std::vector<BacktestResult> results(specs.size());
        detail::parallel_for(static_cast<int>(specs.size()), cfg.jobs, [&](int i) {
            results[static_cast<size_t>(i)] = run_cell(panel, specs[static_cast<size_t>(i)], params, contexts);
        });

        make_dir(cfg.out, tracker);
        for (const auto& r : results) write_cell_outputs(cfg.out, r, tracker);
        tracker.note(cfg.out / "summary.csv");
        write_summary_csv(cfg.out / "summary.csv", results);
        std::vector<std::pair<Date, CostModel>> cost_models;
        for (const auto& ctx : contexts) cost_models.emplace_back(ctx.refresh_date, ctx.cost_model);
        tracker.note(cfg.out / "cost_models.csv");
        write_cost_models_csv(cfg.out / "cost_models.csv", cost_models);
        write_group_panels(cfg.out, results, tracker);

        fmt::print("wrote {} strategy cells under {}\n", results.size(), cfg.out.string());
        return 0;
    } catch (...) {
        tracker.discard();
        throw;
    }
}

int cmd_report(const RunConfig& cfg) {
    ArtifactTracker tracker;
    try {
        std::vector<StrategySpec> specs = cfg.strategy_grid();
        std::vector<BacktestResult> results;
        for (const auto& spec : specs) {
            fs::path csv = cfg.out / "cells" / cell_name(spec) / "daily_pnl.csv";
            DailySeries s = read_daily_pnl_csv(csv);
            BacktestResult r;
            r.spec = spec;
            r.dates = std::move(s.dates);
            r.pnl = std::move(s.pnl);
            r.traded_dollars = std::move(s.traded_dollars);
            r.traded_shares = std::move(s.traded_shares);
            r.metrics = compute_metrics(r.dates, r.pnl, r.traded_shares, cfg.params.gross,
                                        cfg.params.drawdown_start, cfg.params.drawdown_end,
                                        cfg.params.drawdown_days);
            results.push_back(std::move(r));
        }
        tracker.note(cfg.out / "summary.csv");
        write_summary_csv(cfg.out / "summary.csv", results);
        for (const auto& r : results) {
            fs::path dir = cfg.out / "cells" / cell_name(r.spec);
            tracker.note(dir / "summary.csv");
            write_summary_csv(dir / "summary.csv", {r});
            tracker.note(dir / "pnl.svg");
            write_svg(dir / "pnl.svg",
                      render_svg({{cell_name(r.spec), r.dates, cumulative_pnl(r.pnl)}}, 1));
        }
        write_group_panels(cfg.out, results, tracker);
        fmt::print("re-rendered {} cells under {}\n", results.size(), cfg.out.string());
        return 0;
    } catch (...) {
        tracker.discard();
        throw;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"daily-bar statistical-arbitrage backtester"};
    app.require_subcommand(1);

    struct CommonArgs {
        std::string config;
        std::string out;
        std::optional<uint64_t> seed;
        std::optional<int> jobs;
    };
    auto add_common = [](CLI::App* sub, CommonArgs& args) {
        sub->add_option("--config", args.config, "run configuration file")->required();
        sub->add_option("--out", args.out, "output directory (overrides config)");
        sub->add_option("--seed", args.seed, "seed override");
        sub->add_option("--jobs", args.jobs, "worker thread count (0 = all cores)");
    };
    CommonArgs synth_args, backtest_args, report_args;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic bar panel");
    CLI::App* backtest = app.add_subcommand("backtest", "run the strategy grid");
    CLI::App* report = app.add_subcommand("report", "re-render summary and plots from stored daily CSVs");
    add_common(synth, synth_args);
    add_common(backtest, backtest_args);
    add_common(report, report_args);

    CLI11_PARSE(app, argc, argv);

    auto run = [](const CommonArgs& args, int (*cmd)(const RunConfig&)) {
        try {
            RunConfig cfg = RunConfig::load(args.config);
            if (!args.out.empty()) cfg.out = args.out;
            if (args.seed) {
                cfg.params.seed = *args.seed;
                cfg.synth.seed = *args.seed;
            }
            if (args.jobs) cfg.jobs = *args.jobs;
            return cmd(cfg);
        } catch (const std::exception& e) {
            fmt::print(stderr, "error: {}\n", e.what());
            return 1;
        }
    };

    if (synth->parsed()) return run(synth_args, cmd_synth);
    if (backtest->parsed()) return run(backtest_args, cmd_backtest);
    return run(report_args, cmd_report);
}
