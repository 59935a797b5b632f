// report.hpp
// Emission of run artifacts: the combined summary table, per-cell daily P&L
// CSVs, and deterministic SVG cumulative-P&L charts (no timestamps, so equal
// runs produce byte-identical files).
#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "statarb/backtest.hpp"
#include "statarb/costs.hpp"

namespace statarb {

inline constexpr std::string_view summary_header = "Return,Classification,OPT/REG,Costs,ROC,Sharpe,CPC,Drawdown";

// Two decimals with trailing zeros trimmed: 6.00 -> "6", -8.70 -> "-8.7".
inline std::string format_metric(double v) {
    std::string s = fmt::format("{:.2f}", v);
    if (s.find('.') != std::string::npos) {
        while (s.back() == '0') s.pop_back();
        if (s.back() == '.') s.pop_back();
    }
    if (s == "-0") s = "0";
    return s;
}

inline std::string summary_row(const BacktestResult& r) {
    const bool has_dd = direction_of(r.spec.ret) == Direction::mean_reversion && r.spec.ret != ReturnKind::d0;
    return fmt::format("{},{},{},{},{},{},{},{}", to_string(r.spec.ret), to_string(r.spec.cls),
                       to_string(r.spec.cons), r.spec.costs ? "Y" : "N", format_metric(r.metrics.roc),
                       r.metrics.sharpe ? format_metric(*r.metrics.sharpe) : "n/a",
                       r.metrics.cps ? format_metric(*r.metrics.cps) : "n/a",
                       has_dd ? format_metric(r.metrics.drawdown.percent) : "---");
}

inline void write_summary_csv(const std::filesystem::path& path, const std::vector<BacktestResult>& results) {
    std::ofstream out(path);
    if (!out) fail("cannot write summary file {}", path.string());
    out << summary_header << "\n";
    for (const auto& r : results) out << summary_row(r) << "\n";
    if (!out) fail("failed writing summary file {}", path.string());
}

// ----------------------------------------------------------- daily P&L CSV

inline void write_daily_pnl_csv(const std::filesystem::path& path, const BacktestResult& r) {
    std::ofstream out(path);
    if (!out) fail("cannot write daily P&L file {}", path.string());
    out << "date,pnl,traded_dollars,traded_shares\n";
    for (size_t t = 0; t < r.dates.size(); ++t)
        out << fmt::format("{},{},{},{}\n", r.dates[t].iso(), r.pnl[t], r.traded_dollars[t],
                           r.traded_shares[t]);
    if (!out) fail("failed writing daily P&L file {}", path.string());
}

struct DailySeries {
    std::vector<Date> dates;
    std::vector<double> pnl, traded_dollars, traded_shares;
};

inline DailySeries read_daily_pnl_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open daily P&L file {}", path.string());
    std::string line;
    if (!std::getline(in, line)) fail("{}: empty daily P&L file", path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "date,pnl,traded_dollars,traded_shares")
        fail("{}: expected header 'date,pnl,traded_dollars,traded_shares', got '{}'", path.string(), line);
    DailySeries s;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::string_view rest = line;
        auto next = [&](bool last) {
            size_t comma = rest.find(',');
            if (last != (comma == std::string_view::npos))
                fail("{}:{}: expected 4 fields, got '{}'", path.string(), lineno, line);
            std::string_view f = rest.substr(0, comma);
            rest.remove_prefix(last ? rest.size() : comma + 1);
            return f;
        };
        s.dates.push_back(Date::parse(next(false)));
        for (auto* vec : {&s.pnl, &s.traded_dollars, &s.traded_shares}) {
            std::string_view f = next(vec == &s.traded_shares);
            double v = 0;
            auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc{} || p != f.data() + f.size())
                fail("{}:{}: unparseable number '{}'", path.string(), lineno, f);
            vec->push_back(v);
        }
    }
    if (s.dates.empty()) fail("{}: no P&L rows", path.string());
    return s;
}

// Calibrated cost parameters per refresh, one run-level audit file.
inline void write_cost_models_csv(const std::filesystem::path& path,
                                  const std::vector<std::pair<Date, CostModel>>& models) {
    std::ofstream out(path);
    if (!out) fail("cannot write cost model file {}", path.string());
    out << "refresh_date,linear_rate,impact_coeff,impact_exponent,ref_participation,ref_sigma\n";
    for (const auto& [date, m] : models)
        out << fmt::format("{},{},{},{},{},{}\n", date.iso(), m.linear, m.impact, CostModel::exponent,
                           m.ref_participation, m.ref_sigma);
    if (!out) fail("failed writing cost model file {}", path.string());
}

// -------------------------------------------------------------------- plots

struct PlotPanel {
    std::string title;
    std::vector<Date> dates;
    std::vector<double> cumulative;  // running-total P&L, dollars
};

inline std::vector<double> cumulative_pnl(const std::vector<double>& pnl) {
    std::vector<double> cum(pnl.size());
    double run = 0;
    for (size_t t = 0; t < pnl.size(); ++t) cum[t] = (run += pnl[t]);
    return cum;
}

// Fixed-layout grid of line charts; panels fill left-to-right, top-to-bottom.
inline std::string render_svg(const std::vector<PlotPanel>& panels, int columns,
                              std::string_view heading = {}) {
    if (panels.empty()) fail("svg rendering needs at least one panel");
    columns = std::max(1, std::min<int>(columns, static_cast<int>(panels.size())));
    const int rows = (static_cast<int>(panels.size()) + columns - 1) / columns;
    const double pw = 360, ph = 260, margin = 16, head = heading.empty() ? 0.0 : 28.0;
    const double width = columns * pw + 2 * margin, height = rows * ph + 2 * margin + head;

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
        "viewBox=\"0 0 {:.0f} {:.0f}\" font-family=\"sans-serif\">\n"
        "<rect width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n",
        width, height, width, height, width, height);
    if (!heading.empty())
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
                           width / 2, margin + 12, heading);

    for (size_t p = 0; p < panels.size(); ++p) {
        const PlotPanel& panel = panels[p];
        if (panel.dates.size() != panel.cumulative.size() || panel.dates.empty())
            fail("plot panel '{}' has inconsistent or empty series", panel.title);
        const double x0 = margin + (p % columns) * pw + 52;
        const double y0 = margin + head + (p / columns) * ph + 30;
        const double w = pw - 72, h = ph - 66;

        double lo = 0, hi = 0;
        for (double v : panel.cumulative) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi == lo) hi = lo + 1;
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;

        const size_t np = panel.dates.size();
        auto sx = [&](size_t t) { return x0 + (np == 1 ? 0.5 : static_cast<double>(t) / (np - 1)) * w; };
        auto sy = [&](double v) { return y0 + h - (v - lo) / (hi - lo) * h; };

        svg += fmt::format(
            "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" stroke=\"#888\"/>\n",
            x0, y0, w, h);
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
                           x0 + w / 2, y0 - 8, panel.title);
        if (lo < 0 && hi > 0)
            svg += fmt::format(
                "<line x1=\"{:.1f}\" y1=\"{:.2f}\" x2=\"{:.1f}\" y2=\"{:.2f}\" stroke=\"#bbb\" stroke-dasharray=\"4 3\"/>\n",
                x0, sy(0), x0 + w, sy(0));

        std::string points;
        for (size_t t = 0; t < np; ++t)
            points += fmt::format("{}{:.2f},{:.2f}", t ? " " : "", sx(t), sy(panel.cumulative[t]));
        svg += fmt::format("<polyline fill=\"none\" stroke=\"#1964b0\" stroke-width=\"1.3\" points=\"{}\"/>\n",
                           points);

        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"10\" text-anchor=\"end\">{:.2e}</text>\n",
                           x0 - 4, y0 + 10, hi);
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"10\" text-anchor=\"end\">{:.2e}</text>\n",
                           x0 - 4, y0 + h, lo);
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"10\">{}</text>\n", x0,
                           y0 + h + 14, panel.dates.front().iso());
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"10\" text-anchor=\"end\">{}</text>\n",
                           x0 + w, y0 + h + 14, panel.dates.back().iso());
    }
    svg += "</svg>\n";
    return svg;
}

inline void write_svg(const std::filesystem::path& path, const std::string& svg) {
    std::ofstream out(path);
    if (!out) fail("cannot write plot file {}", path.string());
    out << svg;
    if (!out) fail("failed writing plot file {}", path.string());
}

}  // namespace statarb
