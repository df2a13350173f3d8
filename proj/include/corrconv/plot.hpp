#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "corrconv/csv.hpp"

namespace corrconv {

struct PlotSeries {
    std::string label;
    std::vector<std::pair<double, double>> points; // sorted by x before drawing
};

namespace detail {

inline double median_of(std::vector<double> values) {
    if (values.empty()) return std::nan("");
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

inline std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

} // namespace detail

/// Static SVG 1.1 line plot: axes, ticks, one polyline with point markers per
/// series, legend in the top-right corner.
inline void write_line_plot(const std::string& path, const std::string& title,
                            const std::string& xlabel, const std::string& ylabel,
                            std::vector<PlotSeries> series) {
    std::vector<std::pair<double, double>> all;
    for (auto& s : series) {
        std::sort(s.points.begin(), s.points.end());
        for (auto& pt : s.points)
            if (std::isfinite(pt.first) && std::isfinite(pt.second)) all.push_back(pt);
    }
    if (all.empty()) throw std::runtime_error("write_line_plot: no finite data points");

    double x_min = all[0].first, x_max = all[0].first;
    double y_min = all[0].second, y_max = all[0].second;
    for (const auto& [x, y] : all) {
        x_min = std::min(x_min, x);
        x_max = std::max(x_max, x);
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
    }
    if (x_max == x_min) {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if (y_max == y_min) {
        y_min -= 0.5;
        y_max += 0.5;
    }

    const double width = 640, height = 440;
    const double left = 70, right = 620, top = 40, bottom = 390;
    auto sx = [&](double x) { return left + (x - x_min) / (x_max - x_min) * (right - left); };
    auto sy = [&](double y) { return bottom - (y - y_min) / (y_max - y_min) * (bottom - top); };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_line_plot: cannot open " + path);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << (left + right) / 2 << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";

    // axes and ticks
    out << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
        << bottom << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
        << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = x_min + (x_max - x_min) * i / 4.0;
        const double fy = y_min + (y_max - y_min) * i / 4.0;
        out << "<line x1=\"" << sx(fx) << "\" y1=\"" << bottom << "\" x2=\"" << sx(fx) << "\" y2=\""
            << bottom + 5 << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << sx(fx) << "\" y=\"" << bottom + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << detail::tick_label(fx) << "</text>\n"
            << "<line x1=\"" << left - 5 << "\" y1=\"" << sy(fy) << "\" x2=\"" << left << "\" y2=\""
            << sy(fy) << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << left - 8 << "\" y=\"" << sy(fy) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << detail::tick_label(fy) << "</text>\n";
    }
    out << "<text x=\"" << (left + right) / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << xlabel
        << "</text>\n"
        << "<text x=\"18\" y=\"" << (top + bottom) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 "
        << (top + bottom) / 2 << ")\">" << ylabel << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = palette[si % (sizeof palette / sizeof *palette)];
        std::ostringstream pts;
        for (const auto& [x, y] : series[si].points) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            pts << sx(x) << ',' << sy(y) << ' ';
            out << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"3\" fill=\"" << color
                << "\"/>\n";
        }
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\""
            << pts.str() << "\"/>\n";
        out << "<text x=\"" << right - 8 << "\" y=\"" << top + 16 + 16 * static_cast<double>(si)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color
            << "\">" << series[si].label << "</text>\n";
    }
    out << "</svg>\n";
}

/// Renders the plots a given results CSV supports and returns the file paths.
/// Sweep CSVs get median error-vs-k per kind (plus exact-rate-vs-k when exact
/// sweep rows are present); concentration CSVs get median delta*sqrt(np) vs n
/// per kind; walk audit CSVs get count and bound vs ell.
inline std::vector<std::string> emit_plots(const std::string& csv_path,
                                           const std::string& out_dir) {
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("emit_plots: cannot open " + csv_path);
    const CsvTable table = parse_csv(in);
    if (table.rows.empty()) throw std::runtime_error("emit_plots: no data rows in " + csv_path);
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> written;

    const bool is_sweep = !table.header.empty() && table.header[0] == "experiment" &&
                          std::find(table.header.begin(), table.header.end(), "k") !=
                              table.header.end() &&
                          std::find(table.header.begin(), table.header.end(), "error_rate") !=
                              table.header.end();
    const bool is_concentration =
        std::find(table.header.begin(), table.header.end(), "r_norm") != table.header.end();
    const bool is_walk_audit =
        std::find(table.header.begin(), table.header.end(), "ell") != table.header.end();

    if (is_sweep) {
        const std::size_t col_kind = table.column("kind"), col_k = table.column("k"),
                          col_err = table.column("error_rate"), col_status = table.column("status"),
                          col_exact = table.column("exact"), col_exp = table.column("experiment");
        std::map<std::string, std::map<double, std::vector<double>>> errors, exacts;
        bool exact_sweep = false;
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            if (table.rows[r][col_status] != "ok") continue;
            const double k = csv_number(table, r, col_k);
            errors[table.rows[r][col_kind]][k].push_back(csv_number(table, r, col_err));
            exacts[table.rows[r][col_kind]][k].push_back(csv_number(table, r, col_exact));
            exact_sweep = exact_sweep || table.rows[r][col_exp] == "exact_sweep";
        }
        std::vector<PlotSeries> err_series;
        for (auto& [kind, by_k] : errors) {
            PlotSeries s{kind, {}};
            for (auto& [k, values] : by_k) s.points.emplace_back(k, detail::median_of(values));
            err_series.push_back(std::move(s));
        }
        const std::string err_path =
            (std::filesystem::path(out_dir) / "error_vs_k.svg").string();
        write_line_plot(err_path, "median error rate vs rounds", "k", "error rate", err_series);
        written.push_back(err_path);
        if (exact_sweep) {
            std::vector<PlotSeries> rate_series;
            for (auto& [kind, by_k] : exacts) {
                PlotSeries s{kind, {}};
                for (auto& [k, values] : by_k) {
                    double hits = 0;
                    for (double v : values) hits += v;
                    s.points.emplace_back(k, values.empty() ? std::nan("")
                                                            : hits / static_cast<double>(values.size()));
                }
                rate_series.push_back(std::move(s));
            }
            const std::string rate_path =
                (std::filesystem::path(out_dir) / "exact_rate_vs_k.svg").string();
            write_line_plot(rate_path, "exact recovery rate vs rounds", "k", "exact rate",
                            rate_series);
            written.push_back(rate_path);
        }
    } else if (is_concentration) {
        const std::size_t col_kind = table.column("kind"), col_n = table.column("n"),
                          col_p = table.column("p"), col_delta = table.column("delta"),
                          col_status = table.column("status");
        std::map<std::string, std::map<double, std::vector<double>>> scaled;
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            if (table.rows[r][col_status] != "ok") continue;
            const double n = csv_number(table, r, col_n);
            const double np = n * csv_number(table, r, col_p);
            scaled[table.rows[r][col_kind]][n].push_back(csv_number(table, r, col_delta) *
                                                         std::sqrt(np));
        }
        std::vector<PlotSeries> series;
        for (auto& [kind, by_n] : scaled) {
            PlotSeries s{kind, {}};
            for (auto& [n, values] : by_n) s.points.emplace_back(n, detail::median_of(values));
            series.push_back(std::move(s));
        }
        const std::string path =
            (std::filesystem::path(out_dir) / "delta_scaled_vs_n.svg").string();
        write_line_plot(path, "median deviation norm, sqrt(np)-scaled", "n", "delta * sqrt(np)",
                        series);
        written.push_back(path);
    } else if (is_walk_audit) {
        const std::size_t col_ell = table.column("ell"), col_count = table.column("count"),
                          col_bound = table.column("bound");
        PlotSeries counts{"count", {}}, bounds{"bound", {}};
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            counts.points.emplace_back(csv_number(table, r, col_ell), csv_number(table, r, col_count));
            bounds.points.emplace_back(csv_number(table, r, col_ell), csv_number(table, r, col_bound));
        }
        const std::string path = (std::filesystem::path(out_dir) / "walk_counts.svg").string();
        write_line_plot(path, "valid walk tuples vs distinct edges", "distinct edges",
                        "count", {counts, bounds});
        written.push_back(path);
    } else {
        throw std::runtime_error("emit_plots: unrecognized CSV schema in " + csv_path);
    }
    return written;
}

} // namespace corrconv
