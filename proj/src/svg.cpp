#include "rotkit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "rotkit/errors.hpp"

namespace rotkit::io {

PlotKind plot_kind_from_tag(const std::string& tag) {
    if (tag == "scatter") return PlotKind::scatter;
    if (tag == "density") return PlotKind::density;
    if (tag == "vecfield") return PlotKind::vecfield;
    if (tag == "paths") return PlotKind::paths;
    throw ConfigError("unknown plot kind: " + tag);
}

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kMargin = 56.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

double parse_num(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw DataError(std::string("plot: bad number in column ") + what +
                        ": '" + s + "'");
    }
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

/// Maps data coordinates into the plot area and draws the frame.
struct Canvas {
    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
    std::ostringstream body;

    void fit(double x0, double x1, double y0, double y1) {
        if (x0 >= x1) {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if (y0 >= y1) {
            y0 -= 0.5;
            y1 += 0.5;
        }
        double px = 0.05 * (x1 - x0), py = 0.05 * (y1 - y0);
        xmin = x0 - px;
        xmax = x1 + px;
        ymin = y0 - py;
        ymax = y1 + py;
    }

    double sx(double x) const {
        return kMargin + (x - xmin) / (xmax - xmin) * (kWidth - 2.0 * kMargin);
    }
    double sy(double y) const {
        return kHeight - kMargin -
               (y - ymin) / (ymax - ymin) * (kHeight - 2.0 * kMargin);
    }

    void circle(double x, double y, double r, const std::string& color) {
        body << "<circle cx=\"" << fmt(sx(x)) << "\" cy=\"" << fmt(sy(y))
             << "\" r=\"" << r << "\" fill=\"" << color
             << "\" fill-opacity=\"0.55\"/>\n";
    }

    void line(double x0, double y0, double x1, double y1,
              const std::string& color, double width, bool dashed = false) {
        body << "<line x1=\"" << fmt(sx(x0)) << "\" y1=\"" << fmt(sy(y0))
             << "\" x2=\"" << fmt(sx(x1)) << "\" y2=\"" << fmt(sy(y1))
             << "\" stroke=\"" << color << "\" stroke-width=\"" << width
             << "\"" << (dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts,
                  const std::string& color) {
        if (pts.empty()) return;
        body << "<polyline fill=\"none\" stroke=\"" << color
             << "\" stroke-width=\"1.2\" stroke-opacity=\"0.8\" points=\"";
        for (const auto& [x, y] : pts)
            body << fmt(sx(x)) << "," << fmt(sy(y)) << " ";
        body << "\"/>\n";
    }

    void arrow(double x, double y, double dx, double dy,
               const std::string& color) {
        double x1 = sx(x), y1 = sy(y);
        double x2 = sx(x + dx), y2 = sy(y + dy);
        body << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\""
             << fmt(x2) << "\" y2=\"" << fmt(y2) << "\" stroke=\"" << color
             << "\" stroke-width=\"1\"/>\n";
        // Arrow head: short back-swept strokes.
        double vx = x2 - x1, vy = y2 - y1;
        double n = std::sqrt(vx * vx + vy * vy);
        if (n > 1e-9) {
            vx /= n;
            vy /= n;
            double hx = x2 - 3.5 * vx, hy = y2 - 3.5 * vy;
            body << "<line x1=\"" << fmt(x2) << "\" y1=\"" << fmt(y2)
                 << "\" x2=\"" << fmt(hx - 2.0 * vy) << "\" y2=\""
                 << fmt(hy + 2.0 * vx) << "\" stroke=\"" << color
                 << "\" stroke-width=\"1\"/>\n";
            body << "<line x1=\"" << fmt(x2) << "\" y1=\"" << fmt(y2)
                 << "\" x2=\"" << fmt(hx + 2.0 * vy) << "\" y2=\""
                 << fmt(hy - 2.0 * vx) << "\" stroke=\"" << color
                 << "\" stroke-width=\"1\"/>\n";
        }
    }

    void legend(const std::vector<std::pair<std::string, std::string>>& items) {
        double y = kMargin + 4.0;
        for (const auto& [label, color] : items) {
            body << "<rect x=\"" << fmt(kWidth - kMargin - 120.0) << "\" y=\""
                 << fmt(y) << "\" width=\"10\" height=\"10\" fill=\"" << color
                 << "\"/>\n";
            body << "<text x=\"" << fmt(kWidth - kMargin - 105.0) << "\" y=\""
                 << fmt(y + 9.0) << "\" font-size=\"11\">" << label
                 << "</text>\n";
            y += 16.0;
        }
    }

    std::string finish(const std::string& xlabel, const std::string& ylabel,
                       const std::string& metadata) {
        std::ostringstream out;
        out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
            << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth
            << " " << kHeight << "\">\n";
        if (!metadata.empty()) out << "<!-- " << metadata << " -->\n";
        out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        // Frame and tick labels.
        out << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\""
            << kWidth - 2.0 * kMargin << "\" height=\""
            << kHeight - 2.0 * kMargin
            << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
        for (int i = 0; i <= 4; ++i) {
            double fx = xmin + (xmax - xmin) * i / 4.0;
            double fy = ymin + (ymax - ymin) * i / 4.0;
            out << "<text x=\"" << fmt(sx(fx)) << "\" y=\""
                << fmt(kHeight - kMargin + 16.0)
                << "\" font-size=\"10\" text-anchor=\"middle\">" << fmt(fx)
                << "</text>\n";
            out << "<text x=\"" << fmt(kMargin - 6.0) << "\" y=\""
                << fmt(sy(fy) + 3.0)
                << "\" font-size=\"10\" text-anchor=\"end\">" << fmt(fy)
                << "</text>\n";
        }
        out << "<text x=\"" << kWidth / 2.0 << "\" y=\"" << kHeight - 12.0
            << "\" font-size=\"12\" text-anchor=\"middle\">" << xlabel
            << "</text>\n";
        out << "<text x=\"14\" y=\"" << kHeight / 2.0
            << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 "
               "14 "
            << kHeight / 2.0 << ")\">" << ylabel << "</text>\n";
        out << body.str();
        out << "</svg>\n";
        return out.str();
    }
};

std::string render_scatter(const CsvTable& t) {
    if (t.header.size() < 2) throw DataError("scatter: need two columns");
    int cgroup = t.column("rep");
    bool lipschitz = t.column("d_so3") >= 0 && t.column("d_repr") >= 0;
    int cx, cy;
    if (lipschitz) {
        cx = t.column("d_so3");
        cy = t.column("d_repr");
    } else {
        // First two columns that are not the group tag.
        std::vector<int> numeric;
        for (int i = 0; i < static_cast<int>(t.header.size()); ++i)
            if (i != cgroup) numeric.push_back(i);
        if (numeric.size() < 2) throw DataError("scatter: need two data columns");
        cx = numeric[0];
        cy = numeric[1];
    }
    Canvas cv;
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    bool first = true;
    std::vector<std::array<double, 2>> pts;
    std::vector<std::string> groups;
    for (const auto& row : t.rows) {
        double x = parse_num(row[cx], t.header[cx].c_str());
        double y = parse_num(row[cy], t.header[cy].c_str());
        pts.push_back({x, y});
        groups.push_back(cgroup >= 0 ? row[cgroup] : "");
        if (first) {
            x0 = x1 = x;
            y0 = y1 = y;
            first = false;
        }
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    }
    cv.fit(x0, x1, y0, y1);
    std::map<std::string, int> color_of;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        auto [it, inserted] =
            color_of.emplace(groups[i], static_cast<int>(color_of.size()));
        cv.circle(pts[i][0], pts[i][1], 1.6, kPalette[it->second % 8]);
    }
    if (lipschitz) {
        double lo = std::max(cv.xmin, cv.ymin);
        double hi = std::min(cv.xmax, cv.ymax);
        if (lo < hi) cv.line(lo, lo, hi, hi, "black", 1.0, true);
    }
    std::vector<std::pair<std::string, std::string>> legend;
    for (const auto& [g, idx] : color_of)
        if (!g.empty()) legend.emplace_back(g, kPalette[idx % 8]);
    cv.legend(legend);
    return cv.finish(t.header[cx], t.header[cy],
                     lipschitz ? "overlay=ratio-1 line" : "");
}

std::string render_density(const CsvTable& t) {
    int cp = t.column("projection");
    int cpair = t.column("ratio_pair");
    int cr = t.column("ratio");
    if (cp < 0 || cpair < 0 || cr < 0)
        throw DataError("density: need projection, ratio_pair, ratio columns");
    std::map<std::string, std::vector<double>> by_group;
    for (const auto& row : t.rows) {
        double v = parse_num(row[cr], "ratio");
        if (v <= 0.0) continue;
        by_group[row[cp] + ":" + row[cpair]].push_back(std::log10(v));
    }
    Canvas cv;
    double lo = -3.0, hi = 3.0, peak = 1.0;
    // Gaussian kernel density on log10 ratios; Silverman bandwidth per group.
    std::map<std::string, std::vector<std::pair<double, double>>> curves;
    std::string bw_note;
    for (auto& [g, xs] : by_group) {
        std::sort(xs.begin(), xs.end());
        double mean = 0.0;
        for (double v : xs) mean += v;
        mean /= static_cast<double>(xs.size());
        double var = 0.0;
        for (double v : xs) var += (v - mean) * (v - mean);
        var /= std::max<std::size_t>(1, xs.size() - 1);
        double bw = 1.06 * std::sqrt(var) *
                    std::pow(static_cast<double>(xs.size()), -0.2);
        if (bw <= 0.0) bw = 0.1;
        {
            char note[96];
            std::snprintf(note, sizeof note, "%s%s bw=%.6g",
                          bw_note.empty() ? "" : " ", g.c_str(), bw);
            bw_note += note;
        }
        auto& curve = curves[g];
        for (int i = 0; i <= 200; ++i) {
            double x = lo + (hi - lo) * i / 200.0;
            double d = 0.0;
            for (double v : xs) {
                double u = (x - v) / bw;
                d += std::exp(-0.5 * u * u);
            }
            d /= (static_cast<double>(xs.size()) * bw *
                  std::sqrt(2.0 * 3.14159265358979323846));
            curve.emplace_back(x, d);
            peak = std::max(peak, d);
        }
    }
    cv.fit(lo, hi, 0.0, peak);
    int ci = 0;
    std::vector<std::pair<std::string, std::string>> legend;
    for (const auto& [g, curve] : curves) {
        cv.polyline(curve, kPalette[ci % 8]);
        legend.emplace_back(g, kPalette[ci % 8]);
        ++ci;
    }
    cv.legend(legend);
    return cv.finish("log10 ratio", "density", "kde bandwidth:" + bw_note);
}

std::string render_vecfield(const CsvTable& t) {
    int c1 = t.column("y1"), c2 = t.column("y2");
    int cgx = t.column("gx"), cgy = t.column("gy");
    int cd = t.column("defined");
    if (c1 < 0 || c2 < 0 || cgx < 0 || cgy < 0 || cd < 0)
        throw DataError("vecfield: need y1, y2, gx, gy, defined columns");
    Canvas cv;
    cv.fit(-2.2, 2.2, -2.2, 2.2);
    // Unit circle reference.
    std::vector<std::pair<double, double>> circle;
    for (int i = 0; i <= 100; ++i) {
        double a = 2.0 * 3.14159265358979323846 * i / 100.0;
        circle.emplace_back(std::cos(a), std::sin(a));
    }
    cv.polyline(circle, "#bbbbbb");
    for (const auto& row : t.rows) {
        double x = parse_num(row[c1], "y1");
        double y = parse_num(row[c2], "y2");
        double gx = parse_num(row[cgx], "gx");
        double gy = parse_num(row[cgy], "gy");
        bool defined = row[cd] != "0";
        if (!defined) {
            cv.circle(x, y, 1.5, "#d62728");
            continue;
        }
        double n = std::sqrt(gx * gx + gy * gy);
        double s = n > 1e-12 ? 0.14 / n : 0.0;
        cv.arrow(x, y, gx * s, gy * s, "#1f77b4");
    }
    return cv.finish("y1", "y2", "");
}

std::string render_paths(const CsvTable& t) {
    int crun = t.column("run"), citer = t.column("iter");
    int cvec = t.column("vector");
    int cx = t.column("comp_x"), cy = t.column("comp_y");
    if (crun < 0 || citer < 0 || cvec < 0 || cx < 0 || cy < 0)
        throw DataError("paths: need run, iter, vector, comp_x, comp_y columns");
    std::map<std::pair<std::string, std::string>,
             std::vector<std::pair<double, double>>>
        traces;
    double x0 = -1.0, x1 = 1.0, y0 = -1.0, y1 = 1.0;
    bool first = true;
    for (const auto& row : t.rows) {
        double x = parse_num(row[cx], "comp_x");
        double y = parse_num(row[cy], "comp_y");
        traces[{row[crun], row[cvec]}].emplace_back(x, y);
        if (first) {
            x0 = x1 = x;
            y0 = y1 = y;
            first = false;
        }
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    }
    Canvas cv;
    cv.fit(x0, x1, y0, y1);
    std::map<std::string, int> color_of;
    for (const auto& [key, pts] : traces) {
        auto [it, inserted] =
            color_of.emplace(key.second, static_cast<int>(color_of.size()));
        cv.polyline(pts, kPalette[it->second % 8]);
    }
    std::vector<std::pair<std::string, std::string>> legend;
    for (const auto& [g, idx] : color_of)
        legend.emplace_back(g, kPalette[idx % 8]);
    cv.legend(legend);
    return cv.finish("comp_x", "comp_y", "xy projection of vector traces");
}

} // namespace

std::string render_plot(const CsvTable& table, PlotKind kind) {
    switch (kind) {
        case PlotKind::scatter: return render_scatter(table);
        case PlotKind::density: return render_density(table);
        case PlotKind::vecfield: return render_vecfield(table);
        case PlotKind::paths: return render_paths(table);
    }
    throw ConfigError("unknown plot kind");
}

} // namespace rotkit::io
