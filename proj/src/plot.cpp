#include "rflab/plot.hpp"

#include "rflab/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace rflab {
namespace {

constexpr double kWidth = 720.0;
constexpr double kPaneHeight = 150.0;
constexpr double kLeft = 90.0;
constexpr double kRight = 20.0;
constexpr double kTop = 28.0;
constexpr double kBottom = 26.0;

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    bool empty() const { return !(lo <= hi); }
};

}  // namespace

std::string render_svg(const CsvTable& table) {
    if (table.rows.empty()) throw InvalidArgument("nothing to plot: the table has no rows");
    const std::size_t tc = table.column("t");
    std::vector<std::size_t> panes;
    for (std::size_t c = 0; c < table.header.size(); ++c)
        if (c != tc) panes.push_back(c);

    Range tr;
    for (const auto& row : table.rows) tr.add(row[tc]);
    if (tr.empty()) throw InvalidArgument("nothing to plot: column 't' has no finite values");
    const double t_span = tr.hi > tr.lo ? tr.hi - tr.lo : 1.0;

    const double height = panes.size() * kPaneHeight;
    std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(kWidth) + "\" height=\"" + fixed(height) +
           "\" viewBox=\"0 0 " + fixed(kWidth) + " " + fixed(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    const double pw = kWidth - kLeft - kRight;
    const double ph = kPaneHeight - kTop - kBottom;
    for (std::size_t p = 0; p < panes.size(); ++p) {
        const std::size_t c = panes[p];
        const double y0 = p * kPaneHeight + kTop;
        Range yr;
        for (const auto& row : table.rows) yr.add(row[c]);
        svg += "<g id=\"pane-" + escape(table.header[c]) + "\">\n";
        svg += "<text x=\"" + fixed(kLeft) + "\" y=\"" + fixed(y0 - 8) + "\" font-weight=\"bold\">" +
               escape(table.header[c]) + "</text>\n";
        svg += "<rect x=\"" + fixed(kLeft) + "\" y=\"" + fixed(y0) + "\" width=\"" + fixed(pw) + "\" height=\"" +
               fixed(ph) + "\" fill=\"none\" stroke=\"#888\"/>\n";
        svg += "<text x=\"" + fixed(kLeft) + "\" y=\"" + fixed(y0 + ph + 14) + "\">" + label(tr.lo) + "</text>\n";
        svg += "<text x=\"" + fixed(kLeft + pw) + "\" y=\"" + fixed(y0 + ph + 14) + "\" text-anchor=\"end\">" +
               label(tr.hi) + "</text>\n";
        if (yr.empty()) {
            svg += "<text x=\"" + fixed(kLeft + pw / 2) + "\" y=\"" + fixed(y0 + ph / 2) +
                   "\" text-anchor=\"middle\" fill=\"#888\">no finite values</text>\n</g>\n";
            continue;
        }
        svg += "<text x=\"" + fixed(kLeft - 6) + "\" y=\"" + fixed(y0 + 10) + "\" text-anchor=\"end\">" + label(yr.hi) +
               "</text>\n";
        svg += "<text x=\"" + fixed(kLeft - 6) + "\" y=\"" + fixed(y0 + ph) + "\" text-anchor=\"end\">" + label(yr.lo) +
               "</text>\n";
        // A constant series is drawn as a horizontal line through the middle.
        const bool flat = !(yr.hi > yr.lo);
        auto px = [&](double t) { return kLeft + (t - tr.lo) / t_span * pw; };
        auto py = [&](double v) { return flat ? y0 + ph / 2 : y0 + ph - (v - yr.lo) / (yr.hi - yr.lo) * ph; };
        std::string points;
        auto flush = [&] {
            if (!points.empty())
                svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
            points.clear();
        };
        for (const auto& row : table.rows) {
            if (!std::isfinite(row[tc]) || !std::isfinite(row[c])) {
                flush();
                continue;
            }
            points += (points.empty() ? "" : " ") + fixed(px(row[tc])) + "," + fixed(py(row[c]));
        }
        flush();
        svg += "</g>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace rflab
