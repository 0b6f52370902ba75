#include "dyson/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dyson::plot {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;
const char* const kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// "--" may not appear inside an XML comment.
std::string comment_safe(std::string s) {
    for (std::size_t i; (i = s.find("--")) != std::string::npos;) s.replace(i, 2, "- -");
    return s;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

struct Axis {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    bool log = false;

    bool usable(double v) const { return std::isfinite(v) && (!log || v > 0); }
    double map(double v) const { return log ? std::log10(v) : v; }
    void include(double v) {
        if (!usable(v)) return;
        lo = std::min(lo, map(v));
        hi = std::max(hi, map(v));
    }
    void finish() {
        if (!std::isfinite(lo)) lo = 0, hi = 1;
        if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
        const double pad = 0.04 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
    double frac(double v) const { return (map(v) - lo) / (hi - lo); }
};

}  // namespace

std::string render_svg(const Figure& f) {
    Axis ax, ay;
    ax.log = f.log_x;
    ay.log = f.log_y;
    for (const auto& s : f.series) {
        if (s.x.size() != s.y.size()) throw std::invalid_argument("series '" + s.label + "' has mismatched x and y");
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (ax.usable(s.x[i]) && ay.usable(s.y[i])) ax.include(s.x[i]), ay.include(s.y[i]);
        if (s.style == Style::Bars && !f.log_y) ay.include(0.0);
    }
    ax.finish();
    ay.finish();
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + ax.frac(x) * pw; };
    auto py = [&](double y) { return kTop + (1 - ay.frac(y)) * ph; };

    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    for (const auto& p : f.provenance) o << "<!-- " << comment_safe(p) << " -->\n";
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(f.title) << "</text>\n";
    o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (int i = 0; i <= 4; ++i) {
        const double fx = ax.lo + (ax.hi - ax.lo) * i / 4.0, fy = ay.lo + (ay.hi - ay.lo) * i / 4.0;
        const double vx = ax.log ? std::pow(10.0, fx) : fx, vy = ay.log ? std::pow(10.0, fy) : fy;
        const double x = kLeft + pw * i / 4.0, y = kTop + ph * (1 - i / 4.0);
        o << "<line x1=\"" << num(x) << "\" y1=\"" << kTop + ph << "\" x2=\"" << num(x) << "\" y2=\"" << kTop + ph + 5
          << "\" stroke=\"black\"/><text x=\"" << num(x) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">"
          << tick_label(vx) << "</text>\n";
        o << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(y) << "\" x2=\"" << kLeft << "\" y2=\"" << num(y)
          << "\" stroke=\"black\"/><text x=\"" << kLeft - 8 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
          << tick_label(vy) << "</text>\n";
    }
    o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">" << escape(f.x_label)
      << "</text>\n";
    o << "<text transform=\"translate(16," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(f.y_label) << "</text>\n";

    for (std::size_t k = 0; k < f.series.size(); ++k) {
        const auto& s = f.series[k];
        const char* colour = kColours[k % std::size(kColours)];
        if (s.style == Style::Line) {
            o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                if (ax.usable(s.x[i]) && ay.usable(s.y[i])) o << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
            o << "\"/>\n";
        } else if (s.style == Style::Points) {
            for (std::size_t i = 0; i < s.x.size(); ++i)
                if (ax.usable(s.x[i]) && ay.usable(s.y[i]))
                    o << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"3\" fill=\""
                      << colour << "\"/>\n";
        } else {
            const double half = s.x.size() > 1 ? 0.5 * pw * std::abs(ax.frac(s.x[1]) - ax.frac(s.x[0])) : 4.0;
            const double base = f.log_y ? kTop + ph : py(0.0);
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) continue;
                const double top = py(s.y[i]);
                o << "<rect x=\"" << num(px(s.x[i]) - half) << "\" y=\"" << num(std::min(top, base)) << "\" width=\""
                  << num(2 * half) << "\" height=\"" << num(std::abs(base - top)) << "\" fill=\"" << colour
                  << "\" fill-opacity=\"0.35\"/>\n";
            }
        }
        const double ly = kTop + 16 + 16 * k;
        o << "<rect x=\"" << kLeft + pw - 150 << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"10\" fill=\"" << colour
          << "\"/><text x=\"" << kLeft + pw - 135 << "\" y=\"" << ly << "\">" << escape(s.label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

Series histogram(const std::vector<double>& values, std::size_t bins, const std::string& label) {
    if (values.empty() || bins == 0) throw std::invalid_argument("histogram needs values and at least one bin");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    double lo = *lo_it, hi = *hi_it;
    if (hi == lo) hi = lo + 1;
    const double w = (hi - lo) / static_cast<double>(bins);
    std::vector<double> counts(bins, 0.0);
    for (double v : values) counts[std::min(bins - 1, static_cast<std::size_t>((v - lo) / w))] += 1;
    Series s{label, {}, {}, Style::Bars};
    for (std::size_t i = 0; i < bins; ++i) {
        s.x.push_back(lo + (i + 0.5) * w);
        s.y.push_back(counts[i] / (static_cast<double>(values.size()) * w));
    }
    return s;
}

}  // namespace dyson::plot
