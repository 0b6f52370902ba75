#pragma once

#include <string>
#include <vector>

namespace dyson::plot {

enum class Style { Points, Line, Bars };

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    Style style = Style::Line;
};

struct Figure {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<Series> series;
    /// Written as XML comments at the top of the file.
    std::vector<std::string> provenance;
};

/// Standalone SVG document. Non-finite points (and non-positive ones on a log
/// axis) are skipped.
std::string render_svg(const Figure& figure);

/// Histogram of `values` as a density: bin centres and heights.
Series histogram(const std::vector<double>& values, std::size_t bins, const std::string& label);

}  // namespace dyson::plot
