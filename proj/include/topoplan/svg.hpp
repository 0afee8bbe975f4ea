#pragma once

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "topoplan/error.hpp"

namespace topoplan {

struct svg_series {
    std::string label;
    std::string color = "black";
    std::vector<std::pair<double, double>> points; // (birth, death)
};

// Minimal persistence-diagram scatter: unit square with the diagonal, the .5
// guides, and infinite deaths drawn at d = 1.1.
inline void save_diagram_svg(const std::vector<svg_series>& series, const std::string& path) {
    const double size = 440.0, margin = 40.0;
    const double span = 1.1;
    auto x_of = [&](double b) { return margin + b * (size - 2 * margin) / span; };
    auto y_of = [&](double d) { return size - margin - d * (size - 2 * margin) / span; };

    std::ofstream out(path);
    if (!out) throw error(errc::io_error, "cannot open '" + path + "' for writing");
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << size << "' height='" << size
        << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<line x1='" << x_of(0) << "' y1='" << y_of(0) << "' x2='" << x_of(1) << "' y2='"
        << y_of(1) << "' stroke='gray' stroke-dasharray='4'/>\n";
    out << "<line x1='" << x_of(0.5) << "' y1='" << y_of(0) << "' x2='" << x_of(0.5) << "' y2='"
        << y_of(1.1) << "' stroke='gray' stroke-dasharray='4'/>\n";
    out << "<line x1='" << x_of(0) << "' y1='" << y_of(0.5) << "' x2='" << x_of(1) << "' y2='"
        << y_of(0.5) << "' stroke='gray' stroke-dasharray='4'/>\n";
    out << "<text x='" << x_of(0.01) << "' y='" << y_of(1.08) << "' font-size='12'>inf</text>\n";

    double legend_y = margin;
    for (const auto& s : series) {
        for (auto [b, d] : s.points) {
            const double dd = std::isinf(d) ? 1.1 : d;
            out << "<circle cx='" << x_of(b) << "' cy='" << y_of(dd)
                << "' r='3' fill='" << s.color << "' fill-opacity='0.6'/>\n";
        }
        if (!s.label.empty()) {
            out << "<circle cx='" << size - margin * 2.2 << "' cy='" << legend_y << "' r='4' fill='"
                << s.color << "'/>\n";
            out << "<text x='" << size - margin * 2.2 + 8 << "' y='" << legend_y + 4
                << "' font-size='12'>" << s.label << "</text>\n";
            legend_y += 16;
        }
    }
    out << "</svg>\n";
}

} // namespace topoplan
