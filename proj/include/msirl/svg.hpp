#pragma once

#include <sstream>
#include <string>

namespace msirl {

// Minimal deterministic SVG builder. All numbers go through the shortest
// round-trip formatter, so equal inputs produce byte-identical documents.
class SvgWriter {
public:
    SvgWriter(double width, double height);

    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double stroke_width = 1.0);
    void rect(double x, double y, double w, double h, const std::string& fill);
    void circle(double cx, double cy, double r, const std::string& fill,
                const std::string& css_class = "");
    void text(double x, double y, const std::string& s, double font_size = 11.0,
              const std::string& anchor = "start", const std::string& fill = "#333333");

    std::string str() const; // closes the document

    static std::string lerp_color(double t, unsigned rgb_lo, unsigned rgb_hi);

private:
    std::ostringstream out_;
};

} // namespace msirl
