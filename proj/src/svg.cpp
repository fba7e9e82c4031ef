#include "msirl/svg.hpp"

#include "msirl/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace msirl {

namespace {

std::string esc(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

} // namespace

SvgWriter::SvgWriter(double width, double height) {
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_double(width)
         << "\" height=\"" << format_double(height) << "\" viewBox=\"0 0 " << format_double(width)
         << ' ' << format_double(height) << "\">\n";
    out_ << "<rect x=\"0\" y=\"0\" width=\"" << format_double(width) << "\" height=\""
         << format_double(height) << "\" fill=\"#ffffff\"/>\n";
}

void SvgWriter::line(double x1, double y1, double x2, double y2, const std::string& stroke,
                     double stroke_width) {
    out_ << "<line x1=\"" << format_double(x1) << "\" y1=\"" << format_double(y1) << "\" x2=\""
         << format_double(x2) << "\" y2=\"" << format_double(y2) << "\" stroke=\"" << stroke
         << "\" stroke-width=\"" << format_double(stroke_width) << "\"/>\n";
}

void SvgWriter::rect(double x, double y, double w, double h, const std::string& fill) {
    out_ << "<rect x=\"" << format_double(x) << "\" y=\"" << format_double(y) << "\" width=\""
         << format_double(w) << "\" height=\"" << format_double(h) << "\" fill=\"" << fill
         << "\"/>\n";
}

void SvgWriter::circle(double cx, double cy, double r, const std::string& fill,
                       const std::string& css_class) {
    out_ << "<circle";
    if (!css_class.empty()) out_ << " class=\"" << css_class << "\"";
    out_ << " cx=\"" << format_double(cx) << "\" cy=\"" << format_double(cy) << "\" r=\""
         << format_double(r) << "\" fill=\"" << fill << "\" stroke=\"#444444\"/>\n";
}

void SvgWriter::text(double x, double y, const std::string& s, double font_size,
                     const std::string& anchor, const std::string& fill) {
    out_ << "<text x=\"" << format_double(x) << "\" y=\"" << format_double(y)
         << "\" font-family=\"sans-serif\" font-size=\"" << format_double(font_size)
         << "\" text-anchor=\"" << anchor << "\" fill=\"" << fill << "\">" << esc(s) << "</text>\n";
}

std::string SvgWriter::str() const {
    return out_.str() + "</svg>\n";
}

std::string SvgWriter::lerp_color(double t, unsigned rgb_lo, unsigned rgb_hi) {
    t = std::clamp(t, 0.0, 1.0);
    auto channel = [&](int shift) {
        const double lo = static_cast<double>((rgb_lo >> shift) & 0xff);
        const double hi = static_cast<double>((rgb_hi >> shift) & 0xff);
        return static_cast<unsigned>(std::lround(lo + (hi - lo) * t));
    };
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", channel(16), channel(8), channel(0));
    return buf;
}

} // namespace msirl
