#include "cogwifi/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cogwifi/textio.hpp"

namespace cogwifi::svg {

namespace {

constexpr double kWidth = 720, kHeight = 420;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 55;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string esc(const std::string& s) {
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

std::string num(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

// Rounds the span up to 1, 2 or 5 times a power of ten per tick.
double nice_step(double span, int ticks) {
    if (!(span > 0.0)) return 1.0;
    const double raw = span / ticks;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (raw <= m * mag) return m * mag;
    return 10.0 * mag;
}

struct Frame {
    double x0, x1, y0, y1;
    double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
    double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

Frame frame_for(const std::vector<Series>& series, bool y_from_zero) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        for (double v : s.x) {
            x0 = std::min(x0, v);
            x1 = std::max(x1, v);
        }
        for (double v : s.y) {
            y0 = std::min(y0, v);
            y1 = std::max(y1, v);
        }
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (y_from_zero) y0 = std::min(y0, 0.0);
    if (x1 <= x0) x1 = x0 + 1;
    if (y1 <= y0) y1 = y0 + 1;
    const double ys = nice_step(y1 - y0, 5);
    return {x0, x1, std::floor(y0 / ys) * ys, std::ceil(y1 / ys) * ys};
}

void axes(std::ostringstream& os, const Frame& f, const std::string& title, const std::string& xl,
          const std::string& yl) {
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << esc(title)
       << "</text>\n";
    const double xs = nice_step(f.x1 - f.x0, 6), ys = nice_step(f.y1 - f.y0, 5);
    for (double v = std::ceil(f.x0 / xs) * xs; v <= f.x1 + 1e-9 * xs; v += xs) {
        os << "<line x1=\"" << f.px(v) << "\" y1=\"" << f.py(f.y0) << "\" x2=\"" << f.px(v) << "\" y2=\""
           << f.py(f.y1) << "\" stroke=\"#eee\"/>\n";
        os << "<text x=\"" << f.px(v) << "\" y=\"" << f.py(f.y0) + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
           << num(v) << "</text>\n";
    }
    for (double v = f.y0; v <= f.y1 + 1e-9 * ys; v += ys) {
        os << "<line x1=\"" << f.px(f.x0) << "\" y1=\"" << f.py(v) << "\" x2=\"" << f.px(f.x1) << "\" y2=\""
           << f.py(v) << "\" stroke=\"#eee\"/>\n";
        os << "<text x=\"" << f.px(f.x0) - 6 << "\" y=\"" << f.py(v) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
           << num(v) << "</text>\n";
    }
    os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight << "\" height=\""
       << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 15
       << "\" text-anchor=\"middle\" font-size=\"13\">" << esc(xl) << "</text>\n";
    os << "<text transform=\"translate(18," << (kTop + kHeight - kBottom) / 2
       << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"13\">" << esc(yl) << "</text>\n";
}

void legend(std::ostringstream& os, const std::vector<Series>& series) {
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double y = kTop + 10 + 20.0 * static_cast<double>(i);
        const double x = kWidth - kRight + 15;
        os << "<line x1=\"" << x << "\" y1=\"" << y << "\" x2=\"" << x + 22 << "\" y2=\"" << y << "\" stroke=\""
           << kPalette[i % 6] << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << x + 28 << "\" y=\"" << y + 4 << "\" font-size=\"12\">" << esc(series[i].name)
           << "</text>\n";
    }
}

std::string render(const std::string& title, const std::string& xl, const std::string& yl,
                   const std::vector<Series>& series, bool steps) {
    const Frame f = frame_for(series, true);
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" font-family=\"sans-serif\">\n";
    axes(os, f, title, xl, yl);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        os << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << kPalette[i % 6] << "\" points=\"";
        for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
            if (steps && k > 0) os << num(f.px(s.x[k])) << ',' << num(f.py(s.y[k - 1])) << ' ';
            os << num(f.px(s.x[k])) << ',' << num(f.py(s.y[k])) << ' ';
        }
        os << "\"/>\n";
    }
    legend(os, series);
    os << "</svg>\n";
    return os.str();
}

} // namespace

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series) {
    return render(title, x_label, y_label, series, false);
}

std::string cdf_chart(const std::string& title, const std::string& x_label, const std::vector<Series>& samples) {
    std::vector<Series> curves;
    for (const auto& s : samples) {
        Series c;
        c.name = s.name;
        c.x = s.y;
        std::sort(c.x.begin(), c.x.end());
        for (std::size_t i = 0; i < c.x.size(); ++i)
            c.y.push_back(static_cast<double>(i + 1) / static_cast<double>(c.x.size()));
        curves.push_back(std::move(c));
    }
    return render(title, x_label, "fraction of stations", curves, true);
}

} // namespace cogwifi::svg
