#include "tsaug/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "tsaug/error.hpp"

namespace tsaug::svg {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr int kMarginLeft = 64;
constexpr int kMarginRight = 150;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 52;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
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
  void finish() {
    if (lo > hi) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      const double pad = std::max(std::abs(lo) * 0.05, 0.5);
      lo -= pad;
      hi += pad;
    } else {
      const double pad = (hi - lo) * 0.05;
      lo -= pad;
      hi += pad;
    }
  }
};

struct Frame {
  int width, height;
  Range xr, yr;

  double px(double x) const { return kMarginLeft + (x - xr.lo) / (xr.hi - xr.lo) * plot_w(); }
  double py(double y) const { return kMarginTop + (yr.hi - y) / (yr.hi - yr.lo) * plot_h(); }
  double plot_w() const { return width - kMarginLeft - kMarginRight; }
  double plot_h() const { return height - kMarginTop - kMarginBottom; }
};

void open(std::ostringstream& os, int width, int height) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void axes(std::ostringstream& os, const Frame& f, const std::string& title, const std::string& x_label,
          const std::string& y_label) {
  const double x0 = kMarginLeft, y0 = kMarginTop;
  const double y1 = y0 + f.plot_h();
  os << "<text x=\"" << num(f.width / 2.0) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
     << escape(title) << "</text>\n";
  os << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(f.plot_w()) << "\" height=\""
     << num(f.plot_h()) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.xr.lo + (f.xr.hi - f.xr.lo) * i / 4.0;
    const double yv = f.yr.lo + (f.yr.hi - f.yr.lo) * i / 4.0;
    const double xp = f.px(xv), yp = f.py(yv);
    os << "<line x1=\"" << num(xp) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(xp) << "\" y2=\"" << num(y1 + 5)
       << "\" stroke=\"#333\"/>\n";
    os << "<text x=\"" << num(xp) << "\" y=\"" << num(y1 + 18) << "\" text-anchor=\"middle\">" << tick(xv)
       << "</text>\n";
    os << "<line x1=\"" << num(x0 - 5) << "\" y1=\"" << num(yp) << "\" x2=\"" << num(x0) << "\" y2=\"" << num(yp)
       << "\" stroke=\"#333\"/>\n";
    os << "<text x=\"" << num(x0 - 8) << "\" y=\"" << num(yp + 4) << "\" text-anchor=\"end\">" << tick(yv)
       << "</text>\n";
  }
  os << "<text x=\"" << num(x0 + f.plot_w() / 2) << "\" y=\"" << num(f.height - 10.0)
     << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << num(y0 + f.plot_h() / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << num(y0 + f.plot_h() / 2) << ")\">" << escape(y_label) << "</text>\n";
}

std::string polyline(const Frame& f, const std::vector<double>& x, const std::vector<double>& y,
                     const std::string& color) {
  std::ostringstream os;
  os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
    os << num(f.px(x[i])) << ',' << num(f.py(y[i])) << ' ';
  }
  os << "\"/>\n";
  return os.str();
}

// Diverging blue-white-red scale over [-1, 1].
std::string diverging(double t) {
  t = std::clamp(t, -1.0, 1.0);
  int r, g, b;
  if (t < 0) {
    r = static_cast<int>(std::lround(255 * (1 + t) + 33 * -t));
    g = static_cast<int>(std::lround(255 * (1 + t) + 102 * -t));
    b = static_cast<int>(std::lround(255 * (1 + t) + 172 * -t));
  } else {
    r = static_cast<int>(std::lround(255 * (1 - t) + 178 * t));
    g = static_cast<int>(std::lround(255 * (1 - t) + 24 * t));
    b = static_cast<int>(std::lround(255 * (1 - t) + 43 * t));
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string render(const LineChart& chart, int width, int height) {
  Frame f{width, height, {}, {}};
  for (const auto& s : chart.series) {
    if (s.x.size() != s.y.size()) throw ValidationError("line series '" + s.name + "' has mismatched x/y sizes");
    for (double v : s.x) f.xr.add(v);
    for (double v : s.y) f.yr.add(v);
  }
  f.xr.finish();
  f.yr.finish();

  std::ostringstream os;
  open(os, width, height);
  axes(os, f, chart.title, chart.x_label, chart.y_label);
  for (std::size_t i = 0; i < chart.series.size(); ++i) {
    const auto& s = chart.series[i];
    const std::string color = s.color.empty() ? kPalette[i % std::size(kPalette)] : s.color;
    os << polyline(f, s.x, s.y, color);
    if (chart.markers) {
      for (std::size_t k = 0; k < s.x.size(); ++k) {
        if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
        os << "<circle cx=\"" << num(f.px(s.x[k])) << "\" cy=\"" << num(f.py(s.y[k])) << "\" r=\"3\" fill=\""
           << color << "\"/>\n";
      }
    }
    const double ly = kMarginTop + 14.0 + 16.0 * static_cast<double>(i);
    const double lx = width - kMarginRight + 12.0;
    os << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(lx + 18) << "\" y2=\""
       << num(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << num(lx + 24) << "\" y=\"" << num(ly) << "\">" << escape(s.name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string render(const ScatterChart& chart, int width, int height) {
  Frame f{width, height, {}, {}};
  double cmax = 0.0;
  for (const auto& p : chart.points) {
    f.xr.add(p.x);
    f.yr.add(p.y);
    if (std::isfinite(p.color_value)) cmax = std::max(cmax, std::abs(p.color_value));
  }
  f.xr.finish();
  f.yr.finish();
  if (cmax < 1e-12) cmax = 1.0;

  std::ostringstream os;
  open(os, width, height);
  axes(os, f, chart.title, chart.x_label, chart.y_label);
  for (const auto& p : chart.points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
    os << "<circle cx=\"" << num(f.px(p.x)) << "\" cy=\"" << num(f.py(p.y)) << "\" r=\"5\" fill=\""
       << diverging(p.color_value / cmax) << "\" stroke=\"#333\" stroke-width=\"0.6\">";
    if (!p.label.empty()) os << "<title>" << escape(p.label) << "</title>";
    os << "</circle>\n";
  }
  const double bx = width - kMarginRight + 30.0;
  const double by = kMarginTop + 10.0;
  const int steps = 20;
  const double bh = 160.0 / steps;
  os << "<text x=\"" << num(bx) << "\" y=\"" << num(by - 4) << "\">" << escape(chart.color_label) << "</text>\n";
  for (int i = 0; i < steps; ++i) {
    const double t = 1.0 - 2.0 * (i + 0.5) / steps;
    os << "<rect x=\"" << num(bx) << "\" y=\"" << num(by + i * bh + 4) << "\" width=\"16\" height=\"" << num(bh)
       << "\" fill=\"" << diverging(t) << "\"/>\n";
  }
  os << "<text x=\"" << num(bx + 22) << "\" y=\"" << num(by + 14) << "\">+" << tick(cmax) << "</text>\n";
  os << "<text x=\"" << num(bx + 22) << "\" y=\"" << num(by + 4 + steps * bh) << "\">-" << tick(cmax)
     << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string render_overlay(const TimeSeries& input, const TimeSeries& augmented, const std::string& title, int width,
                           int height) {
  auto line = [](const TimeSeries& s, std::string name, std::string color) {
    LineSeries out{std::move(name), {}, s.channel(0), std::move(color)};
    for (std::size_t t = 0; t < s.length(); ++t) out.x.push_back(static_cast<double>(t));
    return out;
  };
  LineChart chart{title, "t", "value", {line(input, "input", "#d62728"), line(augmented, "augmented", "#2ca02c")}};
  return render(chart, width, height);
}

void write_file(const std::filesystem::path& path, const std::string& svg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << svg;
  if (!out) throw ValidationError("failed writing " + path.string());
}

}  // namespace tsaug::svg
