#include "jamloc/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace jamloc {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr int kPaletteSize = 10;
constexpr int kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
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
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

class Canvas {
 public:
  Canvas(const PlotSpec& spec, Range xr, Range yr) : spec_(spec), xr_(xr), yr_(yr) {
    pw_ = spec.width - kLeft - kRight;
    ph_ = spec.height - kTop - kBottom;
    os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
        << spec.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << spec.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
        << esc(spec.title) << "</text>\n";
  }
  double px(double x) const { return kLeft + (x - xr_.lo) / (xr_.hi - xr_.lo) * pw_; }
  double py(double y) const { return kTop + ph_ - (y - yr_.lo) / (yr_.hi - yr_.lo) * ph_; }

  void axes(bool y_is_log) {
    os_ << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw_ << "\" height=\""
        << ph_ << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double xv = xr_.lo + (xr_.hi - xr_.lo) * i / 4;
      const double yv = yr_.lo + (yr_.hi - yr_.lo) * i / 4;
      os_ << "<text x=\"" << px(xv) << "\" y=\"" << kTop + ph_ + 16
          << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
      os_ << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
          << num(y_is_log ? std::pow(10.0, yv) : yv) << "</text>\n";
      os_ << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + pw_ << "\" y1=\"" << py(yv)
          << "\" y2=\"" << py(yv) << "\" stroke=\"#ddd\"/>\n";
    }
    os_ << "<text x=\"" << kLeft + pw_ / 2 << "\" y=\"" << spec_.height - 12
        << "\" text-anchor=\"middle\">" << esc(spec_.x_label) << "</text>\n";
    os_ << "<text transform=\"translate(16," << kTop + ph_ / 2
        << ") rotate(-90)\" text-anchor=\"middle\">" << esc(spec_.y_label) << "</text>\n";
  }

  void legend(int i, const std::string& name) {
    const int y = kTop + 10 + 18 * i;
    os_ << "<rect x=\"" << kLeft + pw_ + 12 << "\" y=\"" << y - 9 << "\" width=\"12\" height=\"10\" fill=\""
        << kPalette[i % kPaletteSize] << "\"/>\n<text x=\"" << kLeft + pw_ + 30 << "\" y=\"" << y
        << "\">" << esc(name) << "</text>\n";
  }

  std::ostringstream& out() { return os_; }

  void save(const std::filesystem::path& file) {
    os_ << "</svg>\n";
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream f(file);
    if (!f) throw std::runtime_error("cannot write " + file.string());
    f << os_.str();
  }

 private:
  PlotSpec spec_;
  Range xr_, yr_;
  int pw_, ph_;
  std::ostringstream os_;
};

double transform_y(double v, bool log_y) {
  if (!log_y) return v;
  return v > 0 ? std::log10(v) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

void write_line_plot(const std::filesystem::path& file, const PlotSpec& spec,
                     const std::vector<Series>& series) {
  Range xr, yr;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("plot: series x/y lengths differ");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double y = transform_y(s.y[i], spec.log_y);
      if (!std::isfinite(y) || !std::isfinite(s.x[i])) continue;
      xr.add(s.x[i]);
      yr.add(y);
    }
  }
  xr.finish();
  yr.finish();
  Canvas c(spec, xr, yr);
  c.axes(spec.log_y);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double y = transform_y(s.y[i], spec.log_y);
      if (!std::isfinite(y) || !std::isfinite(s.x[i])) continue;
      pts += num(c.px(s.x[i])) + "," + num(c.py(y)) + " ";
    }
    c.out() << "<polyline fill=\"none\" stroke-width=\"1.6\" stroke=\"" << kPalette[k % kPaletteSize]
            << "\" points=\"" << pts << "\"/>\n";
    c.legend(static_cast<int>(k), s.name);
  }
  c.save(file);
}

void write_scatter_plot(const std::filesystem::path& file, const PlotSpec& spec,
                        const std::vector<double>& x, const std::vector<double>& y,
                        const std::vector<int>& groups,
                        const std::vector<std::pair<double, double>>& markers) {
  if (x.size() != y.size() || groups.size() != x.size())
    throw std::invalid_argument("plot: scatter inputs differ in length");
  Range xr, yr;
  for (std::size_t i = 0; i < x.size(); ++i) xr.add(x[i]), yr.add(y[i]);
  for (const auto& [mx, my] : markers) xr.add(mx), yr.add(my);
  xr.finish();
  yr.finish();
  Canvas c(spec, xr, yr);
  c.axes(false);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
    c.out() << "<circle r=\"2.5\" cx=\"" << num(c.px(x[i])) << "\" cy=\"" << num(c.py(y[i]))
            << "\" fill=\"" << kPalette[std::abs(groups[i]) % kPaletteSize]
            << "\" fill-opacity=\"0.6\"/>\n";
  }
  for (const auto& [mx, my] : markers) {
    const double cx = c.px(mx), cy = c.py(my);
    c.out() << "<path d=\"M" << num(cx - 6) << "," << num(cy - 6) << " L" << num(cx + 6) << ","
            << num(cy + 6) << " M" << num(cx - 6) << "," << num(cy + 6) << " L" << num(cx + 6)
            << "," << num(cy - 6) << "\" stroke=\"black\" stroke-width=\"2.5\"/>\n";
  }
  c.save(file);
}

void write_bar_plot(const std::filesystem::path& file, const PlotSpec& spec,
                    const std::vector<std::string>& labels, const std::vector<double>& values) {
  if (labels.size() != values.size()) throw std::invalid_argument("plot: bar inputs differ in length");
  Range xr, yr;
  xr.add(0.0);
  for (double v : values) xr.add(v);
  yr.add(0.0);
  yr.add(static_cast<double>(values.size()));
  xr.finish();
  yr.finish();
  Canvas c(spec, xr, yr);
  const double step = values.empty() ? 0 : (c.py(0) - c.py(1));
  c.out() << "<line x1=\"" << c.px(0) << "\" x2=\"" << c.px(0) << "\" y1=\"" << kTop << "\" y2=\""
          << c.py(0) << "\" stroke=\"#444\"/>\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double top = c.py(static_cast<double>(values.size() - i));
    const double x0 = c.px(std::min(0.0, values[i])), x1 = c.px(std::max(0.0, values[i]));
    c.out() << "<rect x=\"" << num(x0) << "\" y=\"" << num(top + 0.15 * step) << "\" width=\""
            << num(x1 - x0) << "\" height=\"" << num(0.7 * step) << "\" fill=\"" << kPalette[0]
            << "\"/>\n<text x=\"" << num(c.px(xr.hi) + 6) << "\" y=\"" << num(top + 0.6 * step)
            << "\">" << esc(labels[i]) << " " << num(values[i]) << "</text>\n";
  }
  c.out() << "<text x=\"" << spec.width / 2 << "\" y=\"" << spec.height - 12
          << "\" text-anchor=\"middle\">" << esc(spec.x_label) << "</text>\n";
  c.save(file);
}

}  // namespace jamloc
