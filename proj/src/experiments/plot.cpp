#include "fsplab/plot.hpp"

#include "fsplab/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace fsp {

namespace {

constexpr double width = 640, height = 440;
constexpr double left = 70, right = 20, top = 40, bottom = 50;

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

struct Axis {
  bool log = false;
  double lo = 0, hi = 1;

  double map(double v) const { return log ? std::log10(v) : v; }
  double unit(double v) const { return (map(v) - lo) / (hi - lo); }
};

void check_log(const PlotCurve& c, const char* what, bool log_x, bool log_y) {
  for (std::size_t i = 0; i < c.x.size(); ++i) {
    if ((log_x && !(c.x[i] > 0.0)) || (log_y && !(c.y[i] > 0.0))) {
      std::ostringstream m;
      m << "log axis needs positive values: " << what << " '" << c.label << "' sample " << i << " is (" << c.x[i] << ", "
        << c.y[i] << ")";
      throw InvalidArgument(m.str());
    }
  }
}

} // namespace

std::string render_svg(const PlotSpec& spec) {
  std::size_t samples = 0;
  for (const auto& s : spec.series) samples += s.x.size();
  if (samples == 0) throw InvalidArgument("plot needs a nonempty series");
  auto all = [&](auto&& fn) {
    for (const auto& c : spec.series) fn(c, "series");
    for (const auto& c : spec.fits) fn(c, "fit");
    for (const auto& c : spec.envelopes) fn(c, "envelope");
  };
  all([](const PlotCurve& c, const char* what) {
    if (c.x.size() != c.y.size()) throw InvalidArgument(std::string(what) + " '" + c.label + "' has mismatched x and y");
    for (std::size_t i = 0; i < c.x.size(); ++i)
      if (!std::isfinite(c.x[i]) || !std::isfinite(c.y[i]))
        throw InvalidArgument(std::string(what) + " '" + c.label + "' sample " + std::to_string(i) + " is not finite");
  });
  all([&](const PlotCurve& c, const char* what) { check_log(c, what, spec.log_x, spec.log_y); });

  Axis ax{spec.log_x}, ay{spec.log_y};
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  all([&](const PlotCurve& c, const char*) {
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      xlo = std::min(xlo, ax.map(c.x[i]));
      xhi = std::max(xhi, ax.map(c.x[i]));
      ylo = std::min(ylo, ay.map(c.y[i]));
      yhi = std::max(yhi, ay.map(c.y[i]));
    }
  });
  auto pad = [](double& lo, double& hi) {
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(lo))) {
      lo -= 0.5;
      hi += 0.5;
    } else {
      const double d = 0.05 * (hi - lo);
      lo -= d;
      hi += d;
    }
  };
  pad(xlo, xhi);
  pad(ylo, yhi);
  ax.lo = xlo;
  ax.hi = xhi;
  ay.lo = ylo;
  ay.hi = yhi;
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double x) { return left + pw * ax.unit(x); };
  auto py = [&](double y) { return top + ph * (1.0 - ay.unit(y)); };

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\" viewBox=\"0 0 " << width
    << ' ' << height << "\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n"
    << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
    << escape(spec.title) << "</text>\n";
  s << "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n"
    << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph << "\"/>\n"
    << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph << "\"/>\n"
    << "</g>\n";
  s << "<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = ax.lo + (ax.hi - ax.lo) * i / 4.0, fy = ay.lo + (ay.hi - ay.lo) * i / 4.0;
    const double vx = ax.log ? std::pow(10.0, fx) : fx, vy = ay.log ? std::pow(10.0, fy) : fy;
    s << "<text x=\"" << num(px(vx)) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">" << tick(vx) << "</text>\n";
    s << "<text x=\"" << left - 6 << "\" y=\"" << num(py(vy) + 4) << "\" text-anchor=\"end\">" << tick(vy) << "</text>\n";
  }
  s << "</g>\n";
  s << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
    << escape(spec.xlabel) << (ax.log ? " (log)" : "") << "</text>\n";
  s << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 16 "
    << top + ph / 2 << ")\">" << escape(spec.ylabel) << (ay.log ? " (log)" : "") << "</text>\n";

  auto path = [&](const PlotCurve& c, const char* cls, const char* color, const char* dash) {
    if (c.x.empty()) return;
    s << "<path class=\"" << cls << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
    if (*dash) s << " stroke-dasharray=\"" << dash << "\"";
    s << " d=\"";
    for (std::size_t i = 0; i < c.x.size(); ++i) s << (i ? " L" : "M") << num(px(c.x[i])) << ',' << num(py(c.y[i]));
    s << "\"><title>" << escape(c.label) << "</title></path>\n";
  };
  for (const auto& c : spec.envelopes) path(c, "envelope", "#c0392b", "6,4");
  for (const auto& c : spec.fits) path(c, "fit", "#2c3e50", "");

  const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd"};
  std::size_t k = 0;
  for (const auto& c : spec.series) {
    s << "<g class=\"series\" fill=\"" << colors[k++ % 4] << "\"><title>" << escape(c.label) << "</title>\n";
    for (std::size_t i = 0; i < c.x.size(); ++i)
      s << "<circle class=\"marker\" cx=\"" << num(px(c.x[i])) << "\" cy=\"" << num(py(c.y[i])) << "\" r=\"2.5\"/>\n";
    s << "</g>\n";
  }

  // legend
  double ly = top + 10;
  auto legend = [&](const std::string& label, const char* color) {
    s << "<text x=\"" << left + pw - 8 << "\" y=\"" << ly << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
      << color << "\">" << escape(label) << "</text>\n";
    ly += 14;
  };
  k = 0;
  for (const auto& c : spec.series) legend(c.label, colors[k++ % 4]);
  for (const auto& c : spec.fits) legend(c.label, "#2c3e50");
  for (const auto& c : spec.envelopes) legend(c.label, "#c0392b");
  s << "</svg>\n";
  return s.str();
}

void emit_plot(const PlotSpec& spec, const std::filesystem::path& path) {
  const std::string doc = render_svg(spec);
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write plot to " + path.string());
  out << doc;
}

} // namespace fsp
