#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fsp {

struct PlotCurve {
  std::string label;
  std::vector<double> x, y;
};

struct PlotSpec {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool log_x = false;
  bool log_y = false;
  /// drawn as markers
  std::vector<PlotCurve> series;
  /// drawn as paths with class="fit"
  std::vector<PlotCurve> fits;
  /// drawn as paths with class="envelope"
  std::vector<PlotCurve> envelopes;
};

/// Standalone SVG document. InvalidArgument when no series has a sample,
/// or when a log axis meets a nonpositive value (the message names it).
std::string render_svg(const PlotSpec& spec);
void emit_plot(const PlotSpec& spec, const std::filesystem::path& path);

} // namespace fsp
