#include "rotpose/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace rotpose {

namespace {

struct Panel {
  double x0, y0, w, h;          // pixel box inside the SVG
  double fmin, fmax;            // frame-axis range
  double vmin, vmax;            // value-axis range
  double px(double frame) const {
    return x0 + (frame - fmin) / std::max(1e-9, fmax - fmin) * w;
  }
  double py(double value) const {
    return y0 + h - (value - vmin) / std::max(1e-9, vmax - vmin) * h;
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

void polyline(std::ostringstream& svg, const Panel& p,
              const std::vector<int>& frames,
              const std::vector<std::optional<Vec2>>& values, int axis,
              const char* color, double width) {
  std::vector<std::string> runs;
  std::ostringstream pts;
  bool open = false;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i]) {
      if (open) {
        runs.push_back(pts.str());
        pts.str("");
        open = false;
      }
      continue;
    }
    const double v = (axis == 0) ? values[i]->x() : values[i]->y();
    pts << fmt(p.px(frames[i])) << ',' << fmt(p.py(v)) << ' ';
    open = true;
  }
  if (open) runs.push_back(pts.str());
  for (const auto& run : runs) {
    svg << "  <polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"" << width << "\" points=\"" << run << "\"/>\n";
  }
}

void draw_panel(std::ostringstream& svg, const Panel& p,
                const TracePlotData& data, int axis, const char* label) {
  svg << "  <rect x=\"" << p.x0 << "\" y=\"" << p.y0 << "\" width=\"" << p.w
      << "\" height=\"" << p.h
      << "\" fill=\"white\" stroke=\"#888\" stroke-width=\"1\"/>\n";
  svg << "  <text x=\"" << p.x0 + 4 << "\" y=\"" << p.y0 + 14
      << "\" font-size=\"12\" fill=\"#333\">" << label << "</text>\n";

  // candidate cloud, darker = more confident
  for (std::size_t i = 0; i < data.candidates.size(); ++i) {
    for (const auto& c : data.candidates[i]) {
      const double v = (axis == 0) ? c.pos.x() : c.pos.y();
      if (v < p.vmin || v > p.vmax) continue;
      const double opacity = 0.15 + 0.75 * std::clamp(c.confidence, 0.0, 1.0);
      svg << "  <circle cx=\"" << fmt(p.px(data.frame_indices[i])) << "\" cy=\""
          << fmt(p.py(v)) << "\" r=\"1.8\" fill=\"#555\" fill-opacity=\""
          << fmt(opacity) << "\"/>\n";
    }
  }
  polyline(svg, p, data.frame_indices, data.ground_truth, axis, "#d62728", 1.6);
  polyline(svg, p, data.frame_indices, data.refined, axis, "#e6b820", 2.0);
}

}  // namespace

void write_trace_svg(const TracePlotData& data,
                     const std::filesystem::path& path) {
  if (data.frame_indices.empty()) {
    throw ValidationError("plot: no frames to draw");
  }
  const double width = 860.0;
  const double height = 560.0;

  double fmin = data.frame_indices.front();
  double fmax = data.frame_indices.back();
  if (fmax <= fmin) fmax = fmin + 1.0;

  auto value_range = [&](int axis) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    auto take = [&](double v) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    };
    for (const auto& v : data.ground_truth) {
      if (v) take(axis == 0 ? v->x() : v->y());
    }
    for (const auto& v : data.refined) {
      if (v) take(axis == 0 ? v->x() : v->y());
    }
    for (const auto& pool : data.candidates) {
      for (const auto& c : pool) take(axis == 0 ? c.pos.x() : c.pos.y());
    }
    if (!(hi > lo)) {
      lo -= 1.0;
      hi += 1.0;
    }
    const double pad = 0.05 * (hi - lo);
    return std::pair{lo - pad, hi + pad};
  };
  const auto [x_lo, x_hi] = value_range(0);
  const auto [y_lo, y_hi] = value_range(1);

  const Panel top{60, 40, width - 90, (height - 110) / 2, fmin, fmax, x_lo,
                  x_hi};
  const Panel bottom{60, 60 + (height - 110) / 2, width - 90,
                     (height - 110) / 2, fmin, fmax, y_lo, y_hi};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
      << height << "\">\n";
  svg << "  <rect width=\"100%\" height=\"100%\" fill=\"#fafafa\"/>\n";
  svg << "  <text x=\"60\" y=\"24\" font-size=\"14\" fill=\"#111\">"
      << data.title
      << " (gray: candidates by confidence, red: ground truth, "
         "yellow: refined)</text>\n";
  draw_panel(svg, top, data, 0, "x [px]");
  draw_panel(svg, bottom, data, 1, "y [px]");
  svg << "  <text x=\"" << width / 2 - 30 << "\" y=\"" << height - 12
      << "\" font-size=\"12\" fill=\"#333\">frame</text>\n";
  svg << "</svg>\n";

  std::ofstream out(path);
  if (!out) {
    throw ValidationError("plot: cannot write " + path.string());
  }
  out << svg.str();
}

}  // namespace rotpose
