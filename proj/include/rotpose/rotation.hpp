#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <utility>
#include <vector>

#include "rotpose/types.hpp"

namespace rotpose {

inline double deg_to_rad(double deg) { return deg * M_PI / 180.0; }

/// Rotation of the whole image about its center onto an expanded canvas that
/// contains the rotated rectangle. Positive angles rotate clockwise on screen
/// (y axis points down), so R(90°) maps (10,0) relative to the center onto
/// (0,10): R(θ) = [[cosθ, −sinθ], [sinθ, cosθ]].
struct RotationSpec {
  double angle_deg = 0.0;
  int original_width = 0;
  int original_height = 0;
  int canvas_width = 0;
  int canvas_height = 0;

  Vec2 original_center() const {
    return {original_width / 2.0, original_height / 2.0};
  }
  Vec2 canvas_center() const {
    return {canvas_width / 2.0, canvas_height / 2.0};
  }
};

/// Minimal axis-aligned canvas holding a w×h rectangle rotated by angle_deg.
/// The 1e-9 guard keeps exact 90° multiples from gaining a pixel of
/// floating-point dust.
inline std::pair<int, int> expanded_canvas(int w, int h, double angle_deg) {
  const double th = deg_to_rad(angle_deg);
  const double c = std::abs(std::cos(th));
  const double s = std::abs(std::sin(th));
  const int W = static_cast<int>(std::ceil(w * c + h * s - 1e-9));
  const int H = static_cast<int>(std::ceil(w * s + h * c - 1e-9));
  return {W, H};
}

inline RotationSpec make_rotation_spec(double angle_deg, int w, int h) {
  auto [W, H] = expanded_canvas(w, h, angle_deg);
  return {angle_deg, w, h, W, H};
}

inline Eigen::Matrix2d rotation_matrix(double angle_deg) {
  const double th = deg_to_rad(angle_deg);
  const double c = std::cos(th);
  const double s = std::sin(th);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

/// Original-image point -> rotated-canvas point.
inline Vec2 forward_rotate_point(const Vec2& p, const RotationSpec& spec) {
  return rotation_matrix(spec.angle_deg) * (p - spec.original_center()) +
         spec.canvas_center();
}

/// Rotated-canvas point -> original-image point. Exact inverse of
/// forward_rotate_point.
inline Vec2 back_rotate_point(const Vec2& p_r, const RotationSpec& spec) {
  return rotation_matrix(-spec.angle_deg) * (p_r - spec.canvas_center()) +
         spec.original_center();
}

/// Half-open sweep {start, start+step, ...} strictly below stop.
/// The default 0:360:10 yields the 36 angles 0,10,...,350.
struct AngleSet {
  double start = 0.0;
  double stop = 360.0;
  double step = 10.0;

  std::vector<double> angles() const;
  void validate() const;

  /// Parses "start:stop:step"; throws ValidationError on malformed input.
  static AngleSet parse(std::string_view text);
  std::string to_text() const;
};

}  // namespace rotpose
