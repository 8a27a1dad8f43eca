#pragma once

#include <cmath>
#include <stdexcept>

#include "rotpose/types.hpp"

namespace rotpose {

/// Fixed filter gains. With gamma = 0 the filter degenerates to the
/// constant-velocity alpha-beta form.
struct FilterParams {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 0.0;
  double dt = 1.0;
};

/// Per-keypoint 2D kinematic state. Both axes are decoupled: the filter is
/// two independent scalar alpha-beta-gamma filters sharing gains.
struct FilterState {
  Vec2 pos = Vec2::Zero();
  Vec2 vel = Vec2::Zero();
  Vec2 acc = Vec2::Zero();
  bool initialized = false;
};

inline FilterState init_state(const Vec2& p0) {
  if (!p0.allFinite()) {
    throw std::invalid_argument("filter: non-finite initial position");
  }
  FilterState s;
  s.pos = p0;
  s.initialized = true;
  return s;
}

/// Kinematic position estimate for the next frame; does not mutate state.
inline Vec2 predict(const FilterState& s, const FilterParams& p) {
  if (!s.initialized) {
    throw std::logic_error("filter: predict on uninitialized state");
  }
  return s.pos + p.dt * s.vel + 0.5 * p.dt * p.dt * s.acc;
}

/// Absorbs a measurement: residual r against the prediction feeds back with
/// gains alpha, beta/dt and 2*gamma/dt^2.
inline FilterState update(const FilterState& s, const FilterParams& p,
                          const Vec2& measurement) {
  if (!s.initialized) {
    throw std::logic_error("filter: update on uninitialized state");
  }
  if (!measurement.allFinite()) {
    throw std::invalid_argument("filter: non-finite measurement");
  }
  const Vec2 predicted_pos = predict(s, p);
  const Vec2 predicted_vel = s.vel + p.dt * s.acc;
  const Vec2 r = measurement - predicted_pos;

  FilterState out = s;
  out.pos = predicted_pos + p.alpha * r;
  out.vel = predicted_vel + (p.beta / p.dt) * r;
  out.acc = s.acc + (2.0 * p.gamma / (p.dt * p.dt)) * r;
  return out;
}

/// Advances the state to its own prediction when a frame has no measurement.
inline FilterState coast(const FilterState& s, const FilterParams& p) {
  if (!s.initialized) {
    throw std::logic_error("filter: coast on uninitialized state");
  }
  FilterState out = s;
  out.pos = predict(s, p);
  out.vel = s.vel + p.dt * s.acc;
  return out;
}

}  // namespace rotpose
