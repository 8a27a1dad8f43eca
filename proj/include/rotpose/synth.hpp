#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rotpose/refine.hpp"
#include "rotpose/rotation.hpp"
#include "rotpose/types.hpp"

namespace rotpose::synth {

/// One piecewise-kinematic leg of a keypoint's base motion.
struct MotionSegment {
  int frames = 0;
  Vec2 velocity = Vec2::Zero();      // px/frame
  Vec2 acceleration = Vec2::Zero();  // px/frame^2
};

struct KeypointMotion {
  Vec2 start = Vec2::Zero();
  std::vector<MotionSegment> segments;
};

/// Synthetic skier: per-keypoint piecewise base motion plus a body
/// orientation profile that rigidly rotates the template offsets about the
/// body center. 0° = upright; categories derive from the profile
/// (<=45° regular, <=90° out-of-balance, beyond that fall, sticky).
struct TrajectorySpec {
  int n_frames = 0;
  int width = 0;
  int height = 0;
  std::array<Vec2, kNumKeypoints> template_offsets{};
  std::array<KeypointMotion, kNumKeypoints> base_motions{};
  std::vector<double> orientation_deg;
  std::string video_tag = "synth";

  void validate() const;
};

/// Detector behaviour model. Detection succeeds with a probability that
/// peaks when the apparent orientation (body orientation minus rotation
/// angle) is near upright and falls to p_detect_min past failure_deg.
struct NoiseModel {
  double sigma_px = 2.0;
  double upright_full_deg = 30.0;   // full success inside this tilt
  double failure_deg = 90.0;        // floor probability beyond this tilt
  double p_detect_max = 0.95;
  double p_detect_min = 0.02;
  double outlier_prob = 0.02;
  double outlier_shift_px = 150.0;
  std::uint64_t seed = 0;           // combined with the call-site seed

  double success_probability(double apparent_deg) const;
  void validate() const;
};

/// Upright-ish body template spanning roughly a 100 px torso, all 24 points.
std::array<Vec2, kNumKeypoints> standard_template();

/// Per-frame body orientation from the GT torso axis; 0 when the skier is
/// upright (torso endpoint 0 above endpoint 1 in y-down pixels). Frames with
/// a hidden endpoint reuse the previous frame's value.
std::vector<double> torso_orientation_deg(const AnnotatedSequence& gt,
                                          const std::array<int, 2>& endpoints);

/// Deterministic annotated sequence from the spec; the seed only tags the
/// video id. Throws when a trajectory leaves the image bounds.
AnnotatedSequence gen_ground_truth(const TrajectorySpec& spec,
                                   std::uint64_t seed);

/// Per-angle detection records for the GT: each (angle, frame, keypoint)
/// draws success from the orientation model, then forward-rotates the GT
/// position plus gaussian noise (and rare outliers) onto the angle's canvas.
/// Bit-reproducible for a fixed (gt, angles, noise, seed).
DetectionSet simulate_detections(const AnnotatedSequence& gt,
                                 const AngleSet& angles,
                                 const NoiseModel& noise, std::uint64_t seed);

/// Regular -> out-of-balance -> fall ride: constant-velocity base motion
/// with an orientation ramp from upright to upside-down.
TrajectorySpec fall_scenario_spec(int n_frames = 60, int width = 1920,
                                  int height = 1080);

/// Hand-built dataset whose grid-search optimum is exactly
/// (k=1, alpha=1, beta=1, gamma=0): velocity jumps immediately followed by
/// detection gaps separate the gains, planted far outlier clusters separate
/// k. Every frame is correct only at the planted point.
struct PlantedOptimum {
  AnnotatedSequence ground_truth;
  DetectionSet detections;
  int k = 1;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 0.0;
};

PlantedOptimum planted_optimum_scenario();

}  // namespace rotpose::synth
