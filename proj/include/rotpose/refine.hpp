#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "rotpose/filter.hpp"
#include "rotpose/rotation.hpp"
#include "rotpose/types.hpp"

namespace rotpose {

/// One back-rotated detection for one keypoint in one frame.
/// angle_index is the position of the producing rotation in the
/// angle-ascending record list; it is the deterministic tie-breaker.
struct KeypointCandidate {
  Vec2 pos = Vec2::Zero();
  double confidence = 0.0;
  int angle_index = 0;
};

using CandidatePool = std::vector<KeypointCandidate>;

enum class RefinedSource { Fused, PredictedOnly };

struct RefinedKeypoint {
  Vec2 pos = Vec2::Zero();
  double confidence = 0.0;
  RefinedSource source = RefinedSource::PredictedOnly;
};

struct FusionConfig {
  int k = 12;
  FilterParams filter{};
  double confidence_floor = 0.0;

  void validate() const;
};

/// Selects one person from the frame and back-rotates its keypoints into the
/// original image. Keypoints with confidence <= floor come back absent
/// (std::nullopt). Empty persons yield 24 absent candidates.
std::array<std::optional<KeypointCandidate>, kNumKeypoints> back_rotate_frame(
    const std::vector<DetectedPerson>& persons, const RotationSpec& spec,
    int angle_index, double confidence_floor);

/// The min(k, |pool|) candidates closest to the estimate, ordered by
/// (distance, angle_index) ascending. Throws on an empty pool.
std::vector<KeypointCandidate> k_nearest(const CandidatePool& pool,
                                         const Vec2& estimate, int k);

struct FusedPoint {
  Vec2 pos = Vec2::Zero();
  double confidence = 0.0;
};

/// Confidence-weighted mean of the selected candidates; falls back to the
/// plain centroid when all confidences are zero. Returned confidence is the
/// arithmetic mean of the candidate confidences.
FusedPoint weighted_mean(std::span<const KeypointCandidate> selected);

/// Runs the per-keypoint loop over per-frame pools:
///   - leading empty frames copy the initialization point (PredictedOnly),
///   - the first non-empty pool initializes the filter from the weighted
///     mean of the full pool,
///   - later frames fuse the k nearest candidates to the prediction, or
///     coast through empty pools emitting the prediction.
/// Throws ValidationError when every pool is empty.
std::vector<RefinedKeypoint> refine_trajectory(
    const std::vector<CandidatePool>& pools, const FusionConfig& config);

struct RefinedSequence {
  std::string video_id;
  int width = 0;
  int height = 0;
  FusionConfig config;
  std::vector<double> angles_deg;      // rotation angles the pools came from
  std::vector<int> frame_indices;
  // trajectories[kp][frame position]
  std::array<std::vector<RefinedKeypoint>, kNumKeypoints> trajectories;
  // keypoints that had no detection anywhere; their trajectories are
  // placeholders and must be treated as absent predictions
  std::vector<int> keypoints_without_detections;
};

/// Builds candidate pools from every rotation record and refines all 24
/// keypoint trajectories independently (parallel across keypoints).
RefinedSequence refine_sequence(const DetectionSet& detections,
                                const FusionConfig& config, int jobs = 1);

/// Candidate pools per keypoint and frame, pools[kp][frame position].
/// Exposed for plotting and tests.
std::array<std::vector<CandidatePool>, kNumKeypoints> build_pools(
    const DetectionSet& detections, double confidence_floor,
    std::vector<int>& frame_indices);

/// Refined trajectories viewed as a prediction sequence for the metrics.
PredictionSequence to_predictions(const RefinedSequence& refined);

}  // namespace rotpose
