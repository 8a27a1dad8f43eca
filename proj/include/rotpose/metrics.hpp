#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rotpose/types.hpp"

namespace rotpose {

struct MetricConfig {
  double pck_fraction = 0.2;
  std::vector<int> keypoint_subset;        // default: the 16 body joints
  std::array<int, 2> torso_endpoints{};    // from the keypoint scheme
  std::vector<double> ap_thresholds;       // default 0.50:0.05:0.95
  std::vector<double> oks_kappa;           // per keypoint, default uniform 0.1

  static MetricConfig standard();
  void validate() const;
  bool compatible_with(const MetricConfig& other) const;
};

struct CategoryCounts {
  long evaluated = 0;   // visible GT keypoints scored
  long correct = 0;     // within the PCK threshold
  long frames = 0;      // evaluable GT frames (for AP)
  long unusable = 0;    // frames skipped for lack of a torso scale
};

struct MetricReport {
  MetricConfig config;
  // index 0 = all, then per FrameCategory (regular, oob, fall)
  std::array<std::optional<double>, 4> pck{};
  std::array<std::optional<double>, 4> ap{};
  std::array<CategoryCounts, 4> counts{};
  std::array<std::optional<double>, kNumKeypoints> pck_per_keypoint{};
};

/// Column labels matching the report tables: all, reg, oob, fall.
std::string_view category_column(int i);

/// Torso scale for one frame: endpoint distance when both endpoints are
/// visible, otherwise the sequence median over frames where they are.
/// Throws ValidationError when no frame in the sequence has both visible.
double torso_diameter(const AnnotatedSequence& gt, int frame_pos,
                      const std::array<int, 2>& endpoints);

/// Object-keypoint similarity of one predicted frame against GT: mean over
/// visible subset keypoints of exp(−d²/(2·s²·κᵢ²)), s² the visible-keypoint
/// bounding-box area (torso diameter squared when the box degenerates).
double oks(const PredictedFrame& pred, const AnnotatedFrame& gt,
           const MetricConfig& config, double torso_fallback);

struct EvalPair {
  const PredictionSequence* predictions = nullptr;
  const AnnotatedSequence* ground_truth = nullptr;
};

/// PCK@fraction and OKS-AP over all videos pooled, overall and per category.
/// Categories without evaluable keypoints report absent values rather than 0.
MetricReport evaluate_metrics(std::span<const EvalPair> pairs,
                              const MetricConfig& config);

struct ReportDelta {
  std::array<std::optional<double>, 4> pck_before{}, pck_after{}, pck_delta{};
  std::array<std::optional<double>, 4> ap_before{}, ap_after{}, ap_delta{};
};

/// Before/after/delta per category. Throws ValidationError on mismatched
/// configs or disjoint category coverage.
ReportDelta compare_reports(const MetricReport& before,
                            const MetricReport& after);

}  // namespace rotpose
