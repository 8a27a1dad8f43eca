#include "rotpose/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rotpose {

MetricConfig MetricConfig::standard() {
  MetricConfig c;
  const KeypointScheme& scheme = KeypointScheme::standard();
  c.keypoint_subset = scheme.body_indices;
  c.torso_endpoints = scheme.torso_endpoints;
  for (int i = 0; i <= 9; ++i) c.ap_thresholds.push_back(0.50 + 0.05 * i);
  c.oks_kappa.assign(kNumKeypoints, 0.1);
  return c;
}

void MetricConfig::validate() const {
  if (!(pck_fraction > 0.0)) {
    throw ValidationError("metric config: pck_fraction must be positive");
  }
  if (keypoint_subset.empty()) {
    throw ValidationError("metric config: keypoint subset is empty");
  }
  for (int i : keypoint_subset) {
    if (i < 0 || i >= kNumKeypoints) {
      throw ValidationError("metric config: subset index out of range: " +
                            std::to_string(i));
    }
  }
  if (ap_thresholds.empty()) {
    throw ValidationError("metric config: no AP thresholds");
  }
  for (std::size_t i = 0; i < ap_thresholds.size(); ++i) {
    const double t = ap_thresholds[i];
    if (!(t > 0.0) || t > 1.0) {
      throw ValidationError("metric config: OKS threshold outside (0,1]");
    }
    if (i > 0 && t <= ap_thresholds[i - 1]) {
      throw ValidationError(
          "metric config: OKS thresholds must be strictly increasing");
    }
  }
  if (oks_kappa.size() != kNumKeypoints) {
    throw ValidationError("metric config: expected 24 kappa values");
  }
  for (double k : oks_kappa) {
    if (!(k > 0.0)) {
      throw ValidationError("metric config: kappa values must be positive");
    }
  }
}

bool MetricConfig::compatible_with(const MetricConfig& other) const {
  return pck_fraction == other.pck_fraction &&
         keypoint_subset == other.keypoint_subset &&
         torso_endpoints == other.torso_endpoints &&
         ap_thresholds == other.ap_thresholds && oks_kappa == other.oks_kappa;
}

std::string_view category_column(int i) {
  switch (i) {
    case 0: return "all";
    case 1: return "reg";
    case 2: return "oob";
    case 3: return "fall";
  }
  return "?";
}

namespace {

int category_slot(FrameCategory c) {
  switch (c) {
    case FrameCategory::Regular: return 1;
    case FrameCategory::OutOfBalance: return 2;
    case FrameCategory::Fall: return 3;
  }
  return 1;
}

std::optional<double> endpoint_distance(const AnnotatedFrame& frame,
                                        const std::array<int, 2>& endpoints) {
  const GroundTruthKeypoint& a = frame.keypoints[endpoints[0]];
  const GroundTruthKeypoint& b = frame.keypoints[endpoints[1]];
  if (!a.visible || !b.visible) return std::nullopt;
  return (a.pos() - b.pos()).norm();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double sequence_median_torso(const AnnotatedSequence& gt,
                             const std::array<int, 2>& endpoints) {
  std::vector<double> diameters;
  for (const auto& frame : gt.frames) {
    if (auto d = endpoint_distance(frame, endpoints)) diameters.push_back(*d);
  }
  if (diameters.empty()) {
    throw ValidationError(
        "torso diameter: no frame has both torso endpoints visible in video " +
        gt.video_id);
  }
  return median(std::move(diameters));
}

}  // namespace

double torso_diameter(const AnnotatedSequence& gt, int frame_pos,
                      const std::array<int, 2>& endpoints) {
  const auto& frame = gt.frames.at(static_cast<std::size_t>(frame_pos));
  if (auto d = endpoint_distance(frame, endpoints)) return *d;
  return sequence_median_torso(gt, endpoints);
}

double oks(const PredictedFrame& pred, const AnnotatedFrame& gt,
           const MetricConfig& config, double torso_fallback) {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = min_x;
  double max_x = -min_x;
  double max_y = -min_x;
  int visible = 0;
  for (int kp : config.keypoint_subset) {
    const GroundTruthKeypoint& g = gt.keypoints[kp];
    if (!g.visible) continue;
    ++visible;
    min_x = std::min(min_x, g.x);
    max_x = std::max(max_x, g.x);
    min_y = std::min(min_y, g.y);
    max_y = std::max(max_y, g.y);
  }
  if (visible == 0) {
    throw ValidationError("oks: frame has no visible subset keypoints");
  }
  double s2 = (max_x - min_x) * (max_y - min_y);
  if (s2 <= 0.0) s2 = torso_fallback * torso_fallback;

  double sum = 0.0;
  for (int kp : config.keypoint_subset) {
    const GroundTruthKeypoint& g = gt.keypoints[kp];
    if (!g.visible) continue;
    const PredictedKeypoint& p = pred.keypoints[kp];
    if (!p.present) continue;  // exp(-inf) = 0 contribution
    const double d2 = (p.pos() - g.pos()).squaredNorm();
    const double kappa = config.oks_kappa[kp];
    if (s2 <= 0.0) {
      sum += (d2 == 0.0) ? 1.0 : 0.0;  // degenerate-scale limit
    } else {
      sum += std::exp(-d2 / (2.0 * s2 * kappa * kappa));
    }
  }
  return sum / visible;
}

namespace {

struct FrameEval {
  int category_slot = 1;
  bool has_prediction = false;
  double score = 0.0;
  double oks_value = 0.0;
  // stable ranking key: (video order, frame_idx)
  std::size_t video = 0;
  int frame_idx = 0;
};

/// Area under the precision-recall curve, all-point interpolation: at each
/// distinct recall level the envelope precision (best precision at recall
/// >= r) weights the recall increment.
double pr_area(const std::vector<bool>& ranked_tp, long n_gt) {
  if (n_gt <= 0) return 0.0;
  // cumulative precision/recall along the ranked list
  std::vector<double> precision, recall;
  long tp = 0;
  for (std::size_t i = 0; i < ranked_tp.size(); ++i) {
    if (ranked_tp[i]) ++tp;
    precision.push_back(static_cast<double>(tp) /
                        static_cast<double>(i + 1));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(n_gt));
  }
  // precision envelope from the right
  for (std::size_t i = precision.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double area = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < recall.size(); ++i) {
    if (recall[i] > prev_recall) {
      area += (recall[i] - prev_recall) * precision[i];
      prev_recall = recall[i];
    }
  }
  return area;
}

std::optional<double> ap_for(const std::vector<FrameEval>& frames,
                             const std::vector<double>& thresholds,
                             int slot) {
  long n_gt = 0;
  std::vector<const FrameEval*> dets;
  for (const auto& f : frames) {
    if (slot != 0 && f.category_slot != slot) continue;
    ++n_gt;
    if (f.has_prediction) dets.push_back(&f);
  }
  if (n_gt == 0) return std::nullopt;

  std::sort(dets.begin(), dets.end(), [](const FrameEval* a,
                                         const FrameEval* b) {
    if (a->score != b->score) return a->score > b->score;
    if (a->video != b->video) return a->video < b->video;
    return a->frame_idx < b->frame_idx;
  });

  double sum = 0.0;
  for (double t : thresholds) {
    std::vector<bool> tp(dets.size());
    for (std::size_t i = 0; i < dets.size(); ++i) {
      tp[i] = dets[i]->oks_value >= t;
    }
    sum += pr_area(tp, n_gt);
  }
  return sum / static_cast<double>(thresholds.size());
}

}  // namespace

MetricReport evaluate_metrics(std::span<const EvalPair> pairs,
                              const MetricConfig& config) {
  config.validate();
  if (pairs.empty()) {
    throw ValidationError("evaluate: no prediction/annotation pairs");
  }

  MetricReport report;
  report.config = config;

  std::array<CategoryCounts, 4> counts{};
  std::array<std::array<long, 2>, kNumKeypoints> per_kp{};  // evaluated, correct
  std::vector<FrameEval> frame_evals;

  for (std::size_t v = 0; v < pairs.size(); ++v) {
    const PredictionSequence& pred = *pairs[v].predictions;
    const AnnotatedSequence& gt = *pairs[v].ground_truth;
    gt.validate();

    // annotated frames are the evaluation units
    auto find_pred = [&](int frame_idx) -> const PredictedFrame* {
      for (const auto& f : pred.frames) {
        if (f.frame_idx == frame_idx) return &f;
      }
      return nullptr;
    };

    for (std::size_t fp = 0; fp < gt.frames.size(); ++fp) {
      const AnnotatedFrame& gt_frame = gt.frames[fp];
      const int slot = category_slot(gt_frame.category);

      int visible = 0;
      for (int kp : config.keypoint_subset) {
        if (gt_frame.keypoints[kp].visible) ++visible;
      }
      if (visible == 0) continue;  // nothing evaluable in this frame

      const double torso =
          torso_diameter(gt, static_cast<int>(fp), config.torso_endpoints);
      if (!(torso > 0.0)) {
        ++counts[0].unusable;
        ++counts[slot].unusable;
        continue;  // no usable scale for this frame
      }
      const double threshold = config.pck_fraction * torso;

      const PredictedFrame* pred_frame = find_pred(gt_frame.frame_idx);

      ++counts[0].frames;
      ++counts[slot].frames;

      for (int kp : config.keypoint_subset) {
        const GroundTruthKeypoint& g = gt_frame.keypoints[kp];
        if (!g.visible) continue;
        ++counts[0].evaluated;
        ++counts[slot].evaluated;
        ++per_kp[kp][0];
        bool correct = false;
        if (pred_frame != nullptr && pred_frame->has_person &&
            pred_frame->keypoints[kp].present) {
          const double d =
              (pred_frame->keypoints[kp].pos() - g.pos()).norm();
          correct = d <= threshold;
        }
        if (correct) {
          ++counts[0].correct;
          ++counts[slot].correct;
          ++per_kp[kp][1];
        }
      }

      FrameEval fe;
      fe.category_slot = slot;
      fe.video = v;
      fe.frame_idx = gt_frame.frame_idx;
      if (pred_frame != nullptr && pred_frame->has_person) {
        fe.has_prediction = true;
        fe.score = pred_frame->score;
        fe.oks_value = oks(*pred_frame, gt_frame, config, torso);
      }
      frame_evals.push_back(fe);
    }
  }

  report.counts = counts;
  for (int slot = 0; slot < 4; ++slot) {
    if (counts[slot].evaluated > 0) {
      report.pck[slot] = static_cast<double>(counts[slot].correct) /
                         static_cast<double>(counts[slot].evaluated);
    }
    report.ap[slot] = ap_for(frame_evals, config.ap_thresholds, slot);
  }
  for (int kp = 0; kp < kNumKeypoints; ++kp) {
    if (per_kp[kp][0] > 0) {
      report.pck_per_keypoint[kp] = static_cast<double>(per_kp[kp][1]) /
                                    static_cast<double>(per_kp[kp][0]);
    }
  }
  return report;
}

ReportDelta compare_reports(const MetricReport& before,
                            const MetricReport& after) {
  if (!before.config.compatible_with(after.config)) {
    throw ValidationError("compare: reports use different metric configs");
  }
  ReportDelta delta;
  for (int slot = 0; slot < 4; ++slot) {
    if (before.pck[slot].has_value() != after.pck[slot].has_value() ||
        before.ap[slot].has_value() != after.ap[slot].has_value()) {
      std::ostringstream msg;
      msg << "compare: category \"" << category_column(slot)
          << "\" present in only one report";
      throw ValidationError(msg.str());
    }
    delta.pck_before[slot] = before.pck[slot];
    delta.pck_after[slot] = after.pck[slot];
    delta.ap_before[slot] = before.ap[slot];
    delta.ap_after[slot] = after.ap[slot];
    if (before.pck[slot]) {
      delta.pck_delta[slot] = *after.pck[slot] - *before.pck[slot];
    }
    if (before.ap[slot]) {
      delta.ap_delta[slot] = *after.ap[slot] - *before.ap[slot];
    }
  }
  return delta;
}

}  // namespace rotpose
