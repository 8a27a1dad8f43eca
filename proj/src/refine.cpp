#include "rotpose/refine.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>
#include <sstream>

#include "rotpose/parallel.hpp"

namespace rotpose {

void FusionConfig::validate() const {
  if (k < 1) {
    throw ValidationError("fusion config: k must be >= 1, got " +
                          std::to_string(k));
  }
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(filter.alpha) || !in_unit(filter.beta) ||
      !in_unit(filter.gamma)) {
    throw ValidationError("fusion config: alpha, beta, gamma must lie in [0,1]");
  }
  if (!(filter.dt > 0.0)) {
    throw ValidationError("fusion config: dt must be positive");
  }
}

std::array<std::optional<KeypointCandidate>, kNumKeypoints> back_rotate_frame(
    const std::vector<DetectedPerson>& persons, const RotationSpec& spec,
    int angle_index, double confidence_floor) {
  std::array<std::optional<KeypointCandidate>, kNumKeypoints> out{};
  const DetectedPerson* person = select_person(persons);
  if (person == nullptr) return out;
  for (int i = 0; i < kNumKeypoints; ++i) {
    const RawKeypoint& kp = person->keypoints[i];
    if (kp.confidence <= confidence_floor) continue;
    KeypointCandidate cand;
    cand.pos = back_rotate_point({kp.x, kp.y}, spec);
    cand.confidence = kp.confidence;
    cand.angle_index = angle_index;
    out[i] = cand;
  }
  return out;
}

std::vector<KeypointCandidate> k_nearest(const CandidatePool& pool,
                                         const Vec2& estimate, int k) {
  if (pool.empty()) {
    throw ValidationError("k_nearest: empty candidate pool");
  }
  if (k < 1) {
    throw ValidationError("k_nearest: k must be >= 1");
  }
  std::vector<KeypointCandidate> sorted(pool.begin(), pool.end());
  std::sort(sorted.begin(), sorted.end(),
            [&](const KeypointCandidate& a, const KeypointCandidate& b) {
              const double da = (a.pos - estimate).squaredNorm();
              const double db = (b.pos - estimate).squaredNorm();
              if (da != db) return da < db;
              return a.angle_index < b.angle_index;
            });
  sorted.resize(std::min<std::size_t>(sorted.size(), static_cast<std::size_t>(k)));
  return sorted;
}

FusedPoint weighted_mean(std::span<const KeypointCandidate> selected) {
  if (selected.empty()) {
    throw ValidationError("weighted_mean: empty selection");
  }
  double sum_c = 0.0;
  Vec2 weighted = Vec2::Zero();
  Vec2 plain = Vec2::Zero();
  for (const auto& c : selected) {
    sum_c += c.confidence;
    weighted += c.confidence * c.pos;
    plain += c.pos;
  }
  FusedPoint out;
  const auto n = static_cast<double>(selected.size());
  out.pos = (sum_c > 0.0) ? Vec2(weighted / sum_c) : Vec2(plain / n);
  out.confidence = sum_c / n;
  return out;
}

std::vector<RefinedKeypoint> refine_trajectory(
    const std::vector<CandidatePool>& pools, const FusionConfig& config) {
  config.validate();
  const auto first_nonempty =
      std::find_if(pools.begin(), pools.end(),
                   [](const CandidatePool& p) { return !p.empty(); });
  if (first_nonempty == pools.end()) {
    throw ValidationError("refine_trajectory: every candidate pool is empty");
  }
  const std::size_t start =
      static_cast<std::size_t>(first_nonempty - pools.begin());

  std::vector<RefinedKeypoint> out(pools.size());

  // Initialization uses the full pool; no estimate exists yet.
  const FusedPoint init = weighted_mean(*first_nonempty);
  for (std::size_t f = 0; f < start; ++f) {
    out[f] = {init.pos, 0.0, RefinedSource::PredictedOnly};
  }
  out[start] = {init.pos, init.confidence, RefinedSource::Fused};

  FilterState state = init_state(init.pos);
  for (std::size_t f = start + 1; f < pools.size(); ++f) {
    const Vec2 estimate = predict(state, config.filter);
    if (pools[f].empty()) {
      state = coast(state, config.filter);
      out[f] = {estimate, 0.0, RefinedSource::PredictedOnly};
      continue;
    }
    const auto selected = k_nearest(pools[f], estimate, config.k);
    const FusedPoint fused = weighted_mean(selected);
    state = update(state, config.filter, fused.pos);
    out[f] = {fused.pos, fused.confidence, RefinedSource::Fused};
  }
  return out;
}

namespace {

std::vector<int> sorted_frame_indices(const DetectionRecord& record) {
  std::vector<int> got;
  got.reserve(record.frames.size());
  for (const auto& f : record.frames) got.push_back(f.frame_idx);
  std::sort(got.begin(), got.end());
  const auto dup = std::adjacent_find(got.begin(), got.end());
  if (dup != got.end()) {
    std::ostringstream msg;
    msg << "refine: record at angle " << record.angle_deg
        << " lists frame " << *dup << " twice";
    throw ValidationError(msg.str());
  }
  return got;
}

std::vector<int> common_frame_indices(const DetectionSet& detections) {
  if (detections.records.empty()) {
    throw ValidationError("refine: detection set has no rotation records");
  }
  const std::vector<int> indices =
      sorted_frame_indices(detections.records.front());
  for (const auto& r : detections.records) {
    if (sorted_frame_indices(r) != indices) {
      std::ostringstream msg;
      msg << "refine: record at angle " << r.angle_deg
          << " covers a different frame_idx set than the record at angle "
          << detections.records.front().angle_deg;
      throw ValidationError(msg.str());
    }
  }
  return indices;
}

}  // namespace

std::array<std::vector<CandidatePool>, kNumKeypoints> build_pools(
    const DetectionSet& detections, double confidence_floor,
    std::vector<int>& frame_indices) {
  frame_indices = common_frame_indices(detections);
  const std::size_t n_frames = frame_indices.size();

  std::array<std::vector<CandidatePool>, kNumKeypoints> pools;
  for (auto& per_frame : pools) per_frame.resize(n_frames);

  // angle_index refers to the angle-ascending order regardless of how the
  // caller ordered the records, so record permutations cannot change output
  std::vector<std::size_t> by_angle(detections.records.size());
  std::iota(by_angle.begin(), by_angle.end(), std::size_t{0});
  std::sort(by_angle.begin(), by_angle.end(), [&](std::size_t a, std::size_t b) {
    return detections.records[a].angle_deg < detections.records[b].angle_deg;
  });

  for (std::size_t a = 0; a < by_angle.size(); ++a) {
    const DetectionRecord& record = detections.records[by_angle[a]];
    RotationSpec spec;
    spec.angle_deg = record.angle_deg;
    spec.original_width = detections.width;
    spec.original_height = detections.height;
    spec.canvas_width = record.canvas_width;
    spec.canvas_height = record.canvas_height;
    for (const DetectionFrame& frame : record.frames) {
      const auto pos_it = std::lower_bound(frame_indices.begin(),
                                           frame_indices.end(),
                                           frame.frame_idx);
      const auto f = static_cast<std::size_t>(pos_it - frame_indices.begin());
      const auto candidates = back_rotate_frame(
          frame.persons, spec, static_cast<int>(a), confidence_floor);
      for (int kp = 0; kp < kNumKeypoints; ++kp) {
        if (candidates[kp]) pools[kp][f].push_back(*candidates[kp]);
      }
    }
  }
  return pools;
}

RefinedSequence refine_sequence(const DetectionSet& detections,
                                const FusionConfig& config, int jobs) {
  config.validate();
  detections.validate();

  RefinedSequence out;
  out.video_id = detections.video_id;
  out.width = detections.width;
  out.height = detections.height;
  out.config = config;
  for (const auto& r : detections.records) out.angles_deg.push_back(r.angle_deg);
  std::sort(out.angles_deg.begin(), out.angles_deg.end());

  const auto pools =
      build_pools(detections, config.confidence_floor, out.frame_indices);
  const std::size_t n_frames = out.frame_indices.size();
  if (n_frames == 0) {
    throw ValidationError("refine: detection set has no frames");
  }

  std::array<bool, kNumKeypoints> empty_kp{};
  parallel_for(kNumKeypoints, jobs, [&](std::size_t kp) {
    const auto& per_frame = pools[kp];
    const bool any = std::any_of(
        per_frame.begin(), per_frame.end(),
        [](const CandidatePool& p) { return !p.empty(); });
    if (!any) {
      empty_kp[kp] = true;
      out.trajectories[kp].assign(n_frames, RefinedKeypoint{});
      return;
    }
    out.trajectories[kp] = refine_trajectory(per_frame, config);
  });
  for (int kp = 0; kp < kNumKeypoints; ++kp) {
    if (empty_kp[kp]) {
      out.keypoints_without_detections.push_back(kp);
      std::cerr << "warning: keypoint " << kp
                << " has no detections in any frame; emitted as absent\n";
    }
  }
  return out;
}

PredictionSequence to_predictions(const RefinedSequence& refined) {
  PredictionSequence out;
  out.video_id = refined.video_id;
  out.width = refined.width;
  out.height = refined.height;
  out.frames.resize(refined.frame_indices.size());
  for (std::size_t f = 0; f < refined.frame_indices.size(); ++f) {
    PredictedFrame& frame = out.frames[f];
    frame.frame_idx = refined.frame_indices[f];
    frame.has_person = true;
    double conf_sum = 0.0;
    for (int kp = 0; kp < kNumKeypoints; ++kp) {
      const RefinedKeypoint& r = refined.trajectories[kp][f];
      PredictedKeypoint& p = frame.keypoints[kp];
      p.x = r.pos.x();
      p.y = r.pos.y();
      p.confidence = r.confidence;
      p.present = true;
      conf_sum += r.confidence;
    }
    for (int kp : refined.keypoints_without_detections) {
      frame.keypoints[kp].present = false;
    }
    frame.score = conf_sum / kNumKeypoints;
  }
  return out;
}

}  // namespace rotpose
