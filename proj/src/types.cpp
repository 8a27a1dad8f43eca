#include "rotpose/types.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace rotpose {

namespace {

KeypointScheme make_standard_scheme() {
  KeypointScheme s;
  s.names = {
      "head",           "neck",           "right_shoulder", "right_elbow",
      "right_hand",     "left_shoulder",  "left_elbow",     "left_hand",
      "right_hip",      "right_knee",     "right_ankle",    "left_hip",
      "left_knee",      "left_ankle",     "right_foot",     "left_foot",
      "pole_right_tip", "pole_left_tip",  "ski_right_tip",  "ski_right_heel",
      "ski_right_tail", "ski_left_tip",   "ski_left_heel",  "ski_left_tail",
  };
  s.body_indices.resize(kNumBodyJoints);
  for (int i = 0; i < kNumBodyJoints; ++i) s.body_indices[i] = i;
  // left shoulder / right hip: the usual PCK torso normalization pair
  s.torso_endpoints = {5, 8};
  return s;
}

}  // namespace

const KeypointScheme& KeypointScheme::standard() {
  static const KeypointScheme scheme = make_standard_scheme();
  return scheme;
}

void KeypointScheme::validate() const {
  if (names.size() != kNumKeypoints) {
    throw ValidationError("keypoint scheme: expected 24 names, got " +
                          std::to_string(names.size()));
  }
  std::set<std::string> unique(names.begin(), names.end());
  if (unique.size() != names.size()) {
    throw ValidationError("keypoint scheme: duplicate keypoint names");
  }
  if (body_indices.size() != kNumBodyJoints) {
    throw ValidationError("keypoint scheme: expected 16 body indices, got " +
                          std::to_string(body_indices.size()));
  }
  for (int i : body_indices) {
    if (i < 0 || i >= kNumKeypoints) {
      throw ValidationError("keypoint scheme: body index out of range: " +
                            std::to_string(i));
    }
  }
  if (torso_endpoints[0] == torso_endpoints[1]) {
    throw ValidationError("keypoint scheme: torso endpoints must differ");
  }
  for (int e : torso_endpoints) {
    if (std::find(body_indices.begin(), body_indices.end(), e) ==
        body_indices.end()) {
      throw ValidationError(
          "keypoint scheme: torso endpoint is not a body joint: " +
          std::to_string(e));
    }
  }
}

std::string_view to_string(FrameCategory c) {
  switch (c) {
    case FrameCategory::Regular: return "regular";
    case FrameCategory::OutOfBalance: return "oob";
    case FrameCategory::Fall: return "fall";
  }
  return "regular";
}

FrameCategory category_from_string(std::string_view s) {
  if (s == "regular") return FrameCategory::Regular;
  if (s == "oob") return FrameCategory::OutOfBalance;
  if (s == "fall") return FrameCategory::Fall;
  throw ParseError("unknown frame category: \"" + std::string(s) + "\"");
}

void AnnotatedSequence::validate() const {
  if (width <= 0 || height <= 0) {
    throw ValidationError("annotation: image_size must be positive");
  }
  if (!keypoint_names.empty() && keypoint_names.size() != kNumKeypoints) {
    throw ValidationError("annotation: expected 24 keypoint names, got " +
                          std::to_string(keypoint_names.size()));
  }
  int prev = -1;
  bool first = true;
  for (const auto& f : frames) {
    if (!first && f.frame_idx <= prev) {
      std::ostringstream msg;
      msg << "annotation: frame_idx not strictly increasing (" << prev
          << " followed by " << f.frame_idx << ")";
      throw ValidationError(msg.str());
    }
    prev = f.frame_idx;
    first = false;
  }
}

double DetectedPerson::mean_confidence() const {
  double sum = 0.0;
  for (const auto& kp : keypoints) sum += kp.confidence;
  return sum / kNumKeypoints;
}

void DetectionSet::validate() const {
  std::set<double> angles;
  for (const auto& r : records) {
    if (r.angle_deg < 0.0 || r.angle_deg >= 360.0) {
      throw ValidationError("detections: angle_deg out of [0, 360): " +
                            std::to_string(r.angle_deg));
    }
    if (!angles.insert(r.angle_deg).second) {
      throw ValidationError("detections: duplicate angle " +
                            std::to_string(r.angle_deg));
    }
    for (const auto& f : r.frames) {
      for (const auto& p : f.persons) {
        for (int i = 0; i < kNumKeypoints; ++i) {
          const auto& kp = p.keypoints[i];
          if (kp.confidence < 0.0 || kp.confidence > 1.0) {
            std::ostringstream msg;
            msg << "detections: angle " << r.angle_deg << " frame "
                << f.frame_idx << " keypoint " << i
                << ": confidence outside [0,1]: " << kp.confidence;
            throw ValidationError(msg.str());
          }
        }
      }
    }
  }
}

const DetectedPerson* select_person(
    const std::vector<DetectedPerson>& persons) {
  const DetectedPerson* best = nullptr;
  double best_score = 0.0;
  double best_conf = 0.0;
  for (const auto& p : persons) {
    const double conf = p.mean_confidence();
    if (best == nullptr || p.score > best_score ||
        (p.score == best_score && conf > best_conf)) {
      best = &p;
      best_score = p.score;
      best_conf = conf;
    }
  }
  return best;
}

void validate_frame_range(const DetectionSet& det,
                          const AnnotatedSequence& gt) {
  std::vector<int> expected;
  expected.reserve(gt.frames.size());
  for (const auto& f : gt.frames) expected.push_back(f.frame_idx);

  for (const auto& r : det.records) {
    std::vector<int> got;
    got.reserve(r.frames.size());
    for (const auto& f : r.frames) got.push_back(f.frame_idx);
    std::sort(got.begin(), got.end());

    std::vector<int> missing, extra;
    std::set_difference(expected.begin(), expected.end(), got.begin(),
                        got.end(), std::back_inserter(missing));
    std::set_difference(got.begin(), got.end(), expected.begin(),
                        expected.end(), std::back_inserter(extra));
    if (!missing.empty() || !extra.empty()) {
      std::ostringstream msg;
      msg << "detections at angle " << r.angle_deg
          << " do not match the annotated frame range;";
      if (!missing.empty()) {
        msg << " missing frames:";
        for (int i : missing) msg << ' ' << i;
        msg << ';';
      }
      if (!extra.empty()) {
        msg << " extra frames:";
        for (int i : extra) msg << ' ' << i;
      }
      throw ValidationError(msg.str());
    }
  }
}

}  // namespace rotpose
