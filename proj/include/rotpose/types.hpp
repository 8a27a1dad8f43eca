#pragma once

#include <Eigen/Core>

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rotpose {

using Vec2 = Eigen::Vector2d;

inline constexpr int kNumKeypoints = 24;
inline constexpr int kNumBodyJoints = 16;

/// Thrown when a file does not match its schema.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when well-formed data violates a documented invariant.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Named keypoint layout: 16 body joints followed by 2 pole and 8 ski points.
/// The torso endpoints are the two body joints whose distance normalizes PCK.
struct KeypointScheme {
  std::vector<std::string> names;
  std::vector<int> body_indices;
  std::array<int, 2> torso_endpoints;

  static const KeypointScheme& standard();
  void validate() const;
};

enum class FrameCategory { Regular, OutOfBalance, Fall };

std::string_view to_string(FrameCategory c);
FrameCategory category_from_string(std::string_view s);

struct GroundTruthKeypoint {
  double x = 0.0;
  double y = 0.0;
  bool visible = false;

  Vec2 pos() const { return {x, y}; }
};

struct AnnotatedFrame {
  int frame_idx = 0;
  FrameCategory category = FrameCategory::Regular;
  std::array<GroundTruthKeypoint, kNumKeypoints> keypoints{};
};

struct AnnotatedSequence {
  std::string video_id;
  int width = 0;
  int height = 0;
  std::vector<std::string> keypoint_names;
  std::vector<AnnotatedFrame> frames;

  void validate() const;
};

/// One raw detector keypoint in rotated-canvas coordinates.
/// Confidence 0 means the detector did not produce this keypoint.
struct RawKeypoint {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;
};

struct DetectedPerson {
  double score = 0.0;
  std::array<RawKeypoint, kNumKeypoints> keypoints{};

  double mean_confidence() const;
};

struct DetectionFrame {
  int frame_idx = 0;
  std::vector<DetectedPerson> persons;
};

/// Detector output for one rotation angle of one video.
struct DetectionRecord {
  double angle_deg = 0.0;
  int canvas_width = 0;
  int canvas_height = 0;
  std::vector<DetectionFrame> frames;
};

struct DetectionSet {
  std::string video_id;
  int width = 0;
  int height = 0;
  std::vector<DetectionRecord> records;  // sorted by angle_deg ascending

  void validate() const;
};

/// Picks the person with the highest score; ties fall back to larger mean
/// keypoint confidence, then to list order. Returns nullptr for an empty list.
const DetectedPerson* select_person(const std::vector<DetectedPerson>& persons);

/// Checks that every record covers exactly the annotated frame range.
/// Throws ValidationError naming the missing/extra frame indices.
void validate_frame_range(const DetectionSet& det, const AnnotatedSequence& gt);

/// A prediction keypoint as consumed by the metrics: `present` distinguishes
/// a genuinely emitted location from a detector miss.
struct PredictedKeypoint {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;
  bool present = false;

  Vec2 pos() const { return {x, y}; }
};

struct PredictedFrame {
  int frame_idx = 0;
  bool has_person = false;
  double score = 0.0;
  std::array<PredictedKeypoint, kNumKeypoints> keypoints{};
};

struct PredictionSequence {
  std::string video_id;
  int width = 0;
  int height = 0;
  std::vector<PredictedFrame> frames;
};

}  // namespace rotpose
