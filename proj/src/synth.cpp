#include "rotpose/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace rotpose::synth {

namespace {

// splitmix64; decorrelates per-(angle, frame, keypoint) streams
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::mt19937_64 rng_for(std::uint64_t seed, std::uint64_t a, std::uint64_t f,
                        std::uint64_t kp) {
  std::uint64_t s = mix(seed);
  s = mix(s ^ mix(a + 1));
  s = mix(s ^ mix(f + 1));
  s = mix(s ^ mix(kp + 1));
  return std::mt19937_64{s};
}

double fold_deg(double a) {
  a = std::fmod(a, 360.0);
  if (a > 180.0) a -= 360.0;
  if (a <= -180.0) a += 360.0;
  return a;
}

FrameCategory category_for(double orientation_deg, bool fallen) {
  const double tilt = std::abs(fold_deg(orientation_deg));
  if (fallen || tilt > 90.0) return FrameCategory::Fall;
  if (tilt > 45.0) return FrameCategory::OutOfBalance;
  return FrameCategory::Regular;
}

}  // namespace

void TrajectorySpec::validate() const {
  if (n_frames <= 0) {
    throw ValidationError("trajectory spec: n_frames must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw ValidationError("trajectory spec: image size must be positive");
  }
  if (orientation_deg.size() != static_cast<std::size_t>(n_frames)) {
    throw ValidationError(
        "trajectory spec: orientation profile length != n_frames");
  }
  for (std::size_t i = 1; i < orientation_deg.size(); ++i) {
    if (std::abs(orientation_deg[i] - orientation_deg[i - 1]) > 45.0) {
      std::ostringstream msg;
      msg << "trajectory spec: orientation jumps by more than 45 deg at frame "
          << i;
      throw ValidationError(msg.str());
    }
  }
  for (const auto& m : base_motions) {
    int covered = 0;
    for (const auto& seg : m.segments) {
      if (seg.frames < 0) {
        throw ValidationError("trajectory spec: negative segment length");
      }
      covered += seg.frames;
    }
    if (covered < n_frames - 1) {
      throw ValidationError(
          "trajectory spec: motion segments cover fewer than n_frames-1 steps");
    }
  }
}

std::array<Vec2, kNumKeypoints> standard_template() {
  // y-down pixels; torso (left shoulder #5 -> right hip #8) spans 100 px
  std::array<Vec2, kNumKeypoints> t{};
  t[0] = {0, -75};      // head
  t[1] = {0, -55};      // neck
  t[2] = {18, -50};     // right_shoulder
  t[3] = {26, -20};     // right_elbow
  t[4] = {30, 8};       // right_hand
  t[5] = {-18, -50};    // left_shoulder
  t[6] = {-26, -20};    // left_elbow
  t[7] = {-30, 8};      // left_hand
  t[8] = {12, 44};      // right_hip  (|t8 - t5| ~ 98.6... adjusted below)
  t[9] = {16, 80};      // right_knee
  t[10] = {18, 118};    // right_ankle
  t[11] = {-12, 44};    // left_hip
  t[12] = {-16, 80};    // left_knee
  t[13] = {-18, 118};   // left_ankle
  t[14] = {24, 126};    // right_foot
  t[15] = {-24, 126};   // left_foot
  t[16] = {46, 60};     // pole_right_tip
  t[17] = {-46, 60};    // pole_left_tip
  t[18] = {60, 128};    // ski_right_tip
  t[19] = {18, 129};    // ski_right_heel
  t[20] = {-30, 130};   // ski_right_tail
  t[21] = {-60, 132};   // ski_left_tip
  t[22] = {-18, 131};   // ski_left_heel
  t[23] = {30, 133};    // ski_left_tail
  // pin the torso diameter to exactly 100 px
  const double d = (t[8] - t[5]).norm();
  t[8] = t[5] + (t[8] - t[5]) * (100.0 / d);
  return t;
}

std::vector<double> torso_orientation_deg(
    const AnnotatedSequence& gt, const std::array<int, 2>& endpoints) {
  std::vector<double> out;
  out.reserve(gt.frames.size());
  double last = 0.0;
  for (const auto& frame : gt.frames) {
    const GroundTruthKeypoint& a = frame.keypoints[endpoints[0]];
    const GroundTruthKeypoint& b = frame.keypoints[endpoints[1]];
    if (a.visible && b.visible) {
      const Vec2 axis = b.pos() - a.pos();
      if (axis.norm() > 1e-12) {
        // upright reference: hip straight below shoulder, i.e. axis = (0, +1);
        // the rotation convention matches forward_rotate_point
        last = fold_deg(std::atan2(axis.x(), axis.y()) * 180.0 / M_PI);
      }
    }
    out.push_back(last);
  }
  return out;
}

AnnotatedSequence gen_ground_truth(const TrajectorySpec& spec,
                                   std::uint64_t seed) {
  spec.validate();

  AnnotatedSequence gt;
  {
    std::ostringstream id;
    id << spec.video_tag << "-" << seed;
    gt.video_id = id.str();
  }
  gt.width = spec.width;
  gt.height = spec.height;
  gt.keypoint_names = KeypointScheme::standard().names;
  gt.frames.resize(spec.n_frames);

  // integrate the per-keypoint base motions
  std::array<std::vector<Vec2>, kNumKeypoints> base;
  for (int kp = 0; kp < kNumKeypoints; ++kp) {
    base[kp].reserve(spec.n_frames);
    Vec2 pos = spec.base_motions[kp].start;
    Vec2 vel = Vec2::Zero();
    base[kp].push_back(pos);
    std::size_t seg_idx = 0;
    int left = spec.base_motions[kp].segments.empty()
                   ? 0
                   : spec.base_motions[kp].segments[0].frames;
    for (int f = 1; f < spec.n_frames; ++f) {
      const auto& segs = spec.base_motions[kp].segments;
      while (seg_idx < segs.size() && left == 0) {
        ++seg_idx;
        if (seg_idx < segs.size()) left = segs[seg_idx].frames;
      }
      if (seg_idx >= segs.size()) {
        throw ValidationError("trajectory spec: ran out of motion segments");
      }
      const MotionSegment& seg = segs[seg_idx];
      if (left == seg.frames) vel = seg.velocity;  // segment entry resets velocity
      pos += vel + 0.5 * seg.acceleration;
      vel += seg.acceleration;
      --left;
      base[kp].push_back(pos);
    }
  }

  bool fallen = false;
  for (int f = 0; f < spec.n_frames; ++f) {
    AnnotatedFrame& frame = gt.frames[f];
    frame.frame_idx = f;
    const double orient = spec.orientation_deg[f];
    const FrameCategory cat = category_for(orient, fallen);
    if (cat == FrameCategory::Fall) fallen = true;
    frame.category = cat;

    const Eigen::Matrix2d rot = rotation_matrix(orient);
    // body center = mean of the base positions; offsets rotate rigidly
    Vec2 center = Vec2::Zero();
    for (int kp = 0; kp < kNumKeypoints; ++kp) center += base[kp][f];
    center /= kNumKeypoints;

    for (int kp = 0; kp < kNumKeypoints; ++kp) {
      const Vec2 p = center + rot * (spec.template_offsets[kp] +
                                     (base[kp][f] - center));
      if (p.x() < 0.0 || p.x() > spec.width || p.y() < 0.0 ||
          p.y() > spec.height) {
        std::ostringstream msg;
        msg << "trajectory leaves image bounds at frame " << f << " keypoint "
            << kp << " (" << p.x() << ", " << p.y() << ")";
        throw ValidationError(msg.str());
      }
      frame.keypoints[kp] = {p.x(), p.y(), true};
    }
  }
  gt.validate();
  return gt;
}

double NoiseModel::success_probability(double apparent_deg) const {
  const double tilt = std::abs(fold_deg(apparent_deg));
  if (tilt <= upright_full_deg) return p_detect_max;
  if (tilt >= failure_deg) return p_detect_min;
  const double u =
      (tilt - upright_full_deg) / (failure_deg - upright_full_deg);
  const double ramp = std::cos(u * M_PI / 2.0);
  return p_detect_min + (p_detect_max - p_detect_min) * ramp * ramp;
}

void NoiseModel::validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(p_detect_max) || !in_unit(p_detect_min) ||
      !in_unit(outlier_prob)) {
    throw ValidationError("noise model: probabilities must lie in [0,1]");
  }
  if (sigma_px < 0.0) {
    throw ValidationError("noise model: sigma must be non-negative");
  }
  if (!(failure_deg > upright_full_deg) || upright_full_deg < 0.0) {
    throw ValidationError(
        "noise model: need 0 <= upright_full_deg < failure_deg");
  }
}

DetectionSet simulate_detections(const AnnotatedSequence& gt,
                                 const AngleSet& angles,
                                 const NoiseModel& noise,
                                 std::uint64_t seed) {
  noise.validate();
  gt.validate();
  const std::vector<double> angle_list = angles.angles();
  const std::vector<double> orientation = torso_orientation_deg(
      gt, KeypointScheme::standard().torso_endpoints);
  const std::uint64_t stream_seed = mix(seed) ^ mix(noise.seed + 1);

  DetectionSet set;
  set.video_id = gt.video_id;
  set.width = gt.width;
  set.height = gt.height;
  set.records.resize(angle_list.size());

  for (std::size_t a = 0; a < angle_list.size(); ++a) {
    const RotationSpec spec =
        make_rotation_spec(angle_list[a], gt.width, gt.height);
    DetectionRecord& record = set.records[a];
    record.angle_deg = angle_list[a];
    record.canvas_width = spec.canvas_width;
    record.canvas_height = spec.canvas_height;
    record.frames.resize(gt.frames.size());

    for (std::size_t f = 0; f < gt.frames.size(); ++f) {
      DetectionFrame& frame = record.frames[f];
      frame.frame_idx = gt.frames[f].frame_idx;

      const double p_success =
          noise.success_probability(orientation[f] - angle_list[a]);

      DetectedPerson person;
      bool any = false;
      for (int kp = 0; kp < kNumKeypoints; ++kp) {
        auto rng = rng_for(stream_seed, a, f, static_cast<std::uint64_t>(kp));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        if (unit(rng) >= p_success) continue;

        const GroundTruthKeypoint& g = gt.frames[f].keypoints[kp];
        std::normal_distribution<double> gauss(0.0, 1.0);
        Vec2 p = g.pos();
        const double nx = gauss(rng) * noise.sigma_px;
        const double ny = gauss(rng) * noise.sigma_px;
        p += Vec2(nx, ny);
        if (unit(rng) < noise.outlier_prob) {
          const double dir = unit(rng) * 2.0 * M_PI;
          const double mag = noise.outlier_shift_px * (0.75 + 0.5 * unit(rng));
          p += mag * Vec2(std::cos(dir), std::sin(dir));
        }
        const double err = (p - g.pos()).norm();
        const double spread = std::max(noise.sigma_px, 1.0);
        double conf = std::exp(-err * err / (2.0 * 9.0 * spread * spread));
        conf = std::clamp(conf * (0.85 + 0.15 * unit(rng)), 0.05, 1.0);

        const Vec2 canvas = forward_rotate_point(p, spec);
        person.keypoints[kp] = {canvas.x(), canvas.y(), conf};
        any = true;
      }
      if (any) {
        person.score = person.mean_confidence();
        frame.persons.push_back(person);
      }
    }
  }
  return set;
}

TrajectorySpec fall_scenario_spec(int n_frames, int width, int height) {
  TrajectorySpec spec;
  spec.n_frames = n_frames;
  spec.width = width;
  spec.height = height;
  spec.video_tag = "fall-scenario";
  spec.template_offsets = standard_template();

  // glide across the frame at constant velocity
  const Vec2 start(width * 0.22, height * 0.5);
  const Vec2 vel((width * 0.56) / std::max(1, n_frames - 1), 0.0);
  for (int kp = 0; kp < kNumKeypoints; ++kp) {
    spec.base_motions[kp].start = start;
    spec.base_motions[kp].segments = {{n_frames, vel, Vec2::Zero()}};
  }

  // upright for the first third, then tip over to upside-down
  spec.orientation_deg.resize(n_frames);
  const int upright_until = n_frames / 3;
  for (int f = 0; f < n_frames; ++f) {
    if (f <= upright_until) {
      spec.orientation_deg[f] = 0.0;
    } else {
      const double u = static_cast<double>(f - upright_until) /
                       std::max(1, n_frames - 1 - upright_until);
      spec.orientation_deg[f] = 170.0 * u;
    }
  }
  return spec;
}

PlantedOptimum planted_optimum_scenario() {
  constexpr int kFrames = 30;
  constexpr int kWidth = 2400;
  constexpr int kHeight = 2000;
  const std::array<Vec2, kNumKeypoints> offsets = standard_template();

  // constant-velocity ride with sign flips; each flip is followed by a
  // detection gap so only exact gain tracking predicts the gap frames
  const Vec2 start(700.0, 500.0);
  std::vector<Vec2> center(kFrames);
  std::vector<int> jump_frames = {5, 12, 19, 26};
  std::vector<int> gap_frames = {6, 13, 20, 27};
  std::vector<int> outlier_frames = {3, 9, 16, 23};

  Vec2 vel(60.0, 10.0);
  center[0] = start;
  for (int f = 1; f < kFrames; ++f) {
    if (std::find(jump_frames.begin(), jump_frames.end(), f) !=
        jump_frames.end()) {
      vel.x() = -vel.x();  // 120 px/frame jump against a 20 px threshold
    }
    center[f] = center[f - 1] + vel;
  }

  PlantedOptimum out;
  AnnotatedSequence& gt = out.ground_truth;
  gt.video_id = "planted-optimum";
  gt.width = kWidth;
  gt.height = kHeight;
  gt.keypoint_names = KeypointScheme::standard().names;
  gt.frames.resize(kFrames);
  for (int f = 0; f < kFrames; ++f) {
    gt.frames[f].frame_idx = f;
    gt.frames[f].category = FrameCategory::Regular;
    for (int kp = 0; kp < kNumKeypoints; ++kp) {
      const Vec2 p = center[f] + offsets[kp];
      gt.frames[f].keypoints[kp] = {p.x(), p.y(), true};
    }
  }

  DetectionSet& det = out.detections;
  det.video_id = gt.video_id;
  det.width = kWidth;
  det.height = kHeight;

  auto contains = [](const std::vector<int>& v, int f) {
    return std::find(v.begin(), v.end(), f) != v.end();
  };

  // record 0 (angle 0): the exact inlier on every non-gap frame
  // records 1..2 (angles 120, 240): far outlier clusters on outlier frames
  const std::array<double, 3> record_angles = {0.0, 120.0, 240.0};
  const Vec2 outlier_offset(0.0, 900.0);  // perpendicular to the motion
  for (std::size_t r = 0; r < record_angles.size(); ++r) {
    const RotationSpec spec =
        make_rotation_spec(record_angles[r], kWidth, kHeight);
    DetectionRecord record;
    record.angle_deg = record_angles[r];
    record.canvas_width = spec.canvas_width;
    record.canvas_height = spec.canvas_height;
    record.frames.resize(kFrames);
    for (int f = 0; f < kFrames; ++f) {
      record.frames[f].frame_idx = f;
      if (contains(gap_frames, f)) continue;  // nobody detects gap frames
      const bool emit = (r == 0) || contains(outlier_frames, f);
      if (!emit) continue;
      DetectedPerson person;
      for (int kp = 0; kp < kNumKeypoints; ++kp) {
        const Vec2 truth = center[f] + offsets[kp];
        const Vec2 target =
            (r == 0) ? truth : Vec2(truth + outlier_offset +
                                    Vec2(30.0 * static_cast<double>(r), 0.0));
        const Vec2 canvas = forward_rotate_point(target, spec);
        person.keypoints[kp] = {canvas.x(), canvas.y(), 1.0};
      }
      person.score = 1.0;
      record.frames[f].persons.push_back(person);
    }
    det.records.push_back(std::move(record));
  }

  out.k = 1;
  out.alpha = 1.0;
  out.beta = 1.0;
  out.gamma = 0.0;
  return out;
}

}  // namespace rotpose::synth
