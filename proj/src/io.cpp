#include "rotpose/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <json.hpp>

namespace rotpose {

namespace {

using nlohmann::json;

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open file: " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_json_file(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw ParseError("cannot write file: " + path.string());
  }
  out << j.dump(2) << '\n';
}

const json& field(const json& j, const char* name, const std::string& where) {
  const auto it = j.find(name);
  if (it == j.end()) {
    throw ParseError(where + ": missing field \"" + name + "\"");
  }
  return *it;
}

double number_field(const json& j, const char* name,
                    const std::string& where) {
  const json& f = field(j, name, where);
  if (!f.is_number()) {
    throw ParseError(where + ": field \"" + name + "\" must be a number");
  }
  return f.get<double>();
}

std::pair<int, int> size_field(const json& j, const char* name,
                               const std::string& where) {
  const json& f = field(j, name, where);
  if (!f.is_array() || f.size() != 2 || !f[0].is_number() ||
      !f[1].is_number()) {
    throw ParseError(where + ": field \"" + name + "\" must be [width, height]");
  }
  return {f[0].get<int>(), f[1].get<int>()};
}

void emit_warning(WarningSink sink, const std::string& msg) {
  if (sink != nullptr) {
    sink->push_back(msg);
  } else {
    std::cerr << "warning: " << msg << '\n';
  }
}

json keypoint_triples(const auto& keypoints, auto value_of) {
  json arr = json::array();
  for (const auto& kp : keypoints) {
    arr.push_back(value_of(kp));
  }
  return arr;
}

}  // namespace

AnnotatedSequence load_annotations(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  const std::string where = "annotation " + path.filename().string();

  AnnotatedSequence gt;
  gt.video_id = field(j, "video", where).get<std::string>();
  std::tie(gt.width, gt.height) = size_field(j, "image_size", where);

  const json& names = field(j, "keypoint_names", where);
  if (!names.is_array() || names.size() != kNumKeypoints) {
    throw ParseError(where + ": \"keypoint_names\" must list 24 names, got " +
                     std::to_string(names.size()));
  }
  const auto& standard = KeypointScheme::standard().names;
  for (int i = 0; i < kNumKeypoints; ++i) {
    gt.keypoint_names.push_back(names[i].get<std::string>());
    if (gt.keypoint_names.back() != standard[i]) {
      throw ParseError(where + ": keypoint_names[" + std::to_string(i) +
                       "] is \"" + gt.keypoint_names.back() +
                       "\", expected \"" + standard[i] +
                       "\" (fixed annotation scheme)");
    }
  }

  for (const json& jf : field(j, "frames", where)) {
    AnnotatedFrame frame;
    frame.frame_idx = static_cast<int>(number_field(jf, "frame_idx", where));
    frame.category = category_from_string(
        field(jf, "category", where).get<std::string>());
    const json& kps = field(jf, "keypoints", where);
    if (kps.size() != kNumKeypoints) {
      throw ParseError(where + ": frame " + std::to_string(frame.frame_idx) +
                       ": expected 24 keypoints, got " +
                       std::to_string(kps.size()));
    }
    for (int i = 0; i < kNumKeypoints; ++i) {
      const json& t = kps[i];
      if (!t.is_array() || t.size() != 3) {
        throw ParseError(where + ": frame " + std::to_string(frame.frame_idx) +
                         " keypoint " + std::to_string(i) +
                         ": expected [x, y, v]");
      }
      const int v = t[2].get<int>();
      if (v != 0 && v != 1) {
        throw ParseError(where + ": frame " + std::to_string(frame.frame_idx) +
                         " keypoint " + std::to_string(i) +
                         ": visibility flag must be 0 or 1");
      }
      frame.keypoints[i] = {t[0].get<double>(), t[1].get<double>(), v == 1};
    }
    gt.frames.push_back(std::move(frame));
  }
  gt.validate();
  return gt;
}

void save_annotations(const AnnotatedSequence& gt,
                      const std::filesystem::path& path) {
  json j;
  j["video"] = gt.video_id;
  j["image_size"] = {gt.width, gt.height};
  j["keypoint_names"] = gt.keypoint_names.empty()
                            ? KeypointScheme::standard().names
                            : gt.keypoint_names;
  json frames = json::array();
  for (const auto& f : gt.frames) {
    json jf;
    jf["frame_idx"] = f.frame_idx;
    jf["category"] = std::string(to_string(f.category));
    jf["keypoints"] = keypoint_triples(f.keypoints, [](const auto& kp) {
      return json::array({kp.x, kp.y, kp.visible ? 1 : 0});
    });
    frames.push_back(std::move(jf));
  }
  j["frames"] = std::move(frames);
  write_json_file(j, path);
}

DetectionRecord load_detection_record(const std::filesystem::path& path,
                                      std::string* video_id, int* width,
                                      int* height) {
  const json j = read_json_file(path);
  const std::string where = "detections " + path.filename().string();

  DetectionRecord record;
  record.angle_deg = number_field(j, "angle_deg", where);
  if (record.angle_deg < 0.0 || record.angle_deg >= 360.0) {
    throw ParseError(where + ": angle_deg must lie in [0, 360)");
  }
  std::tie(record.canvas_width, record.canvas_height) =
      size_field(j, "canvas_size", where);
  if (video_id != nullptr) {
    *video_id = field(j, "video", where).get<std::string>();
  }
  const auto [w, h] = size_field(j, "image_size", where);
  if (width != nullptr) *width = w;
  if (height != nullptr) *height = h;

  for (const json& jf : field(j, "frames", where)) {
    DetectionFrame frame;
    frame.frame_idx = static_cast<int>(number_field(jf, "frame_idx", where));
    for (const json& jp : field(jf, "persons", where)) {
      DetectedPerson person;
      person.score = number_field(jp, "score", where);
      const json& kps = field(jp, "keypoints", where);
      if (kps.size() != kNumKeypoints) {
        throw ParseError(where + ": frame " + std::to_string(frame.frame_idx) +
                         ": expected 24 keypoints, got " +
                         std::to_string(kps.size()));
      }
      for (int i = 0; i < kNumKeypoints; ++i) {
        const json& t = kps[i];
        if (!t.is_array() || t.size() != 3) {
          throw ParseError(where + ": frame " +
                           std::to_string(frame.frame_idx) + " keypoint " +
                           std::to_string(i) + ": expected [x, y, c]");
        }
        person.keypoints[i] = {t[0].get<double>(), t[1].get<double>(),
                               t[2].get<double>()};
        const double c = person.keypoints[i].confidence;
        if (c < 0.0 || c > 1.0) {
          throw ParseError(where + ": frame " +
                           std::to_string(frame.frame_idx) + " keypoint " +
                           std::to_string(i) + ": confidence outside [0,1]");
        }
      }
      frame.persons.push_back(std::move(person));
    }
    record.frames.push_back(std::move(frame));
  }
  std::sort(record.frames.begin(), record.frames.end(),
            [](const DetectionFrame& a, const DetectionFrame& b) {
              return a.frame_idx < b.frame_idx;
            });
  for (std::size_t i = 1; i < record.frames.size(); ++i) {
    if (record.frames[i].frame_idx == record.frames[i - 1].frame_idx) {
      throw ParseError(where + ": duplicate frame_idx " +
                       std::to_string(record.frames[i].frame_idx));
    }
  }
  return record;
}

void save_detection_record(const DetectionRecord& record,
                           const std::string& video_id, int width, int height,
                           const std::filesystem::path& path) {
  json j;
  j["video"] = video_id;
  j["image_size"] = {width, height};
  j["angle_deg"] = record.angle_deg;
  j["canvas_size"] = {record.canvas_width, record.canvas_height};
  json frames = json::array();
  for (const auto& f : record.frames) {
    json jf;
    jf["frame_idx"] = f.frame_idx;
    json persons = json::array();
    for (const auto& p : f.persons) {
      json jp;
      jp["score"] = p.score;
      jp["keypoints"] = keypoint_triples(p.keypoints, [](const auto& kp) {
        return json::array({kp.x, kp.y, kp.confidence});
      });
      persons.push_back(std::move(jp));
    }
    jf["persons"] = std::move(persons);
    frames.push_back(std::move(jf));
  }
  j["frames"] = std::move(frames);
  write_json_file(j, path);
}

DetectionSet load_detections(const std::filesystem::path& dir,
                             WarningSink warnings) {
  if (!std::filesystem::is_directory(dir)) {
    throw ParseError("detections directory does not exist: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw ParseError("no detection .json files in " + dir.string());
  }

  DetectionSet set;
  bool first = true;
  for (const auto& file : files) {
    std::string video_id;
    int w = 0, h = 0;
    DetectionRecord record = load_detection_record(file, &video_id, &w, &h);
    if (first) {
      set.video_id = video_id;
      set.width = w;
      set.height = h;
      first = false;
    } else if (video_id != set.video_id || w != set.width ||
               h != set.height) {
      throw ValidationError(file.filename().string() +
                            ": video/image_size differs from the other "
                            "records in " + dir.string());
    }
    const auto [exp_w, exp_h] =
        expanded_canvas(set.width, set.height, record.angle_deg);
    if (std::abs(record.canvas_width - exp_w) > 1 ||
        std::abs(record.canvas_height - exp_h) > 1) {
      std::ostringstream msg;
      msg << file.filename().string() << ": canvas_size ["
          << record.canvas_width << ", " << record.canvas_height
          << "] deviates from the rotation formula [" << exp_w << ", "
          << exp_h << "]; keeping the file value";
      emit_warning(warnings, msg.str());
    }
    set.records.push_back(std::move(record));
  }

  std::sort(set.records.begin(), set.records.end(),
            [](const DetectionRecord& a, const DetectionRecord& b) {
              return a.angle_deg < b.angle_deg;
            });
  for (std::size_t i = 1; i < set.records.size(); ++i) {
    if (set.records[i].angle_deg == set.records[i - 1].angle_deg) {
      throw ValidationError("duplicate detection angle " +
                            std::to_string(set.records[i].angle_deg) +
                            " in " + dir.string());
    }
  }
  set.validate();
  return set;
}

void save_detections(const DetectionSet& set,
                     const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& record : set.records) {
    std::ostringstream name;
    name << "detections_" << std::setfill('0') << std::setw(3)
         << std::lround(record.angle_deg) << ".json";
    save_detection_record(record, set.video_id, set.width, set.height,
                          dir / name.str());
  }
}

void save_refined(const RefinedSequence& refined,
                  const std::filesystem::path& path) {
  json j;
  j["video"] = refined.video_id;
  j["image_size"] = {refined.width, refined.height};
  j["angle_deg"] = 0.0;
  j["canvas_size"] = {refined.width, refined.height};
  json config;
  config["k"] = refined.config.k;
  config["alpha"] = refined.config.filter.alpha;
  config["beta"] = refined.config.filter.beta;
  config["gamma"] = refined.config.filter.gamma;
  config["dt"] = refined.config.filter.dt;
  config["confidence_floor"] = refined.config.confidence_floor;
  config["angles_deg"] = refined.angles_deg;
  j["config"] = std::move(config);
  j["keypoints_without_detections"] = refined.keypoints_without_detections;

  json frames = json::array();
  for (std::size_t f = 0; f < refined.frame_indices.size(); ++f) {
    json jf;
    jf["frame_idx"] = refined.frame_indices[f];
    json person;
    json kps = json::array();
    json sources = json::array();
    double conf_sum = 0.0;
    for (int kp = 0; kp < kNumKeypoints; ++kp) {
      const RefinedKeypoint& r = refined.trajectories[kp][f];
      kps.push_back(json::array({r.pos.x(), r.pos.y(), r.confidence}));
      sources.push_back(r.source == RefinedSource::Fused ? "fused"
                                                         : "predicted");
      conf_sum += r.confidence;
    }
    person["score"] = conf_sum / kNumKeypoints;
    person["keypoints"] = std::move(kps);
    person["source"] = std::move(sources);
    jf["persons"] = json::array({std::move(person)});
    frames.push_back(std::move(jf));
  }
  j["frames"] = std::move(frames);
  write_json_file(j, path);
}

PredictionSequence load_predictions(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  const std::string where = "predictions " + path.filename().string();

  const double angle = number_field(j, "angle_deg", where);
  if (angle != 0.0) {
    throw ValidationError(where +
                          ": predictions must be in original-frame "
                          "coordinates (angle_deg 0), got angle " +
                          std::to_string(angle));
  }

  PredictionSequence seq;
  seq.video_id = field(j, "video", where).get<std::string>();
  std::tie(seq.width, seq.height) = size_field(j, "image_size", where);

  std::vector<int> absent_kps;
  if (const auto it = j.find("keypoints_without_detections"); it != j.end()) {
    absent_kps = it->get<std::vector<int>>();
  }
  const bool refined = j.contains("config");

  for (const json& jf : field(j, "frames", where)) {
    PredictedFrame frame;
    frame.frame_idx = static_cast<int>(number_field(jf, "frame_idx", where));
    const json& persons = field(jf, "persons", where);
    if (!persons.empty()) {
      // raw multi-person records reduce to the selected person
      std::vector<DetectedPerson> candidates;
      std::vector<const json*> sources;
      for (const json& jp : persons) {
        DetectedPerson p;
        p.score = number_field(jp, "score", where);
        const json& kps = field(jp, "keypoints", where);
        if (kps.size() != kNumKeypoints) {
          throw ParseError(where + ": frame " +
                           std::to_string(frame.frame_idx) +
                           ": expected 24 keypoints, got " +
                           std::to_string(kps.size()));
        }
        for (int i = 0; i < kNumKeypoints; ++i) {
          p.keypoints[i] = {kps[i][0].get<double>(), kps[i][1].get<double>(),
                            kps[i][2].get<double>()};
        }
        candidates.push_back(p);
        sources.push_back(jp.contains("source") ? &jp["source"] : nullptr);
      }
      const DetectedPerson* chosen = select_person(candidates);
      const std::size_t chosen_idx = chosen - candidates.data();
      const json* source = sources[chosen_idx];

      frame.has_person = true;
      frame.score = chosen->score;
      for (int i = 0; i < kNumKeypoints; ++i) {
        PredictedKeypoint& out = frame.keypoints[i];
        out.x = chosen->keypoints[i].x;
        out.y = chosen->keypoints[i].y;
        out.confidence = chosen->keypoints[i].confidence;
        if (refined || source != nullptr) {
          out.present = std::find(absent_kps.begin(), absent_kps.end(), i) ==
                        absent_kps.end();
        } else {
          out.present = out.confidence > 0.0;
        }
      }
    }
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

void save_manifest(int width, int height, const AngleSet& angles,
                   const std::filesystem::path& path) {
  if (width <= 0 || height <= 0) {
    throw ValidationError("manifest: image size must be positive");
  }
  json j;
  j["image_size"] = {width, height};
  json rotations = json::array();
  for (double a : angles.angles()) {
    const auto [w, h] = expanded_canvas(width, height, a);
    json r;
    r["angle_deg"] = a;
    r["canvas_size"] = {w, h};
    rotations.push_back(std::move(r));
  }
  j["rotations"] = std::move(rotations);
  write_json_file(j, path);
}

namespace {

json config_to_json(const MetricConfig& c) {
  json j;
  j["pck_fraction"] = c.pck_fraction;
  j["keypoint_subset"] = c.keypoint_subset;
  j["torso_endpoints"] = {c.torso_endpoints[0], c.torso_endpoints[1]};
  j["ap_thresholds"] = c.ap_thresholds;
  j["oks_kappa"] = c.oks_kappa;
  return j;
}

MetricConfig config_from_json(const json& j, const std::string& where) {
  MetricConfig c;
  c.pck_fraction = number_field(j, "pck_fraction", where);
  c.keypoint_subset = field(j, "keypoint_subset", where).get<std::vector<int>>();
  const json& te = field(j, "torso_endpoints", where);
  c.torso_endpoints = {te[0].get<int>(), te[1].get<int>()};
  c.ap_thresholds = field(j, "ap_thresholds", where).get<std::vector<double>>();
  c.oks_kappa = field(j, "oks_kappa", where).get<std::vector<double>>();
  return c;
}

json optional_array(const std::array<std::optional<double>, 4>& vals) {
  json j;
  for (int i = 0; i < 4; ++i) {
    const auto key = std::string(category_column(i));
    if (vals[i]) {
      j[key] = *vals[i];
    } else {
      j[key] = nullptr;
    }
  }
  return j;
}

std::array<std::optional<double>, 4> optional_array_from(
    const json& j, const std::string& where) {
  std::array<std::optional<double>, 4> out{};
  for (int i = 0; i < 4; ++i) {
    const json& v = field(j, std::string(category_column(i)).c_str(), where);
    if (!v.is_null()) out[i] = v.get<double>();
  }
  return out;
}

}  // namespace

void save_report_json(const MetricReport& report,
                      const std::filesystem::path& path) {
  json j;
  j["config"] = config_to_json(report.config);
  j["pck"] = optional_array(report.pck);
  j["ap"] = optional_array(report.ap);
  json counts;
  for (int i = 0; i < 4; ++i) {
    json c;
    c["evaluated"] = report.counts[i].evaluated;
    c["correct"] = report.counts[i].correct;
    c["frames"] = report.counts[i].frames;
    c["unusable"] = report.counts[i].unusable;
    counts[std::string(category_column(i))] = std::move(c);
  }
  j["counts"] = std::move(counts);
  json per_kp = json::array();
  for (const auto& v : report.pck_per_keypoint) {
    if (v) {
      per_kp.push_back(*v);
    } else {
      per_kp.push_back(nullptr);
    }
  }
  j["pck_per_keypoint"] = std::move(per_kp);
  write_json_file(j, path);
}

MetricReport load_report_json(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  const std::string where = "report " + path.filename().string();
  MetricReport report;
  report.config = config_from_json(field(j, "config", where), where);
  report.pck = optional_array_from(field(j, "pck", where), where);
  report.ap = optional_array_from(field(j, "ap", where), where);
  const json& counts = field(j, "counts", where);
  for (int i = 0; i < 4; ++i) {
    const json& c =
        field(counts, std::string(category_column(i)).c_str(), where);
    report.counts[i].evaluated = c["evaluated"].get<long>();
    report.counts[i].correct = c["correct"].get<long>();
    report.counts[i].frames = c["frames"].get<long>();
    report.counts[i].unusable = c["unusable"].get<long>();
  }
  const json& per_kp = field(j, "pck_per_keypoint", where);
  for (int kp = 0; kp < kNumKeypoints && kp < static_cast<int>(per_kp.size());
       ++kp) {
    if (!per_kp[kp].is_null()) {
      report.pck_per_keypoint[kp] = per_kp[kp].get<double>();
    }
  }
  return report;
}

namespace {

std::string cell(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os << std::setprecision(17) << *v;
  return os.str();
}

}  // namespace

void save_report_csv(const MetricReport& report,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw ParseError("cannot write file: " + path.string());
  }
  out << "metric,all,reg,oob,fall\n";
  out << "pck@" << report.config.pck_fraction;
  for (int i = 0; i < 4; ++i) out << ',' << cell(report.pck[i]);
  out << "\nap";
  for (int i = 0; i < 4; ++i) out << ',' << cell(report.ap[i]);
  out << '\n';
}

void save_grid_csv(const SearchResult& result,
                   const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw ParseError("cannot write file: " + path.string());
  }
  out << "k,alpha,beta,gamma,score\n";
  out << std::setprecision(17);
  for (const auto& p : result.table) {
    out << p.k << ',' << p.alpha << ',' << p.beta << ',' << p.gamma << ','
        << p.score << '\n';
  }
}

void save_best_params_json(const SearchResult& result,
                           const std::filesystem::path& path) {
  json j;
  j["k"] = result.best.k;
  j["alpha"] = result.best.alpha;
  j["beta"] = result.best.beta;
  j["gamma"] = result.best.gamma;
  j["score"] = result.best.score;
  write_json_file(j, path);
}

std::string format_delta_table(const ReportDelta& delta) {
  std::ostringstream os;
  os << std::setw(18) << std::left << "metric";
  for (int i = 0; i < 4; ++i) {
    os << std::setw(10) << std::right << category_column(i);
  }
  os << '\n';
  auto row = [&](const char* name,
                 const std::array<std::optional<double>, 4>& vals) {
    os << std::setw(18) << std::left << name;
    for (int i = 0; i < 4; ++i) {
      std::ostringstream v;
      if (vals[i]) v << std::fixed << std::setprecision(4) << *vals[i];
      os << std::setw(10) << std::right << (vals[i] ? v.str() : "-");
    }
    os << '\n';
  };
  row("pck before", delta.pck_before);
  row("pck after", delta.pck_after);
  row("pck delta", delta.pck_delta);
  row("ap before", delta.ap_before);
  row("ap after", delta.ap_after);
  row("ap delta", delta.ap_delta);
  return os.str();
}

}  // namespace rotpose
