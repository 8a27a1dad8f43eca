#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rotpose/grid_search.hpp"
#include "rotpose/metrics.hpp"
#include "rotpose/refine.hpp"
#include "rotpose/rotation.hpp"
#include "rotpose/types.hpp"

namespace rotpose {

/// Non-fatal load diagnostics; when null, messages go to stderr.
using WarningSink = std::vector<std::string>*;

AnnotatedSequence load_annotations(const std::filesystem::path& path);
void save_annotations(const AnnotatedSequence& gt,
                      const std::filesystem::path& path);

DetectionRecord load_detection_record(const std::filesystem::path& path,
                                      std::string* video_id = nullptr,
                                      int* width = nullptr,
                                      int* height = nullptr);
void save_detection_record(const DetectionRecord& record,
                           const std::string& video_id, int width, int height,
                           const std::filesystem::path& path);

/// Loads every *.json in the directory as one rotation record each; records
/// come back sorted by angle. Duplicate angles are an error; a canvas size
/// off the rotation formula by more than a pixel is only a warning (the file
/// value stays authoritative).
DetectionSet load_detections(const std::filesystem::path& dir,
                             WarningSink warnings = nullptr);
void save_detections(const DetectionSet& set,
                     const std::filesystem::path& dir);

void save_refined(const RefinedSequence& refined,
                  const std::filesystem::path& path);

/// Loads either a refined output or a raw angle-0 detection record as a
/// prediction sequence. Raw records must be at angle 0 (original-frame
/// coordinates); keypoints with confidence 0 are absent there, while refined
/// entries are present unless listed as detection-free in the header.
PredictionSequence load_predictions(const std::filesystem::path& path);

void save_manifest(int width, int height, const AngleSet& angles,
                   const std::filesystem::path& path);

void save_report_json(const MetricReport& report,
                      const std::filesystem::path& path);
MetricReport load_report_json(const std::filesystem::path& path);

/// CSV in table order: metric, all, reg, oob, fall. Absent cells stay empty.
void save_report_csv(const MetricReport& report,
                     const std::filesystem::path& path);

void save_grid_csv(const SearchResult& result,
                   const std::filesystem::path& path);
void save_best_params_json(const SearchResult& result,
                           const std::filesystem::path& path);

std::string format_delta_table(const ReportDelta& delta);

}  // namespace rotpose
