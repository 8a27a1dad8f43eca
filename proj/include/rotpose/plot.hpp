#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rotpose/refine.hpp"
#include "rotpose/types.hpp"

namespace rotpose {

/// Data for one keypoint's coordinate-trace figure: x and y against frame
/// index, candidate cloud shaded by confidence, GT and refined curves.
struct TracePlotData {
  std::string title;
  std::vector<int> frame_indices;
  std::vector<CandidatePool> candidates;                // may be empty
  std::vector<std::optional<Vec2>> ground_truth;        // per frame
  std::vector<std::optional<Vec2>> refined;             // per frame
};

void write_trace_svg(const TracePlotData& data,
                     const std::filesystem::path& path);

}  // namespace rotpose
