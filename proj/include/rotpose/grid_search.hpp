#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rotpose/metrics.hpp"
#include "rotpose/refine.hpp"
#include "rotpose/types.hpp"

namespace rotpose {

enum class Objective { PCK, AP };

struct GridSpec {
  std::vector<int> k_values;
  std::vector<double> alpha_values;
  std::vector<double> beta_values;
  std::vector<double> gamma_values;
  Objective objective = Objective::PCK;
  std::optional<FrameCategory> category_filter;

  static GridSpec standard();  // k 1..36, gains 0.0:0.1:1.0
  void validate() const;
  std::size_t size() const;
};

struct GridPointScore {
  int k = 0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double score = 0.0;
};

struct SearchResult {
  GridPointScore best;
  std::vector<GridPointScore> table;  // k-major enumeration order
};

struct SearchDataset {
  const DetectionSet* detections = nullptr;
  const AnnotatedSequence* ground_truth = nullptr;
};

/// Refines every video with the given parameters and returns the objective
/// metric pooled over all videos. Deterministic given its inputs.
double objective_eval(int k, const FilterParams& params,
                      std::span<const SearchDataset> datasets,
                      const MetricConfig& metric_config, Objective objective,
                      std::optional<FrameCategory> category_filter = {});

/// Exhaustive search over k × alpha × beta × gamma, parallel across grid
/// points. Score ties resolve to smaller (k, gamma, beta, alpha).
SearchResult grid_search(std::span<const SearchDataset> datasets,
                         const GridSpec& grid,
                         const MetricConfig& metric_config, int jobs = 1);

}  // namespace rotpose
