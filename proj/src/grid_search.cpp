#include "rotpose/grid_search.hpp"

#include <algorithm>
#include <tuple>

#include "rotpose/parallel.hpp"

namespace rotpose {

GridSpec GridSpec::standard() {
  GridSpec g;
  for (int k = 1; k <= 36; ++k) g.k_values.push_back(k);
  for (int i = 0; i <= 10; ++i) {
    g.alpha_values.push_back(0.1 * i);
    g.beta_values.push_back(0.1 * i);
    g.gamma_values.push_back(0.1 * i);
  }
  return g;
}

void GridSpec::validate() const {
  if (k_values.empty() || alpha_values.empty() || beta_values.empty() ||
      gamma_values.empty()) {
    throw ValidationError("grid: every parameter list must be non-empty");
  }
  for (int k : k_values) {
    if (k < 1) throw ValidationError("grid: k values must be >= 1");
  }
  auto check_unit = [](const std::vector<double>& vs, const char* name) {
    for (double v : vs) {
      if (v < 0.0 || v > 1.0) {
        throw ValidationError(std::string("grid: ") + name +
                              " values must lie in [0,1]");
      }
    }
  };
  check_unit(alpha_values, "alpha");
  check_unit(beta_values, "beta");
  check_unit(gamma_values, "gamma");
}

std::size_t GridSpec::size() const {
  return k_values.size() * alpha_values.size() * beta_values.size() *
         gamma_values.size();
}

double objective_eval(int k, const FilterParams& params,
                      std::span<const SearchDataset> datasets,
                      const MetricConfig& metric_config, Objective objective,
                      std::optional<FrameCategory> category_filter) {
  if (datasets.empty()) {
    throw ValidationError("objective: empty dataset list");
  }
  FusionConfig config;
  config.k = k;
  config.filter = params;

  std::vector<PredictionSequence> predictions;
  predictions.reserve(datasets.size());
  for (const auto& d : datasets) {
    predictions.push_back(
        to_predictions(refine_sequence(*d.detections, config)));
  }
  std::vector<EvalPair> pairs;
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    pairs.push_back({&predictions[i], datasets[i].ground_truth});
  }
  const MetricReport report = evaluate_metrics(pairs, metric_config);

  int slot = 0;
  if (category_filter) {
    switch (*category_filter) {
      case FrameCategory::Regular: slot = 1; break;
      case FrameCategory::OutOfBalance: slot = 2; break;
      case FrameCategory::Fall: slot = 3; break;
    }
  }
  const auto& values = (objective == Objective::PCK) ? report.pck : report.ap;
  if (!values[slot]) {
    throw ValidationError("objective: no evaluable frames in category \"" +
                          std::string(category_column(slot)) + "\"");
  }
  return *values[slot];
}

SearchResult grid_search(std::span<const SearchDataset> datasets,
                         const GridSpec& grid,
                         const MetricConfig& metric_config, int jobs) {
  grid.validate();
  if (datasets.empty()) {
    throw ValidationError("grid search: empty dataset list");
  }

  std::vector<GridPointScore> table(grid.size());
  std::size_t row = 0;
  for (int k : grid.k_values) {
    for (double alpha : grid.alpha_values) {
      for (double beta : grid.beta_values) {
        for (double gamma : grid.gamma_values) {
          table[row++] = {k, alpha, beta, gamma, 0.0};
        }
      }
    }
  }

  parallel_for(table.size(), jobs, [&](std::size_t i) {
    GridPointScore& p = table[i];
    p.score = objective_eval(p.k, {p.alpha, p.beta, p.gamma, 1.0}, datasets,
                             metric_config, grid.objective,
                             grid.category_filter);
  });

  // max score; ties resolve to smaller (k, gamma, beta, alpha)
  const auto better = [](const GridPointScore& a, const GridPointScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::tie(a.k, a.gamma, a.beta, a.alpha) <
           std::tie(b.k, b.gamma, b.beta, b.alpha);
  };
  SearchResult result;
  result.table = std::move(table);
  result.best = *std::min_element(
      result.table.begin(), result.table.end(),
      [&](const GridPointScore& a, const GridPointScore& b) {
        return better(a, b);
      });
  return result;
}

}  // namespace rotpose
