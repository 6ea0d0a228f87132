#pragma once

#include "causalcast/panel.hpp"
#include "causalcast/selectors.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace causalcast::synthlab {

enum class Noise { Gaussian, Uniform, Laplace };

/// From `start_row` on (post burn-in), the variable's noise becomes scale * e + mean_shift.
/// Variable 0 is the target; i >= 1 is feature Xi.
struct EnvironmentShift {
  int variable = 1;
  double mean_shift = 0.0;
  double scale = 1.0;
  Eigen::Index start_row = 0;
};

struct SvarSpec {
  int d = 10;  // features; the joint system has d + 1 variables
  int p = 1;
  Eigen::Index n = 500;
  double edge_density = 0.2;
  double coef_low = 0.3;
  double coef_high = 0.8;  // |coefficient| ~ U[low, high], random sign
  Noise noise = Noise::Gaussian;
  bool instantaneous = false;
  std::vector<EnvironmentShift> shifts;
  std::uint64_t seed = 0;
  int target_parents = -1;  // >= 0: exactly this many lag-1 feature parents of the target
  int burn_in = 200;
  double max_spectral_radius = 0.95;
};

struct SyntheticPanel {
  AlignedPanel panel;             // target "Y", features "X1".."Xd", dates from 2000-01
  selectors::DynamicGraph truth;  // joint graph, variable 0 = Y
};

/// Throws GenerationFailed if the rescaled system stays non-stationary.
SyntheticPanel generate_svar(const SvarSpec& spec);

/// Simulates x_t = (sum_tau x_{t-tau} W_tau + e_t)(I - S)^{-1} after `burn_in` discarded steps.
AlignedPanel simulate(const selectors::DynamicGraph& graph, Eigen::Index n, Noise noise,
                      const std::vector<EnvironmentShift>& shifts, std::uint64_t seed, int burn_in = 200);

/// Spectral radius of the reduced-form companion matrix.
double companion_radius(const selectors::DynamicGraph& graph);

struct RecoveryScore {
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 1.0;
};

/// Features with any true edge (contemporaneous or lagged) into `target`.
std::vector<std::string> true_parents(const selectors::DynamicGraph& truth, const std::string& target);

/// Precision is 1 for an empty selection; recall is 1 for an empty truth set.
RecoveryScore score_sets(const std::vector<std::string>& selected, const std::vector<std::string>& truth);
RecoveryScore score_recovery(const selectors::FeatureSet& selected, const selectors::DynamicGraph& truth,
                             const std::string& target);
/// Edge-level score over nonzero off-diagonal S entries and all nonzero W entries.
RecoveryScore score_edges(const selectors::DynamicGraph& fitted, const selectors::DynamicGraph& truth);

SvarSpec spec_from_json(const nlohmann::json& j);

}  // namespace causalcast::synthlab
