#pragma once

#include "causalcast/error.hpp"
#include "causalcast/numerics.hpp"
#include "causalcast/panel.hpp"

#include <chrono>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace causalcast::selectors {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Per-candidate evidence. Unused fields stay NaN.
struct Diagnostic {
  std::string name;
  double statistic = kNaN;
  double p_value = kNaN;
  double weight = kNaN;
};

/// Output of every selector. `selected` keeps candidate order and is a subset
/// of `candidates`; `diagnostics` has one entry per candidate.
struct FeatureSet {
  std::string selector_id;
  std::vector<std::string> candidates;
  std::vector<std::string> selected;
  std::vector<Diagnostic> diagnostics;
  bool empty_informative = false;
  std::vector<std::string> warnings;

  bool contains(const std::string& name) const;
  /// Column indices of the selected names within `names`.
  std::vector<Eigen::Index> indices_in(const std::vector<std::string>& names) const;
};

/// Cooperative time limit; long-running selectors poll it and throw Timeout.
class Deadline {
 public:
  Deadline() = default;
  static Deadline after(double seconds);
  bool expired() const;
  void check(const char* where) const;

 private:
  std::chrono::steady_clock::time_point at_ = std::chrono::steady_clock::time_point::max();
};

// ---------------------------------------------------------------------------
// Multivariate Granger

struct GrangerOptions {
  double alpha = 0.05;
};

/// For each feature, F-test of the full lag model against the model with all
/// p lags of that feature removed (q = p). Intercept in both models.
FeatureSet granger_select(const DesignMatrix& design, const GrangerOptions& options = {});

// ---------------------------------------------------------------------------
// VAR-LiNGAM

struct VarLingamOptions {
  int p = 1;
  int k_clusters = 0;  // 0 disables the clustering pre-filter
  double edge_threshold = 0.05;
  bool use_instantaneous = true;
  bool use_lagged = true;
  std::uint64_t seed = 0;
  int ica_max_iter = 500;
  double ica_tol = 1e-5;
};

struct LingamOrdering {
  Matrix instantaneous;    // B0(i, j): effect of j on i, zero diagonal
  std::vector<int> order;  // causal order, causes first
};

struct VarLingamResult {
  FeatureSet features;
  std::vector<std::string> variables;  // target first, then kept features
  std::vector<Eigen::Index> kept;      // panel feature columns after the pre-filter
  std::vector<int> causal_order;
  Matrix instantaneous;         // A0(i, j): j -> i
  std::vector<Matrix> lagged;   // A_tau(i, j): j_{t-tau} -> i_t
  std::vector<std::string> warnings;
};

/// K-means on standardized feature columns; per cluster keeps the feature with
/// the largest |correlation| with the target. Returns sorted panel columns.
std::vector<Eigen::Index> correlation_prefilter(const AlignedPanel& panel, int k_clusters, std::uint64_t seed);

/// Row-permutes and rescales an ICA unmixing matrix, then finds the causal
/// order whose permutation brings B0 = I - W~ closest to strictly lower
/// triangular (exhaustive up to 8 variables, greedy beyond).
LingamOrdering lingam_ordering(const Matrix& unmixing);

/// Minimum-cost assignment on a square cost matrix; returns column per row.
std::vector<int> hungarian(const Matrix& cost);

VarLingamResult varlingam_fit(const AlignedPanel& panel, const VarLingamOptions& options);
FeatureSet varlingam_select(const AlignedPanel& panel, const VarLingamOptions& options);

// ---------------------------------------------------------------------------
// Dynotears

/// S(i, j) is the contemporaneous edge i -> j; W[tau-1](i, j) is i_{t-tau} -> j_t.
struct DynamicGraph {
  Matrix S;
  std::vector<Matrix> W;
  double lambda_s = 0.0;
  double lambda_w = 0.0;
  std::vector<std::string> variables;
  double h = 0.0;
  std::vector<std::string> warnings;

  int p() const noexcept { return static_cast<int>(W.size()); }
  Eigen::Index d() const noexcept { return S.rows(); }
};

/// Carries the best (still cyclic) iterate.
class NotAcyclicError : public Error {
 public:
  NotAcyclicError(const std::string& message, DynamicGraph best);
  DynamicGraph graph;
};

struct DynotearsOptions {
  int p = 1;
  double lambda_w = 0.1;
  double lambda_s = 0.1;
  double h_tol = 1e-8;
  double w_threshold = 0.05;
  double rho_max = 1e16;
  int max_outer = 100;
  int max_inner = 1000;
  bool standardize = true;
  Deadline deadline;
};

/// Smooth form of the penalized reconstruction objective over split
/// parameters theta = [S+, S-, W+, W-] (all >= 0, column-major blocks):
///   1/(2n) ||X - X S - Xlag W||_F^2 + lambda_s sum(S+ + S-) + lambda_w sum(W+ + W-)
///   + rho/2 h(S)^2 + alpha h(S)
class DynotearsObjective {
 public:
  DynotearsObjective(Matrix X, Matrix Xlag, double lambda_s, double lambda_w);

  Eigen::Index d() const noexcept { return X_.cols(); }
  Eigen::Index lag_rows() const noexcept { return Xlag_.cols(); }
  Eigen::Index size() const noexcept { return 2 * d() * d() + 2 * lag_rows() * d(); }

  Matrix S(const Vector& theta) const;
  Matrix W(const Vector& theta) const;
  Vector pack(const Matrix& S, const Matrix& W) const;

  /// Objective value; writes the gradient w.r.t. theta when `grad` is set.
  double evaluate(const Vector& theta, double rho, double alpha, Vector* grad) const;

 private:
  Matrix X_;
  Matrix Xlag_;
  double lambda_s_;
  double lambda_w_;
};

/// Builds X (rows p..T-1) and Xlag = [X_{t-1} | ... | X_{t-p}] from a T x d matrix.
void lagged_system(const Matrix& data, int p, Matrix& X, Matrix& Xlag);

/// Fits on an arbitrary T x d system (columns named by `variables`).
DynamicGraph dynotears_fit_matrix(const Matrix& data, const std::vector<std::string>& variables,
                                  const DynotearsOptions& options);
/// Fits on [target | features]; variable 0 is the target.
DynamicGraph dynotears_fit(const AlignedPanel& panel, const DynotearsOptions& options);

/// Features with a surviving edge into `target_name` (any lag, or contemporaneous).
FeatureSet dynotears_select(const DynamicGraph& graph, const std::string& target_name);

// ---------------------------------------------------------------------------
// PCMCI

struct PcmciOptions {
  int p = 1;
  double alpha = 0.05;
  int max_cond_dim = 3;
  int max_parents_stage1 = 10;
  Deadline deadline;
};

struct LaggedLink {
  int variable = 0;  // 0 = target, i >= 1 = feature i-1
  int lag = 1;
  double statistic = 0.0;
  double p_value = 1.0;
  bool skipped = false;
};

struct PcmciResult {
  FeatureSet features;
  std::vector<LaggedLink> stage1_parents;  // of the target
  std::vector<LaggedLink> mci_links;       // tested links into the target
};

PcmciResult pcmci_fit(const AlignedPanel& panel, const PcmciOptions& options);
FeatureSet pcmci_select(const AlignedPanel& panel, const PcmciOptions& options);

// ---------------------------------------------------------------------------
// seqICP

struct Environment {
  std::string label;
  std::vector<Eigen::Index> rows;  // design rows
};

/// `count` contiguous blocks of (nearly) equal size.
std::vector<Environment> contiguous_environments(Eigen::Index rows, int count);

struct SeqIcpOptions {
  double alpha = 0.05;
  int max_subset_size = 3;
  bool include_target_lag = true;
  Deadline deadline;
};

struct InvarianceTest {
  double chow_p = 1.0;
  double bartlett_p = 1.0;
  double p_value = 1.0;  // Bonferroni-combined
};

/// Chow test for equal regression coefficients across environments plus
/// Bartlett's test for equal residual variance, Bonferroni-combined.
InvarianceTest invariance_test(const Matrix& X, const Vector& y, const std::vector<Environment>& environments);

struct SeqIcpResult {
  FeatureSet features;
  std::vector<std::vector<int>> accepted;  // feature subsets (candidate indices)
  std::size_t tested = 0;
};

SeqIcpResult seqicp_fit(const DesignMatrix& design, const std::vector<Environment>& environments,
                        const SeqIcpOptions& options);
FeatureSet seqicp_select(const DesignMatrix& design, const std::vector<Environment>& environments,
                         const SeqIcpOptions& options);

// ---------------------------------------------------------------------------
// Sequential feature selection

enum class SfsDirection { Forward, Backward };

struct SfsOptions {
  SfsDirection direction = SfsDirection::Forward;
  double tol = 1e-8;
  int max_features = 10;
  int folds = 5;
  std::uint64_t seed = 0;  // folds are contiguous blocks, so unused today
  bool include_target_lag = true;
  Deadline deadline;
};

struct SfsResult {
  FeatureSet features;
  std::vector<int> path;  // feature index added (forward) or removed (backward) at each step
  std::vector<double> path_mse;
  double baseline_mse = 0.0;
};

/// Pooled out-of-fold MSE of OLS (with intercept) over contiguous folds.
double cv_mse(const Matrix& X, const Vector& y, int folds);

SfsResult sfs_fit(const DesignMatrix& design, const SfsOptions& options);
FeatureSet sfs_select(const DesignMatrix& design, const SfsOptions& options);

}  // namespace causalcast::selectors
