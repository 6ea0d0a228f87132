#pragma once

#include <Eigen/Dense>

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace causalcast {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Calendar month. Ordered by (year, month).
struct MonthStamp {
  int year = 2000;
  int month = 1;

  MonthStamp() = default;
  MonthStamp(int y, int m);

  /// Months since year 0; successor/difference arithmetic goes through this.
  int index() const noexcept { return year * 12 + (month - 1); }
  static MonthStamp from_index(int idx);

  MonthStamp plus(int months) const { return from_index(index() + months); }
  MonthStamp successor() const { return plus(1); }

  /// "YYYY-MM"
  std::string str() const;
  /// Accepts "YYYY-MM" or "YYYY-MM-DD".
  static MonthStamp parse(std::string_view text);

  friend auto operator<=>(const MonthStamp&, const MonthStamp&) = default;
};

/// Monthly series that may carry NaN for missing observations.
struct DatedSeries {
  std::vector<MonthStamp> dates;
  std::vector<double> values;
};

/// Raw (pre-alignment) panel; NaN marks a missing cell.
struct DatedPanel {
  std::vector<MonthStamp> dates;
  Matrix values;  // rows = dates, cols = series
  std::vector<std::string> names;
  std::vector<int> groups;
};

/// Target returns plus feature columns on a gap-free monthly index. Immutable.
class AlignedPanel {
 public:
  AlignedPanel(std::vector<MonthStamp> dates, Vector target, Matrix features,
               std::vector<std::string> feature_names, std::vector<int> feature_groups = {},
               bool percent_scaled = true, std::string target_name = "target");

  const std::vector<MonthStamp>& dates() const noexcept { return dates_; }
  const Vector& target() const noexcept { return target_; }
  const Matrix& features() const noexcept { return features_; }
  const std::vector<std::string>& feature_names() const noexcept { return names_; }
  const std::vector<int>& feature_groups() const noexcept { return groups_; }
  const std::string& target_name() const noexcept { return target_name_; }
  bool percent_scaled() const noexcept { return percent_scaled_; }

  Eigen::Index rows() const noexcept { return target_.size(); }
  Eigen::Index num_features() const noexcept { return features_.cols(); }

  /// Column index of a feature, or nullopt.
  std::optional<Eigen::Index> feature_index(std::string_view name) const;

  /// First `count` rows (the expanding-window training slice).
  AlignedPanel head(Eigen::Index count) const;
  /// Rows [begin, end).
  AlignedPanel slice(Eigen::Index begin, Eigen::Index end) const;
  /// Keeps only the listed feature columns, in the given order.
  AlignedPanel select_features(const std::vector<Eigen::Index>& columns) const;

  /// [target | features], the joint system used by graph learners.
  Matrix joint() const;

 private:
  std::vector<MonthStamp> dates_;
  Vector target_;
  Matrix features_;
  std::vector<std::string> names_;
  std::vector<int> groups_;
  bool percent_scaled_;
  std::string target_name_;
};

struct DesignColumn {
  std::string source;  // feature name, or the panel's target name for column 0
  int lag = 1;
  bool is_target = false;
};

/// Lag-augmented regression design: column 0 is the target at lag 1, then
/// each feature at lags 1..p (feature-major).
struct DesignMatrix {
  std::vector<MonthStamp> dates;
  Vector y;
  Matrix X;
  std::vector<DesignColumn> columns;
  std::vector<std::string> feature_names;
  int p = 1;

  Eigen::Index rows() const noexcept { return y.size(); }
  /// Columns of X holding feature `feature` (lags 1..p).
  std::vector<Eigen::Index> feature_columns(Eigen::Index feature) const;
  /// Target lag column plus all lags of the listed features.
  Matrix gather(const std::vector<Eigen::Index>& features, bool include_target_lag) const;
};

/// Re-stamps every feature row forward by `shift_months`, inner-joins with the
/// target, and drops rows with any missing value. If dropped rows leave gaps,
/// the longest contiguous run (latest on ties) is kept.
AlignedPanel align_and_shift(const DatedSeries& target, const DatedPanel& features, int shift_months,
                             std::string target_name = "target");

/// Row for date t carries y_t and [y_{t-1}, x_{1,t-1..t-p}, ..., x_{d,t-1..t-p}].
DesignMatrix build_design(const AlignedPanel& panel, int p);

/// Regressor row used to predict the row at `row` (uses only rows < `row`).
/// `row` may equal panel.rows() to forecast one step past the sample.
Vector design_row(const AlignedPanel& panel, Eigen::Index row, int p,
                  const std::vector<Eigen::Index>& features, bool include_target_lag);

}  // namespace causalcast
