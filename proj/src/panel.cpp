#include "causalcast/panel.hpp"

#include "causalcast/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <tuple>

namespace causalcast {

MonthStamp::MonthStamp(int y, int m) : year(y), month(m) {
  if (m < 1 || m > 12) throw Error(ErrorKind::BadRange, "month out of range: " + std::to_string(m));
}

MonthStamp MonthStamp::from_index(int idx) {
  int y = idx >= 0 ? idx / 12 : -((-idx + 11) / 12);
  return MonthStamp(y, idx - y * 12 + 1);
}

std::string MonthStamp::str() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
  return buf;
}

MonthStamp MonthStamp::parse(std::string_view text) {
  auto bad = [&] { return Error(ErrorKind::BadRange, "cannot parse month '" + std::string(text) + "'"); };
  if (text.size() < 7 || text[4] != '-') throw bad();
  int y = 0, m = 0;
  auto r1 = std::from_chars(text.data(), text.data() + 4, y);
  auto r2 = std::from_chars(text.data() + 5, text.data() + 7, m);
  if (r1.ec != std::errc{} || r2.ec != std::errc{} || r1.ptr != text.data() + 4 || r2.ptr != text.data() + 7)
    throw bad();
  if (text.size() > 7 && text[7] != '-') throw bad();
  return MonthStamp(y, m);
}

AlignedPanel::AlignedPanel(std::vector<MonthStamp> dates, Vector target, Matrix features,
                           std::vector<std::string> feature_names, std::vector<int> feature_groups,
                           bool percent_scaled, std::string target_name)
    : dates_(std::move(dates)),
      target_(std::move(target)),
      features_(std::move(features)),
      names_(std::move(feature_names)),
      groups_(std::move(feature_groups)),
      percent_scaled_(percent_scaled),
      target_name_(std::move(target_name)) {
  const auto T = static_cast<Eigen::Index>(dates_.size());
  if (target_.size() != T || features_.rows() != T)
    throw Error(ErrorKind::InvalidPanel, "dates, target and feature rows differ in length");
  if (static_cast<Eigen::Index>(names_.size()) != features_.cols())
    throw Error(ErrorKind::InvalidPanel, "feature name count does not match columns");
  if (groups_.empty()) groups_.assign(names_.size(), 0);
  if (groups_.size() != names_.size()) throw Error(ErrorKind::InvalidPanel, "feature group count mismatch");
  for (std::size_t i = 1; i < dates_.size(); ++i) {
    if (dates_[i].index() != dates_[i - 1].index() + 1)
      throw Error(ErrorKind::InvalidPanel, "dates not consecutive at " + dates_[i].str());
  }
  if (!target_.allFinite() || !features_.allFinite())
    throw Error(ErrorKind::InvalidPanel, "NaN or infinite value in panel");
  std::set<std::string> seen(names_.begin(), names_.end());
  if (seen.size() != names_.size() || seen.count(target_name_))
    throw Error(ErrorKind::InvalidPanel, "duplicate feature names");
}

std::optional<Eigen::Index> AlignedPanel::feature_index(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<Eigen::Index>(it - names_.begin());
}

AlignedPanel AlignedPanel::head(Eigen::Index count) const { return slice(0, count); }

AlignedPanel AlignedPanel::slice(Eigen::Index begin, Eigen::Index end) const {
  if (begin < 0 || end > rows() || begin > end) throw Error(ErrorKind::ShapeError, "slice out of range");
  std::vector<MonthStamp> d(dates_.begin() + begin, dates_.begin() + end);
  return AlignedPanel(std::move(d), target_.segment(begin, end - begin),
                      features_.middleRows(begin, end - begin), names_, groups_, percent_scaled_, target_name_);
}

AlignedPanel AlignedPanel::select_features(const std::vector<Eigen::Index>& columns) const {
  Matrix f(rows(), static_cast<Eigen::Index>(columns.size()));
  std::vector<std::string> n;
  std::vector<int> g;
  for (std::size_t k = 0; k < columns.size(); ++k) {
    f.col(static_cast<Eigen::Index>(k)) = features_.col(columns[k]);
    n.push_back(names_[columns[k]]);
    g.push_back(groups_[columns[k]]);
  }
  return AlignedPanel(dates_, target_, std::move(f), std::move(n), std::move(g), percent_scaled_, target_name_);
}

Matrix AlignedPanel::joint() const {
  Matrix out(rows(), 1 + num_features());
  out.col(0) = target_;
  out.rightCols(num_features()) = features_;
  return out;
}

std::vector<Eigen::Index> DesignMatrix::feature_columns(Eigen::Index feature) const {
  std::vector<Eigen::Index> cols;
  for (int l = 0; l < p; ++l) cols.push_back(1 + feature * p + l);
  return cols;
}

Matrix DesignMatrix::gather(const std::vector<Eigen::Index>& features, bool include_target_lag) const {
  const Eigen::Index width = (include_target_lag ? 1 : 0) + static_cast<Eigen::Index>(features.size()) * p;
  Matrix out(rows(), width);
  Eigen::Index c = 0;
  if (include_target_lag) out.col(c++) = X.col(0);
  for (auto f : features)
    for (auto col : feature_columns(f)) out.col(c++) = X.col(col);
  return out;
}

namespace {

void check_unique(const std::vector<MonthStamp>& dates, const char* what) {
  std::set<int> seen;
  for (const auto& d : dates)
    if (!seen.insert(d.index()).second)
      throw Error(ErrorKind::DuplicateDate, std::string(what) + " has duplicate month " + d.str());
}

}  // namespace

AlignedPanel align_and_shift(const DatedSeries& target, const DatedPanel& features, int shift_months,
                             std::string target_name) {
  if (shift_months < 0) throw Error(ErrorKind::PreconditionViolated, "shift_months must be >= 0");
  if (target.dates.size() != target.values.size())
    throw Error(ErrorKind::ShapeError, "target dates/values length mismatch");
  if (static_cast<Eigen::Index>(features.dates.size()) != features.values.rows())
    throw Error(ErrorKind::ShapeError, "feature dates/rows length mismatch");
  check_unique(target.dates, "target");
  check_unique(features.dates, "features");

  std::map<int, Eigen::Index> feature_row;
  for (std::size_t i = 0; i < features.dates.size(); ++i)
    feature_row[features.dates[i].index() + shift_months] = static_cast<Eigen::Index>(i);

  // (month index, target row, feature row), sorted by month
  std::vector<std::tuple<int, std::size_t, Eigen::Index>> joined;
  bool any_overlap = false;
  for (std::size_t i = 0; i < target.dates.size(); ++i) {
    auto it = feature_row.find(target.dates[i].index());
    if (it == feature_row.end()) continue;
    any_overlap = true;
    if (!std::isfinite(target.values[i]) || !features.values.row(it->second).allFinite()) continue;
    joined.emplace_back(target.dates[i].index(), i, it->second);
  }
  if (!any_overlap) throw Error(ErrorKind::NoOverlap, "target and shifted features share no month");
  if (joined.empty()) throw Error(ErrorKind::NoOverlap, "every overlapping month has a missing value");
  std::sort(joined.begin(), joined.end());

  std::size_t best_begin = 0, best_len = 0, run_begin = 0;
  for (std::size_t i = 1; i <= joined.size(); ++i) {
    if (i == joined.size() || std::get<0>(joined[i]) != std::get<0>(joined[i - 1]) + 1) {
      if (i - run_begin >= best_len) {
        best_len = i - run_begin;
        best_begin = run_begin;
      }
      run_begin = i;
    }
  }

  const auto T = static_cast<Eigen::Index>(best_len);
  std::vector<MonthStamp> dates;
  Vector y(T);
  Matrix X(T, features.values.cols());
  for (Eigen::Index r = 0; r < T; ++r) {
    const auto& [month, ti, fi] = joined[best_begin + static_cast<std::size_t>(r)];
    dates.push_back(MonthStamp::from_index(month));
    y[r] = target.values[ti];
    X.row(r) = features.values.row(fi);
  }
  return AlignedPanel(std::move(dates), std::move(y), std::move(X), features.names, features.groups, true,
                      std::move(target_name));
}

DesignMatrix build_design(const AlignedPanel& panel, int p) {
  if (p < 1) throw Error(ErrorKind::PreconditionViolated, "lag order p must be >= 1");
  const Eigen::Index T = panel.rows();
  if (T <= p + 1)
    throw Error(ErrorKind::InsufficientHistory,
                "panel has " + std::to_string(T) + " rows, need more than " + std::to_string(p + 1));
  const Eigen::Index d = panel.num_features();
  DesignMatrix out;
  out.p = p;
  out.feature_names = panel.feature_names();
  out.columns.push_back({panel.target_name(), 1, true});
  for (Eigen::Index i = 0; i < d; ++i)
    for (int l = 1; l <= p; ++l) out.columns.push_back({panel.feature_names()[i], l, false});

  const Eigen::Index n = T - p;
  out.y = panel.target().tail(n);
  out.X.resize(n, 1 + d * p);
  out.dates.assign(panel.dates().begin() + p, panel.dates().end());
  std::vector<Eigen::Index> all(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < d; ++i) all[static_cast<std::size_t>(i)] = i;
  for (Eigen::Index r = 0; r < n; ++r) out.X.row(r) = design_row(panel, r + p, p, all, true).transpose();
  return out;
}

Vector design_row(const AlignedPanel& panel, Eigen::Index row, int p, const std::vector<Eigen::Index>& features,
                  bool include_target_lag) {
  if (row < p || row > panel.rows())
    throw Error(ErrorKind::InsufficientHistory, "not enough history for design row " + std::to_string(row));
  Vector out((include_target_lag ? 1 : 0) + static_cast<Eigen::Index>(features.size()) * p);
  Eigen::Index c = 0;
  if (include_target_lag) out[c++] = panel.target()[row - 1];
  for (auto f : features)
    for (int l = 1; l <= p; ++l) out[c++] = panel.features()(row - l, f);
  return out;
}

}  // namespace causalcast
