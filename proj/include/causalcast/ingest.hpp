#pragma once

#include "causalcast/panel.hpp"

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace causalcast::ingest {

/// FRED-MD transformation code.
///   1 level, 2 diff, 3 second diff, 4 log, 5 log diff, 6 log second diff,
///   7 diff of percent change.
class TransformCode {
 public:
  explicit TransformCode(int code);
  int value() const noexcept { return code_; }
  /// Leading observations consumed.
  int order() const noexcept;
  bool needs_positive() const noexcept { return code_ >= 4; }

 private:
  int code_;
};

enum class Regime { Normal, Crisis };
std::string_view to_string(Regime r) noexcept;

struct CrisisRange {
  MonthStamp start;
  MonthStamp end;  // inclusive
};

/// Sorted, non-overlapping crisis ranges. Any month outside them is Normal.
class RegimeCalendar {
 public:
  RegimeCalendar() = default;
  explicit RegimeCalendar(std::vector<CrisisRange> ranges);

  Regime classify(MonthStamp m) const noexcept;
  const std::vector<CrisisRange>& ranges() const noexcept { return ranges_; }

 private:
  std::vector<CrisisRange> ranges_;
};

struct FredMd {
  DatedPanel raw;  // untransformed, NaN for empty cells
  std::vector<TransformCode> codes;
  std::vector<std::string> excluded;  // dropped as group 6 (stock market)
};

/// Group sidecar: `series,group` rows, group in 1..8.
std::map<std::string, int> parse_groups(std::string_view csv_text);

/// Parses a FRED-MD CSV. Series whose sidecar group is 6 are dropped; series
/// missing from `groups` get group 0.
FredMd parse_fredmd(std::string_view csv_text, const std::map<std::string, int>& groups = {});

/// Applies the code to a contiguous series; output drops the first order() values.
/// NaN propagates; a finite non-positive value under a log code throws DomainError.
std::vector<double> apply_tcode(const std::vector<double>& series, TransformCode code);

/// Applies each column's code; dates lose max order() leading months.
DatedPanel transform_panel(const FredMd& fred);

/// Parses a `date,close` CSV with ISO dates.
DatedSeries parse_prices(std::string_view csv_text);

/// Simple returns in percent: 100 * (P_t / P_{t-1} - 1); first month dropped.
DatedSeries prices_to_returns(const DatedSeries& prices);

/// One `YYYY-MM..YYYY-MM` per line, `#` comments, blank lines ignored.
RegimeCalendar load_calendar(std::string_view text);

/// Writes a panel back into the ingest CSV schemas (FRED-MD with all codes 1,
/// prices rebuilt from returns starting at 100, groups sidecar). Dates of the
/// FRED-MD file are shifted back by `shift_months` so re-ingesting with the
/// same shift reproduces the panel.
struct IngestFiles {
  std::string fredmd_csv;
  std::string prices_csv;
  std::string groups_csv;
};
IngestFiles export_ingest_csv(const AlignedPanel& panel, int shift_months = 0);

/// Reads a panel CSV written by write_panel_csv.
AlignedPanel read_panel_csv(std::string_view csv_text);
std::string write_panel_csv(const AlignedPanel& panel);

/// Splits one CSV line (no quoting support beyond stripping surrounding quotes).
std::vector<std::string> split_csv_line(std::string_view line);

/// Lines without trailing CR.
std::vector<std::string_view> split_lines(std::string_view text);

/// Parses one numeric cell; empty, NA and NaN map to NaN. `line_no` is for messages.
double parse_cell(std::string_view cell, std::size_t line_no);

/// Shortest round-trip decimal text for a double.
std::string format_double(double v);

}  // namespace causalcast::ingest
