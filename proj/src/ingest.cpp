#include "causalcast/ingest.hpp"

#include "causalcast/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace causalcast::ingest {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool blank(std::string_view line) {
  for (char c : line)
    if (c != ',' && c != ' ' && c != '\t' && c != '\r') return false;
  return true;
}

double parse_number(std::string_view cell, std::size_t line_no) {
  cell = trim(cell);
  if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan") return kNaN;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size())
    throw Error(ErrorKind::MalformedCsv,
                "line " + std::to_string(line_no) + ": not a number '" + std::string(cell) + "'");
  return v;
}

int parse_int(std::string_view s, std::string_view context) {
  s = trim(s);
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw Error(ErrorKind::MalformedCsv, std::string(context) + ": bad integer '" + std::string(s) + "'");
  return v;
}

// M/D/YYYY (FRED-MD) or ISO YYYY-MM[-DD].
MonthStamp parse_date(std::string_view s, std::size_t line_no) {
  s = trim(s);
  if (s.find('/') != std::string_view::npos) {
    auto a = s.find('/');
    auto b = s.find('/', a + 1);
    if (b == std::string_view::npos)
      throw Error(ErrorKind::MalformedCsv, "line " + std::to_string(line_no) + ": bad date '" + std::string(s) + "'");
    const std::string ctx = "line " + std::to_string(line_no);
    return MonthStamp(parse_int(s.substr(b + 1), ctx), parse_int(s.substr(0, a), ctx));
  }
  try {
    return MonthStamp::parse(s);
  } catch (const Error&) {
    throw Error(ErrorKind::MalformedCsv, "line " + std::to_string(line_no) + ": bad date '" + std::string(s) + "'");
  }
}

std::vector<double> diff(const std::vector<double>& x) {
  std::vector<double> out;
  for (std::size_t i = 1; i < x.size(); ++i) out.push_back(x[i] - x[i - 1]);
  return out;
}

}  // namespace

TransformCode::TransformCode(int code) : code_(code) {
  if (code < 1 || code > 7) throw Error(ErrorKind::BadTransformCode, "transform code " + std::to_string(code));
}

int TransformCode::order() const noexcept {
  switch (code_) {
    case 2:
    case 5: return 1;
    case 3:
    case 6:
    case 7: return 2;
    default: return 0;
  }
}

std::string_view to_string(Regime r) noexcept { return r == Regime::Crisis ? "crisis" : "normal"; }

RegimeCalendar::RegimeCalendar(std::vector<CrisisRange> ranges) : ranges_(std::move(ranges)) {
  for (const auto& r : ranges_)
    if (r.end < r.start) throw Error(ErrorKind::BadRange, "range start after end: " + r.start.str() + ".." + r.end.str());
  std::sort(ranges_.begin(), ranges_.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
  for (std::size_t i = 1; i < ranges_.size(); ++i)
    if (!(ranges_[i - 1].end < ranges_[i].start))
      throw Error(ErrorKind::OverlappingRanges, ranges_[i - 1].start.str() + ".." + ranges_[i - 1].end.str() +
                                                    " overlaps " + ranges_[i].start.str());
}

Regime RegimeCalendar::classify(MonthStamp m) const noexcept {
  auto it = std::upper_bound(ranges_.begin(), ranges_.end(), m,
                             [](const MonthStamp& v, const CrisisRange& r) { return v < r.start; });
  if (it == ranges_.begin()) return Regime::Normal;
  --it;
  return m <= it->end ? Regime::Crisis : Regime::Normal;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (nl < text.size() || !line.empty()) lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t pos = 0;
  while (true) {
    auto c = line.find(',', pos);
    auto cell = trim(line.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos));
    if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') cell = cell.substr(1, cell.size() - 2);
    cells.emplace_back(cell);
    if (c == std::string_view::npos) break;
    pos = c + 1;
  }
  return cells;
}

double parse_cell(std::string_view cell, std::size_t line_no) { return parse_number(cell, line_no); }

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::map<std::string, int> parse_groups(std::string_view csv_text) {
  std::map<std::string, int> out;
  auto lines = split_lines(csv_text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    auto cells = split_csv_line(lines[i]);
    if (cells.size() != 2) throw Error(ErrorKind::MalformedCsv, "groups line " + std::to_string(i + 1));
    if (i == 0 && cells[0] == "series") continue;
    int g = parse_int(cells[1], "groups line " + std::to_string(i + 1));
    if (g < 1 || g > 8) throw Error(ErrorKind::MalformedCsv, "group must be in 1..8, got " + cells[1]);
    out[cells[0]] = g;
  }
  return out;
}

FredMd parse_fredmd(std::string_view csv_text, const std::map<std::string, int>& groups) {
  auto lines = split_lines(csv_text);
  while (!lines.empty() && blank(lines.back())) lines.pop_back();
  if (lines.size() < 2) throw Error(ErrorKind::MalformedCsv, "FRED-MD file needs a header and a Transform: row");
  auto header = split_csv_line(lines[0]);
  auto tcodes = split_csv_line(lines[1]);
  const std::size_t width = header.size();
  if (width < 2) throw Error(ErrorKind::MalformedCsv, "no series columns");
  if (tcodes.size() != width) throw Error(ErrorKind::MalformedCsv, "line 2: ragged Transform: row");
  std::string label = tcodes[0];
  std::transform(label.begin(), label.end(), label.begin(), [](unsigned char c) { return std::tolower(c); });
  if (label.rfind("transform", 0) != 0) throw Error(ErrorKind::MalformedCsv, "line 2 must be the Transform: row");

  FredMd out;
  std::vector<std::size_t> keep;
  for (std::size_t c = 1; c < width; ++c) {
    double code = parse_number(tcodes[c], 2);
    if (std::isnan(code) || code != std::floor(code))
      throw Error(ErrorKind::BadTransformCode, "column " + header[c] + ": '" + tcodes[c] + "'");
    TransformCode tc(static_cast<int>(code));
    auto g = groups.find(header[c]);
    int group = g == groups.end() ? 0 : g->second;
    if (group == 6) {
      out.excluded.push_back(header[c]);
      continue;
    }
    keep.push_back(c);
    out.codes.push_back(tc);
    out.raw.names.push_back(header[c]);
    out.raw.groups.push_back(group);
  }

  std::vector<std::vector<double>> rows;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    auto cells = split_csv_line(lines[i]);
    if (cells.size() != width)
      throw Error(ErrorKind::MalformedCsv, "line " + std::to_string(i + 1) + ": expected " + std::to_string(width) +
                                               " cells, got " + std::to_string(cells.size()));
    out.raw.dates.push_back(parse_date(cells[0], i + 1));
    std::vector<double> row;
    for (auto c : keep) row.push_back(parse_number(cells[c], i + 1));
    rows.push_back(std::move(row));
  }
  out.raw.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < keep.size(); ++c)
      out.raw.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return out;
}

std::vector<double> apply_tcode(const std::vector<double>& series, TransformCode code) {
  std::vector<double> x = series;
  if (code.needs_positive()) {
    for (double v : x)
      if (v <= 0.0) throw Error(ErrorKind::DomainError, "transform code " + std::to_string(code.value()) +
                                                            " needs positive values, got " + format_double(v));
  }
  switch (code.value()) {
    case 1: return x;
    case 2: return diff(x);
    case 3: return diff(diff(x));
    case 4:
      for (auto& v : x) v = std::log(v);
      return x;
    case 5:
      for (auto& v : x) v = std::log(v);
      return diff(x);
    case 6:
      for (auto& v : x) v = std::log(v);
      return diff(diff(x));
    case 7: {
      std::vector<double> pct;
      for (std::size_t i = 1; i < x.size(); ++i) pct.push_back(x[i] / x[i - 1] - 1.0);
      return diff(pct);
    }
  }
  return x;
}

DatedPanel transform_panel(const FredMd& fred) {
  int max_order = 0;
  for (const auto& c : fred.codes) max_order = std::max(max_order, c.order());
  const auto T = static_cast<Eigen::Index>(fred.raw.dates.size());
  DatedPanel out;
  out.names = fred.raw.names;
  out.groups = fred.raw.groups;
  if (T <= max_order) {
    out.values.resize(0, fred.raw.values.cols());
    return out;
  }
  out.dates.assign(fred.raw.dates.begin() + max_order, fred.raw.dates.end());
  out.values.resize(T - max_order, fred.raw.values.cols());
  for (Eigen::Index c = 0; c < fred.raw.values.cols(); ++c) {
    std::vector<double> col(fred.raw.values.col(c).data(), fred.raw.values.col(c).data() + T);
    auto t = apply_tcode(col, fred.codes[static_cast<std::size_t>(c)]);
    const auto skip = static_cast<Eigen::Index>(t.size()) - (T - max_order);
    for (Eigen::Index r = 0; r < T - max_order; ++r) out.values(r, c) = t[static_cast<std::size_t>(r + skip)];
  }
  return out;
}

DatedSeries parse_prices(std::string_view csv_text) {
  DatedSeries out;
  auto lines = split_lines(csv_text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    auto cells = split_csv_line(lines[i]);
    if (cells.size() != 2) throw Error(ErrorKind::MalformedCsv, "prices line " + std::to_string(i + 1));
    if (i == 0 && cells[0] == "date") continue;
    out.dates.push_back(parse_date(cells[0], i + 1));
    out.values.push_back(parse_number(cells[1], i + 1));
  }
  return out;
}

DatedSeries prices_to_returns(const DatedSeries& prices) {
  if (prices.dates.size() != prices.values.size()) throw Error(ErrorKind::ShapeError, "prices length mismatch");
  for (double v : prices.values)
    if (!(v > 0.0)) throw Error(ErrorKind::DomainError, "prices must be strictly positive, got " + format_double(v));
  for (std::size_t i = 1; i < prices.dates.size(); ++i)
    if (prices.dates[i].index() != prices.dates[i - 1].index() + 1)
      throw Error(ErrorKind::InvalidPanel, "prices must be consecutive months; gap before " + prices.dates[i].str());
  DatedSeries out;
  for (std::size_t i = 1; i < prices.values.size(); ++i) {
    out.dates.push_back(prices.dates[i]);
    out.values.push_back(100.0 * (prices.values[i] / prices.values[i - 1] - 1.0));
  }
  return out;
}

RegimeCalendar load_calendar(std::string_view text) {
  std::vector<CrisisRange> ranges;
  for (auto raw : split_lines(text)) {
    auto line = raw.substr(0, raw.find('#'));
    line = trim(line);
    if (line.empty()) continue;
    auto sep = line.find("..");
    if (sep == std::string_view::npos) throw Error(ErrorKind::BadRange, "expected YYYY-MM..YYYY-MM: " + std::string(line));
    ranges.push_back({MonthStamp::parse(trim(line.substr(0, sep))), MonthStamp::parse(trim(line.substr(sep + 2)))});
  }
  return RegimeCalendar(std::move(ranges));
}

IngestFiles export_ingest_csv(const AlignedPanel& panel, int shift_months) {
  IngestFiles out;
  std::ostringstream fred, prices, groups;
  fred << "sasdate";
  for (const auto& n : panel.feature_names()) fred << ',' << n;
  fred << "\nTransform:";
  for (Eigen::Index c = 0; c < panel.num_features(); ++c) fred << ",1";
  fred << '\n';
  for (Eigen::Index r = 0; r < panel.rows(); ++r) {
    auto d = panel.dates()[static_cast<std::size_t>(r)].plus(-shift_months);
    fred << d.month << "/1/" << d.year;
    for (Eigen::Index c = 0; c < panel.num_features(); ++c) fred << ',' << format_double(panel.features()(r, c));
    fred << '\n';
  }
  prices << "date,close\n";
  double level = 100.0;
  auto first = panel.dates().front().plus(-1);
  prices << first.str() << "-28," << format_double(level) << '\n';
  for (Eigen::Index r = 0; r < panel.rows(); ++r) {
    level *= 1.0 + panel.target()[r] / 100.0;
    prices << panel.dates()[static_cast<std::size_t>(r)].str() << "-28," << format_double(level) << '\n';
  }
  groups << "series,group\n";
  for (std::size_t c = 0; c < panel.feature_names().size(); ++c) {
    int g = panel.feature_groups()[c];
    groups << panel.feature_names()[c] << ',' << (g >= 1 && g <= 8 ? g : 1) << '\n';
  }
  out.fredmd_csv = fred.str();
  out.prices_csv = prices.str();
  out.groups_csv = groups.str();
  return out;
}

std::string write_panel_csv(const AlignedPanel& panel) {
  std::ostringstream os;
  os << "date," << panel.target_name();
  for (const auto& n : panel.feature_names()) os << ',' << n;
  os << "\ngroup,0";
  for (int g : panel.feature_groups()) os << ',' << g;
  os << '\n';
  for (Eigen::Index r = 0; r < panel.rows(); ++r) {
    os << panel.dates()[static_cast<std::size_t>(r)].str() << ',' << format_double(panel.target()[r]);
    for (Eigen::Index c = 0; c < panel.num_features(); ++c) os << ',' << format_double(panel.features()(r, c));
    os << '\n';
  }
  return os.str();
}

AlignedPanel read_panel_csv(std::string_view csv_text) {
  auto lines = split_lines(csv_text);
  while (!lines.empty() && blank(lines.back())) lines.pop_back();
  if (lines.size() < 2) throw Error(ErrorKind::MalformedCsv, "panel CSV needs header and group rows");
  auto header = split_csv_line(lines[0]);
  auto group_row = split_csv_line(lines[1]);
  if (header.size() < 2 || group_row.size() != header.size() || group_row[0] != "group")
    throw Error(ErrorKind::MalformedCsv, "panel CSV header/group rows malformed");
  const std::size_t d = header.size() - 2;
  std::vector<std::string> names(header.begin() + 2, header.end());
  std::vector<int> groups;
  for (std::size_t c = 2; c < header.size(); ++c) groups.push_back(parse_int(group_row[c], "panel group row"));
  std::vector<MonthStamp> dates;
  std::vector<double> y;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    auto cells = split_csv_line(lines[i]);
    if (cells.size() != header.size()) throw Error(ErrorKind::MalformedCsv, "panel line " + std::to_string(i + 1));
    dates.push_back(parse_date(cells[0], i + 1));
    y.push_back(parse_number(cells[1], i + 1));
    std::vector<double> row;
    for (std::size_t c = 2; c < cells.size(); ++c) row.push_back(parse_number(cells[c], i + 1));
    rows.push_back(std::move(row));
  }
  const auto T = static_cast<Eigen::Index>(rows.size());
  Matrix X(T, static_cast<Eigen::Index>(d));
  for (Eigen::Index r = 0; r < T; ++r)
    for (std::size_t c = 0; c < d; ++c) X(r, static_cast<Eigen::Index>(c)) = rows[static_cast<std::size_t>(r)][c];
  Vector target = Eigen::Map<Vector>(y.data(), T);
  return AlignedPanel(std::move(dates), std::move(target), std::move(X), std::move(names), std::move(groups), true,
                      header[1]);
}

}  // namespace causalcast::ingest
