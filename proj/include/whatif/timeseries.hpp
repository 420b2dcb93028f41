// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "whatif/error.hpp"
#include "whatif/time.hpp"

namespace whatif {

/// Explicit marker for an absent observation.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) noexcept { return std::isnan(v); }

/// Shortest decimal text that parses back to the same double.
inline std::string format_number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::optional<double> parse_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

}  // namespace detail

/// Aligned weekly observations of named variables. Immutable after
/// construction; cells may be kMissing. `metadata` carries free-form numeric
/// annotations (the synthetic generators store ground truth there).
class TimeSeriesFrame {
 public:
  using Row = std::vector<double>;
  using Metadata = std::map<std::string, double>;

  TimeSeriesFrame() = default;

  TimeSeriesFrame(std::vector<Date> index, std::vector<std::string> variables, std::vector<Row> values,
                  bool check_weekly = true, Metadata metadata = {})
      : index_(std::move(index)),
        variables_(std::move(variables)),
        values_(std::move(values)),
        metadata_(std::move(metadata)) {
    if (values_.size() != index_.size())
      throw Error(Errc::ShapeError, "row count " + std::to_string(values_.size()) + " != index length " +
                                        std::to_string(index_.size()));
    std::unordered_set<std::string> seen;
    for (const auto& name : variables_) {
      if (name.empty()) throw Error(Errc::InvalidSpec, "empty variable name");
      if (!seen.insert(name).second) throw Error(Errc::InvalidSpec, "duplicate variable '" + name + "'");
    }
    for (std::size_t r = 0; r < values_.size(); ++r) {
      if (values_[r].size() != variables_.size())
        throw Error(Errc::ShapeError, "row " + std::to_string(r) + " has " + std::to_string(values_[r].size()) +
                                          " cells, expected " + std::to_string(variables_.size()));
    }
    for (std::size_t r = 1; r < index_.size(); ++r) {
      if (index_[r] <= index_[r - 1])
        throw Error(Errc::DuplicateIndex, "index not strictly increasing at " + format_date(index_[r]));
      if (check_weekly && index_[r] - index_[r - 1] != std::chrono::days{7})
        throw Error(Errc::NonUniformIndex, "gap before " + format_date(index_[r]) + " is not one week");
    }
  }

  std::size_t size() const noexcept { return index_.size(); }
  bool empty() const noexcept { return index_.empty(); }
  const std::vector<Date>& index() const noexcept { return index_; }
  const std::vector<std::string>& variables() const noexcept { return variables_; }
  const std::vector<Row>& rows() const noexcept { return values_; }
  const Metadata& metadata() const noexcept { return metadata_; }

  double at(std::size_t row, std::size_t col) const { return values_.at(row).at(col); }

  std::optional<std::size_t> column_index(std::string_view name) const {
    const auto it = std::find(variables_.begin(), variables_.end(), name);
    if (it == variables_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - variables_.begin());
  }

  bool has_variable(std::string_view name) const { return column_index(name).has_value(); }

  std::vector<double> column(std::string_view name) const {
    const auto col = column_index(name);
    if (!col) throw Error(Errc::MissingVariable, "no variable '" + std::string(name) + "'");
    std::vector<double> out;
    out.reserve(values_.size());
    for (const auto& row : values_) out.push_back(row[*col]);
    return out;
  }

  /// Rows [start, end).
  TimeSeriesFrame slice_rows(std::size_t start, std::size_t end) const {
    end = std::min(end, size());
    start = std::min(start, end);
    return TimeSeriesFrame({index_.begin() + start, index_.begin() + end}, variables_,
                           {values_.begin() + start, values_.begin() + end}, false, metadata_);
  }

  TimeSeriesFrame head(std::size_t n) const { return slice_rows(0, n); }
  TimeSeriesFrame tail(std::size_t n) const { return slice_rows(size() - std::min(n, size()), size()); }

  /// Frame restricted to the named columns, in the given order.
  TimeSeriesFrame select(const std::vector<std::string>& names) const {
    std::vector<std::size_t> cols;
    for (const auto& n : names) {
      const auto c = column_index(n);
      if (!c) throw Error(Errc::MissingVariable, "no variable '" + n + "'");
      cols.push_back(*c);
    }
    std::vector<Row> rows;
    rows.reserve(size());
    for (const auto& row : values_) {
      Row r;
      for (auto c : cols) r.push_back(row[c]);
      rows.push_back(std::move(r));
    }
    return TimeSeriesFrame(index_, names, std::move(rows), false, metadata_);
  }

  friend bool operator==(const TimeSeriesFrame& a, const TimeSeriesFrame& b) {
    if (a.index_ != b.index_ || a.variables_ != b.variables_ || a.values_.size() != b.values_.size()) return false;
    for (std::size_t r = 0; r < a.values_.size(); ++r)
      for (std::size_t c = 0; c < a.variables_.size(); ++c) {
        const double x = a.values_[r][c], y = b.values_[r][c];
        if (!(x == y || (is_missing(x) && is_missing(y)))) return false;
      }
    return true;
  }

 private:
  std::vector<Date> index_;
  std::vector<std::string> variables_;
  std::vector<Row> values_;
  Metadata metadata_;
};

/// Parses the `date,<var>,...` CSV layout. Rows are sorted by date.
inline TimeSeriesFrame load_frame(std::istream& in, bool check_weekly = true) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> variables;
  bool have_header = false;
  std::vector<std::pair<Date, TimeSeriesFrame::Row>> rows;

  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split(line);
    if (!have_header) {
      if (fields.front() != "date") throw Error(Errc::ParseError, "first header must be 'date'", line_no);
      for (std::size_t i = 1; i < fields.size(); ++i) variables.emplace_back(fields[i]);
      if (variables.empty()) throw Error(Errc::EmptyFrame, "no variable columns");
      have_header = true;
      continue;
    }
    if (fields.size() != variables.size() + 1)
      throw Error(Errc::ParseError, "row " + std::to_string(line_no) + ": expected " +
                                        std::to_string(variables.size() + 1) + " fields", line_no);
    const auto date = parse_date(fields[0]);
    if (!date)
      throw Error(Errc::ParseError, "row " + std::to_string(line_no) + ": bad date '" + std::string(fields[0]) + "'",
                  line_no);
    TimeSeriesFrame::Row row;
    row.reserve(variables.size());
    for (std::size_t i = 1; i < fields.size(); ++i) {
      if (fields[i].empty()) {
        row.push_back(kMissing);
        continue;
      }
      const auto v = parse_number(fields[i]);
      if (!v)
        throw Error(Errc::ParseError,
                    "row " + std::to_string(line_no) + ": bad number '" + std::string(fields[i]) + "'", line_no);
      row.push_back(*v);
    }
    rows.emplace_back(*date, std::move(row));
  }
  if (!have_header) throw Error(Errc::EmptyFrame, "no header");

  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].first == rows[i - 1].first)
      throw Error(Errc::DuplicateIndex, "duplicate date " + format_date(rows[i].first));

  std::vector<Date> index;
  std::vector<TimeSeriesFrame::Row> values;
  for (auto& [d, r] : rows) {
    index.push_back(d);
    values.push_back(std::move(r));
  }
  return TimeSeriesFrame(std::move(index), std::move(variables), std::move(values), check_weekly);
}

inline TimeSeriesFrame load_frame(std::string_view csv, bool check_weekly = true) {
  std::istringstream in{std::string(csv)};
  return load_frame(in, check_weekly);
}

inline std::string serialize_frame(const TimeSeriesFrame& frame) {
  std::string out = "date";
  for (const auto& v : frame.variables()) out += "," + v;
  out += "\n";
  for (std::size_t r = 0; r < frame.size(); ++r) {
    out += format_date(frame.index()[r]);
    for (double v : frame.rows()[r]) {
      out += ",";
      if (!is_missing(v)) out += format_number(v);
    }
    out += "\n";
  }
  return out;
}

inline void to_json(nlohmann::json& j, const TimeSeriesFrame& frame) {
  auto index = nlohmann::json::array();
  for (auto d : frame.index()) index.push_back(format_date(d));
  auto values = nlohmann::json::array();
  for (const auto& row : frame.rows()) {
    auto r = nlohmann::json::array();
    for (double v : row) r.push_back(is_missing(v) ? nlohmann::json(nullptr) : nlohmann::json(v));
    values.push_back(std::move(r));
  }
  j = {{"index", std::move(index)}, {"variables", frame.variables()}, {"values", std::move(values)}};
  if (!frame.metadata().empty()) j["metadata"] = frame.metadata();
}

inline TimeSeriesFrame frame_from_json(const nlohmann::json& j, bool check_weekly = true) {
  std::vector<Date> index;
  for (const auto& d : j.at("index")) {
    const auto date = parse_date(d.get<std::string>());
    if (!date) throw Error(Errc::ParseError, "bad date '" + d.get<std::string>() + "'");
    index.push_back(*date);
  }
  std::vector<TimeSeriesFrame::Row> values;
  for (const auto& row : j.at("values")) {
    TimeSeriesFrame::Row r;
    for (const auto& v : row) r.push_back(v.is_null() ? kMissing : v.get<double>());
    values.push_back(std::move(r));
  }
  TimeSeriesFrame::Metadata meta;
  if (j.contains("metadata")) meta = j.at("metadata").get<TimeSeriesFrame::Metadata>();
  return TimeSeriesFrame(std::move(index), j.at("variables").get<std::vector<std::string>>(), std::move(values),
                         check_weekly, std::move(meta));
}

/// Replaces each missing cell with the latest observed value at most
/// `window` steps back. Observed cells are never changed.
inline std::vector<double> forward_fill(std::span<const double> series, std::size_t window) {
  if (window == 0) throw Error(Errc::InvalidWindow, "forward-fill window must be >= 1");
  std::vector<double> out(series.begin(), series.end());
  std::optional<std::size_t> last_seen;
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (!is_missing(series[t])) {
      last_seen = t;
    } else if (last_seen && t - *last_seen <= window) {
      out[t] = series[*last_seen];
    }
  }
  return out;
}

struct BollingerBand {
  std::vector<double> middle;
  std::vector<double> upper;
  std::vector<double> lower;
  std::size_t window = 20;
  double k = 2.0;
};

/// Rolling mean +/- k population standard deviations. Entries before the
/// first full window are kMissing.
inline BollingerBand bollinger(std::span<const double> series, std::size_t window = 20, double k = 2.0) {
  if (window == 0) throw Error(Errc::InvalidWindow, "bollinger window must be >= 1");
  if (!(k > 0.0)) throw Error(Errc::InvalidSpec, "bollinger k must be positive");
  if (window > series.size())
    throw Error(Errc::WindowTooLarge,
                "window " + std::to_string(window) + " exceeds series length " + std::to_string(series.size()));
  BollingerBand band{std::vector<double>(series.size(), kMissing), std::vector<double>(series.size(), kMissing),
                     std::vector<double>(series.size(), kMissing), window, k};
  for (std::size_t t = window - 1; t < series.size(); ++t) {
    const auto w = series.subspan(t + 1 - window, window);
    if (std::any_of(w.begin(), w.end(), is_missing)) continue;
    double mean = 0.0;
    for (double v : w) mean += v;
    mean /= static_cast<double>(window);
    double ss = 0.0;
    for (double v : w) ss += (v - mean) * (v - mean);
    const double width = k * std::sqrt(ss / static_cast<double>(window));
    band.middle[t] = mean;
    band.upper[t] = mean + width;
    band.lower[t] = mean - width;
  }
  return band;
}

/// (min, max) over observed values, padded to (min-1, max+1) when flat so a
/// chart scale built from it is never degenerate.
inline std::pair<double, double> value_range(std::span<const double> series) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  bool any = false;
  for (double v : series) {
    if (is_missing(v)) continue;
    any = true;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!any) throw Error(Errc::EmptySeries, "no observed values");
  if (lo == hi) return {lo - 1.0, hi + 1.0};
  return {lo, hi};
}

struct SeriesSlice {
  std::string variable;
  std::size_t start = 0;
  std::size_t end = 0;
  std::vector<double> values;
};

inline SeriesSlice slice(const TimeSeriesFrame& frame, const std::string& variable, std::size_t start,
                         std::size_t end) {
  if (start > end || end > frame.size())
    throw Error(Errc::ShapeError, "slice [" + std::to_string(start) + "," + std::to_string(end) +
                                      ") outside frame of length " + std::to_string(frame.size()));
  const auto col = frame.column(variable);
  return {variable, start, end, {col.begin() + start, col.begin() + end}};
}

/// Default length of the near-term window shown next to the what-if panel.
inline constexpr std::size_t kNearTermWeeks = 4;

inline SeriesSlice near_term(const TimeSeriesFrame& frame, const std::string& variable,
                             std::size_t weeks = kNearTermWeeks) {
  const std::size_t n = std::min(weeks, frame.size());
  return slice(frame, variable, frame.size() - n, frame.size());
}

/// Last observed (non-missing) value of a column.
inline std::optional<double> last_observed(std::span<const double> series) {
  for (auto it = series.rbegin(); it != series.rend(); ++it)
    if (!is_missing(*it)) return *it;
  return std::nullopt;
}

}  // namespace whatif
