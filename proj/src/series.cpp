#include "gdn/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "gdn/errors.hpp"

namespace gdn {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e;
}

bool parse_ll(const std::string& s, long long& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e;
}

bool is_missing_cell(const std::string& s) {
  if (s.empty()) return true;
  std::string lower;
  for (char c : s) lower.push_back(static_cast<char>(std::tolower(c)));
  return lower == "nan" || lower == "na";
}

std::ifstream open_input(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open file: " + path);
  return f;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw NumericalError("double formatting failed");
  return std::string(buf, ptr);
}

void MultivariateSeries::validate() const {
  const auto T = values.rows();
  const auto n = values.cols();
  if (static_cast<Eigen::Index>(tick_index.size()) != T)
    throw std::invalid_argument("tick_index length does not match row count");
  if (static_cast<Eigen::Index>(sensor_ids.size()) != n)
    throw std::invalid_argument("sensor_ids length does not match column count");
  std::set<std::string> ids(sensor_ids.begin(), sensor_ids.end());
  if (static_cast<Eigen::Index>(ids.size()) != n)
    throw std::invalid_argument("duplicate sensor id");
  for (std::size_t t = 1; t < tick_index.size(); ++t) {
    if (tick_index[t] <= tick_index[t - 1])
      throw std::invalid_argument("tick_index not strictly increasing at row " +
                                  std::to_string(t));
  }
  if (!values.allFinite())
    throw std::invalid_argument("series contains non-finite values");
  if (network_labels &&
      static_cast<Eigen::Index>(network_labels->size()) != T)
    throw std::invalid_argument("network label length does not match rows");
  if (sensor_labels &&
      (sensor_labels->rows() != T || sensor_labels->cols() != n))
    throw std::invalid_argument("sensor label shape does not match series");
  if (network_labels && sensor_labels) {
    for (Eigen::Index t = 0; t < T; ++t) {
      bool any = false;
      for (Eigen::Index i = 0; i < n; ++i) any |= (*sensor_labels)(t, i) != 0;
      if (any != ((*network_labels)[static_cast<std::size_t>(t)] != 0))
        throw std::invalid_argument(
            "network label inconsistent with sensor labels at row " +
            std::to_string(t));
    }
  }
}

MultivariateSeries load_series(const std::string& path,
                               const LoadOptions& opts) {
  std::ifstream f = open_input(path);
  std::string line;
  if (!std::getline(f, line)) throw IoError("empty file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_csv_line(line);
  if (header.size() < 2)
    throw IoError(path + ": header must name a tick column and sensors");

  MultivariateSeries s;
  s.sensor_ids.assign(header.begin() + 1, header.end());
  const auto n = static_cast<Eigen::Index>(s.sensor_ids.size());

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (static_cast<Eigen::Index>(cells.size()) != n + 1)
      throw IoError(path + ": row " + std::to_string(line_no) + " has " +
                    std::to_string(cells.size()) + " cells, expected " +
                    std::to_string(n + 1));
    long long tick;
    if (!parse_ll(cells[0], tick))
      throw IoError(path + ": row " + std::to_string(line_no) +
                    ": bad tick value '" + cells[0] + "'");
    std::vector<double> row(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::string& cell = cells[static_cast<std::size_t>(i) + 1];
      double v;
      const bool missing = is_missing_cell(cell);
      if (!missing && parse_double(cell, v) && std::isfinite(v)) {
        row[static_cast<std::size_t>(i)] = v;
      } else if (missing && opts.forward_fill && !rows.empty()) {
        row[static_cast<std::size_t>(i)] =
            rows.back()[static_cast<std::size_t>(i)];
      } else {
        throw IoError(path + ": row " + std::to_string(line_no) +
                      ", column '" + s.sensor_ids[static_cast<std::size_t>(i)] +
                      "': invalid cell '" + cell + "'");
      }
    }
    s.tick_index.push_back(tick);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(path + ": no data rows");

  s.values.resize(static_cast<Eigen::Index>(rows.size()), n);
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (Eigen::Index i = 0; i < n; ++i)
      s.values(static_cast<Eigen::Index>(t), i) =
          rows[t][static_cast<std::size_t>(i)];

  s.validate();
  return s;
}

void write_series(const MultivariateSeries& series, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write file: " + path);
  f << "tick";
  for (const auto& id : series.sensor_ids) f << ',' << id;
  f << '\n';
  for (Eigen::Index t = 0; t < series.ticks(); ++t) {
    f << series.tick_index[static_cast<std::size_t>(t)];
    for (Eigen::Index i = 0; i < series.sensors(); ++i)
      f << ',' << format_double(series.values(t, i));
    f << '\n';
  }
  if (!f) throw IoError("write failed: " + path);
}

namespace {

// Shared label-CSV reader; expects ticks to match the series exactly.
std::vector<std::vector<std::uint8_t>> load_label_rows(
    const std::string& path, const std::vector<long long>& expected_ticks,
    std::size_t expected_cols, const std::vector<std::string>* expected_ids) {
  std::ifstream f = open_input(path);
  std::string line;
  if (!std::getline(f, line)) throw IoError("empty file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_csv_line(line);
  if (header.size() != expected_cols + 1)
    throw IoError(path + ": expected " + std::to_string(expected_cols + 1) +
                  " header cells, got " + std::to_string(header.size()));
  if (expected_ids) {
    for (std::size_t i = 0; i < expected_ids->size(); ++i)
      if (header[i + 1] != (*expected_ids)[i])
        throw IoError(path + ": sensor id mismatch in header: '" +
                      header[i + 1] + "' vs '" + (*expected_ids)[i] + "'");
  }

  std::vector<std::vector<std::uint8_t>> rows;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != expected_cols + 1)
      throw IoError(path + ": row " + std::to_string(line_no) +
                    " has wrong cell count");
    long long tick;
    if (!parse_ll(cells[0], tick) ||
        rows.size() >= expected_ticks.size() ||
        tick != expected_ticks[rows.size()])
      throw IoError(path + ": row " + std::to_string(line_no) +
                    ": tick does not match series");
    std::vector<std::uint8_t> row(expected_cols);
    for (std::size_t i = 0; i < expected_cols; ++i) {
      if (cells[i + 1] == "0")
        row[i] = 0;
      else if (cells[i + 1] == "1")
        row[i] = 1;
      else
        throw IoError(path + ": row " + std::to_string(line_no) +
                      ": label must be 0 or 1, got '" + cells[i + 1] + "'");
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() != expected_ticks.size())
    throw IoError(path + ": label row count does not match series");
  return rows;
}

}  // namespace

LabelVector load_network_labels(const std::string& path,
                                const std::vector<long long>& expected_ticks) {
  auto rows = load_label_rows(path, expected_ticks, 1, nullptr);
  LabelVector out(rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t) out[t] = rows[t][0];
  return out;
}

LabelMatrix load_sensor_labels(const std::string& path,
                               const std::vector<long long>& expected_ticks,
                               const std::vector<std::string>& sensor_ids) {
  auto rows = load_label_rows(path, expected_ticks, sensor_ids.size(),
                              &sensor_ids);
  LabelMatrix out(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(sensor_ids.size()));
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t i = 0; i < sensor_ids.size(); ++i)
      out(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) =
          rows[t][i];
  return out;
}

void write_network_labels(const MultivariateSeries& series,
                          const std::string& path) {
  if (!series.network_labels)
    throw std::invalid_argument("series has no network labels");
  std::ofstream f(path);
  if (!f) throw IoError("cannot write file: " + path);
  f << "tick,label\n";
  for (Eigen::Index t = 0; t < series.ticks(); ++t)
    f << series.tick_index[static_cast<std::size_t>(t)] << ','
      << int((*series.network_labels)[static_cast<std::size_t>(t)]) << '\n';
  if (!f) throw IoError("write failed: " + path);
}

void write_sensor_labels(const MultivariateSeries& series,
                         const std::string& path) {
  if (!series.sensor_labels)
    throw std::invalid_argument("series has no sensor labels");
  std::ofstream f(path);
  if (!f) throw IoError("cannot write file: " + path);
  f << "tick";
  for (const auto& id : series.sensor_ids) f << ',' << id;
  f << '\n';
  for (Eigen::Index t = 0; t < series.ticks(); ++t) {
    f << series.tick_index[static_cast<std::size_t>(t)];
    for (Eigen::Index i = 0; i < series.sensors(); ++i)
      f << ',' << int((*series.sensor_labels)(t, i));
    f << '\n';
  }
  if (!f) throw IoError("write failed: " + path);
}

MultivariateSeries slice_rows(const MultivariateSeries& series,
                              Eigen::Index begin, Eigen::Index end) {
  if (begin < 0 || end < begin || end > series.ticks())
    throw std::invalid_argument("slice range out of bounds");
  MultivariateSeries out;
  out.sensor_ids = series.sensor_ids;
  const auto len = end - begin;
  out.values = series.values.middleRows(begin, len);
  out.tick_index.assign(series.tick_index.begin() + begin,
                        series.tick_index.begin() + end);
  if (series.network_labels)
    out.network_labels = LabelVector(
        series.network_labels->begin() + begin,
        series.network_labels->begin() + end);
  if (series.sensor_labels)
    out.sensor_labels = series.sensor_labels->middleRows(begin, len);
  return out;
}

SplitResult chronological_split(const MultivariateSeries& series,
                                double train_frac, double val_frac) {
  if (!(train_frac > 0.0 && train_frac < 1.0))
    throw std::invalid_argument("train_frac must lie in (0,1)");
  if (!(val_frac >= 0.0 && val_frac < 1.0))
    throw std::invalid_argument("val_frac must lie in [0,1)");
  if (!(train_frac + val_frac < 1.0))
    throw std::invalid_argument("train_frac + val_frac must be < 1");
  const auto T = series.ticks();
  const auto n_train = static_cast<Eigen::Index>(
      std::floor(train_frac * static_cast<double>(T)));
  const auto n_val = static_cast<Eigen::Index>(
      std::floor(val_frac * static_cast<double>(T)));
  SplitResult r;
  r.train = slice_rows(series, 0, n_train);
  r.val = slice_rows(series, n_train, n_train + n_val);
  r.test = slice_rows(series, n_train + n_val, T);
  return r;
}

std::pair<MultivariateSeries, MultivariateSeries> split_tail_validation(
    const MultivariateSeries& series, double val_frac) {
  if (!(val_frac >= 0.0 && val_frac < 1.0))
    throw std::invalid_argument("val_frac must lie in [0,1)");
  const auto T = series.ticks();
  const auto n_val = static_cast<Eigen::Index>(
      std::floor(val_frac * static_cast<double>(T)));
  return {slice_rows(series, 0, T - n_val), slice_rows(series, T - n_val, T)};
}

ScalingStats fit_scaling(const MultivariateSeries& train) {
  if (train.ticks() == 0) throw std::invalid_argument("empty training series");
  ScalingStats s;
  s.min = train.values.colwise().minCoeff();
  s.max = train.values.colwise().maxCoeff();
  return s;
}

MultivariateSeries apply_scaling(const MultivariateSeries& series,
                                 const ScalingStats& stats) {
  if (stats.min.size() != series.sensors())
    throw std::invalid_argument("scaling stats do not match sensor count");
  MultivariateSeries out = series;
  for (Eigen::Index i = 0; i < series.sensors(); ++i) {
    const double range = stats.max(i) - stats.min(i);
    if (range > 0.0)
      out.values.col(i) = (series.values.col(i).array() - stats.min(i)) / range;
    else
      out.values.col(i).setZero();  // degenerate sensor maps to constant 0
  }
  return out;
}

MultivariateSeries invert_scaling(const MultivariateSeries& series,
                                  const ScalingStats& stats) {
  if (stats.min.size() != series.sensors())
    throw std::invalid_argument("scaling stats do not match sensor count");
  MultivariateSeries out = series;
  for (Eigen::Index i = 0; i < series.sensors(); ++i) {
    const double range = stats.max(i) - stats.min(i);
    if (range > 0.0)
      out.values.col(i) = series.values.col(i).array() * range + stats.min(i);
    else
      out.values.col(i).setConstant(stats.min(i));
  }
  return out;
}

std::vector<WindowSample> window_dataset(const MultivariateSeries& series,
                                         int w) {
  if (w < 1) throw std::invalid_argument("window length must be >= 1");
  const auto T = series.ticks();
  if (T <= w)
    throw std::invalid_argument("series too short for window length " +
                                std::to_string(w));
  const auto n = series.sensors();
  std::vector<WindowSample> out;
  out.reserve(static_cast<std::size_t>(T - w));
  for (Eigen::Index t = w; t < T; ++t) {
    WindowSample s;
    s.input.resize(n, w);
    for (int j = 0; j < w; ++j) s.input.col(j) = series.values.row(t - 1 - j);
    s.target = series.values.row(t);
    s.target_tick = series.tick_index[static_cast<std::size_t>(t)];
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace gdn
