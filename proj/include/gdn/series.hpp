#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gdn {

using LabelMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;
using LabelVector = std::vector<std::uint8_t>;

// n-sensor, T-tick real-valued series. values(t, i) is sensor i at row t;
// tick_index holds the (strictly increasing) tick keys for the rows.
struct MultivariateSeries {
  Eigen::MatrixXd values;               // T x n
  std::vector<long long> tick_index;    // length T
  std::vector<std::string> sensor_ids;  // length n

  // Optional ground truth. network_labels[t] = 1 iff any sensor is anomalous
  // at row t; sensor_labels(t, i) marks the individual cells.
  std::optional<LabelVector> network_labels;
  std::optional<LabelMatrix> sensor_labels;

  Eigen::Index ticks() const { return values.rows(); }
  Eigen::Index sensors() const { return values.cols(); }

  // Checks shape agreement, unique ids, strictly increasing ticks, finite
  // values, and label consistency. Throws std::invalid_argument.
  void validate() const;
};

// Per-sensor min/max fitted on training data; values scale to [0,1] on train.
struct ScalingStats {
  Eigen::VectorXd min;
  Eigen::VectorXd max;

  bool empty() const { return min.size() == 0; }
};

// One supervised sample: input column j is the series at tick t-j-1,
// target is the series at tick t.
struct WindowSample {
  Eigen::MatrixXd input;   // n x w
  Eigen::VectorXd target;  // n
  long long target_tick = 0;
};

struct LoadOptions {
  // Missing cells are rejected by default; with forward_fill they are
  // replaced by the previous tick's value (never valid on the first row).
  bool forward_fill = false;
};

MultivariateSeries load_series(const std::string& path,
                               const LoadOptions& opts = {});
void write_series(const MultivariateSeries& series, const std::string& path);

// Network labels: header "tick,label". Per-sensor labels: header
// "tick,<sensor ids...>". Values must be 0/1.
LabelVector load_network_labels(const std::string& path,
                                const std::vector<long long>& expected_ticks);
LabelMatrix load_sensor_labels(const std::string& path,
                               const std::vector<long long>& expected_ticks,
                               const std::vector<std::string>& sensor_ids);
void write_network_labels(const MultivariateSeries& series,
                          const std::string& path);
void write_sensor_labels(const MultivariateSeries& series,
                         const std::string& path);

struct SplitResult {
  MultivariateSeries train;
  MultivariateSeries val;
  MultivariateSeries test;
};

// Contiguous, ordered, non-overlapping partitions: |train| = floor(f_tr * T),
// |val| = floor(f_val * T), test takes the remainder. Requires
// f_tr in (0,1), f_val in [0,1), f_tr + f_val < 1.
SplitResult chronological_split(const MultivariateSeries& series,
                                double train_frac, double val_frac);

// Tail split used to carve a validation block off a training series:
// the last floor(val_frac * T) rows become val.
std::pair<MultivariateSeries, MultivariateSeries> split_tail_validation(
    const MultivariateSeries& series, double val_frac);

ScalingStats fit_scaling(const MultivariateSeries& train);
MultivariateSeries apply_scaling(const MultivariateSeries& series,
                                 const ScalingStats& stats);
MultivariateSeries invert_scaling(const MultivariateSeries& series,
                                  const ScalingStats& stats);

// Exactly T - w samples with targets at rows w..T-1. Requires T > w.
std::vector<WindowSample> window_dataset(const MultivariateSeries& series,
                                         int w);

// Row range [begin, end) as a new series (labels carried along).
MultivariateSeries slice_rows(const MultivariateSeries& series,
                              Eigen::Index begin, Eigen::Index end);

// Formats a double with the shortest representation that round-trips.
std::string format_double(double v);

}  // namespace gdn
