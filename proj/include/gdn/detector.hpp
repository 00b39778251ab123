#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "gdn/series.hpp"

namespace gdn {

// Per-sensor median and IQR fitted on validation errors; applied unchanged
// to test errors. IQR is floored to keep degenerate sensors finite.
struct NormStats {
  Eigen::VectorXd median;
  Eigen::VectorXd iqr;  // already floored
  double iqr_floor = 1e-2;
};

struct DetectorConfig {
  double tau = 99.0;   // GDN+ percentile, in (0, 100]
  int sma_window = 1;  // trailing-mean length; 1 = no smoothing
  double iqr_floor = 1e-2;

  void validate() const;
};

// Linear-interpolation percentile (q in [0, 100]) between order statistics.
double percentile(std::vector<double> values, double q);

// Element-wise |actual - predicted|.
Eigen::MatrixXd compute_errors(const Eigen::MatrixXd& predictions,
                               const Eigen::MatrixXd& actuals);

NormStats fit_norm_stats(const Eigen::MatrixXd& validation_errors,
                         double iqr_floor = 1e-2);

// (err - median_i) / iqr_i per sensor column.
Eigen::MatrixXd robust_normalize(const Eigen::MatrixXd& raw_errors,
                                 const NormStats& stats);

// Trailing mean of length `window` per sensor column (window 1 = identity).
Eigen::MatrixXd smooth_trailing(const Eigen::MatrixXd& errors, int window);

struct GlobalFlags {
  LabelVector network;  // flag per test row
  double kappa = 0.0;   // max normalized validation error
};

// Original rule: flag row t when max_i of the (optionally smoothed)
// normalized test errors strictly exceeds the validation maximum.
GlobalFlags global_threshold_flags(const Eigen::MatrixXd& test_normalized,
                                   const Eigen::MatrixXd& val_normalized,
                                   int sma_window = 1);

struct SensorFlags {
  LabelMatrix per_sensor;  // rows = test rows
  LabelVector network;     // OR over sensors
  Eigen::VectorXd kappa;   // per-sensor thresholds
  double tau = 99.0;
};

// Sensor-specific rule: kappa_i is the tau-th percentile of validation
// normalized errors pooled over i's in-neighborhood {j : A(j,i) > 0}
// (the diagonal keeps i itself in the pool); flag (i,t) when the test
// error strictly exceeds kappa_i.
SensorFlags sensor_threshold_flags(const Eigen::MatrixXd& test_normalized,
                                   const Eigen::MatrixXd& val_normalized,
                                   const Eigen::MatrixXi& adjacency,
                                   double tau);

// Domain rule layered on the sensor flags: also flag (i,t) whenever the raw
// (unscaled) reading is negative.
SensorFlags positivity_filter_flags(const Eigen::MatrixXd& raw_test_values,
                                    const SensorFlags& flags);

struct MetricFlags {
  bool recall_undefined = false;
  bool precision_undefined = false;
  bool accuracy_undefined = false;
  bool specificity_undefined = false;
};

struct DetectionReport {
  bool evaluated = false;  // false when no truth labels were supplied
  long long tp = 0, fp = 0, tn = 0, fn = 0;
  double recall = 0.0, precision = 0.0, accuracy = 0.0, specificity = 0.0;
  MetricFlags undefined;  // zero-denominator ratios are reported as 0
  // Localization over network true positives (needs per-sensor truth):
  // fraction whose flagged sensors hit the true sensor / its neighborhood.
  std::optional<double> localization_correct;
  std::optional<double> localization_neighborhood;
  long long localization_considered = 0;
  double kappa = 0.0;
  Eigen::VectorXd kappa_i;  // empty unless the sensor rule was used
  std::optional<double> tau;
  std::string mode;
};

struct LocalizationInputs {
  const LabelMatrix* sensor_flags = nullptr;
  const LabelMatrix* sensor_truth = nullptr;
  const Eigen::MatrixXi* adjacency = nullptr;
};

DetectionReport evaluate(const LabelVector& flags, const LabelVector& truth,
                         const LocalizationInputs& loc = {});

struct SplitConfig {
  double train_frac = 0.75;
  double val_frac = 0.1;  // tail fraction of the training block
};

struct RandomWalkResult {
  DetectionReport report;
  LabelVector flags;
  std::vector<long long> ticks;  // test rows with a predecessor
  Eigen::MatrixXd test_normalized;
  std::vector<std::string> sensor_ids;
};

// Naive one-step random-walk forecast (yhat_t = y_{t-1}) pushed through the
// same robust-normalization and global-threshold pipeline. Uses the series'
// own labels (if present) for evaluation on the test block.
RandomWalkResult random_walk_baseline_detail(const MultivariateSeries& series,
                                             const SplitConfig& split,
                                             const DetectorConfig& config);
DetectionReport random_walk_baseline(const MultivariateSeries& series,
                                     const SplitConfig& split,
                                     const DetectorConfig& config);

void write_flags_csv(const std::vector<long long>& ticks,
                     const LabelVector& network,
                     const std::vector<std::string>& sensor_ids,
                     const LabelMatrix* per_sensor, const std::string& path);

void write_error_trace_csv(const std::vector<long long>& ticks,
                           const Eigen::MatrixXd& normalized_errors,
                           const std::vector<std::string>& sensor_ids,
                           const std::string& path);

void write_report_json(const DetectionReport& report, const std::string& path);

}  // namespace gdn
