#include "gdn/detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "gdn/errors.hpp"
#include "json.hpp"

namespace gdn {

void DetectorConfig::validate() const {
  if (!(tau > 0.0 && tau <= 100.0))
    throw std::invalid_argument("tau must lie in (0, 100]");
  if (sma_window < 1)
    throw std::invalid_argument("sma_window must be >= 1");
  if (!(iqr_floor > 0.0))
    throw std::invalid_argument("iqr_floor must be > 0");
}

double percentile(std::vector<double> values, double q) {
  if (values.empty())
    throw std::invalid_argument("percentile of an empty set");
  if (!(q >= 0.0 && q <= 100.0))
    throw std::invalid_argument("percentile rank must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos =
      (q / 100.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Eigen::MatrixXd compute_errors(const Eigen::MatrixXd& predictions,
                               const Eigen::MatrixXd& actuals) {
  if (predictions.rows() != actuals.rows() ||
      predictions.cols() != actuals.cols())
    throw std::invalid_argument("compute_errors: shape mismatch");
  return (actuals - predictions).cwiseAbs();
}

NormStats fit_norm_stats(const Eigen::MatrixXd& validation_errors,
                         double iqr_floor) {
  if (validation_errors.rows() == 0)
    throw std::invalid_argument("cannot fit normalization on empty errors");
  const auto n = validation_errors.cols();
  NormStats s;
  s.iqr_floor = iqr_floor;
  s.median.resize(n);
  s.iqr.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> col(validation_errors.col(i).begin(),
                            validation_errors.col(i).end());
    s.median(i) = percentile(col, 50.0);
    const double q1 = percentile(col, 25.0);
    const double q3 = percentile(col, 75.0);
    s.iqr(i) = std::max(q3 - q1, iqr_floor);
  }
  return s;
}

Eigen::MatrixXd robust_normalize(const Eigen::MatrixXd& raw_errors,
                                 const NormStats& stats) {
  if (raw_errors.cols() != stats.median.size())
    throw std::invalid_argument(
        "robust_normalize: missing statistics for some sensor");
  Eigen::MatrixXd out(raw_errors.rows(), raw_errors.cols());
  for (Eigen::Index i = 0; i < raw_errors.cols(); ++i)
    out.col(i) =
        (raw_errors.col(i).array() - stats.median(i)) / stats.iqr(i);
  return out;
}

Eigen::MatrixXd smooth_trailing(const Eigen::MatrixXd& errors, int window) {
  if (window < 1) throw std::invalid_argument("smoothing window must be >= 1");
  if (window == 1) return errors;
  Eigen::MatrixXd out(errors.rows(), errors.cols());
  for (Eigen::Index t = 0; t < errors.rows(); ++t) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, t - window + 1);
    out.row(t) =
        errors.middleRows(lo, t - lo + 1).colwise().mean();
  }
  return out;
}

GlobalFlags global_threshold_flags(const Eigen::MatrixXd& test_normalized,
                                   const Eigen::MatrixXd& val_normalized,
                                   int sma_window) {
  if (val_normalized.size() == 0)
    throw std::invalid_argument("global threshold needs validation errors");
  GlobalFlags out;
  out.kappa = val_normalized.maxCoeff();
  const Eigen::MatrixXd smoothed = smooth_trailing(test_normalized, sma_window);
  out.network.assign(static_cast<std::size_t>(test_normalized.rows()), 0);
  for (Eigen::Index t = 0; t < smoothed.rows(); ++t)
    if (smoothed.row(t).maxCoeff() > out.kappa)
      out.network[static_cast<std::size_t>(t)] = 1;
  return out;
}

SensorFlags sensor_threshold_flags(const Eigen::MatrixXd& test_normalized,
                                   const Eigen::MatrixXd& val_normalized,
                                   const Eigen::MatrixXi& adjacency,
                                   double tau) {
  if (!(tau > 0.0 && tau <= 100.0))
    throw std::invalid_argument("tau must lie in (0, 100]");
  const auto n = test_normalized.cols();
  if (val_normalized.cols() != n || adjacency.rows() != n ||
      adjacency.cols() != n)
    throw std::invalid_argument("sensor threshold: shape mismatch");

  SensorFlags out;
  out.tau = tau;
  out.kappa.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> pool;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (adjacency(j, i) > 0) {
        for (Eigen::Index t = 0; t < val_normalized.rows(); ++t)
          pool.push_back(val_normalized(t, j));
      }
    }
    if (pool.empty())
      throw std::invalid_argument("sensor " + std::to_string(i) +
                                  " has an empty neighborhood pool");
    out.kappa(i) = percentile(std::move(pool), tau);
  }

  out.per_sensor = LabelMatrix::Zero(test_normalized.rows(), n);
  out.network.assign(static_cast<std::size_t>(test_normalized.rows()), 0);
  for (Eigen::Index t = 0; t < test_normalized.rows(); ++t) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (test_normalized(t, i) > out.kappa(i)) {
        out.per_sensor(t, i) = 1;
        out.network[static_cast<std::size_t>(t)] = 1;
      }
    }
  }
  return out;
}

SensorFlags positivity_filter_flags(const Eigen::MatrixXd& raw_test_values,
                                    const SensorFlags& flags) {
  if (raw_test_values.rows() != flags.per_sensor.rows() ||
      raw_test_values.cols() != flags.per_sensor.cols())
    throw std::invalid_argument("positivity filter: shape mismatch");
  SensorFlags out = flags;
  for (Eigen::Index t = 0; t < raw_test_values.rows(); ++t)
    for (Eigen::Index i = 0; i < raw_test_values.cols(); ++i)
      if (raw_test_values(t, i) < 0.0) {
        out.per_sensor(t, i) = 1;
        out.network[static_cast<std::size_t>(t)] = 1;
      }
  return out;
}

DetectionReport evaluate(const LabelVector& flags, const LabelVector& truth,
                         const LocalizationInputs& loc) {
  if (flags.size() != truth.size())
    throw std::invalid_argument("evaluate: flag/label length mismatch");
  DetectionReport r;
  r.evaluated = true;
  for (std::size_t t = 0; t < flags.size(); ++t) {
    const bool f = flags[t] != 0;
    const bool y = truth[t] != 0;
    if (f && y)
      ++r.tp;
    else if (f && !y)
      ++r.fp;
    else if (!f && y)
      ++r.fn;
    else
      ++r.tn;
  }
  auto ratio = [](long long num, long long den, bool& undefined_flag) {
    if (den == 0) {
      undefined_flag = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  r.recall = ratio(r.tp, r.tp + r.fn, r.undefined.recall_undefined);
  r.precision = ratio(r.tp, r.tp + r.fp, r.undefined.precision_undefined);
  r.accuracy = ratio(r.tp + r.tn, r.tp + r.fp + r.tn + r.fn,
                     r.undefined.accuracy_undefined);
  r.specificity = ratio(r.tn, r.tn + r.fp, r.undefined.specificity_undefined);

  if (loc.sensor_flags && loc.sensor_truth && loc.adjacency) {
    const LabelMatrix& sf = *loc.sensor_flags;
    const LabelMatrix& st = *loc.sensor_truth;
    const Eigen::MatrixXi& A = *loc.adjacency;
    if (sf.rows() != static_cast<Eigen::Index>(flags.size()) ||
        st.rows() != sf.rows() || st.cols() != sf.cols())
      throw std::invalid_argument("evaluate: localization shape mismatch");
    long long considered = 0, correct = 0, neighborhood = 0;
    for (Eigen::Index t = 0; t < sf.rows(); ++t) {
      const auto ut = static_cast<std::size_t>(t);
      if (!(flags[ut] != 0 && truth[ut] != 0)) continue;  // network TPs only
      ++considered;
      bool hit_correct = false;
      bool hit_neighborhood = false;
      for (Eigen::Index s = 0; s < st.cols(); ++s) {
        if (st(t, s) == 0) continue;  // s is not a true anomalous sensor
        if (sf(t, s) != 0) hit_correct = true;
        for (Eigen::Index j = 0; j < sf.cols() && !hit_neighborhood; ++j)
          if (sf(t, j) != 0 && A(j, s) > 0) hit_neighborhood = true;
      }
      if (hit_correct) ++correct;
      if (hit_correct || hit_neighborhood) ++neighborhood;
    }
    r.localization_considered = considered;
    if (considered > 0) {
      r.localization_correct =
          static_cast<double>(correct) / static_cast<double>(considered);
      r.localization_neighborhood =
          static_cast<double>(neighborhood) / static_cast<double>(considered);
    }
  }
  return r;
}

RandomWalkResult random_walk_baseline_detail(const MultivariateSeries& series,
                                             const SplitConfig& split,
                                             const DetectorConfig& config) {
  config.validate();
  if (series.ticks() < 2)
    throw std::invalid_argument("random walk baseline needs T >= 2");

  auto parts = chronological_split(series, split.train_frac, 0.0);
  auto [train_block, val_block] =
      split_tail_validation(parts.train, split.val_frac);
  if (val_block.ticks() < 2)
    throw std::invalid_argument(
        "random walk baseline needs a non-empty validation block");
  const MultivariateSeries& test_block = parts.test;
  if (test_block.ticks() < 2)
    throw std::invalid_argument("random walk baseline needs test data");

  // One-step random-walk forecast within each block: predictions exist for
  // rows 1..T-1; row 0 of each block has no in-block predecessor.
  auto block_errors = [](const MultivariateSeries& block) {
    const auto rows = block.ticks() - 1;
    Eigen::MatrixXd pred = block.values.topRows(rows);
    Eigen::MatrixXd actual = block.values.bottomRows(rows);
    return compute_errors(pred, actual);
  };

  const Eigen::MatrixXd val_raw = block_errors(val_block);
  const Eigen::MatrixXd test_raw = block_errors(test_block);
  const NormStats stats = fit_norm_stats(val_raw, config.iqr_floor);
  const Eigen::MatrixXd val_norm = robust_normalize(val_raw, stats);
  const Eigen::MatrixXd test_norm = robust_normalize(test_raw, stats);

  GlobalFlags flags =
      global_threshold_flags(test_norm, val_norm, config.sma_window);

  RandomWalkResult out;
  out.flags = flags.network;
  out.ticks.assign(test_block.tick_index.begin() + 1,
                   test_block.tick_index.end());
  out.test_normalized = test_norm;
  out.sensor_ids = series.sensor_ids;
  out.report.mode = "rw_baseline";
  out.report.kappa = flags.kappa;
  if (test_block.network_labels) {
    LabelVector truth(test_block.network_labels->begin() + 1,
                      test_block.network_labels->end());
    out.report = evaluate(flags.network, truth);
    out.report.mode = "rw_baseline";
    out.report.kappa = flags.kappa;
  }
  return out;
}

DetectionReport random_walk_baseline(const MultivariateSeries& series,
                                     const SplitConfig& split,
                                     const DetectorConfig& config) {
  return random_walk_baseline_detail(series, split, config).report;
}

void write_flags_csv(const std::vector<long long>& ticks,
                     const LabelVector& network,
                     const std::vector<std::string>& sensor_ids,
                     const LabelMatrix* per_sensor, const std::string& path) {
  if (ticks.size() != network.size())
    throw std::invalid_argument("flags/ticks length mismatch");
  std::ofstream f(path);
  if (!f) throw IoError("cannot write file: " + path);
  f << "tick,network_flag";
  if (per_sensor)
    for (const auto& id : sensor_ids) f << ',' << id;
  f << '\n';
  for (std::size_t t = 0; t < ticks.size(); ++t) {
    f << ticks[t] << ',' << int(network[t]);
    if (per_sensor)
      for (Eigen::Index i = 0; i < per_sensor->cols(); ++i)
        f << ',' << int((*per_sensor)(static_cast<Eigen::Index>(t), i));
    f << '\n';
  }
  if (!f) throw IoError("write failed: " + path);
}

void write_error_trace_csv(const std::vector<long long>& ticks,
                           const Eigen::MatrixXd& normalized_errors,
                           const std::vector<std::string>& sensor_ids,
                           const std::string& path) {
  if (static_cast<Eigen::Index>(ticks.size()) != normalized_errors.rows())
    throw std::invalid_argument("errors/ticks length mismatch");
  std::ofstream f(path);
  if (!f) throw IoError("cannot write file: " + path);
  f << "tick";
  for (const auto& id : sensor_ids) f << ',' << id;
  f << '\n';
  for (std::size_t t = 0; t < ticks.size(); ++t) {
    f << ticks[t];
    for (Eigen::Index i = 0; i < normalized_errors.cols(); ++i)
      f << ','
        << format_double(normalized_errors(static_cast<Eigen::Index>(t), i));
    f << '\n';
  }
  if (!f) throw IoError("write failed: " + path);
}

void write_report_json(const DetectionReport& report,
                       const std::string& path) {
  nlohmann::json j;
  j["mode"] = report.mode;
  if (report.evaluated) {
    j["confusion"] = {{"tp", report.tp},
                      {"fp", report.fp},
                      {"tn", report.tn},
                      {"fn", report.fn}};
    j["metrics"] = {{"recall", report.recall},
                    {"precision", report.precision},
                    {"accuracy", report.accuracy},
                    {"specificity", report.specificity}};
    j["undefined_metrics"] = {
        {"recall", report.undefined.recall_undefined},
        {"precision", report.undefined.precision_undefined},
        {"accuracy", report.undefined.accuracy_undefined},
        {"specificity", report.undefined.specificity_undefined}};
  }
  j["kappa"] = report.kappa;
  if (report.kappa_i.size() > 0)
    j["kappa_i"] = std::vector<double>(report.kappa_i.begin(),
                                       report.kappa_i.end());
  if (report.tau) j["tau"] = *report.tau;
  if (report.localization_correct) {
    j["localization"] = {
        {"correct_sensor", *report.localization_correct},
        {"neighborhood", *report.localization_neighborhood},
        {"network_true_positives", report.localization_considered}};
  }
  std::ofstream f(path);
  if (!f) throw IoError("cannot write file: " + path);
  f << j.dump(1) << '\n';
  if (!f) throw IoError("write failed: " + path);
}

}  // namespace gdn
