#include "gdn/anomalies.hpp"

#include <algorithm>
#include <fstream>

#include "gdn/errors.hpp"
#include "gdn/rng.hpp"

namespace gdn {

void AnomalyConfig::validate() const {
  if (n_drift < 0 || n_var < 0)
    throw std::invalid_argument("anomaly counts must be >= 0");
  if (!(lambda_drift > 0.0) || !(lambda_var > 0.0))
    throw std::invalid_argument("expected anomaly lengths must be > 0");
  if (!(zeta >= 0.0))
    throw std::invalid_argument("variability scale must be >= 0");
}

InjectResult inject(const MultivariateSeries& series,
                    const AnomalyConfig& config) {
  config.validate();
  const auto T = series.ticks();
  const auto n = series.sensors();
  if (T == 0 || n == 0) throw std::invalid_argument("empty series");

  InjectResult result;
  result.series = series;
  LabelMatrix labels = LabelMatrix::Zero(T, n);

  Rng rng = make_rng(config.seed);
  std::uniform_int_distribution<Eigen::Index> sensor_dist(0, n - 1);
  std::uniform_int_distribution<Eigen::Index> tick_dist(0, T - 1);
  std::normal_distribution<double> gauss(0.0, 1.0);

  auto run_type = [&](AnomalyKind kind, int count, double lambda) {
    std::poisson_distribution<int> length_dist(lambda);
    for (int k = 0; k < count; ++k) {
      const Eigen::Index sensor = sensor_dist(rng);
      const Eigen::Index start = tick_dist(rng);
      const int drawn = length_dist(rng);
      const int realized =
          std::min<Eigen::Index>(drawn, T - start);  // clip at series end
      for (int j = 0; j < drawn; ++j) {
        double add;
        if (kind == AnomalyKind::drift)
          add = config.delta * (j + 1);
        else
          add = config.zeta * gauss(rng);  // drawn even past the end so the
                                           // stream layout is length-driven
        if (j < realized) {
          result.series.values(start + j, sensor) += add;
          labels(start + j, sensor) = 1;
        }
      }
      AnomalyRecord rec;
      rec.kind = kind;
      rec.sensor = series.sensor_ids[static_cast<std::size_t>(sensor)];
      rec.start_tick = series.tick_index[static_cast<std::size_t>(start)];
      rec.length = realized;
      result.records.push_back(rec);
    }
  };
  run_type(AnomalyKind::drift, config.n_drift, config.lambda_drift);
  run_type(AnomalyKind::variability, config.n_var, config.lambda_var);

  LabelVector network(static_cast<std::size_t>(T), 0);
  for (Eigen::Index t = 0; t < T; ++t)
    for (Eigen::Index i = 0; i < n; ++i)
      if (labels(t, i)) network[static_cast<std::size_t>(t)] = 1;
  result.series.sensor_labels = std::move(labels);
  result.series.network_labels = std::move(network);
  result.series.validate();
  return result;
}

double proportion_anomalous(const LabelVector& labels) {
  if (labels.empty()) throw std::invalid_argument("labels missing");
  std::size_t count = 0;
  for (auto v : labels) count += (v != 0);
  return static_cast<double>(count) / static_cast<double>(labels.size());
}

void write_records(const std::vector<AnomalyRecord>& records,
                   const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write file: " + path);
  f << "kind,sensor_id,start_tick,length\n";
  for (const auto& r : records)
    f << (r.kind == AnomalyKind::drift ? "drift" : "variability") << ','
      << r.sensor << ',' << r.start_tick << ',' << r.length << '\n';
  if (!f) throw IoError("write failed: " + path);
}

}  // namespace gdn
