#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gdn/series.hpp"

namespace gdn {

struct AnomalyConfig {
  int n_drift = 0;
  int n_var = 0;
  double lambda_drift = 1.0;  // expected subsequence length, > 0
  double lambda_var = 1.0;
  double delta = 1.0;  // drift step per tick (response units)
  double zeta = 1.0;   // variability standard deviation (response units)
  std::uint64_t seed = 1;

  void validate() const;
};

enum class AnomalyKind { drift, variability };

struct AnomalyRecord {
  AnomalyKind kind = AnomalyKind::drift;
  std::string sensor;
  long long start_tick = 0;  // tick key of the first affected row
  int length = 0;            // realized (clipped) length; 0 = nothing injected
};

struct InjectResult {
  MultivariateSeries series;  // contaminated copy, labels attached
  std::vector<AnomalyRecord> records;
};

// Two-type subsequence anomaly injection. Per anomaly: sensor and start tick
// uniform, length Poisson(lambda). Drift adds (delta, 2*delta, ..., L*delta);
// variability adds iid N(0, zeta^2) draws. Subsequences extending past the
// last tick are truncated; overlapping additions compose and labels union.
InjectResult inject(const MultivariateSeries& series,
                    const AnomalyConfig& config);

// Fraction of ticks whose network label is 1.
double proportion_anomalous(const LabelVector& labels);

void write_records(const std::vector<AnomalyRecord>& records,
                   const std::string& path);

}  // namespace gdn
