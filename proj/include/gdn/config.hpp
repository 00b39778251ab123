#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gdn/anomalies.hpp"
#include "gdn/detector.hpp"
#include "gdn/model.hpp"
#include "gdn/simulate.hpp"
#include "json.hpp"

namespace gdn {

struct PathsConfig {
  std::string series;
  std::string labels;
  std::string sensor_labels;
  std::string checkpoint;
  std::string flags;
};

using Range = std::array<double, 2>;

// Parameter ranges sampled uniformly by the replication command.
struct ReplicateRanges {
  Range delta{3.0, 6.0};
  Range zeta{12.0, 15.0};
  Range lambda_drift{5.0, 10.0};
  Range lambda_var{2.0, 10.0};
  Range n_drift{50.0, 100.0};
  Range n_var{50.0, 100.0};
  Range sigma2{1.0, 5.0};
  Range alpha{5.0, 15.0};
  Range sigma02{0.0, 1.0};
  Range beta0{1.0, 10.0};
  Range beta1{1.0, 10.0};
};

struct ReplicateConfig {
  int n_replicates = 10;
  std::vector<KernelKind> kernels{KernelKind::euclidean, KernelKind::tailup};
  ReplicateRanges ranges;
};

// Full run configuration; every field has a default except file paths.
// One master seed feeds all stages through derived streams.
struct RunConfig {
  std::uint64_t seed = 1;
  PathsConfig paths;
  SimConfig sim;
  AnomalyConfig anomaly{5, 24, 11.0, 3.0, 4.5, 13.5, 1};
  SplitConfig split;
  GdnHyperparams model;
  DetectorConfig detector;
  ReplicateConfig replicate;
};

// Strict parse: unknown keys anywhere are rejected with their path.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

nlohmann::json config_to_json(const RunConfig& config);

// Applies one "--set dotted.key=value" override onto a config JSON tree.
// The value text is parsed as JSON when possible, else taken as a string.
void apply_override(nlohmann::json& j, const std::string& assignment);

std::string kernel_kind_name(KernelKind kind);
KernelKind kernel_kind_from_name(const std::string& name);

}  // namespace gdn
