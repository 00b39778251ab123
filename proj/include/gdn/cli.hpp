#pragma once

#include <string>

#include "gdn/config.hpp"

namespace gdn {

// Exit codes: 0 success, 1 configuration error, 2 I/O error,
// 3 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitNumerical = 3;

// Fit workflow shared by `train` and `replicate`: tail-validation split,
// min-max scaling fitted on the leading block, windowing, training, and
// validation-error capture for the detector.
FittedModel fit_model_pipeline(const MultivariateSeries& series,
                               const RunConfig& config,
                               std::uint64_t train_seed);

struct DetectionOutput {
  DetectionReport report;
  LabelVector network;
  std::vector<long long> ticks;
  Eigen::MatrixXd normalized_errors;
  bool has_sensor_flags = false;
  LabelMatrix sensor_flags;
};

// Scales the test series with the model's stats, forecasts, normalizes the
// errors against the checkpoint's validation errors, applies the chosen
// threshold rule, and evaluates when the series carries labels.
// mode: gdn | gdn_plus | gdn_plus_plus.
DetectionOutput detect_with_model(const FittedModel& model,
                                  const MultivariateSeries& test,
                                  const RunConfig& config,
                                  const std::string& mode);

// Command implementations; all write into out_dir and throw on failure.
void cmd_simulate(const RunConfig& config, const std::string& out_dir);
void cmd_inject(const RunConfig& config, const std::string& out_dir);
void cmd_train(const RunConfig& config, const std::string& out_dir);
void cmd_detect(const RunConfig& config, const std::string& out_dir,
                const std::string& mode);
void cmd_evaluate(const RunConfig& config, const std::string& out_dir);
void cmd_replicate(const RunConfig& config, const std::string& out_dir);

// Full argument parsing + dispatch; maps exceptions to exit codes.
int run_cli(int argc, const char* const* argv);

}  // namespace gdn
