#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gdn/river.hpp"
#include "gdn/series.hpp"

namespace gdn {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Locations {
  std::vector<Point> coords;
  std::vector<std::string> ids;
};

// Exponential-decay kernel parameters. nugget_sigma02 is an independent
// noise variance: the response simulator uses the random-effect kernel's
// nugget as the variance of the per-tick noise term.
struct KernelParams {
  double sigma2 = 1.0;        // covariance scale, >= 0 (0 = degenerate)
  double range_alpha = 10.0;  // decay range, > 0
  double nugget_sigma02 = 0.0;

  void validate() const;
};

enum class KernelKind { euclidean, tailup };

struct SimConfig {
  int n = 40;
  int T = 4000;
  double beta0 = 5.0;
  double beta1 = 1.0;                  // single covariate
  std::vector<double> ma_weights;      // phi_0..phi_p; empty = default
  KernelParams covariate_kernel{1.0, 10.0, 0.0};
  KernelParams random_effect_kernel{2.0, 10.0, 0.5};
  KernelKind kind = KernelKind::euclidean;
  double branch_prob = 0.8;  // river synthesis controls (tailup only)
  int depth = 5;
  std::uint64_t seed = 1;

  void validate() const;
};

// Default moving-average weights: p = 3, phi_i proportional to 0.5^i,
// normalized so sum(phi_i^2) = 1 (preserves the marginal field variance).
std::vector<double> default_ma_weights(int p = 3, double decay = 0.5);

Locations sample_locations(int n, std::uint64_t seed);

// sigma^2 * exp(-||s - s'||^2 / alpha); symmetric in its arguments.
double euclidean_kernel(const Point& a, const Point& b,
                        const KernelParams& params);

// Tail-up kernel: zero for flow-unconnected pairs, otherwise
// omega * sigma^2 * exp(-h_riv / alpha) with
// omega = sqrt(shreve(upstream segment) / shreve(downstream segment)).
double tailup_kernel(const RiverNetwork& net, const Placement& a,
                     const Placement& b, const KernelParams& params);

// Element-wise kernel evaluation; exact (no jitter, no nugget).
Eigen::MatrixXd covariance_matrix(
    int n, const std::function<double(int, int)>& kernel);
Eigen::MatrixXd euclidean_covariance(const std::vector<Point>& points,
                                     const KernelParams& params);
Eigen::MatrixXd tailup_covariance(const RiverNetwork& net,
                                  const KernelParams& params);

// Lower Cholesky factor with escalating diagonal jitter
// (1e-10 * scale, x10 per retry, up to 1e-6 * scale). Throws NumericalError
// if the matrix still fails to factor.
Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& cov, double scale);

// T x n field series X_t = sum_i phi_i * F_{t-i} with F iid N(0, cov),
// sampled as Cholesky factor times standard normals; the first p fields are
// burn-in so every output tick uses a full weight window.
Eigen::MatrixXd sample_field_series(const Eigen::MatrixXd& cov, int T,
                                    const std::vector<double>& ma_weights,
                                    std::uint64_t seed);

struct SimResult {
  MultivariateSeries series;
  Locations locations;                  // sensor coordinates (both kinds)
  std::optional<RiverNetwork> network;  // present for tail-up runs
};

// Linear mixed model response: Y_t = beta0 + beta1 * X_t + Z + eps_t with
// Z drawn once per run (covariance from the random-effect kernel) and
// eps_t fresh per tick with variance random_effect_kernel.nugget_sigma02.
SimResult simulate_response(const SimConfig& config);

// Same model on caller-supplied sensor locations (Euclidean kind only);
// lets replicate draws share a fixed spatial layout.
SimResult simulate_response_at(const Locations& locations,
                               const SimConfig& config);

void write_locations(const Locations& locations, const std::string& path);

}  // namespace gdn
