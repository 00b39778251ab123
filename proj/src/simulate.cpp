#include "gdn/simulate.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <fstream>

#include "gdn/errors.hpp"
#include "gdn/rng.hpp"

namespace gdn {

void KernelParams::validate() const {
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2))
    throw std::invalid_argument("kernel sigma2 must be >= 0");
  if (!(range_alpha > 0.0) || !std::isfinite(range_alpha))
    throw std::invalid_argument("kernel range alpha must be > 0");
  if (!(nugget_sigma02 >= 0.0) || !std::isfinite(nugget_sigma02))
    throw std::invalid_argument("kernel nugget must be >= 0");
}

void SimConfig::validate() const {
  if (n < 2) throw std::invalid_argument("simulation needs n >= 2 sensors");
  covariate_kernel.validate();
  random_effect_kernel.validate();
  const auto& phi = ma_weights.empty() ? default_ma_weights() : ma_weights;
  const int p = static_cast<int>(phi.size()) - 1;
  if (p < 0 || std::all_of(phi.begin(), phi.end(),
                           [](double v) { return v == 0.0; }))
    throw std::invalid_argument("ma_weights needs at least one nonzero entry");
  if (T <= p)
    throw std::invalid_argument("T must exceed the moving-average order");
  if (!std::isfinite(beta0) || !std::isfinite(beta1))
    throw std::invalid_argument("regression parameters must be finite");
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  if (!(branch_prob >= 0.0 && branch_prob <= 1.0))
    throw std::invalid_argument("branch_prob must lie in [0,1]");
}

std::vector<double> default_ma_weights(int p, double decay) {
  std::vector<double> phi(static_cast<std::size_t>(p) + 1);
  double ss = 0.0;
  for (int i = 0; i <= p; ++i) {
    phi[static_cast<std::size_t>(i)] = std::pow(decay, i);
    ss += phi[static_cast<std::size_t>(i)] * phi[static_cast<std::size_t>(i)];
  }
  const double norm = std::sqrt(ss);
  for (auto& v : phi) v /= norm;
  return phi;
}

Locations sample_locations(int n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("need at least two locations");
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Locations loc;
  loc.coords.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Point p{unit(rng), unit(rng)};
    // exact coordinate collisions are a measure-zero event; redraw anyway
    while (std::any_of(loc.coords.begin(), loc.coords.end(),
                       [&](const Point& q) {
                         return q.x == p.x && q.y == p.y;
                       })) {
      p = Point{unit(rng), unit(rng)};
    }
    loc.coords.push_back(p);
    loc.ids.push_back("S" + std::to_string(i + 1));
  }
  return loc;
}

double euclidean_kernel(const Point& a, const Point& b,
                        const KernelParams& params) {
  params.validate();
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return params.sigma2 * std::exp(-(dx * dx + dy * dy) / params.range_alpha);
}

double tailup_kernel(const RiverNetwork& net, const Placement& a,
                     const Placement& b, const KernelParams& params) {
  params.validate();
  if (!flow_connected(net, a, b)) return 0.0;
  const double h = stream_distance(net, a, b);
  double omega = 1.0;
  if (a.segment != b.segment) {
    // the point whose segment lies on the other's downstream chain is the
    // downstream one
    const auto chain_b = net.chain_to_outlet(b.segment);
    const bool a_downstream = std::find(chain_b.begin(), chain_b.end(),
                                        a.segment) != chain_b.end();
    const int up_seg = a_downstream ? b.segment : a.segment;
    const int down_seg = a_downstream ? a.segment : b.segment;
    omega = std::sqrt(static_cast<double>(net.segment(up_seg).shreve) /
                      static_cast<double>(net.segment(down_seg).shreve));
  }
  return omega * params.sigma2 * std::exp(-h / params.range_alpha);
}

Eigen::MatrixXd covariance_matrix(
    int n, const std::function<double(int, int)>& kernel) {
  if (n < 1) throw std::invalid_argument("covariance needs n >= 1");
  Eigen::MatrixXd cov(n, n);
  for (int i = 0; i < n; ++i) {
    cov(i, i) = kernel(i, i);
    for (int j = i + 1; j < n; ++j) {
      const double v = kernel(i, j);
      cov(i, j) = v;
      cov(j, i) = v;
    }
  }
  return cov;
}

Eigen::MatrixXd euclidean_covariance(const std::vector<Point>& points,
                                     const KernelParams& params) {
  return covariance_matrix(
      static_cast<int>(points.size()), [&](int i, int j) {
        return euclidean_kernel(points[static_cast<std::size_t>(i)],
                                points[static_cast<std::size_t>(j)], params);
      });
}

Eigen::MatrixXd tailup_covariance(const RiverNetwork& net,
                                  const KernelParams& params) {
  return covariance_matrix(
      static_cast<int>(net.placements.size()), [&](int i, int j) {
        return tailup_kernel(net, net.placements[static_cast<std::size_t>(i)],
                             net.placements[static_cast<std::size_t>(j)],
                             params);
      });
}

Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& cov,
                                     double scale) {
  if (cov.rows() != cov.cols())
    throw std::invalid_argument("covariance matrix must be square");
  if (scale <= 0.0) scale = 1.0;
  double jitter = 0.0;
  for (;;) {
    Eigen::MatrixXd attempt = cov;
    if (jitter > 0.0)
      attempt.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(attempt);
    if (llt.info() == Eigen::Success)
      return llt.matrixL();
    if (jitter == 0.0)
      jitter = 1e-10 * scale;
    else if (jitter < 1e-6 * scale)
      jitter *= 10.0;
    else
      throw NumericalError(
          "Cholesky factorization failed after maximum jitter escalation");
  }
}

Eigen::MatrixXd sample_field_series(const Eigen::MatrixXd& cov, int T,
                                    const std::vector<double>& ma_weights,
                                    std::uint64_t seed) {
  const int p = static_cast<int>(ma_weights.size()) - 1;
  if (p < 0) throw std::invalid_argument("ma_weights must be non-empty");
  if (T <= p) throw std::invalid_argument("T must exceed the MA order");
  const auto n = cov.rows();
  const Eigen::MatrixXd L =
      cholesky_with_jitter(cov, cov.diagonal().maxCoeff());

  Rng rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // iid base fields, p extra for burn-in
  Eigen::MatrixXd base(T + p, n);
  Eigen::VectorXd z(n);
  for (int t = 0; t < T + p; ++t) {
    for (Eigen::Index i = 0; i < n; ++i) z(i) = gauss(rng);
    base.row(t) = (L * z).transpose();
  }

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(T, n);
  for (int t = 0; t < T; ++t)
    for (int i = 0; i <= p; ++i)
      out.row(t) += ma_weights[static_cast<std::size_t>(i)] *
                    base.row(t + p - i);
  return out;
}

namespace {

SimResult simulate_with_layout(SimResult result, const Eigen::MatrixXd& cov_z,
                               const SimConfig& config);

}  // namespace

SimResult simulate_response(const SimConfig& config) {
  config.validate();

  SimResult result;
  Eigen::MatrixXd cov_z;
  if (config.kind == KernelKind::tailup) {
    result.network = build_river_network(config.n, config.branch_prob,
                                         config.depth,
                                         derive_seed(config.seed, "network"));
    result.locations.ids = result.network->sensor_ids;
    for (const auto& pl : result.network->placements) {
      auto [x, y] = result.network->point_coords(pl);
      result.locations.coords.push_back({x, y});
    }
    cov_z = tailup_covariance(*result.network, config.random_effect_kernel);
  } else {
    result.locations =
        sample_locations(config.n, derive_seed(config.seed, "locations"));
    cov_z = euclidean_covariance(result.locations.coords,
                                 config.random_effect_kernel);
  }
  return simulate_with_layout(std::move(result), cov_z, config);
}

SimResult simulate_response_at(const Locations& locations,
                               const SimConfig& config) {
  config.validate();
  if (config.kind != KernelKind::euclidean)
    throw std::invalid_argument(
        "simulate_response_at supports the Euclidean kind only");
  if (static_cast<int>(locations.coords.size()) != config.n)
    throw std::invalid_argument("locations do not match configured n");
  SimResult result;
  result.locations = locations;
  const Eigen::MatrixXd cov_z =
      euclidean_covariance(locations.coords, config.random_effect_kernel);
  return simulate_with_layout(std::move(result), cov_z, config);
}

namespace {

SimResult simulate_with_layout(SimResult result, const Eigen::MatrixXd& cov_z,
                               const SimConfig& config) {
  const auto phi =
      config.ma_weights.empty() ? default_ma_weights() : config.ma_weights;

  Eigen::MatrixXd cov_x =
      euclidean_covariance(result.locations.coords, config.covariate_kernel);
  if (config.covariate_kernel.nugget_sigma02 > 0.0)
    cov_x.diagonal().array() += config.covariate_kernel.nugget_sigma02;

  const Eigen::MatrixXd X = sample_field_series(
      cov_x, config.T, phi, derive_seed(config.seed, "covariates"));

  // time-homogeneous random effect, one draw per run
  Eigen::VectorXd z_effect = Eigen::VectorXd::Zero(config.n);
  if (config.random_effect_kernel.sigma2 > 0.0) {
    const Eigen::MatrixXd Lz =
        cholesky_with_jitter(cov_z, cov_z.diagonal().maxCoeff());
    Rng rng_z = make_rng(derive_seed(config.seed, "random_effect"));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd u(config.n);
    for (int i = 0; i < config.n; ++i) u(i) = gauss(rng_z);
    z_effect = Lz * u;
  }

  Rng rng_eps = make_rng(derive_seed(config.seed, "noise"));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double eps_sd = std::sqrt(config.random_effect_kernel.nugget_sigma02);

  MultivariateSeries& s = result.series;
  s.values.resize(config.T, config.n);
  s.tick_index.resize(static_cast<std::size_t>(config.T));
  s.sensor_ids = result.locations.ids;
  for (int t = 0; t < config.T; ++t) {
    s.tick_index[static_cast<std::size_t>(t)] = t + 1;
    for (int i = 0; i < config.n; ++i) {
      const double eps = eps_sd > 0.0 ? eps_sd * gauss(rng_eps) : 0.0;
      s.values(t, i) =
          config.beta0 + config.beta1 * X(t, i) + z_effect(i) + eps;
    }
  }
  s.validate();
  return result;
}

}  // namespace

void write_locations(const Locations& locations, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write file: " + path);
  f << "sensor_id,x,y\n";
  for (std::size_t i = 0; i < locations.coords.size(); ++i)
    f << locations.ids[i] << ',' << format_double(locations.coords[i].x)
      << ',' << format_double(locations.coords[i].y) << '\n';
  if (!f) throw IoError("write failed: " + path);
}

}  // namespace gdn
