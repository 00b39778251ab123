// Acceptance suite: one pass/fail line per criterion, hard exit status.
// Every tolerance is pinned in code; all randomness flows from fixed seeds.

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "gdn/anomalies.hpp"
#include "gdn/cli.hpp"
#include "gdn/detector.hpp"
#include "gdn/model.hpp"
#include "gdn/river.hpp"
#include "gdn/rng.hpp"
#include "gdn/series.hpp"
#include "gdn/simulate.hpp"

using namespace gdn;

namespace {

int g_failures = 0;

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void report(int criterion, bool ok, const std::string& what,
            const std::string& detail, double seconds) {
  std::printf("[%s] criterion %d: %s — %s (%.1fs)\n", ok ? "PASS" : "FAIL",
              criterion, what.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// criterion 1: finite-difference check of the full forward+loss graph
// (n=4, d=3, w=2, K=2), max relative error < 1e-4 per block, < 10 s
void criterion_gradient_correctness() {
  Stopwatch timer;
  const int n = 4;
  GdnHyperparams hp;
  hp.w = 2;
  hp.d = 3;
  hp.k = 2;
  hp.hidden_width = 5;

  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> g(0.0, 0.6);
  auto fill = [&](Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = g(rng);
    return m;
  };
  GdnParams params;
  params.V = fill(n, hp.d);
  params.W = fill(hp.d, hp.w);
  params.a = fill(2 * hp.d, 1);
  params.W1 = fill(hp.hidden_width, hp.d);
  params.b1 = fill(hp.hidden_width, 1);
  params.w2 = fill(hp.hidden_width, 1);
  params.b2 = g(rng);

  std::vector<std::vector<int>> candidates(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) candidates[i].push_back(j);
  const auto graph = build_graph(params.V, hp.k, candidates);

  std::vector<WindowSample> batch;
  for (int s = 0; s < 4; ++s) {
    WindowSample w;
    w.input = fill(n, hp.w);
    w.target = fill(n, 1);
    batch.push_back(w);
  }

  ad::GraphFn loss_fn = [&](ad::Tape& t, const std::vector<ad::Var>& leaves) {
    return gdn_loss_graph(t, leaves, graph.adjacency, batch, hp);
  };
  const auto check = finite_diff_check(loss_fn, params_to_blocks(params),
                                       param_block_names(), 1e-4);
  const double elapsed = timer.seconds();
  bool ok = check.pass && elapsed < 10.0;
  std::string detail = "max rel err " + fmt(check.max_rel_err) + " across " +
                       std::to_string(check.blocks.size()) + " blocks";
  for (const auto& b : check.blocks)
    if (b.max_rel_err >= 1e-4) detail += " [" + b.name + " failed]";
  report(1, ok, "gradient correctness of the full forward+loss graph", detail,
         elapsed);
}

// ---------------------------------------------------------------------------
// criterion 2: 1000 random draws; attention rows sum to 1 within 1e-12 and
// adjacency rows hold exactly K off-diagonal ones plus the diagonal
void criterion_attention_normalization() {
  Stopwatch timer;
  const int n = 6, k = 2;
  GdnHyperparams hp;
  hp.w = 3;
  hp.d = 4;
  hp.k = k;
  hp.hidden_width = 6;
  std::vector<std::vector<int>> candidates(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) candidates[i].push_back(j);

  std::mt19937_64 rng(424242);
  std::normal_distribution<double> g(0.0, 1.0);
  auto fill = [&](Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = g(rng);
    return m;
  };

  double worst_row_gap = 0.0;
  long long bad_rows = 0, bad_adjacency = 0, negative = 0;
  for (int draw = 0; draw < 1000; ++draw) {
    GdnParams p;
    p.V = fill(n, hp.d);
    p.W = fill(hp.d, hp.w);
    p.a = fill(2 * hp.d, 1);
    p.W1 = fill(hp.hidden_width, hp.d);
    p.b1 = fill(hp.hidden_width, 1);
    p.w2 = fill(hp.hidden_width, 1);
    p.b2 = g(rng);
    const auto graph = build_graph(p.V, k, candidates);
    for (int j = 0; j < n; ++j) {
      int offdiag = 0;
      for (int i = 0; i < n; ++i)
        if (i != j) offdiag += graph.adjacency(j, i);
      if (offdiag != k || graph.adjacency(j, j) != 1) ++bad_adjacency;
    }
    const auto fwd = attention_forward(p, graph.adjacency, fill(n, hp.w), hp);
    for (int i = 0; i < n; ++i) {
      const double gap = std::abs(fwd.attention.row(i).sum() - 1.0);
      worst_row_gap = std::max(worst_row_gap, gap);
      if (gap > 1e-12) ++bad_rows;
      if (fwd.attention.row(i).minCoeff() < 0.0) ++negative;
    }
  }
  const bool ok = bad_rows == 0 && bad_adjacency == 0 && negative == 0;
  report(2, ok, "attention rows are stochastic and adjacency rows hold K+1",
         "worst row-sum gap " + fmt(worst_row_gap) + ", bad rows " +
             std::to_string(bad_rows) + ", bad adjacency rows " +
             std::to_string(bad_adjacency),
         timer.seconds());
}

// ---------------------------------------------------------------------------
// criterion 3: tail-up covariance exactly 0 for flow-unconnected pairs on
// 100 random networks; diagonal sigma^2; euclidean min eigenvalue
// > -1e-8 * sigma^2 pre-jitter; < 30 s
void criterion_kernel_fidelity() {
  Stopwatch timer;
  long long unconnected_nonzero = 0, diag_off = 0;
  double min_eig_margin = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < 100; ++rep) {
    const KernelParams params{1.0 + (rep % 5), 2.0 + (rep % 7), 0.0};
    auto net = build_river_network(
        6, 0.85, 5, derive_seed(31337, "acc3-net", static_cast<std::uint64_t>(rep)));
    const auto cov = tailup_covariance(net, params);
    for (std::size_t i = 0; i < net.placements.size(); ++i) {
      if (cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) !=
          params.sigma2)
        ++diag_off;
      for (std::size_t j = 0; j < net.placements.size(); ++j) {
        if (!flow_connected(net, net.placements[i], net.placements[j]) &&
            cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) !=
                0.0)
          ++unconnected_nonzero;
      }
    }

    auto loc = sample_locations(
        20, derive_seed(31337, "acc3-loc", static_cast<std::uint64_t>(rep)));
    const KernelParams eparams{2.0, 6.0, 0.0};
    const auto ecov = euclidean_covariance(loc.coords, eparams);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ecov);
    min_eig_margin = std::min(min_eig_margin,
                              eig.eigenvalues().minCoeff() / eparams.sigma2);
  }
  const double elapsed = timer.seconds();
  const bool ok = unconnected_nonzero == 0 && diag_off == 0 &&
                  min_eig_margin > -1e-8 && elapsed < 30.0;
  report(3, ok, "kernel and covariance fidelity",
         "flow-unconnected nonzeros " + std::to_string(unconnected_nonzero) +
             ", diagonal mismatches " + std::to_string(diag_off) +
             ", min eig / sigma2 " + fmt(min_eig_margin),
         elapsed);
}

// ---------------------------------------------------------------------------
// criterion 4: with beta=0, the covariance of Y_t across 10000 replicate
// draws matches Sigma_Z + sigma0^2 I entry-wise within 5% of sigma^2; < 2 min
void criterion_simulation_statistics() {
  Stopwatch timer;
  const int n = 6, reps = 10000;
  auto loc = sample_locations(n, 4242);
  SimConfig cfg;
  cfg.n = n;
  cfg.T = 5;
  cfg.beta0 = 3.0;
  cfg.beta1 = 0.0;
  cfg.covariate_kernel = {1.0, 10.0, 0.0};
  cfg.random_effect_kernel = {2.0, 5.0, 0.5};

  Eigen::MatrixXd target =
      euclidean_covariance(loc.coords, cfg.random_effect_kernel);
  target.diagonal().array() += cfg.random_effect_kernel.nugget_sigma02;

  Eigen::MatrixXd samples(reps, n);
  for (int r = 0; r < reps; ++r) {
    cfg.seed = derive_seed(990, "acc4", static_cast<std::uint64_t>(r));
    samples.row(r) =
        simulate_response_at(loc, cfg).series.values.row(cfg.T - 1);
  }
  Eigen::MatrixXd centered = samples.rowwise() - samples.colwise().mean();
  Eigen::MatrixXd sample_cov =
      centered.transpose() * centered / double(reps - 1);
  const double max_dev = (sample_cov - target).cwiseAbs().maxCoeff();
  const double allowed = 0.05 * cfg.random_effect_kernel.sigma2;
  const double elapsed = timer.seconds();
  report(4, max_dev < allowed && elapsed < 120.0,
         "replicate covariance matches Sigma_Z + sigma0^2 I",
         "max entry deviation " + fmt(max_dev) + " vs allowed " + fmt(allowed),
         elapsed);
}

// ---------------------------------------------------------------------------
// criterion 5: drift adds exactly (delta, 2delta, ..., L*delta); the
// benchmark anomaly configuration labels 9-18% of ticks across 50 seeds
void criterion_injection_fidelity() {
  Stopwatch timer;
  bool drift_exact = true;
  {
    MultivariateSeries z;
    z.values = Eigen::MatrixXd::Zero(400, 3);
    for (int t = 0; t < 400; ++t) z.tick_index.push_back(t + 1);
    z.sensor_ids = {"a", "b", "c"};
    AnomalyConfig an;
    an.n_drift = 1;
    an.lambda_drift = 25.0;
    an.delta = 0.75;
    an.seed = 12;
    auto r = inject(z, an);
    const auto& rec = r.records.at(0);
    const int sensor = rec.sensor == "a" ? 0 : rec.sensor == "b" ? 1 : 2;
    if (rec.length == 0) drift_exact = false;
    for (int j = 0; j < rec.length; ++j)
      if (r.series.values(rec.start_tick - 1 + j, sensor) !=
          an.delta * (j + 1))
        drift_exact = false;
  }

  double lo = 1.0, hi = 0.0;
  for (std::uint64_t s = 1; s <= 50; ++s) {
    MultivariateSeries z;
    z.values = Eigen::MatrixXd::Zero(1000, 40);
    for (int t = 0; t < 1000; ++t) z.tick_index.push_back(t + 1);
    for (int i = 0; i < 40; ++i)
      z.sensor_ids.push_back("S" + std::to_string(i + 1));
    AnomalyConfig an{5, 24, 11.0, 3.0, 4.5, 13.5, derive_seed(56, "acc5", s)};
    auto r = inject(z, an);
    const double f = proportion_anomalous(*r.series.network_labels);
    lo = std::min(lo, f);
    hi = std::max(hi, f);
  }
  const double elapsed = timer.seconds();
  const bool ok = drift_exact && lo >= 0.09 && hi <= 0.18 && elapsed < 30.0;
  report(5, ok, "injection fidelity",
         std::string("drift pattern ") + (drift_exact ? "exact" : "WRONG") +
             ", labeled fraction range [" + fmt(lo) + ", " + fmt(hi) + "]",
         elapsed);
}

// ---------------------------------------------------------------------------
// criteria 6 and 8 share five full train/detect runs on benchmark-style
// Euclidean data (T=4000, n=40, 75/25 split, w=3, K=5, d=16)
struct DeskScaleOutcome {
  double mean_recall = 0.0;
  double mean_precision = 0.0;
  double mean_loc_neighborhood = 0.0;
  double seconds = 0.0;
  int runs = 0;
};

DeskScaleOutcome run_desk_scale_benchmarks() {
  Stopwatch timer;
  DeskScaleOutcome out;
  for (std::uint64_t seed = 101; seed <= 105; ++seed) {
    RunConfig cfg;
    cfg.seed = seed;
    cfg.sim.n = 40;
    cfg.sim.T = 4000;
    cfg.sim.covariate_kernel = {1.0, 10.0, 0.0};
    cfg.sim.random_effect_kernel = {2.0, 10.0, 0.5};
    cfg.sim.beta0 = 5.0;
    cfg.sim.beta1 = 1.0;
    cfg.anomaly = {5, 24, 11.0, 3.0, 4.5, 13.5, 1};
    cfg.model.w = 3;
    cfg.model.d = 16;
    cfg.model.k = 5;

    SimConfig sim = cfg.sim;
    sim.seed = derive_seed(seed, "acc6-sim");
    auto simulated = simulate_response(sim);
    auto parts = chronological_split(simulated.series, 0.75, 0.0);
    AnomalyConfig an = cfg.anomaly;
    an.seed = derive_seed(seed, "acc6-inject");
    auto contaminated = inject(parts.test, an);

    auto model =
        fit_model_pipeline(parts.train, cfg, derive_seed(seed, "acc6-train"));
    auto gdn = detect_with_model(model, contaminated.series, cfg, "gdn");
    auto plus = detect_with_model(model, contaminated.series, cfg, "gdn_plus");

    out.mean_recall += gdn.report.recall;
    out.mean_precision += gdn.report.precision;
    if (plus.report.localization_neighborhood)
      out.mean_loc_neighborhood += *plus.report.localization_neighborhood;
    ++out.runs;
  }
  out.mean_recall /= out.runs;
  out.mean_precision /= out.runs;
  out.mean_loc_neighborhood /= out.runs;
  out.seconds = timer.seconds();
  return out;
}

void criterion_detection_quality(const DeskScaleOutcome& out) {
  const bool ok = out.mean_recall >= 0.60 && out.mean_precision >= 0.30 &&
                  out.seconds < 1800.0;
  report(6, ok, "desk-scale detection quality (5 seeded benchmarks)",
         "mean recall " + fmt(out.mean_recall) +
             " (>= 0.60), mean precision " + fmt(out.mean_precision) +
             " (>= 0.30)",
         out.seconds);
}

void criterion_localization(const DeskScaleOutcome& out) {
  const bool ok = out.mean_loc_neighborhood >= 0.70;
  report(8, ok, "true positives localized within the sensor neighborhood",
         "mean neighborhood localization " + fmt(out.mean_loc_neighborhood) +
             " (>= 0.70)",
         out.seconds);
}

// ---------------------------------------------------------------------------
// criterion 7: across 10 replication-style datasets (5 Euclidean + 5
// tail-up), GDN+ has FN <= GDN in >= 9 and FP >= GDN in >= 9; < 60 min
void criterion_gdn_plus_improvement() {
  Stopwatch timer;
  RunConfig cfg;
  cfg.seed = 777;
  cfg.sim.n = 40;
  cfg.sim.T = 4000;
  cfg.model.w = 3;
  cfg.model.d = 16;
  cfg.model.k = 5;
  const auto& ranges = cfg.replicate.ranges;

  int fn_ok = 0, fp_ok = 0, total = 0;
  for (int rep = 0; rep < 5; ++rep) {
    Rng rng = make_rng(
        derive_seed(cfg.seed, "acc7-params", static_cast<std::uint64_t>(rep)));
    auto draw = [&](const Range& r) {
      return std::uniform_real_distribution<double>(r[0], r[1])(rng);
    };
    auto draw_int = [&](const Range& r) {
      return std::uniform_int_distribution<int>(static_cast<int>(r[0]),
                                                static_cast<int>(r[1]))(rng);
    };
    SimConfig sim = cfg.sim;
    sim.covariate_kernel = {draw(ranges.sigma2), draw(ranges.alpha), 0.0};
    sim.random_effect_kernel = {draw(ranges.sigma2), draw(ranges.alpha),
                                draw(ranges.sigma02)};
    sim.beta0 = draw(ranges.beta0);
    sim.beta1 = draw(ranges.beta1);
    AnomalyConfig an;
    an.delta = draw(ranges.delta);
    an.zeta = draw(ranges.zeta);
    an.lambda_drift = draw(ranges.lambda_drift);
    an.lambda_var = draw(ranges.lambda_var);
    an.n_drift = draw_int(ranges.n_drift);
    an.n_var = draw_int(ranges.n_var);

    for (int ki = 0; ki < 2; ++ki) {
      const auto run_tag = static_cast<std::uint64_t>(rep * 2 + ki);
      SimConfig run_sim = sim;
      run_sim.kind = ki == 0 ? KernelKind::euclidean : KernelKind::tailup;
      run_sim.seed = derive_seed(cfg.seed, "acc7-sim", run_tag);
      auto simulated = simulate_response(run_sim);
      auto parts = chronological_split(simulated.series, 0.75, 0.0);
      AnomalyConfig run_an = an;
      run_an.seed = derive_seed(cfg.seed, "acc7-inject", run_tag);
      auto contaminated = inject(parts.test, run_an);
      auto model = fit_model_pipeline(
          parts.train, cfg, derive_seed(cfg.seed, "acc7-train", run_tag));
      auto gdn = detect_with_model(model, contaminated.series, cfg, "gdn");
      auto plus =
          detect_with_model(model, contaminated.series, cfg, "gdn_plus");
      ++total;
      if (plus.report.fn <= gdn.report.fn) ++fn_ok;
      if (plus.report.fp >= gdn.report.fp) ++fp_ok;
    }
  }
  const double elapsed = timer.seconds();
  const bool ok = fn_ok >= 9 && fp_ok >= 9 && total == 10 && elapsed < 3600.0;
  report(7, ok, "GDN+ lowers false negatives at the cost of false positives",
         "FN not increased in " + std::to_string(fn_ok) +
             "/10, FP not decreased in " + std::to_string(fp_ok) + "/10",
         elapsed);
}

// ---------------------------------------------------------------------------
// criterion 9: evaluate() reproduces the four metric ratios exactly on 1000
// random confusion configurations, including zero-denominator conventions
void criterion_metric_arithmetic() {
  Stopwatch timer;
  std::mt19937_64 rng(909090);
  long long mismatches = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int len = 1 + static_cast<int>(rng() % 200);
    LabelVector flags(static_cast<std::size_t>(len), 0);
    LabelVector truth(static_cast<std::size_t>(len), 0);
    const int style = static_cast<int>(rng() % 5);
    for (int i = 0; i < len; ++i) {
      const auto u = static_cast<std::size_t>(i);
      switch (style) {
        case 0:  // generic
          flags[u] = rng() % 2;
          truth[u] = rng() % 2;
          break;
        case 1:  // nothing flagged (undefined precision)
          truth[u] = rng() % 2;
          break;
        case 2:  // everything flagged (specificity may be undefined)
          flags[u] = 1;
          truth[u] = rng() % 2;
          break;
        case 3:  // no positives in truth (undefined recall)
          flags[u] = rng() % 2;
          break;
        default:  // all positives in truth
          flags[u] = rng() % 2;
          truth[u] = 1;
          break;
      }
    }
    const auto r = evaluate(flags, truth);
    long long tp = 0, fp = 0, tn = 0, fn = 0;
    for (int i = 0; i < len; ++i) {
      const auto u = static_cast<std::size_t>(i);
      const bool f = flags[u] != 0;
      const bool y = truth[u] != 0;
      tp += f && y;
      fp += f && !y;
      fn += !f && y;
      tn += !f && !y;
    }
    auto direct = [](long long num, long long den) {
      return den == 0 ? 0.0 : double(num) / double(den);
    };
    if (r.tp != tp || r.fp != fp || r.tn != tn || r.fn != fn) ++mismatches;
    if (r.recall != direct(tp, tp + fn)) ++mismatches;
    if (r.precision != direct(tp, tp + fp)) ++mismatches;
    if (r.accuracy != direct(tp + tn, tp + fp + tn + fn)) ++mismatches;
    if (r.specificity != direct(tn, tn + fp)) ++mismatches;
    if (r.undefined.recall_undefined != (tp + fn == 0)) ++mismatches;
    if (r.undefined.precision_undefined != (tp + fp == 0)) ++mismatches;
    if (r.undefined.specificity_undefined != (tn + fp == 0)) ++mismatches;
  }
  report(9, mismatches == 0, "metric arithmetic matches the defining ratios",
         std::to_string(mismatches) + " mismatches over 1000 configurations",
         timer.seconds());
}

// ---------------------------------------------------------------------------
// criterion 10: repeated CLI commands produce byte-identical files
void criterion_determinism() {
  Stopwatch timer;
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() /
                        ("gdn_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(root);

  auto slurp = [](const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f),
                       std::istreambuf_iterator<char>());
  };
  auto run = [&](std::vector<std::string> args) {
    std::vector<const char*> argv{"gdn"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
  };

  bool ok = true;
  std::string detail = "simulate/inject/train/detect all byte-identical";
  const std::vector<std::pair<std::string, std::vector<std::string>>> stages =
      {{"sim",
        {"simulate", "--seed", "31", "--set", "sim.n=5", "--set",
         "sim.T=200"}},
       {"inj",
        {"inject", "--seed", "31", "--set", "anomaly.n_drift=3", "--set",
         "anomaly.n_var=4"}},
       {"train",
        {"train", "--seed", "31", "--set", "model.w=2", "--set", "model.k=2",
         "--set", "model.d=4", "--set", "model.hidden_width=8", "--set",
         "model.max_epochs=3"}},
       {"det", {"detect", "--mode", "gdn_plus", "--seed", "31"}}};

  std::map<std::string, fs::path> first_dirs;
  for (const std::string round : {"a", "b"}) {
    for (const auto& [name, base_args] : stages) {
      const fs::path out = root / (name + "_" + round);
      fs::create_directories(out);
      auto args = base_args;
      if (name == "inj" || name == "train") {
        args.push_back("--set");
        args.push_back("paths.series=" +
                       (root / ("sim_" + round) / "series.csv").string());
      }
      if (name == "det") {
        args.push_back("--set");
        args.push_back("paths.series=" +
                       (root / ("inj_" + round) / "series.csv").string());
        args.push_back("--set");
        args.push_back("paths.labels=" +
                       (root / ("inj_" + round) / "labels.csv").string());
        args.push_back("--set");
        args.push_back(
            "paths.checkpoint=" +
            (root / ("train_" + round) / "checkpoint.json").string());
      }
      args.push_back("--out");
      args.push_back(out.string());
      if (run(args) != kExitOk) {
        ok = false;
        detail = "command '" + name + "' failed in round " + round;
      }
      if (round == "a") first_dirs[name] = out;
    }
  }
  if (ok) {
    for (const auto& [name, dir_a] : first_dirs) {
      const fs::path dir_b = root / (name + "_b");
      for (const auto& entry : fs::directory_iterator(dir_a)) {
        const auto fname = entry.path().filename();
        if (slurp(entry.path()) != slurp(dir_b / fname)) {
          ok = false;
          detail = name + "/" + fname.string() + " differs between reruns";
        }
      }
    }
  }
  std::error_code ec;
  fs::remove_all(root, ec);
  report(10, ok, "CLI commands are byte-identical across reruns", detail,
         timer.seconds());
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  criterion_gradient_correctness();
  criterion_attention_normalization();
  criterion_kernel_fidelity();
  criterion_simulation_statistics();
  criterion_injection_fidelity();
  const DeskScaleOutcome desk = run_desk_scale_benchmarks();
  criterion_detection_quality(desk);
  criterion_gdn_plus_improvement();
  criterion_localization(desk);
  criterion_metric_arithmetic();
  criterion_determinism();
  if (g_failures == 0)
    std::printf("all criteria passed\n");
  else
    std::printf("%d criteria FAILED\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
