#include "gdn/config.hpp"

#include <fstream>
#include <set>

#include "gdn/errors.hpp"

namespace gdn {

using nlohmann::json;

namespace {

// Wraps a JSON object and tracks key consumption so leftovers can be
// reported as configuration errors with their full path.
class Section {
 public:
  // takes its own copy; sections are small and callers often pass temporaries
  Section(json j, std::string path) : j_(std::move(j)), path_(std::move(path)) {
    if (j_.is_null()) j_ = json::object();
    if (!j_.is_object())
      throw std::invalid_argument("config section '" + path_ +
                                  "' must be an object");
  }

  template <typename T>
  T get(const char* key, T fallback) {
    consumed_.insert(key);
    if (!j_.contains(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw std::invalid_argument("config key '" + path_ + "." + key +
                                  "' has the wrong type");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  json child(const char* key) {
    consumed_.insert(key);
    if (!j_.contains(key)) return json();  // null: section/range missing
    return j_.at(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!consumed_.count(it.key()))
        throw std::invalid_argument("unknown config key '" + path_ + "." +
                                    it.key() + "'");
    }
  }

 private:
  json j_;
  std::string path_;
  std::set<std::string> consumed_;
};

KernelParams parse_kernel(const json& j, const std::string& path,
                          KernelParams fallback) {
  Section s(j, path);
  KernelParams p = fallback;
  p.sigma2 = s.get("sigma2", p.sigma2);
  p.range_alpha = s.get("alpha", p.range_alpha);
  p.nugget_sigma02 = s.get("nugget", p.nugget_sigma02);
  s.finish();
  return p;
}

Range parse_range(const json& j, const std::string& path, Range fallback) {
  if (j.is_null()) return fallback;
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw std::invalid_argument("config key '" + path +
                                "' must be a [lo, hi] pair");
  Range r{j[0].get<double>(), j[1].get<double>()};
  if (r[0] > r[1])
    throw std::invalid_argument("config key '" + path + "' has lo > hi");
  return r;
}

}  // namespace

std::string kernel_kind_name(KernelKind kind) {
  return kind == KernelKind::euclidean ? "euclidean" : "tailup";
}

KernelKind kernel_kind_from_name(const std::string& name) {
  if (name == "euclidean") return KernelKind::euclidean;
  if (name == "tailup") return KernelKind::tailup;
  throw std::invalid_argument("unknown kernel kind '" + name +
                              "' (expected euclidean or tailup)");
}

RunConfig parse_config(const json& j) {
  RunConfig c;
  Section root(j, "config");
  c.seed = root.get<std::uint64_t>("seed", c.seed);

  {
    Section s(root.child("paths"), "paths");
    c.paths.series = s.get<std::string>("series", "");
    c.paths.labels = s.get<std::string>("labels", "");
    c.paths.sensor_labels = s.get<std::string>("sensor_labels", "");
    c.paths.checkpoint = s.get<std::string>("checkpoint", "");
    c.paths.flags = s.get<std::string>("flags", "");
    s.finish();
  }
  {
    Section s(root.child("sim"), "sim");
    c.sim.kind = kernel_kind_from_name(
        s.get<std::string>("kind", kernel_kind_name(c.sim.kind)));
    c.sim.n = s.get("n", c.sim.n);
    c.sim.T = s.get("T", c.sim.T);
    c.sim.beta0 = s.get("beta0", c.sim.beta0);
    c.sim.beta1 = s.get("beta1", c.sim.beta1);
    c.sim.ma_weights = s.get("ma_weights", c.sim.ma_weights);
    c.sim.covariate_kernel = parse_kernel(
        s.child("covariate_kernel"), "sim.covariate_kernel",
        c.sim.covariate_kernel);
    c.sim.random_effect_kernel = parse_kernel(
        s.child("random_effect_kernel"), "sim.random_effect_kernel",
        c.sim.random_effect_kernel);
    {
      Section net(s.child("network"), "sim.network");
      c.sim.branch_prob = net.get("branch_prob", c.sim.branch_prob);
      c.sim.depth = net.get("depth", c.sim.depth);
      net.finish();
    }
    s.finish();
  }
  {
    Section s(root.child("anomaly"), "anomaly");
    c.anomaly.n_drift = s.get("n_drift", c.anomaly.n_drift);
    c.anomaly.n_var = s.get("n_var", c.anomaly.n_var);
    c.anomaly.lambda_drift = s.get("lambda_drift", c.anomaly.lambda_drift);
    c.anomaly.lambda_var = s.get("lambda_var", c.anomaly.lambda_var);
    c.anomaly.delta = s.get("delta", c.anomaly.delta);
    c.anomaly.zeta = s.get("zeta", c.anomaly.zeta);
    s.finish();
  }
  {
    Section s(root.child("split"), "split");
    c.split.train_frac = s.get("train_frac", c.split.train_frac);
    c.split.val_frac = s.get("val_frac", c.split.val_frac);
    s.finish();
  }
  {
    Section s(root.child("model"), "model");
    c.model.w = s.get("w", c.model.w);
    c.model.d = s.get("d", c.model.d);
    c.model.k = s.get("k", c.model.k);
    c.model.leaky_slope = s.get("leaky_slope", c.model.leaky_slope);
    c.model.hidden_width = s.get("hidden_width", c.model.hidden_width);
    c.model.learning_rate = s.get("learning_rate", c.model.learning_rate);
    c.model.batch_size = s.get("batch_size", c.model.batch_size);
    c.model.max_epochs = s.get("max_epochs", c.model.max_epochs);
    c.model.patience = s.get("patience", c.model.patience);
    c.model.candidate_sets =
        s.get("candidate_sets", c.model.candidate_sets);
    s.finish();
  }
  {
    Section s(root.child("detector"), "detector");
    c.detector.tau = s.get("tau", c.detector.tau);
    c.detector.sma_window = s.get("sma_window", c.detector.sma_window);
    c.detector.iqr_floor = s.get("iqr_floor", c.detector.iqr_floor);
    s.finish();
  }
  {
    Section s(root.child("replicate"), "replicate");
    c.replicate.n_replicates =
        s.get("n_replicates", c.replicate.n_replicates);
    if (s.has("kernels")) {
      const auto names = s.get<std::vector<std::string>>("kernels", {});
      c.replicate.kernels.clear();
      for (const auto& name : names)
        c.replicate.kernels.push_back(kernel_kind_from_name(name));
      if (c.replicate.kernels.empty())
        throw std::invalid_argument("replicate.kernels must be non-empty");
    } else {
      s.get<std::vector<std::string>>("kernels", {});  // mark consumed
    }
    {
      json rj = s.child("ranges");
      Section rs(rj, "replicate.ranges");
      auto& r = c.replicate.ranges;
      r.delta = parse_range(rs.child("delta"), "replicate.ranges.delta",
                            r.delta);
      r.zeta = parse_range(rs.child("zeta"), "replicate.ranges.zeta", r.zeta);
      r.lambda_drift = parse_range(rs.child("lambda_drift"),
                                   "replicate.ranges.lambda_drift",
                                   r.lambda_drift);
      r.lambda_var = parse_range(rs.child("lambda_var"),
                                 "replicate.ranges.lambda_var", r.lambda_var);
      r.n_drift = parse_range(rs.child("n_drift"),
                              "replicate.ranges.n_drift", r.n_drift);
      r.n_var =
          parse_range(rs.child("n_var"), "replicate.ranges.n_var", r.n_var);
      r.sigma2 = parse_range(rs.child("sigma2"), "replicate.ranges.sigma2",
                             r.sigma2);
      r.alpha = parse_range(rs.child("alpha"), "replicate.ranges.alpha",
                            r.alpha);
      r.sigma02 = parse_range(rs.child("sigma02"), "replicate.ranges.sigma02",
                              r.sigma02);
      r.beta0 = parse_range(rs.child("beta0"), "replicate.ranges.beta0",
                            r.beta0);
      r.beta1 = parse_range(rs.child("beta1"), "replicate.ranges.beta1",
                            r.beta1);
      rs.finish();
    }
    s.finish();
  }
  root.finish();

  // range sanity shared across commands
  c.anomaly.validate();
  c.detector.validate();
  if (c.replicate.n_replicates < 1)
    throw std::invalid_argument("replicate.n_replicates must be >= 1");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file: " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config parse error in " + path + ": " +
                                e.what());
  }
  return parse_config(j);
}

json config_to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["paths"] = {{"series", c.paths.series},
                {"labels", c.paths.labels},
                {"sensor_labels", c.paths.sensor_labels},
                {"checkpoint", c.paths.checkpoint},
                {"flags", c.paths.flags}};
  j["sim"] = {
      {"kind", kernel_kind_name(c.sim.kind)},
      {"n", c.sim.n},
      {"T", c.sim.T},
      {"beta0", c.sim.beta0},
      {"beta1", c.sim.beta1},
      {"ma_weights",
       c.sim.ma_weights.empty() ? default_ma_weights() : c.sim.ma_weights},
      {"covariate_kernel",
       {{"sigma2", c.sim.covariate_kernel.sigma2},
        {"alpha", c.sim.covariate_kernel.range_alpha},
        {"nugget", c.sim.covariate_kernel.nugget_sigma02}}},
      {"random_effect_kernel",
       {{"sigma2", c.sim.random_effect_kernel.sigma2},
        {"alpha", c.sim.random_effect_kernel.range_alpha},
        {"nugget", c.sim.random_effect_kernel.nugget_sigma02}}},
      {"network",
       {{"branch_prob", c.sim.branch_prob}, {"depth", c.sim.depth}}}};
  j["anomaly"] = {{"n_drift", c.anomaly.n_drift},
                  {"n_var", c.anomaly.n_var},
                  {"lambda_drift", c.anomaly.lambda_drift},
                  {"lambda_var", c.anomaly.lambda_var},
                  {"delta", c.anomaly.delta},
                  {"zeta", c.anomaly.zeta}};
  j["split"] = {{"train_frac", c.split.train_frac},
                {"val_frac", c.split.val_frac}};
  j["model"] = {{"w", c.model.w},
                {"d", c.model.d},
                {"k", c.model.k},
                {"leaky_slope", c.model.leaky_slope},
                {"hidden_width", c.model.hidden_width},
                {"learning_rate", c.model.learning_rate},
                {"batch_size", c.model.batch_size},
                {"max_epochs", c.model.max_epochs},
                {"patience", c.model.patience},
                {"candidate_sets", c.model.candidate_sets}};
  j["detector"] = {{"tau", c.detector.tau},
                   {"sma_window", c.detector.sma_window},
                   {"iqr_floor", c.detector.iqr_floor}};
  std::vector<std::string> kernel_names;
  for (auto k : c.replicate.kernels)
    kernel_names.push_back(kernel_kind_name(k));
  const auto& r = c.replicate.ranges;
  j["replicate"] = {{"n_replicates", c.replicate.n_replicates},
                    {"kernels", kernel_names},
                    {"ranges",
                     {{"delta", r.delta},
                      {"zeta", r.zeta},
                      {"lambda_drift", r.lambda_drift},
                      {"lambda_var", r.lambda_var},
                      {"n_drift", r.n_drift},
                      {"n_var", r.n_var},
                      {"sigma2", r.sigma2},
                      {"alpha", r.alpha},
                      {"sigma02", r.sigma02},
                      {"beta0", r.beta0},
                      {"beta1", r.beta1}}}};
  return j;
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("--set expects key=value, got '" +
                                assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);

  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;  // plain string

  json* cur = &j;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(
        start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty())
      throw std::invalid_argument("--set key has an empty path segment: '" +
                                  key + "'");
    if (dot == std::string::npos) {
      (*cur)[part] = value;
      return;
    }
    if (!cur->contains(part) || !(*cur)[part].is_object())
      (*cur)[part] = json::object();
    cur = &(*cur)[part];
    start = dot + 1;
  }
}

}  // namespace gdn
