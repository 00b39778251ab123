#include "gdn/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "gdn/errors.hpp"
#include "gdn/rng.hpp"
#include "json.hpp"

namespace gdn {

using ad::Mat;
using ad::Tape;
using ad::Var;

void GdnHyperparams::validate(int n_sensors) const {
  if (n_sensors < 2) throw std::invalid_argument("need at least two sensors");
  if (w < 1) throw std::invalid_argument("window length must be >= 1");
  if (d < 1) throw std::invalid_argument("embedding dimension must be >= 1");
  if (k < 1 || k > n_sensors - 1)
    throw std::invalid_argument("top-K must lie in [1, n-1]");
  if (!(leaky_slope > 0.0))
    throw std::invalid_argument("leaky slope must be > 0");
  if (hidden_width < 1)
    throw std::invalid_argument("hidden width must be >= 1");
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("learning rate must be > 0");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (max_epochs < 1) throw std::invalid_argument("max epochs must be >= 1");
  if (patience < 0) throw std::invalid_argument("patience must be >= 0");
  if (!candidate_sets.empty()) {
    if (static_cast<int>(candidate_sets.size()) != n_sensors)
      throw std::invalid_argument("candidate_sets must have one set per sensor");
    for (int i = 0; i < n_sensors; ++i) {
      for (int j : candidate_sets[static_cast<std::size_t>(i)]) {
        if (j < 0 || j >= n_sensors)
          throw std::invalid_argument("candidate id out of range");
        if (j == i)
          throw std::invalid_argument("candidate set " + std::to_string(i) +
                                      " must not contain its own sensor");
      }
    }
  }
}

std::vector<std::vector<int>> GdnHyperparams::effective_candidates(
    int n_sensors) const {
  if (!candidate_sets.empty()) return candidate_sets;
  std::vector<std::vector<int>> all(static_cast<std::size_t>(n_sensors));
  for (int i = 0; i < n_sensors; ++i)
    for (int j = 0; j < n_sensors; ++j)
      if (j != i) all[static_cast<std::size_t>(i)].push_back(j);
  return all;
}

Eigen::MatrixXd cosine_similarities(
    const Eigen::MatrixXd& V,
    const std::vector<std::vector<int>>& candidate_sets) {
  const auto n = V.rows();
  if (static_cast<Eigen::Index>(candidate_sets.size()) != n)
    throw std::invalid_argument("candidate_sets size must equal sensor count");
  Eigen::VectorXd norms(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    norms(i) = V.row(i).norm();
    if (norms(i) == 0.0)
      throw std::invalid_argument("sensor " + std::to_string(i) +
                                  " has a zero-norm embedding");
  }
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j : candidate_sets[static_cast<std::size_t>(i)]) {
      e(j, i) = V.row(i).dot(V.row(j)) / (norms(i) * norms(j));
    }
  }
  return e;
}

namespace {

// Top-K selection for one row: indices of the K largest values among
// `eligible` columns, ties resolved towards the lowest index.
std::vector<Eigen::Index> topk_row(const Eigen::MatrixXd& e, Eigen::Index row,
                                   const std::vector<Eigen::Index>& eligible,
                                   int k) {
  std::vector<Eigen::Index> idx = eligible;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Eigen::Index a, Eigen::Index b) {
                     if (e(row, a) != e(row, b)) return e(row, a) > e(row, b);
                     return a < b;
                   });
  if (static_cast<int>(idx.size()) > k) idx.resize(static_cast<std::size_t>(k));
  return idx;
}

}  // namespace

Eigen::MatrixXi topk_adjacency(const Eigen::MatrixXd& e, int k) {
  const auto n = e.rows();
  if (e.cols() != n) throw std::invalid_argument("similarity matrix not square");
  if (k < 1 || k > n - 1)
    throw std::invalid_argument("top-K must lie in [1, n-1]");
  Eigen::MatrixXi A = Eigen::MatrixXi::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    std::vector<Eigen::Index> eligible;
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != j) eligible.push_back(i);
    for (Eigen::Index i : topk_row(e, j, eligible, k)) A(j, i) = 1;
    A(j, j) = 1;
  }
  return A;
}

Eigen::MatrixXi masked_topk_adjacency(
    const Eigen::MatrixXd& e, int k,
    const std::vector<std::vector<int>>& candidate_sets) {
  const auto n = e.rows();
  if (e.cols() != n) throw std::invalid_argument("similarity matrix not square");
  if (static_cast<Eigen::Index>(candidate_sets.size()) != n)
    throw std::invalid_argument("candidate_sets size must equal sensor count");
  if (k < 1 || k > n - 1)
    throw std::invalid_argument("top-K must lie in [1, n-1]");
  // allowed(j, i): may sensor j feed into sensor i
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> allowed(n, n);
  allowed.setConstant(false);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j : candidate_sets[static_cast<std::size_t>(i)])
      allowed(j, i) = true;
  Eigen::MatrixXi A = Eigen::MatrixXi::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    std::vector<Eigen::Index> eligible;
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != j && allowed(j, i)) eligible.push_back(i);
    for (Eigen::Index i : topk_row(e, j, eligible, k)) A(j, i) = 1;
    A(j, j) = 1;
  }
  return A;
}

LearnedGraph build_graph(const Eigen::MatrixXd& V, int k,
                         const std::vector<std::vector<int>>& candidate_sets) {
  LearnedGraph g;
  g.similarities = cosine_similarities(V, candidate_sets);
  g.adjacency = masked_topk_adjacency(g.similarities, k, candidate_sets);
  return g;
}

namespace {

struct ParamLeaves {
  Var V, W, a, W1, b1, w2, b2;
  Var Vt;   // transpose(V), shared across the batch
  Var w2t;  // transpose(w2)
};

ParamLeaves make_leaves(Tape& tape, const GdnParams& p) {
  ParamLeaves l;
  l.V = tape.leaf(p.V);
  l.W = tape.leaf(p.W);
  l.a = tape.leaf(p.a);
  l.W1 = tape.leaf(p.W1);
  l.b1 = tape.leaf(p.b1);
  l.w2 = tape.leaf(p.w2);
  l.b2 = tape.leaf(Mat::Constant(1, 1, p.b2));
  l.Vt = tape.transpose(l.V);
  l.w2t = tape.transpose(l.w2);
  return l;
}

struct SampleForward {
  Var y_row;  // 1 x n prediction
  Var alpha;  // n x n attention
};

// Forward pass for one window. mask(i, j) = A(j, i): row i of the softmax
// runs over i's in-neighborhood.
SampleForward forward_sample(Tape& tape, const ParamLeaves& l,
                             const Eigen::MatrixXd& input, const Mat& mask,
                             double leaky_slope) {
  SampleForward f;
  Var X = tape.constant(input.transpose());     // w x n
  Var H = tape.matmul(l.W, X);                  // d x n, column i = W x_i
  Var G = tape.concat_rows(l.Vt, H);            // 2d x n, column i = v_i (+) W x_i
  Var u = tape.matmul(tape.transpose(G), l.a);  // n x 1, u_i = a . g_i
  Var P = tape.leaky_relu(tape.add_outer(u), leaky_slope);
  f.alpha = tape.masked_row_softmax(P, mask);
  Var Z = tape.relu(tape.matmul(H, tape.transpose(f.alpha)));  // d x n
  Var O = tape.hadamard(l.Vt, Z);               // v_i ⊙ z_i per column
  Var Hh = tape.relu(tape.colwise_add(tape.matmul(l.W1, O), l.b1));
  f.y_row = tape.colwise_add(tape.matmul(l.w2t, Hh), l.b2);  // 1 x n
  return f;
}

Mat adjacency_mask(const Eigen::MatrixXi& A) {
  // mask(i, j) = A(j, i)
  return A.transpose().cast<double>();
}

void check_finite(const Eigen::MatrixXd& m, const char* stage) {
  if (!m.allFinite())
    throw NumericalError(std::string("non-finite values at stage: ") + stage);
}

}  // namespace

ForwardResult attention_forward(const GdnParams& params,
                                const Eigen::MatrixXi& adjacency,
                                const Eigen::MatrixXd& input,
                                const GdnHyperparams& hp) {
  const auto n = params.V.rows();
  if (input.rows() != n || input.cols() != hp.w)
    throw std::invalid_argument("attention_forward: input must be n x w");
  if (adjacency.rows() != n || adjacency.cols() != n)
    throw std::invalid_argument("attention_forward: adjacency must be n x n");
  Tape tape;
  ParamLeaves l = make_leaves(tape, params);
  const Mat mask = adjacency_mask(adjacency);
  SampleForward f = forward_sample(tape, l, input, mask, hp.leaky_slope);
  check_finite(f.alpha.value(), "attention");
  check_finite(f.y_row.value(), "output");
  ForwardResult r;
  r.prediction = f.y_row.value().row(0).transpose();
  r.attention = f.alpha.value();
  return r;
}

double gdn_loss(const GdnParams& params, const Eigen::MatrixXi& adjacency,
                const std::vector<WindowSample>& batch,
                const GdnHyperparams& hp) {
  if (batch.empty()) throw std::invalid_argument("loss: empty batch");
  const Mat mask = adjacency_mask(adjacency);
  double total = 0.0;
  Tape tape;
  ParamLeaves l = make_leaves(tape, params);
  for (const auto& s : batch) {
    SampleForward f = forward_sample(tape, l, s.input, mask, hp.leaky_slope);
    total += (f.y_row.value().row(0).transpose() - s.target).squaredNorm();
  }
  return total / static_cast<double>(batch.size());
}

std::vector<Mat> params_to_blocks(const GdnParams& p) {
  return {p.V, p.W, p.a, p.W1, p.b1, p.w2, Mat::Constant(1, 1, p.b2)};
}

GdnParams params_from_blocks(const std::vector<Mat>& b) {
  if (b.size() != 7)
    throw std::invalid_argument("expected 7 parameter blocks");
  GdnParams p;
  p.V = b[0];
  p.W = b[1];
  p.a = b[2];
  p.W1 = b[3];
  p.b1 = b[4];
  p.w2 = b[5];
  p.b2 = b[6](0, 0);
  return p;
}

std::vector<std::string> param_block_names() {
  return {"V", "W", "a", "W1", "b1", "w2", "b2"};
}

ad::Var gdn_loss_graph(Tape& tape, const std::vector<Var>& leaves,
                       const Eigen::MatrixXi& adjacency,
                       const std::vector<WindowSample>& batch,
                       const GdnHyperparams& hp) {
  if (leaves.size() != 7)
    throw std::invalid_argument("expected 7 parameter leaves");
  if (batch.empty()) throw std::invalid_argument("loss graph: empty batch");
  ParamLeaves l;
  l.V = leaves[0];
  l.W = leaves[1];
  l.a = leaves[2];
  l.W1 = leaves[3];
  l.b1 = leaves[4];
  l.w2 = leaves[5];
  l.b2 = leaves[6];
  l.Vt = tape.transpose(l.V);
  l.w2t = tape.transpose(l.w2);
  const Mat mask = adjacency_mask(adjacency);
  Var loss_sum;
  for (const auto& sample : batch) {
    SampleForward f =
        forward_sample(tape, l, sample.input, mask, hp.leaky_slope);
    Var target = tape.constant(sample.target.transpose());
    Var ls = tape.sum_sq(tape.sub(f.y_row, target));
    loss_sum = loss_sum.valid() ? tape.add(loss_sum, ls) : ls;
  }
  return tape.scale(loss_sum, 1.0 / static_cast<double>(batch.size()));
}

namespace {

GdnParams init_params(int n, const GdnHyperparams& hp) {
  Rng rng = make_rng(derive_seed(hp.seed, "init"));
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto uniform_fan_in = [&](Eigen::Index rows, Eigen::Index cols,
                            double fan_in) {
    const double bound = 1.0 / std::sqrt(fan_in);
    std::uniform_real_distribution<double> u(-bound, bound);
    Mat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = u(rng);
    return m;
  };
  GdnParams p;
  const double embed_sd = 1.0 / std::sqrt(static_cast<double>(hp.d));
  p.V.resize(n, hp.d);
  for (Eigen::Index r = 0; r < p.V.rows(); ++r)
    for (Eigen::Index c = 0; c < p.V.cols(); ++c)
      p.V(r, c) = embed_sd * gauss(rng);
  p.W = uniform_fan_in(hp.d, hp.w, hp.w);
  p.a = uniform_fan_in(2 * hp.d, 1, 2.0 * hp.d);
  p.W1 = uniform_fan_in(hp.hidden_width, hp.d, hp.d);
  p.b1 = Eigen::VectorXd::Zero(hp.hidden_width);
  p.w2 = uniform_fan_in(hp.hidden_width, 1, hp.hidden_width);
  p.b2 = 0.0;
  return p;
}

struct AdamState {
  std::vector<Mat> m, v;
  long long t = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  explicit AdamState(const std::vector<Mat>& blocks) {
    for (const auto& b : blocks) {
      m.push_back(Mat::Zero(b.rows(), b.cols()));
      v.push_back(Mat::Zero(b.rows(), b.cols()));
    }
  }

  void step(std::vector<Mat>& blocks, const std::vector<Mat>& grads,
            double lr) {
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * grads[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * grads[i].cwiseProduct(grads[i]);
      const Mat mhat = m[i] / bc1;
      const Mat vhat = v[i] / bc2;
      blocks[i] -= lr * (mhat.array() / (vhat.array().sqrt() + eps)).matrix();
    }
  }
};

double dataset_loss(const GdnParams& params, const Eigen::MatrixXi& A,
                    const std::vector<WindowSample>& windows,
                    const GdnHyperparams& hp) {
  // chunked so tapes stay small
  const std::size_t chunk = 256;
  double total = 0.0;
  const Mat mask = adjacency_mask(A);
  for (std::size_t start = 0; start < windows.size(); start += chunk) {
    Tape tape;
    ParamLeaves l = make_leaves(tape, params);
    const std::size_t end = std::min(windows.size(), start + chunk);
    for (std::size_t s = start; s < end; ++s) {
      SampleForward f =
          forward_sample(tape, l, windows[s].input, mask, hp.leaky_slope);
      total +=
          (f.y_row.value().row(0).transpose() - windows[s].target).squaredNorm();
    }
  }
  return total / static_cast<double>(windows.size());
}

}  // namespace

FittedModel train(const std::vector<WindowSample>& train_windows,
                  const std::vector<WindowSample>& val_windows,
                  const GdnHyperparams& hp) {
  if (train_windows.empty())
    throw std::invalid_argument("train: empty training set");
  if (val_windows.empty())
    throw std::invalid_argument("train: empty validation set");
  const int n = static_cast<int>(train_windows[0].input.rows());
  hp.validate(n);
  const auto candidates = hp.effective_candidates(n);

  std::vector<Mat> blocks = params_to_blocks(init_params(n, hp));
  AdamState adam(blocks);
  Rng shuffle_rng = make_rng(derive_seed(hp.seed, "shuffle"));

  std::vector<std::size_t> order(train_windows.size());
  std::iota(order.begin(), order.end(), 0);

  FittedModel model;
  model.hp = hp;
  model.n = n;

  double best_val = std::numeric_limits<double>::infinity();
  std::vector<Mat> best_blocks = blocks;
  Eigen::MatrixXi best_adjacency;
  int non_improving = 0;

  std::vector<WindowSample> batch;
  for (int epoch = 1; epoch <= hp.max_epochs; ++epoch) {
    const GdnParams epoch_params = params_from_blocks(blocks);
    const Eigen::MatrixXi A =
        masked_topk_adjacency(cosine_similarities(epoch_params.V, candidates),
                              hp.k, candidates);

    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double epoch_loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(hp.batch_size)) {
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(hp.batch_size));
      const double bsize = static_cast<double>(end - start);
      batch.clear();
      for (std::size_t s = start; s < end; ++s)
        batch.push_back(train_windows[order[s]]);

      Tape tape;
      std::vector<Var> leaves;
      for (const auto& b : blocks) leaves.push_back(tape.leaf(b));
      Var loss = gdn_loss_graph(tape, leaves, A, batch, hp);
      const double loss_value = loss.value()(0, 0);
      if (!std::isfinite(loss_value))
        throw NumericalError("training diverged (non-finite loss) at epoch " +
                             std::to_string(epoch));
      tape.backward(loss);

      std::vector<Mat> grads;
      for (const auto& leaf : leaves) grads.push_back(leaf.grad());
      adam.step(blocks, grads, hp.learning_rate);
      epoch_loss_sum += loss_value * bsize;
    }

    const double train_loss =
        epoch_loss_sum / static_cast<double>(train_windows.size());
    const double val_loss =
        dataset_loss(params_from_blocks(blocks), A, val_windows, hp);
    model.history.push_back({epoch, train_loss, val_loss});

    if (val_loss < best_val) {
      best_val = val_loss;
      best_blocks = blocks;
      best_adjacency = A;
      non_improving = 0;
    } else {
      ++non_improving;
      if (non_improving > hp.patience) break;
    }
  }

  model.params = params_from_blocks(best_blocks);
  model.adjacency = best_adjacency;
  return model;
}

Eigen::MatrixXd predict_series(const FittedModel& model,
                               const MultivariateSeries& series) {
  if (series.sensors() != model.n)
    throw std::invalid_argument("series sensor count does not match model");
  const auto windows = window_dataset(series, model.hp.w);
  Eigen::MatrixXd preds(static_cast<Eigen::Index>(windows.size()), model.n);
  const Mat mask = adjacency_mask(model.adjacency);
  const std::size_t chunk = 256;
  for (std::size_t start = 0; start < windows.size(); start += chunk) {
    Tape tape;
    ParamLeaves l = make_leaves(tape, model.params);
    const std::size_t end = std::min(windows.size(), start + chunk);
    for (std::size_t s = start; s < end; ++s) {
      SampleForward f = forward_sample(tape, l, windows[s].input, mask,
                                       model.hp.leaky_slope);
      check_finite(f.y_row.value(), "output");
      preds.row(static_cast<Eigen::Index>(s)) = f.y_row.value().row(0);
    }
  }
  return preds;
}

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw IoError("checkpoint matrix size mismatch");
  Eigen::MatrixXd m(rows, cols);
  std::size_t idx = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = data[idx++].get<double>();
  return m;
}

constexpr int kCheckpointVersion = 1;

}  // namespace

void save_model(const FittedModel& model, const std::string& path) {
  json j;
  j["format"] = "gdn-checkpoint";
  j["version"] = kCheckpointVersion;
  j["n"] = model.n;
  j["sensor_ids"] = model.sensor_ids;
  j["hyperparams"] = {{"w", model.hp.w},
                      {"d", model.hp.d},
                      {"k", model.hp.k},
                      {"leaky_slope", model.hp.leaky_slope},
                      {"hidden_width", model.hp.hidden_width},
                      {"learning_rate", model.hp.learning_rate},
                      {"batch_size", model.hp.batch_size},
                      {"max_epochs", model.hp.max_epochs},
                      {"patience", model.hp.patience},
                      {"candidate_sets", model.hp.candidate_sets},
                      {"seed", model.hp.seed}};
  if (!model.scaling.empty()) {
    j["scaling"] = {
        {"min", std::vector<double>(model.scaling.min.begin(),
                                    model.scaling.min.end())},
        {"max", std::vector<double>(model.scaling.max.begin(),
                                    model.scaling.max.end())}};
  }
  j["params"] = {{"V", matrix_to_json(model.params.V)},
                 {"W", matrix_to_json(model.params.W)},
                 {"a", matrix_to_json(model.params.a)},
                 {"W1", matrix_to_json(model.params.W1)},
                 {"b1", matrix_to_json(model.params.b1)},
                 {"w2", matrix_to_json(model.params.w2)},
                 {"b2", model.params.b2}};
  json adj = json::array();
  for (Eigen::Index r = 0; r < model.adjacency.rows(); ++r)
    for (Eigen::Index c = 0; c < model.adjacency.cols(); ++c)
      adj.push_back(model.adjacency(r, c));
  j["adjacency"] = adj;
  json hist = json::array();
  for (const auto& h : model.history)
    hist.push_back({h.epoch, h.train_loss, h.val_loss});
  j["history"] = hist;
  if (model.validation_errors.size() > 0) {
    j["validation_errors"] = matrix_to_json(model.validation_errors);
    j["validation_ticks"] = model.validation_ticks;
  }

  std::ofstream f(path);
  if (!f) throw IoError("cannot write file: " + path);
  f << j.dump(1) << '\n';
  if (!f) throw IoError("write failed: " + path);
}

FittedModel load_model(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open file: " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw IoError("checkpoint parse error in " + path + ": " + e.what());
  }
  if (j.value("format", "") != "gdn-checkpoint")
    throw std::invalid_argument(path + " is not a checkpoint file");
  if (j.value("version", -1) != kCheckpointVersion)
    throw std::invalid_argument("checkpoint version mismatch in " + path);

  FittedModel m;
  m.n = j.at("n").get<int>();
  m.sensor_ids = j.value("sensor_ids", std::vector<std::string>{});
  const auto& h = j.at("hyperparams");
  m.hp.w = h.at("w").get<int>();
  m.hp.d = h.at("d").get<int>();
  m.hp.k = h.at("k").get<int>();
  m.hp.leaky_slope = h.at("leaky_slope").get<double>();
  m.hp.hidden_width = h.at("hidden_width").get<int>();
  m.hp.learning_rate = h.at("learning_rate").get<double>();
  m.hp.batch_size = h.at("batch_size").get<int>();
  m.hp.max_epochs = h.at("max_epochs").get<int>();
  m.hp.patience = h.at("patience").get<int>();
  m.hp.candidate_sets =
      h.value("candidate_sets", std::vector<std::vector<int>>{});
  m.hp.seed = h.at("seed").get<std::uint64_t>();

  if (j.contains("scaling")) {
    const auto mins = j["scaling"].at("min").get<std::vector<double>>();
    const auto maxs = j["scaling"].at("max").get<std::vector<double>>();
    m.scaling.min = Eigen::Map<const Eigen::VectorXd>(
        mins.data(), static_cast<Eigen::Index>(mins.size()));
    m.scaling.max = Eigen::Map<const Eigen::VectorXd>(
        maxs.data(), static_cast<Eigen::Index>(maxs.size()));
  }

  const auto& p = j.at("params");
  m.params.V = matrix_from_json(p.at("V"));
  m.params.W = matrix_from_json(p.at("W"));
  m.params.a = matrix_from_json(p.at("a"));
  m.params.W1 = matrix_from_json(p.at("W1"));
  m.params.b1 = matrix_from_json(p.at("b1"));
  m.params.w2 = matrix_from_json(p.at("w2"));
  m.params.b2 = p.at("b2").get<double>();
  const bool finite = m.params.V.allFinite() && m.params.W.allFinite() &&
                      m.params.a.allFinite() && m.params.W1.allFinite() &&
                      m.params.b1.allFinite() && m.params.w2.allFinite() &&
                      std::isfinite(m.params.b2);
  if (!finite)
    throw IoError("checkpoint holds non-finite parameters: " + path);

  const auto& adj = j.at("adjacency");
  m.adjacency.resize(m.n, m.n);
  if (static_cast<int>(adj.size()) != m.n * m.n)
    throw IoError("checkpoint adjacency size mismatch");
  std::size_t idx = 0;
  for (int r = 0; r < m.n; ++r)
    for (int c = 0; c < m.n; ++c) m.adjacency(r, c) = adj[idx++].get<int>();

  for (const auto& row : j.value("history", json::array()))
    m.history.push_back({row.at(0).get<int>(), row.at(1).get<double>(),
                         row.at(2).get<double>()});

  if (j.contains("validation_errors")) {
    m.validation_errors = matrix_from_json(j["validation_errors"]);
    m.validation_ticks =
        j.value("validation_ticks", std::vector<long long>{});
  }
  return m;
}

void write_history(const FittedModel& model, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write file: " + path);
  f << "epoch,train_loss,val_loss\n";
  for (const auto& h : model.history)
    f << h.epoch << ',' << format_double(h.train_loss) << ','
      << format_double(h.val_loss) << '\n';
  if (!f) throw IoError("write failed: " + path);
}

}  // namespace gdn
