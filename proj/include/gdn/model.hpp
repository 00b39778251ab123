#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "gdn/autodiff.hpp"
#include "gdn/series.hpp"

namespace gdn {

struct GdnHyperparams {
  int w = 3;    // lag window length
  int d = 16;   // embedding dimension
  int k = 5;    // top-K neighbor count
  double leaky_slope = 0.2;
  int hidden_width = 64;  // output-network hidden size
  double learning_rate = 1e-3;
  int batch_size = 32;
  int max_epochs = 50;
  int patience = 10;
  // candidate_sets[i] lists the sensors allowed to appear in i's
  // in-neighborhood; empty means all-minus-self for every sensor.
  std::vector<std::vector<int>> candidate_sets;
  std::uint64_t seed = 1;

  void validate(int n_sensors) const;
  std::vector<std::vector<int>> effective_candidates(int n_sensors) const;
};

// All trainable parameters. The output network is a shared per-node map
// d -> hidden -> 1: relu(W1 * g + b1), then w2 . h + b2.
struct GdnParams {
  Eigen::MatrixXd V;   // n x d sensor embeddings (rows v_i)
  Eigen::MatrixXd W;   // d x w shared lag transform
  Eigen::VectorXd a;   // 2d attention vector
  Eigen::MatrixXd W1;  // hidden x d
  Eigen::VectorXd b1;  // hidden
  Eigen::VectorXd w2;  // hidden
  double b2 = 0.0;
};

struct LearnedGraph {
  Eigen::MatrixXd similarities;  // e, with e(j,i) = cos(v_i, v_j) * [j in C_i]
  Eigen::MatrixXi adjacency;     // A, 0/1
};

// e(j,i) = cosine(v_i, v_j) masked to candidates. Throws if any embedding
// row has zero norm (names the sensor).
Eigen::MatrixXd cosine_similarities(
    const Eigen::MatrixXd& V,
    const std::vector<std::vector<int>>& candidate_sets);

// Literal top-K rule: per row j, ones at the K largest off-diagonal e(j,i)
// (ties broken towards the lowest column index); diagonal forced to 1.
Eigen::MatrixXi topk_adjacency(const Eigen::MatrixXd& e, int k);

// Top-K restricted to candidate-permitted entries: entry (j,i) is eligible
// only when j is in C_i, so rows may carry fewer than K ones when candidates
// are scarce (empty candidate sets give the identity).
Eigen::MatrixXi masked_topk_adjacency(
    const Eigen::MatrixXd& e, int k,
    const std::vector<std::vector<int>>& candidate_sets);

LearnedGraph build_graph(const Eigen::MatrixXd& V, int k,
                         const std::vector<std::vector<int>>& candidate_sets);

struct ForwardResult {
  Eigen::VectorXd prediction;  // n
  Eigen::MatrixXd attention;   // alpha, n x n; row i sums to 1
};

// One forward pass on an n x w input window through the frozen graph.
ForwardResult attention_forward(const GdnParams& params,
                                const Eigen::MatrixXi& adjacency,
                                const Eigen::MatrixXd& input,
                                const GdnHyperparams& hp);

// Mean over the batch of the squared prediction-error norm.
double gdn_loss(const GdnParams& params, const Eigen::MatrixXi& adjacency,
                const std::vector<WindowSample>& batch,
                const GdnHyperparams& hp);

// Parameter blocks in optimizer order: V, W, a, W1, b1, w2, b2.
std::vector<ad::Mat> params_to_blocks(const GdnParams& params);
GdnParams params_from_blocks(const std::vector<ad::Mat>& blocks);
std::vector<std::string> param_block_names();

// Builds the full forward+loss graph for a batch on the given tape; `leaves`
// must hold the parameter blocks in params_to_blocks order. Used by training
// and by gradient verification.
ad::Var gdn_loss_graph(ad::Tape& tape, const std::vector<ad::Var>& leaves,
                       const Eigen::MatrixXi& adjacency,
                       const std::vector<WindowSample>& batch,
                       const GdnHyperparams& hp);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct FittedModel {
  GdnParams params;
  GdnHyperparams hp;
  int n = 0;
  std::vector<std::string> sensor_ids;  // optional; set by the CLI pipeline
  ScalingStats scaling;                 // optional; set by the CLI pipeline
  std::vector<EpochStats> history;
  Eigen::MatrixXi adjacency;  // frozen at the best validation epoch
  // Raw |y - yhat| on the validation block (scaled space); filled by the
  // training pipeline so detection can derive normalization statistics.
  Eigen::MatrixXd validation_errors;
  std::vector<long long> validation_ticks;
};

// Mini-batch training with adaptive-moment updates and early stopping on
// validation loss; returns the best-validation-epoch parameters with the
// adjacency recomputed per epoch and frozen at that epoch. Deterministic
// per hp.seed. Throws NumericalError on divergence.
FittedModel train(const std::vector<WindowSample>& train_windows,
                  const std::vector<WindowSample>& val_windows,
                  const GdnHyperparams& hp);

// One prediction row per target tick (T - w rows). The series must already
// be in the model's scaled space; the model is not mutated.
Eigen::MatrixXd predict_series(const FittedModel& model,
                               const MultivariateSeries& series);

// Versioned JSON checkpoint: hyperparameters, scaling stats, parameter
// tensors (row-major, 64-bit), frozen adjacency, validation errors.
void save_model(const FittedModel& model, const std::string& path);
FittedModel load_model(const std::string& path);

void write_history(const FittedModel& model, const std::string& path);

}  // namespace gdn
