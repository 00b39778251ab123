#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace gdn::ad {

using Mat = Eigen::MatrixXd;

class Tape;

// Lightweight handle to a node on a tape.
class Var {
 public:
  Var() = default;
  const Mat& value() const;
  const Mat& grad() const;
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int idx) : tape_(tape), idx_(idx) {}
  Tape* tape_ = nullptr;
  int idx_ = -1;
};

// Reverse-mode tape over the fixed op set used by the forecaster. Nodes are
// recorded in evaluation order (already topological); backward() walks the
// tape in reverse, accumulating gradients additively across fan-out.
//
// Kink convention: ReLU / LeakyReLU use the right derivative at 0.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Mat value);      // differentiable parameter
  Var constant(Mat value);  // input; no gradient tracked

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var matmul(Var a, Var b);
  Var hadamard(Var a, Var b);
  Var scale(Var a, double c);
  Var transpose(Var a);
  Var concat_rows(Var a, Var b);
  // u (m x 1) -> (m x m) matrix with entry (i,j) = u_i + u_j.
  Var add_outer(Var u);
  Var relu(Var a);
  Var leaky_relu(Var a, double slope);
  // Row-wise softmax restricted to entries where mask != 0 (masked entries
  // yield 0). Uses max-subtraction for overflow safety. Rows with an empty
  // mask come out all-zero.
  Var masked_row_softmax(Var p, const Mat& mask);
  // a (r x c) plus column vector b (r x 1) broadcast over columns.
  Var colwise_add(Var a, Var b);
  // Sum of squared entries, as a 1x1 node.
  Var sum_sq(Var a);

  // Seeds d(out)/d(out) = 1 and back-propagates; out must be 1x1.
  // Gradients from earlier backward() calls on the same tape are cleared.
  void backward(Var out);

  std::size_t size() const { return nodes_.size(); }

  // Accessors used by op closures during backward.
  Mat& grad_of(int idx) { return nodes_[static_cast<std::size_t>(idx)].grad; }
  const Mat& value_of(int idx) const {
    return nodes_[static_cast<std::size_t>(idx)].value;
  }
  bool tracks_grad(int idx) const {
    return nodes_[static_cast<std::size_t>(idx)].requires_grad;
  }

 private:
  friend class Var;
  using BackFn = std::function<void(Tape&, const Mat&)>;
  struct Node {
    Mat value;
    Mat grad;
    bool requires_grad = false;
    BackFn back;  // accumulates this node's grad into its inputs' grads
    const char* op = "leaf";
  };

  Var push(Mat value, bool requires_grad, const char* op, BackFn back);
  Node& node(Var v);
  const Node& node(Var v) const;
  bool needs_grad(Var a) const;
  int next_index() const { return static_cast<int>(nodes_.size()); }

  std::vector<Node> nodes_;
};

// Per-parameter-block result of a finite-difference gradient verification.
struct GradCheckBlock {
  std::string name;
  double max_rel_err = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckBlock> blocks;
  double max_rel_err = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// A graph builder: given a fresh tape and leaves for the parameter blocks,
// returns a scalar (1x1) output node.
using GraphFn = std::function<Var(Tape&, const std::vector<Var>&)>;

// Compares reverse-mode gradients against central finite differences
// (entry-wise, step h). The reported error is |ad - fd| scaled by
// max(|ad|, |fd|, 1e-3).
GradCheckReport finite_diff_check(const GraphFn& graph,
                                  const std::vector<Mat>& params,
                                  const std::vector<std::string>& names,
                                  double tolerance, double step = 1e-5);

}  // namespace gdn::ad
