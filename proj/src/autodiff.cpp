#include "gdn/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gdn::ad {

namespace {

[[noreturn]] void shape_error(const char* op, const Mat& a, const Mat& b) {
  throw std::invalid_argument(
      std::string(op) + ": incompatible shapes (" + std::to_string(a.rows()) +
      "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
      "x" + std::to_string(b.cols()) + ")");
}

}  // namespace

const Mat& Var::value() const {
  if (!tape_) throw std::logic_error("unbound Var");
  return tape_->value_of(idx_);
}

const Mat& Var::grad() const {
  if (!tape_) throw std::logic_error("unbound Var");
  Tape* t = tape_;
  Mat& g = t->grad_of(idx_);
  if (g.size() == 0)
    throw std::logic_error("gradient not computed; call backward first");
  return g;
}

Tape::Node& Tape::node(Var v) {
  if (v.tape_ != this) throw std::logic_error("Var belongs to another tape");
  return nodes_[static_cast<std::size_t>(v.idx_)];
}

const Tape::Node& Tape::node(Var v) const {
  if (v.tape_ != this) throw std::logic_error("Var belongs to another tape");
  return nodes_[static_cast<std::size_t>(v.idx_)];
}

bool Tape::needs_grad(Var a) const { return node(a).requires_grad; }

Var Tape::push(Mat value, bool requires_grad, const char* op, BackFn back) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.back = std::move(back);
  n.op = op;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::leaf(Mat value) { return push(std::move(value), true, "leaf", {}); }

Var Tape::constant(Mat value) {
  return push(std::move(value), false, "constant", {});
}

Var Tape::add(Var a, Var b) {
  const Mat& av = node(a).value;
  const Mat& bv = node(b).value;
  if (av.rows() != bv.rows() || av.cols() != bv.cols())
    shape_error("add", av, bv);
  const int ai = a.idx_, bi = b.idx_;
  return push(av + bv, needs_grad(a) || needs_grad(b), "add",
              [ai, bi](Tape& t, const Mat& g) {
                if (t.tracks_grad(ai)) t.grad_of(ai) += g;
                if (t.tracks_grad(bi)) t.grad_of(bi) += g;
              });
}

Var Tape::sub(Var a, Var b) {
  const Mat& av = node(a).value;
  const Mat& bv = node(b).value;
  if (av.rows() != bv.rows() || av.cols() != bv.cols())
    shape_error("sub", av, bv);
  const int ai = a.idx_, bi = b.idx_;
  return push(av - bv, needs_grad(a) || needs_grad(b), "sub",
              [ai, bi](Tape& t, const Mat& g) {
                if (t.tracks_grad(ai)) t.grad_of(ai) += g;
                if (t.tracks_grad(bi)) t.grad_of(bi) -= g;
              });
}

Var Tape::matmul(Var a, Var b) {
  const Mat& av = node(a).value;
  const Mat& bv = node(b).value;
  if (av.cols() != bv.rows()) shape_error("matmul", av, bv);
  const int ai = a.idx_, bi = b.idx_;
  return push(av * bv, needs_grad(a) || needs_grad(b), "matmul",
              [ai, bi](Tape& t, const Mat& g) {
                if (t.tracks_grad(ai))
                  t.grad_of(ai) += g * t.value_of(bi).transpose();
                if (t.tracks_grad(bi))
                  t.grad_of(bi) += t.value_of(ai).transpose() * g;
              });
}

Var Tape::hadamard(Var a, Var b) {
  const Mat& av = node(a).value;
  const Mat& bv = node(b).value;
  if (av.rows() != bv.rows() || av.cols() != bv.cols())
    shape_error("hadamard", av, bv);
  const int ai = a.idx_, bi = b.idx_;
  return push(av.cwiseProduct(bv), needs_grad(a) || needs_grad(b), "hadamard",
              [ai, bi](Tape& t, const Mat& g) {
                if (t.tracks_grad(ai))
                  t.grad_of(ai) += g.cwiseProduct(t.value_of(bi));
                if (t.tracks_grad(bi))
                  t.grad_of(bi) += g.cwiseProduct(t.value_of(ai));
              });
}

Var Tape::scale(Var a, double c) {
  const int ai = a.idx_;
  return push(node(a).value * c, needs_grad(a), "scale",
              [ai, c](Tape& t, const Mat& g) {
                if (t.tracks_grad(ai)) t.grad_of(ai) += c * g;
              });
}

Var Tape::transpose(Var a) {
  const int ai = a.idx_;
  return push(node(a).value.transpose(), needs_grad(a), "transpose",
              [ai](Tape& t, const Mat& g) {
                if (t.tracks_grad(ai)) t.grad_of(ai) += g.transpose();
              });
}

Var Tape::concat_rows(Var a, Var b) {
  const Mat& av = node(a).value;
  const Mat& bv = node(b).value;
  if (av.cols() != bv.cols()) shape_error("concat_rows", av, bv);
  Mat out(av.rows() + bv.rows(), av.cols());
  out.topRows(av.rows()) = av;
  out.bottomRows(bv.rows()) = bv;
  const int ai = a.idx_, bi = b.idx_;
  const auto ra = av.rows(), rb = bv.rows();
  return push(std::move(out), needs_grad(a) || needs_grad(b), "concat_rows",
              [ai, bi, ra, rb](Tape& t, const Mat& g) {
                if (t.tracks_grad(ai)) t.grad_of(ai) += g.topRows(ra);
                if (t.tracks_grad(bi)) t.grad_of(bi) += g.bottomRows(rb);
              });
}

Var Tape::add_outer(Var u) {
  const Mat& uv = node(u).value;
  if (uv.cols() != 1)
    throw std::invalid_argument("add_outer: input must be a column vector");
  const auto m = uv.rows();
  Mat out(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) out(i, j) = uv(i) + uv(j);
  const int ui = u.idx_;
  return push(std::move(out), needs_grad(u), "add_outer",
              [ui](Tape& t, const Mat& g) {
                if (!t.tracks_grad(ui)) return;
                t.grad_of(ui) +=
                    g.rowwise().sum() + g.colwise().sum().transpose();
              });
}

Var Tape::relu(Var a) {
  const Mat& av = node(a).value;
  const int ai = a.idx_;
  return push(av.cwiseMax(0.0), needs_grad(a), "relu",
              [ai](Tape& t, const Mat& g) {
                if (!t.tracks_grad(ai)) return;
                const Mat& v = t.value_of(ai);
                Mat& ga = t.grad_of(ai);
                for (Eigen::Index c = 0; c < v.cols(); ++c)
                  for (Eigen::Index r = 0; r < v.rows(); ++r)
                    if (v(r, c) >= 0.0) ga(r, c) += g(r, c);
              });
}

Var Tape::leaky_relu(Var a, double slope) {
  if (!(slope > 0.0))
    throw std::invalid_argument("leaky_relu: slope must be > 0");
  const Mat& av = node(a).value;
  const int ai = a.idx_;
  return push(av.cwiseMax(av * slope), needs_grad(a), "leaky_relu",
              [ai, slope](Tape& t, const Mat& g) {
                if (!t.tracks_grad(ai)) return;
                const Mat& v = t.value_of(ai);
                Mat& ga = t.grad_of(ai);
                for (Eigen::Index c = 0; c < v.cols(); ++c)
                  for (Eigen::Index r = 0; r < v.rows(); ++r)
                    ga(r, c) += g(r, c) * (v(r, c) >= 0.0 ? 1.0 : slope);
              });
}

Var Tape::masked_row_softmax(Var p, const Mat& mask) {
  const Mat& pv = node(p).value;
  if (mask.rows() != pv.rows() || mask.cols() != pv.cols())
    shape_error("masked_row_softmax", pv, mask);
  Mat out = Mat::Zero(pv.rows(), pv.cols());
  for (Eigen::Index i = 0; i < pv.rows(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < pv.cols(); ++j)
      if (mask(i, j) != 0.0) mx = std::max(mx, pv(i, j));
    if (!std::isfinite(mx)) continue;  // fully masked row stays zero
    double denom = 0.0;
    for (Eigen::Index j = 0; j < pv.cols(); ++j)
      if (mask(i, j) != 0.0) {
        out(i, j) = std::exp(pv(i, j) - mx);
        denom += out(i, j);
      }
    for (Eigen::Index j = 0; j < pv.cols(); ++j) out(i, j) /= denom;
  }
  const int pi = p.idx_;
  const int self = next_index();
  return push(std::move(out), needs_grad(p), "masked_row_softmax",
              [pi, self](Tape& t, const Mat& g) {
                if (!t.tracks_grad(pi)) return;
                const Mat& alpha = t.value_of(self);
                Mat& gp = t.grad_of(pi);
                for (Eigen::Index i = 0; i < alpha.rows(); ++i) {
                  double dot = 0.0;
                  for (Eigen::Index j = 0; j < alpha.cols(); ++j)
                    dot += g(i, j) * alpha(i, j);
                  for (Eigen::Index j = 0; j < alpha.cols(); ++j)
                    gp(i, j) += alpha(i, j) * (g(i, j) - dot);
                }
              });
}

Var Tape::colwise_add(Var a, Var b) {
  const Mat& av = node(a).value;
  const Mat& bv = node(b).value;
  if (bv.cols() != 1 || bv.rows() != av.rows())
    shape_error("colwise_add", av, bv);
  const int ai = a.idx_, bi = b.idx_;
  Mat out = av;
  out.colwise() += bv.col(0);
  return push(std::move(out), needs_grad(a) || needs_grad(b), "colwise_add",
              [ai, bi](Tape& t, const Mat& g) {
                if (t.tracks_grad(ai)) t.grad_of(ai) += g;
                if (t.tracks_grad(bi)) t.grad_of(bi) += g.rowwise().sum();
              });
}

Var Tape::sum_sq(Var a) {
  const Mat& av = node(a).value;
  Mat out(1, 1);
  out(0, 0) = av.squaredNorm();
  const int ai = a.idx_;
  return push(std::move(out), needs_grad(a), "sum_sq",
              [ai](Tape& t, const Mat& g) {
                if (t.tracks_grad(ai))
                  t.grad_of(ai) += 2.0 * g(0, 0) * t.value_of(ai);
              });
}

void Tape::backward(Var out) {
  const Node& last = node(out);
  if (last.value.rows() != 1 || last.value.cols() != 1)
    throw std::invalid_argument("backward: output must be a 1x1 scalar");
  for (auto& n : nodes_) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  node(out).grad(0, 0) = 1.0;
  for (int i = out.idx_; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.back && n.requires_grad) n.back(*this, n.grad);
  }
}

GradCheckReport finite_diff_check(const GraphFn& graph,
                                  const std::vector<Mat>& params,
                                  const std::vector<std::string>& names,
                                  double tolerance, double step) {
  if (names.size() != params.size())
    throw std::invalid_argument("finite_diff_check: one name per block");
  if (!(step > 0.0)) throw std::invalid_argument("step must be > 0");

  auto eval = [&](const std::vector<Mat>& p) {
    Tape tape;
    std::vector<Var> leaves;
    leaves.reserve(p.size());
    for (const auto& m : p) leaves.push_back(tape.leaf(m));
    Var out = graph(tape, leaves);
    return out.value()(0, 0);
  };

  std::vector<Mat> analytic;
  {
    Tape tape;
    std::vector<Var> leaves;
    for (const auto& m : params) leaves.push_back(tape.leaf(m));
    Var out = graph(tape, leaves);
    tape.backward(out);
    for (const auto& v : leaves) analytic.push_back(v.grad());
  }

  GradCheckReport report;
  report.tolerance = tolerance;
  std::vector<Mat> work = params;
  for (std::size_t b = 0; b < params.size(); ++b) {
    GradCheckBlock block;
    block.name = names[b];
    for (Eigen::Index r = 0; r < params[b].rows(); ++r) {
      for (Eigen::Index c = 0; c < params[b].cols(); ++c) {
        const double orig = work[b](r, c);
        work[b](r, c) = orig + step;
        const double fp = eval(work);
        work[b](r, c) = orig - step;
        const double fm = eval(work);
        work[b](r, c) = orig;
        const double fd = (fp - fm) / (2.0 * step);
        const double ad = analytic[b](r, c);
        const double denom = std::max({std::abs(ad), std::abs(fd), 1e-3});
        block.max_rel_err =
            std::max(block.max_rel_err, std::abs(ad - fd) / denom);
      }
    }
    report.max_rel_err = std::max(report.max_rel_err, block.max_rel_err);
    report.blocks.push_back(std::move(block));
  }
  report.pass = report.max_rel_err < tolerance;
  return report;
}

}  // namespace gdn::ad
