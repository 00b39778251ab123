#include <random>

#include "doctest.h"
#include "gdn/autodiff.hpp"

using namespace gdn::ad;

namespace {

Mat random_mat(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng,
               double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Mat m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

}  // namespace

TEST_CASE("scalar square: value and gradient") {
  Tape tape;
  Var x = tape.leaf(Mat::Constant(1, 1, 3.0));
  Var y = tape.hadamard(x, x);
  CHECK(y.value()(0, 0) == 9.0);
  tape.backward(y);
  CHECK(x.grad()(0, 0) == 6.0);
}

TEST_CASE("activation values and kink conventions") {
  Tape tape;
  Mat in(1, 3);
  in << -1.0, 0.0, 2.0;
  Var x = tape.leaf(in);
  SUBCASE("leaky relu value: slope 0.2 at -1 gives -0.2") {
    Var y = tape.leaky_relu(x, 0.2);
    CHECK(y.value()(0, 0) == doctest::Approx(-0.2));
    CHECK(y.value()(0, 1) == 0.0);
    CHECK(y.value()(0, 2) == 2.0);
    Var s = tape.sum_sq(y);
    tape.backward(s);
    // d/dx of y^2 with y = leaky(x): 2*y*slope at x=-1, right-derivative 1
    // at x=0 (y=0 so the product vanishes), 2*y at x=2
    CHECK(x.grad()(0, 0) == doctest::Approx(2.0 * -0.2 * 0.2));
    CHECK(x.grad()(0, 2) == doctest::Approx(2.0 * 2.0));
  }
  SUBCASE("relu gradient is 0 for negative inputs, 1 at the kink") {
    Var y = tape.relu(x);
    // sum instead of sum_sq so the kink gradient is visible
    Var ones = tape.constant(Mat::Ones(3, 1));
    Var s = tape.matmul(y, ones);
    tape.backward(s);
    CHECK(x.grad()(0, 0) == 0.0);  // x = -1
    CHECK(x.grad()(0, 1) == 1.0);  // x = 0, right derivative
    CHECK(x.grad()(0, 2) == 1.0);
  }
}

TEST_CASE("composite forward values match a plain re-evaluation") {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 10; ++rep) {
    Mat A = random_mat(3, 4, rng);
    Mat x = random_mat(4, 1, rng);
    Mat b = random_mat(3, 1, rng);
    Tape tape;
    Var av = tape.leaf(A);
    Var xv = tape.constant(x);
    Var bv = tape.leaf(b);
    Var h = tape.relu(tape.add(tape.matmul(av, xv), bv));
    Var out = tape.sum_sq(h);
    const Mat href = (A * x + b).cwiseMax(0.0);
    CHECK(out.value()(0, 0) == doctest::Approx(href.squaredNorm()));
  }
}

TEST_CASE("masked row softmax") {
  Tape tape;
  Mat p(2, 3);
  p << 1.0, 2.0, 3.0, 100.0, 200.0, 300.0;
  Mat mask(2, 3);
  mask << 1, 0, 1, 1, 1, 1;
  Var pv = tape.leaf(p);
  Var alpha = tape.masked_row_softmax(pv, mask);
  SUBCASE("rows sum to one over the unmasked set; masked entries zero") {
    CHECK(alpha.value()(0, 1) == 0.0);
    CHECK(alpha.value().row(0).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(alpha.value().row(1).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("matches a direct exp/normalize evaluation") {
    const double e1 = std::exp(1.0 - 3.0), e3 = std::exp(0.0);
    CHECK(alpha.value()(0, 0) == doctest::Approx(e1 / (e1 + e3)).epsilon(1e-12));
    CHECK(alpha.value()(0, 2) == doctest::Approx(e3 / (e1 + e3)).epsilon(1e-12));
  }
  SUBCASE("large logits stay finite via max subtraction") {
    CHECK(alpha.value().allFinite());
  }
}

TEST_CASE("shape errors name the op") {
  Tape tape;
  Var a = tape.leaf(Mat::Zero(2, 3));
  Var b = tape.leaf(Mat::Zero(2, 3));
  try {
    tape.matmul(a, b);
    FAIL("expected a shape error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("matmul") != std::string::npos);
  }
  CHECK_THROWS(tape.add(a, tape.leaf(Mat::Zero(3, 2))));
  CHECK_THROWS(tape.backward(a));  // non-scalar output
}

TEST_CASE("finite differences validate a random three-layer graph") {
  std::mt19937_64 rng(12);
  const Mat W1 = random_mat(5, 4, rng, 0.7);
  const Mat b1 = random_mat(5, 1, rng, 0.3);
  const Mat W2 = random_mat(3, 5, rng, 0.7);
  const Mat b2 = random_mat(3, 1, rng, 0.3);
  const Mat x = random_mat(4, 1, rng);

  GraphFn graph = [&x](Tape& t, const std::vector<Var>& p) {
    Var h1 = t.relu(t.add(t.matmul(p[0], t.constant(x)), p[1]));
    Var h2 = t.leaky_relu(t.add(t.matmul(p[2], h1), p[3]), 0.2);
    return t.sum_sq(h2);
  };
  auto report = finite_diff_check(graph, {W1, b1, W2, b2},
                                  {"W1", "b1", "W2", "b2"}, 1e-4);
  CHECK(report.pass);
  CHECK(report.max_rel_err < 1e-4);
  REQUIRE(report.blocks.size() == 4);

  SUBCASE("tolerance zero always reports failure") {
    auto strict = finite_diff_check(graph, {W1, b1, W2, b2},
                                    {"W1", "b1", "W2", "b2"}, 0.0);
    CHECK_FALSE(strict.pass);
  }
}

TEST_CASE("linear graphs check out near machine precision") {
  std::mt19937_64 rng(3);
  const Mat A = random_mat(4, 4, rng);
  // keep the multipliers away from zero so every gradient entry is O(1)
  std::uniform_real_distribution<double> mag(0.5, 1.5);
  std::bernoulli_distribution sign(0.5);
  Mat c(1, 4), x(4, 1);
  for (int i = 0; i < 4; ++i) {
    c(0, i) = (sign(rng) ? 1 : -1) * mag(rng);
    x(i, 0) = (sign(rng) ? 1 : -1) * mag(rng);
  }
  GraphFn graph = [&](Tape& t, const std::vector<Var>& p) {
    // c * (A x): linear in A, so central differences are exact
    return t.matmul(t.constant(c), t.matmul(p[0], t.constant(x)));
  };
  auto report = finite_diff_check(graph, {A}, {"A"}, 1e-4);
  CHECK(report.max_rel_err < 1e-8);
}

TEST_CASE("gradient linearity over graph combinations") {
  std::mt19937_64 rng(8);
  const Mat x0 = random_mat(3, 1, rng);
  const Mat M = random_mat(3, 3, rng);
  const double ca = 2.5, cb = -1.25;

  auto grad_of = [&](const std::function<Var(Tape&, Var)>& f, const Mat& at) {
    Tape t;
    Var x = t.leaf(at);
    Var out = f(t, x);
    t.backward(out);
    return Mat(x.grad());
  };
  std::function<Var(Tape&, Var)> f = [&](Tape& t, Var x) {
    return t.sum_sq(t.matmul(t.constant(M), x));
  };
  std::function<Var(Tape&, Var)> g = [&](Tape& t, Var x) {
    return t.sum_sq(t.relu(x));
  };
  std::function<Var(Tape&, Var)> combo = [&](Tape& t, Var x) {
    return t.add(t.scale(f(t, x), ca), t.scale(g(t, x), cb));
  };
  const Mat lhs = grad_of(combo, x0);
  const Mat rhs = ca * grad_of(f, x0) + cb * grad_of(g, x0);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fan-out doubles the upstream gradient") {
  const Mat x0 = Mat::Constant(2, 1, 1.5);
  // reuse: sum_sq(x + x)
  Tape t1;
  Var x1 = t1.leaf(x0);
  Var out1 = t1.sum_sq(t1.add(x1, x1));
  t1.backward(out1);
  // duplicated subgraph: sum_sq(x_a + x_b) with separate leaves
  Tape t2;
  Var xa = t2.leaf(x0);
  Var xb = t2.leaf(x0);
  Var out2 = t2.sum_sq(t2.add(xa, xb));
  t2.backward(out2);
  CHECK(x1.grad() == (xa.grad() + xb.grad()).eval());
  CHECK(x1.grad()(0, 0) == doctest::Approx(2.0 * 2.0 * 3.0));
}

TEST_CASE("remaining op gradients agree with finite differences") {
  std::mt19937_64 rng(21);
  const Mat U = random_mat(4, 1, rng);
  const Mat A = random_mat(4, 4, rng);
  const Mat B = random_mat(2, 4, rng);
  const Mat bias = random_mat(4, 1, rng);
  Mat mask = Mat::Ones(4, 4);
  mask(0, 1) = mask(2, 3) = 0;

  GraphFn graph = [&](Tape& t, const std::vector<Var>& p) {
    Var outer = t.add_outer(p[0]);                     // 4x4
    Var soft = t.masked_row_softmax(outer, mask);      // 4x4
    Var mixed = t.hadamard(soft, p[1]);                // 4x4
    Var shifted = t.colwise_add(mixed, p[3]);          // 4x4
    Var stacked = t.concat_rows(t.matmul(p[2], shifted), t.transpose(p[1]));
    return t.sum_sq(t.scale(stacked, 0.7));
  };
  auto report = finite_diff_check(graph, {U, A, B, bias},
                                  {"u", "A", "B", "bias"}, 1e-4);
  CHECK(report.pass);
}
