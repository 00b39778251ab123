#include <random>

#include "doctest.h"
#include "gdn/errors.hpp"
#include "gdn/series.hpp"
#include "test_util.hpp"

using namespace gdn;
using test_util::TempDir;

namespace {

MultivariateSeries make_series(int T, int n, double base = 0.0) {
  MultivariateSeries s;
  s.values.resize(T, n);
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < n; ++i) s.values(t, i) = base + t * 10 + i;
  for (int t = 0; t < T; ++t) s.tick_index.push_back(t + 1);
  for (int i = 0; i < n; ++i) s.sensor_ids.push_back("S" + std::to_string(i + 1));
  return s;
}

}  // namespace

TEST_CASE("load_series shape and values") {
  TempDir tmp;
  test_util::spit(tmp.file("a.csv"),
                  "tick,A,B\n1,1.5,2\n2,3,4\n5,5,6\n9,7,8\n");
  auto s = load_series(tmp.file("a.csv"));
  CHECK(s.ticks() == 4);
  CHECK(s.sensors() == 2);
  CHECK(s.sensor_ids == std::vector<std::string>{"A", "B"});
  CHECK(s.values(0, 0) == 1.5);
  CHECK(s.values(3, 1) == 8.0);
  CHECK(s.tick_index == std::vector<long long>{1, 2, 5, 9});
}

TEST_CASE("load_series rejections") {
  TempDir tmp;
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_series(tmp.file("nope.csv")), IoError);
  }
  SUBCASE("NaN cell names row and column") {
    test_util::spit(tmp.file("nan.csv"), "tick,A,B\n1,1,2\n2,NaN,4\n");
    try {
      load_series(tmp.file("nan.csv"));
      FAIL("expected IoError");
    } catch (const IoError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("row 3") != std::string::npos);
      CHECK(msg.find("'A'") != std::string::npos);
    }
  }
  SUBCASE("duplicate sensor id") {
    test_util::spit(tmp.file("dup.csv"), "tick,A,A\n1,1,2\n");
    CHECK_THROWS(load_series(tmp.file("dup.csv")));
  }
  SUBCASE("non-increasing tick") {
    test_util::spit(tmp.file("tick.csv"), "tick,A\n1,1\n1,2\n");
    CHECK_THROWS(load_series(tmp.file("tick.csv")));
  }
  SUBCASE("non-numeric cell") {
    test_util::spit(tmp.file("bad.csv"), "tick,A\n1,abc\n");
    CHECK_THROWS_AS(load_series(tmp.file("bad.csv")), IoError);
  }
}

TEST_CASE("forward fill option") {
  TempDir tmp;
  test_util::spit(tmp.file("gap.csv"), "tick,A\n1,2.5\n2,NaN\n3,7\n");
  CHECK_THROWS(load_series(tmp.file("gap.csv")));
  LoadOptions opts;
  opts.forward_fill = true;
  auto s = load_series(tmp.file("gap.csv"), opts);
  CHECK(s.values(1, 0) == 2.5);
  // a missing first row can never be filled
  test_util::spit(tmp.file("gap2.csv"), "tick,A\n1,NaN\n2,7\n");
  CHECK_THROWS(load_series(tmp.file("gap2.csv"), opts));
}

TEST_CASE("write/load round trip is byte identical for canonical files") {
  TempDir tmp;
  MultivariateSeries s = make_series(6, 3);
  s.values(0, 0) = 0.1 + 0.2;  // awkward decimals
  s.values(1, 1) = 1.0 / 3.0;
  s.values(2, 2) = -1234567.875e-12;
  s.values(3, 0) = 1e300;
  write_series(s, tmp.file("w.csv"));
  auto loaded = load_series(tmp.file("w.csv"));
  write_series(loaded, tmp.file("w2.csv"));
  CHECK(test_util::slurp(tmp.file("w.csv")) ==
        test_util::slurp(tmp.file("w2.csv")));
  CHECK(loaded.values == s.values);
}

TEST_CASE("chronological split") {
  SUBCASE("T=10 with 0.5/0.2 gives 5/2/3 contiguous blocks") {
    auto s = make_series(10, 2);
    auto r = chronological_split(s, 0.5, 0.2);
    CHECK(r.train.ticks() == 5);
    CHECK(r.val.ticks() == 2);
    CHECK(r.test.ticks() == 3);
    CHECK(r.train.tick_index.back() + 1 == r.val.tick_index.front());
    CHECK(r.val.tick_index.back() + 1 == r.test.tick_index.front());
  }
  SUBCASE("75/25 at benchmark scale") {
    auto s = make_series(4000, 1);
    auto r = chronological_split(s, 0.75, 0.0);
    CHECK(r.train.ticks() == 3000);
    CHECK(r.val.ticks() == 0);
    CHECK(r.test.ticks() == 1000);
  }
  SUBCASE("rejections") {
    auto s = make_series(10, 1);
    CHECK_THROWS(chronological_split(s, 1.0, 0.0));
    CHECK_THROWS(chronological_split(s, 0.0, 0.0));
    CHECK_THROWS(chronological_split(s, 0.6, 0.4));
    CHECK_THROWS(chronological_split(s, 0.5, -0.1));
  }
  SUBCASE("partition property: concatenation equals input") {
    std::mt19937 rng(7);
    for (int rep = 0; rep < 20; ++rep) {
      const int T = std::uniform_int_distribution<int>(3, 50)(rng);
      auto s = make_series(T, 2);
      const double tf = std::uniform_real_distribution<double>(0.05, 0.7)(rng);
      const double vf =
          std::uniform_real_distribution<double>(0.0, 0.95 - tf)(rng);
      auto r = chronological_split(s, tf, vf);
      CHECK(r.train.ticks() + r.val.ticks() + r.test.ticks() == T);
      Eigen::MatrixXd stitched(T, s.sensors());
      Eigen::Index row = 0;
      for (const auto* part : {&r.train, &r.val, &r.test}) {
        if (part->ticks() > 0)
          stitched.middleRows(row, part->ticks()) = part->values;
        row += part->ticks();
      }
      CHECK(stitched == s.values);
    }
  }
}

TEST_CASE("scaling") {
  MultivariateSeries train = make_series(2, 3);
  train.values(0, 0) = 2;
  train.values(1, 0) = 4;
  train.values(0, 1) = 5;  // constant sensor
  train.values(1, 1) = 5;
  train.values(0, 2) = -1;
  train.values(1, 2) = 1;
  auto stats = fit_scaling(train);
  auto scaled = apply_scaling(train, stats);
  SUBCASE("min-max endpoints") {
    CHECK(scaled.values(0, 0) == 0.0);
    CHECK(scaled.values(1, 0) == 1.0);
  }
  SUBCASE("degenerate sensor maps to constant zero") {
    CHECK(scaled.values(0, 1) == 0.0);
    CHECK(scaled.values(1, 1) == 0.0);
  }
  SUBCASE("test values may leave [0,1]: (6-2)/(4-2) = 2") {
    MultivariateSeries test = make_series(1, 3);
    test.values(0, 0) = 6;
    test.values(0, 1) = 7;
    test.values(0, 2) = 0;
    auto st = apply_scaling(test, stats);
    CHECK(st.values(0, 0) == doctest::Approx(2.0));
  }
  SUBCASE("apply then invert round trips") {
    auto back = invert_scaling(scaled, stats);
    for (Eigen::Index t = 0; t < train.ticks(); ++t) {
      CHECK(back.values(t, 0) ==
            doctest::Approx(train.values(t, 0)).epsilon(1e-9));
      CHECK(back.values(t, 2) ==
            doctest::Approx(train.values(t, 2)).epsilon(1e-9));
    }
  }
  SUBCASE("empty series rejected") {
    MultivariateSeries empty;
    empty.values.resize(0, 2);
    CHECK_THROWS(fit_scaling(empty));
  }
}

TEST_CASE("window_dataset") {
  SUBCASE("count and layout") {
    auto s = make_series(5, 2);
    auto w = window_dataset(s, 2);
    REQUIRE(w.size() == 3);
    // first sample: input columns are ticks 2 then 1, target tick 3
    CHECK(w[0].target_tick == 3);
    CHECK(w[0].input.col(0) == s.values.row(1).transpose());
    CHECK(w[0].input.col(1) == s.values.row(0).transpose());
    CHECK(w[0].target == s.values.row(2).transpose());
  }
  SUBCASE("w=3 over T=4000 gives 3997") {
    auto s = make_series(4000, 1);
    CHECK(window_dataset(s, 3).size() == 3997);
  }
  SUBCASE("T <= w rejected") {
    auto s = make_series(3, 1);
    CHECK_THROWS(window_dataset(s, 3));
    CHECK_THROWS(window_dataset(s, 5));
  }
  SUBCASE("windows copy, never alias") {
    auto s = make_series(5, 2);
    auto w = window_dataset(s, 2);
    const double before = w[0].input(0, 0);
    s.values.setZero();
    CHECK(w[0].input(0, 0) == before);
  }
}

TEST_CASE("labels io") {
  TempDir tmp;
  MultivariateSeries s = make_series(4, 2);
  LabelMatrix sl = LabelMatrix::Zero(4, 2);
  sl(1, 0) = 1;
  sl(3, 1) = 1;
  LabelVector nl{0, 1, 0, 1};
  s.sensor_labels = sl;
  s.network_labels = nl;
  s.validate();
  write_network_labels(s, tmp.file("nl.csv"));
  write_sensor_labels(s, tmp.file("sl.csv"));
  CHECK(load_network_labels(tmp.file("nl.csv"), s.tick_index) == nl);
  CHECK(load_sensor_labels(tmp.file("sl.csv"), s.tick_index, s.sensor_ids) ==
        sl);

  SUBCASE("network label must match the sensor-label OR") {
    s.network_labels = LabelVector{1, 1, 0, 1};
    CHECK_THROWS(s.validate());
  }
  SUBCASE("label values restricted to 0/1") {
    test_util::spit(tmp.file("bad.csv"), "tick,label\n1,2\n");
    CHECK_THROWS(load_network_labels(tmp.file("bad.csv"), {1}));
  }
}
