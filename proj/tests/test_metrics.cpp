#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "benthoscan/error.hpp"
#include "benthoscan/metrics.hpp"
#include "helpers/oracles.hpp"

using namespace benthoscan;

TEST_CASE("f1 basics") {
  CHECK(f1(0.5, 0.5) == 0.5);
  CHECK(f1(0.0, 0.0) == 0.0);
  CHECK(f1(1.0, 0.0) == 0.0);
  // published flat-classification kelp precision/recall pair
  CHECK(f1(0.64, 0.59) == doctest::Approx(0.6139).epsilon(2e-4));
  // harmonic <= arithmetic; equal arguments give the argument back
  oracles::Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    double p = rng.uniform(), r = rng.uniform();
    CHECK(f1(p, r) <= (p + r) / 2.0 + 1e-15);
    CHECK(f1(p, p) == doctest::Approx(p));
  }
}

TEST_CASE("all-correct predictions score 1.0 everywhere") {
  std::vector<std::string> y = {"a", "b", "c", "a", "b"};
  MetricsReport report = evaluate(y, y);
  CHECK(report.accuracy == 1.0);
  CHECK(report.mean_f1 == 1.0);
  for (const auto& [code, m] : report.per_class) CHECK(m.f1 == 1.0);
}

TEST_CASE("hand-computed binary confusion arithmetic") {
  // tp=3 fp=1 fn=2 tn=4 for class "pos"
  std::vector<std::string> truth, predicted;
  auto push = [&](const char* t, const char* p, int n) {
    for (int i = 0; i < n; ++i) {
      truth.emplace_back(t);
      predicted.emplace_back(p);
    }
  };
  push("pos", "pos", 3);
  push("neg", "pos", 1);
  push("pos", "neg", 2);
  push("neg", "neg", 4);

  MetricsReport report = evaluate(predicted, truth, {}, {"pos"});
  const ClassMetrics& pos = report.per_class.at("pos");
  CHECK(pos.precision == 0.75);
  CHECK(pos.recall == 0.6);
  CHECK(pos.f1 == doctest::Approx(2.0 * 0.75 * 0.6 / 1.35));
  CHECK(report.accuracy == 0.7);
  CHECK(report.kelp_precision == 0.75);
  CHECK(report.kelp_recall == 0.6);
  CHECK(pos.counts.tp == 3);
  CHECK(pos.counts.tn == 4);
}

TEST_CASE("random 10-class reports equal the independent oracle exactly") {
  oracles::Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = std::size_t(rng.uniform_int(5, 200));
    std::vector<std::string> truth, predicted;
    for (std::size_t i = 0; i < n; ++i) {
      truth.push_back("c" + std::to_string(rng.uniform_int(0, 9)));
      predicted.push_back("c" + std::to_string(rng.uniform_int(0, 9)));
    }
    MetricsReport report = evaluate(predicted, truth);
    oracles::OracleReport expected = oracles::confusion_oracle(predicted, truth);
    CHECK(report.accuracy == expected.accuracy);
    CHECK(report.mean_f1 == expected.mean_f1);
    for (const auto& [code, m] : expected.per_class) {
      const ClassMetrics& got = report.per_class.at(code);
      CHECK(got.precision == m.precision);
      CHECK(got.recall == m.recall);
      CHECK(got.f1 == m.f1);
      CHECK(got.support == m.support);
    }
  }
}

TEST_CASE("permuting (prediction, truth) pairs leaves metrics unchanged") {
  oracles::Rng rng(13);
  std::vector<std::string> truth, predicted;
  for (int i = 0; i < 60; ++i) {
    truth.push_back("c" + std::to_string(rng.uniform_int(0, 4)));
    predicted.push_back("c" + std::to_string(rng.uniform_int(0, 4)));
  }
  MetricsReport before = evaluate(predicted, truth);

  std::vector<std::size_t> order(truth.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[std::size_t(rng.uniform_int(0, int(i) - 1))]);
  std::vector<std::string> truth2, predicted2;
  for (std::size_t i : order) {
    truth2.push_back(truth[i]);
    predicted2.push_back(predicted[i]);
  }
  MetricsReport after = evaluate(predicted2, truth2);
  CHECK(before.accuracy == after.accuracy);
  CHECK(before.mean_f1 == after.mean_f1);
}

TEST_CASE("accuracy equals the support-weighted mean of per-class recalls") {
  oracles::Rng rng(15);
  std::vector<std::string> truth, predicted;
  for (int i = 0; i < 200; ++i) {
    truth.push_back("c" + std::to_string(rng.uniform_int(0, 6)));
    predicted.push_back("c" + std::to_string(rng.uniform_int(0, 6)));
  }
  MetricsReport report = evaluate(predicted, truth);
  double weighted = 0.0;
  for (const auto& [code, m] : report.per_class)
    weighted += m.recall * double(m.support);
  weighted /= double(truth.size());
  CHECK(report.accuracy == doctest::Approx(weighted).epsilon(1e-12));
}

TEST_CASE("a class never predicted is flagged and scored zero precision") {
  std::vector<std::string> truth = {"a", "b", "a"};
  std::vector<std::string> predicted = {"a", "a", "a"};
  MetricsReport report = evaluate(predicted, truth);
  CHECK(report.per_class.at("b").undefined_precision);
  CHECK(report.per_class.at("b").precision == 0.0);
  // mean f1 still averages over both classes (both have support)
  CHECK(report.mean_f1 ==
        doctest::Approx((report.per_class.at("a").f1 + 0.0) / 2.0));
}

TEST_CASE("mean f1 averages only classes present in the test data") {
  std::vector<std::string> truth = {"a", "a", "b"};
  std::vector<std::string> predicted = {"a", "c", "b"};
  MetricsReport report = evaluate(predicted, truth, {"a", "b", "c", "d"});
  // c and d have zero support: excluded from the mean, present in the table
  CHECK(report.per_class.size() == 4);
  CHECK(report.per_class.at("d").support == 0);
  double expected =
      (report.per_class.at("a").f1 + report.per_class.at("b").f1) / 2.0;
  CHECK(report.mean_f1 == doctest::Approx(expected));
}

TEST_CASE("evaluate input validation") {
  CHECK_THROWS_AS(evaluate({"a"}, {"a", "b"}), Error);
  CHECK_THROWS_AS(evaluate({}, {}), Error);
}

// ---------------------------------------------------------------------------
// paired t-test

TEST_CASE("identical vectors: flagged, p = 1") {
  std::vector<double> a = {1, 0, 1, 1, 0};
  TTestResult result = paired_t_test(a, a);
  CHECK(result.all_differences_zero);
  CHECK(result.p_value == 1.0);
  CHECK(result.t_statistic == 0.0);
}

TEST_CASE("constant nonzero difference: infinite t, p -> 0, flagged") {
  std::vector<double> a = {1, 1, 1, 1};
  std::vector<double> b = {0, 0, 0, 0};
  TTestResult result = paired_t_test(a, b);
  CHECK(result.degenerate_constant_difference);
  CHECK(std::isinf(result.t_statistic));
  CHECK(result.t_statistic > 0);
  CHECK(result.p_value == 0.0);
}

TEST_CASE("textbook fixture matches the integration oracle to 1e-6") {
  // N=10 paired differences with a known nonzero mean
  std::vector<double> a = {12.1, 14.3, 11.8, 13.0, 12.6,
                           13.7, 12.9, 14.1, 13.3, 12.4};
  std::vector<double> b = {11.4, 13.9, 11.9, 12.2, 12.0,
                           13.6, 12.1, 13.8, 12.8, 12.3};
  TTestResult result = paired_t_test(a, b);
  CHECK(result.n == 10);
  double expected_p = oracles::t_two_tailed_p_oracle(result.t_statistic, 9.0);
  CHECK(result.p_value == doctest::Approx(expected_p).epsilon(1e-6));
  CHECK(result.p_value < 0.05);  // designed to be significant
}

TEST_CASE("t-test is antisymmetric in its arguments") {
  oracles::Rng rng(19);
  std::vector<double> a, b;
  for (int i = 0; i < 40; ++i) {
    a.push_back(rng.uniform() < 0.7 ? 1.0 : 0.0);
    b.push_back(rng.uniform() < 0.5 ? 1.0 : 0.0);
  }
  TTestResult ab = paired_t_test(a, b);
  TTestResult ba = paired_t_test(b, a);
  CHECK(ab.t_statistic == doctest::Approx(-ba.t_statistic).epsilon(1e-12));
  CHECK(ab.p_value == doctest::Approx(ba.p_value).epsilon(1e-12));
}

TEST_CASE("student t machinery against closed forms and the oracle") {
  // dof=1 has the closed form CDF 1/2 + atan(t)/pi
  for (double t : {-3.0, -0.5, 0.0, 0.7, 2.5}) {
    double expected = 0.5 + std::atan(t) / M_PI;
    CHECK(student_t_cdf(t, 1.0) == doctest::Approx(expected).epsilon(1e-10));
  }
  // dof=2: CDF = 1/2 + t / (2*sqrt(2 + t^2))
  for (double t : {-2.0, -0.3, 0.0, 1.0, 4.0}) {
    double expected = 0.5 + t / (2.0 * std::sqrt(2.0 + t * t));
    CHECK(student_t_cdf(t, 2.0) == doctest::Approx(expected).epsilon(1e-10));
  }
  // two-tailed p against adaptive-Simpson integration of the density
  oracles::Rng rng(23);
  for (int i = 0; i < 20; ++i) {
    double t = rng.uniform(-5.0, 5.0);
    double dof = double(rng.uniform_int(1, 60));
    CHECK(student_t_two_tailed_p(t, dof) ==
          doctest::Approx(oracles::t_two_tailed_p_oracle(t, dof)).epsilon(1e-6));
  }
  // critical values: the 97.5th percentile for dof=9 is the classic 2.262
  CHECK(student_t_critical(0.95, 9.0) == doctest::Approx(2.2621571628).epsilon(1e-6));
}
