#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace benthoscan {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  std::size_t total() const { return tp + fp + fn + tn; }
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // ground-truth occurrences
  // Set when no prediction named this class; precision is scored 0 rather
  // than excluded.
  bool undefined_precision = false;
  ConfusionCounts counts;
};

struct MetricsReport {
  double accuracy = 0.0;
  double mean_f1 = 0.0;  // averaged over classes with nonzero test support
  double kelp_precision = 0.0;
  double kelp_recall = 0.0;
  std::map<std::string, ClassMetrics> per_class;
};

// Harmonic mean of precision and recall; 0 when both are 0.
double f1(double precision, double recall);

// One-vs-rest confusion counts per class from aligned prediction/truth
// sequences. `classes` may extend the set found in the data (extra classes
// report zero support); when empty it defaults to the union of codes seen.
// `positive_codes` defines the binary "kelp" view used for kelp_precision /
// kelp_recall; leave empty to skip it.
MetricsReport evaluate(const std::vector<std::string>& predictions,
                       const std::vector<std::string>& ground_truth,
                       const std::vector<std::string>& classes = {},
                       const std::set<std::string>& positive_codes = {});

struct TTestResult {
  double t_statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  bool all_differences_zero = false;
  // sd of the differences is zero but their mean is not: |t| is infinite and
  // p collapses to 0.
  bool degenerate_constant_difference = false;
};

// Paired two-tailed t-test over per-sample differences a - b, with n-1
// degrees of freedom. Inputs are typically 0/1 correctness indicators but any
// aligned values work.
TTestResult paired_t_test(const std::vector<double>& correct_a,
                          const std::vector<double>& correct_b);

// Student-t distribution helpers, self-contained. The CDF evaluates the
// regularized incomplete beta function by continued fractions to ~1e-10.
double student_t_cdf(double t, double dof);
double student_t_two_tailed_p(double t, double dof);
// Inverse of the two-sided interval: P(|T| <= result) = level.
double student_t_critical(double level, double dof);

double incomplete_beta(double a, double b, double x);

}  // namespace benthoscan
