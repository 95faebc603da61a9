#include "benthoscan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "benthoscan/error.hpp"

namespace benthoscan {

double f1(double precision, double recall) {
  double denom = precision + recall;
  if (denom == 0.0) return 0.0;
  return 2.0 * precision * recall / denom;
}

MetricsReport evaluate(const std::vector<std::string>& predictions,
                       const std::vector<std::string>& ground_truth,
                       const std::vector<std::string>& classes,
                       const std::set<std::string>& positive_codes) {
  if (predictions.size() != ground_truth.size())
    raise(Errc::length_mismatch,
          std::to_string(predictions.size()) + " predictions vs " +
              std::to_string(ground_truth.size()) + " truths");
  if (predictions.empty()) raise(Errc::empty_test_set, "no samples");

  MetricsReport report;
  std::set<std::string> class_set(classes.begin(), classes.end());
  for (const auto& code : ground_truth) class_set.insert(code);
  for (const auto& code : predictions) class_set.insert(code);

  std::size_t n = predictions.size();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (predictions[i] == ground_truth[i]) ++correct;
  report.accuracy = double(correct) / double(n);

  for (const auto& code : class_set) {
    ClassMetrics metrics;
    for (std::size_t i = 0; i < n; ++i) {
      bool truth_is = ground_truth[i] == code;
      bool pred_is = predictions[i] == code;
      if (truth_is && pred_is) ++metrics.counts.tp;
      else if (!truth_is && pred_is) ++metrics.counts.fp;
      else if (truth_is && !pred_is) ++metrics.counts.fn;
      else ++metrics.counts.tn;
    }
    metrics.support = metrics.counts.tp + metrics.counts.fn;
    std::size_t predicted = metrics.counts.tp + metrics.counts.fp;
    if (predicted == 0) {
      metrics.precision = 0.0;
      metrics.undefined_precision = true;
    } else {
      metrics.precision = double(metrics.counts.tp) / double(predicted);
    }
    metrics.recall = metrics.support == 0
                         ? 0.0
                         : double(metrics.counts.tp) / double(metrics.support);
    metrics.f1 = f1(metrics.precision, metrics.recall);
    report.per_class.emplace(code, metrics);
  }

  // Mean f1 averages exactly the classes with nonzero test support, in
  // sorted code order.
  double sum = 0.0;
  std::size_t involved = 0;
  for (const auto& [code, metrics] : report.per_class) {
    (void)code;
    if (metrics.support > 0) {
      sum += metrics.f1;
      ++involved;
    }
  }
  report.mean_f1 = involved ? sum / double(involved) : 0.0;

  if (!positive_codes.empty()) {
    ConfusionCounts kelp;
    for (std::size_t i = 0; i < n; ++i) {
      bool truth_is = positive_codes.count(ground_truth[i]) != 0;
      bool pred_is = positive_codes.count(predictions[i]) != 0;
      if (truth_is && pred_is) ++kelp.tp;
      else if (!truth_is && pred_is) ++kelp.fp;
      else if (truth_is && !pred_is) ++kelp.fn;
      else ++kelp.tn;
    }
    report.kelp_precision =
        (kelp.tp + kelp.fp) ? double(kelp.tp) / double(kelp.tp + kelp.fp) : 0.0;
    report.kelp_recall =
        (kelp.tp + kelp.fn) ? double(kelp.tp) / double(kelp.tp + kelp.fn) : 0.0;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Student-t machinery

namespace {

// Continued fraction for the incomplete beta function (Lentz's method).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;

  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double front = std::exp(std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log(1.0 - x));
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  double x = dof / (dof + t * t);
  double tail = 0.5 * incomplete_beta(dof / 2.0, 0.5, x);
  return t >= 0.0 ? 1.0 - tail : tail;
}

double student_t_two_tailed_p(double t, double dof) {
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
}

double student_t_critical(double level, double dof) {
  if (!(level > 0.0 && level < 1.0))
    raise(Errc::config_error, "confidence level must be in (0,1)");
  // Bisection on the two-sided coverage; the CDF is monotone in t.
  double lo = 0.0, hi = 1.0;
  auto coverage = [&](double t) {
    return 1.0 - student_t_two_tailed_p(t, dof);
  };
  while (coverage(hi) < level) {
    hi *= 2.0;
    if (hi > 1e12) break;
  }
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (coverage(mid) < level) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

TTestResult paired_t_test(const std::vector<double>& correct_a,
                          const std::vector<double>& correct_b) {
  if (correct_a.size() != correct_b.size())
    raise(Errc::length_mismatch, "paired samples differ in length");
  if (correct_a.size() < 2)
    raise(Errc::length_mismatch, "paired t-test needs at least 2 samples");

  std::size_t n = correct_a.size();
  TTestResult result;
  result.n = n;

  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += correct_a[i] - correct_b[i];
  mean /= double(n);

  double ss = 0.0;
  bool any_nonzero = false;
  for (std::size_t i = 0; i < n; ++i) {
    double d = correct_a[i] - correct_b[i];
    if (d != 0.0) any_nonzero = true;
    ss += (d - mean) * (d - mean);
  }

  if (!any_nonzero) {
    result.all_differences_zero = true;
    result.t_statistic = 0.0;
    result.p_value = 1.0;
    return result;
  }

  double sd = std::sqrt(ss / double(n - 1));
  if (sd == 0.0) {
    // All differences equal and nonzero.
    result.degenerate_constant_difference = true;
    result.t_statistic = mean > 0 ? std::numeric_limits<double>::infinity()
                                  : -std::numeric_limits<double>::infinity();
    result.p_value = 0.0;
    return result;
  }

  result.t_statistic = mean / (sd / std::sqrt(double(n)));
  result.p_value = student_t_two_tailed_p(result.t_statistic, double(n - 1));
  return result;
}

}  // namespace benthoscan
