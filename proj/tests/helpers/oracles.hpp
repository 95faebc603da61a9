// Independent reference implementations used as test oracles. Everything in
// this header is deliberately written against the mathematical definitions,
// on different code paths from the library (grid search and projected
// gradient instead of coordinate descent, direct integration instead of
// continued fractions, naive loops instead of the production kernels).

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracles {

// ---------------------------------------------------------------------------
// Primal SVM objective and two solver oracles (2-d problems)

struct Point2 {
  double x1, x2;
  int y;  // +1/-1
};

// 0.5*(w1^2 + w2^2 + b^2) + C * sum hinge. The bias term is regularized to
// match a solver that augments samples with a constant-1 feature.
inline double primal_objective(const std::vector<Point2>& data, double w1,
                               double w2, double b, double c) {
  double obj = 0.5 * (w1 * w1 + w2 * w2 + b * b);
  for (const auto& p : data) {
    double margin = p.y * (w1 * p.x1 + w2 * p.x2 + b);
    obj += c * std::max(0.0, 1.0 - margin);
  }
  return obj;
}

struct PrimalSolution {
  double w1 = 0, w2 = 0, b = 0;
};

// Shrinking grid search over (w1, w2, b): evaluate a 13^3 lattice in a box,
// re-center on the best point, shrink, repeat. Convexity of the objective
// keeps the minimizer trapped.
inline PrimalSolution grid_primal_oracle(const std::vector<Point2>& data,
                                         double c, double initial_range = 32.0,
                                         int rounds = 60) {
  PrimalSolution best;
  double best_obj = primal_objective(data, 0, 0, 0, c);
  double range = initial_range;
  for (int round = 0; round < rounds; ++round) {
    PrimalSolution center = best;
    constexpr int kSteps = 6;  // lattice is 2*kSteps+1 per axis
    for (int i = -kSteps; i <= kSteps; ++i) {
      for (int j = -kSteps; j <= kSteps; ++j) {
        for (int k = -kSteps; k <= kSteps; ++k) {
          double w1 = center.w1 + range * i / kSteps;
          double w2 = center.w2 + range * j / kSteps;
          double b = center.b + range * k / kSteps;
          double obj = primal_objective(data, w1, w2, b, c);
          if (obj < best_obj) {
            best_obj = obj;
            best = {w1, w2, b};
          }
        }
      }
    }
    range *= 0.5;
  }
  return best;
}

// Projected gradient ascent on the dual with the augmented Gram matrix
// Qbar_ij = y_i y_j (x_i . x_j + 1).
inline PrimalSolution pgd_dual_oracle(const std::vector<Point2>& data,
                                      double c, int iterations = 200000) {
  std::size_t n = data.size();
  std::vector<std::vector<double>> q(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      q[i][j] = data[i].y * data[j].y *
                (data[i].x1 * data[j].x1 + data[i].x2 * data[j].x2 + 1.0);

  // Power iteration for a step size below 1/lambda_max.
  std::vector<double> v(n, 1.0), qv(n);
  double lambda = 1.0;
  for (int it = 0; it < 50; ++it) {
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      qv[i] = 0.0;
      for (std::size_t j = 0; j < n; ++j) qv[i] += q[i][j] * v[j];
      norm += qv[i] * qv[i];
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) break;
    lambda = norm;
    for (std::size_t i = 0; i < n; ++i) v[i] = qv[i] / norm;
  }
  double step = 1.0 / (lambda + 1.0);

  std::vector<double> alpha(n, 0.0), grad(n);
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      grad[i] = 1.0;
      for (std::size_t j = 0; j < n; ++j) grad[i] -= q[i][j] * alpha[j];
    }
    for (std::size_t i = 0; i < n; ++i)
      alpha[i] = std::clamp(alpha[i] + step * grad[i], 0.0, c);
  }

  PrimalSolution out;
  for (std::size_t i = 0; i < n; ++i) {
    out.w1 += alpha[i] * data[i].y * data[i].x1;
    out.w2 += alpha[i] * data[i].y * data[i].x2;
    out.b += alpha[i] * data[i].y;
  }
  return out;
}

inline double hinge_loss(const std::vector<Point2>& data, double w1, double w2,
                         double b) {
  double total = 0.0;
  for (const auto& p : data)
    total += std::max(0.0, 1.0 - p.y * (w1 * p.x1 + w2 * p.x2 + b));
  return total;
}

// Accelerated projected gradient (FISTA) on the box-constrained dual, then a
// local shrinking-grid polish of the primal triple. The combination gives a
// high-precision reference solution without any coordinate descent.
inline PrimalSolution accelerated_dual_oracle(const std::vector<Point2>& data,
                                              double c,
                                              int iterations = 30000) {
  std::size_t n = data.size();
  std::vector<std::vector<double>> q(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      q[i][j] = data[i].y * data[j].y *
                (data[i].x1 * data[j].x1 + data[i].x2 * data[j].x2 + 1.0);

  std::vector<double> v(n, 1.0), qv(n);
  double lambda = 1.0;
  for (int it = 0; it < 60; ++it) {
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      qv[i] = 0.0;
      for (std::size_t j = 0; j < n; ++j) qv[i] += q[i][j] * v[j];
      norm += qv[i] * qv[i];
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) break;
    lambda = norm;
    for (std::size_t i = 0; i < n; ++i) v[i] = qv[i] / norm;
  }
  double step = 1.0 / (lambda + 1.0);

  std::vector<double> x(n, 0.0), x_prev(n, 0.0), y(n, 0.0), grad(n);
  double t = 1.0;
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      grad[i] = -1.0;
      for (std::size_t j = 0; j < n; ++j) grad[i] += q[i][j] * y[j];
    }
    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    double momentum = (t - 1.0) / t_next;
    for (std::size_t i = 0; i < n; ++i) {
      double x_new = std::clamp(y[i] - step * grad[i], 0.0, c);
      y[i] = x_new + momentum * (x_new - x[i]);
      x_prev[i] = x[i];
      x[i] = x_new;
    }
    t = t_next;
  }

  PrimalSolution out;
  for (std::size_t i = 0; i < n; ++i) {
    out.w1 += x[i] * data[i].y * data[i].x1;
    out.w2 += x[i] * data[i].y * data[i].x2;
    out.b += x[i] * data[i].y;
  }

  // polish in the primal around the dual solution
  PrimalSolution best = out;
  double best_obj = primal_objective(data, best.w1, best.w2, best.b, c);
  double range = 0.5;
  for (int round = 0; round < 80; ++round) {
    PrimalSolution center = best;
    constexpr int kSteps = 4;
    for (int i = -kSteps; i <= kSteps; ++i)
      for (int j = -kSteps; j <= kSteps; ++j)
        for (int k = -kSteps; k <= kSteps; ++k) {
          double w1 = center.w1 + range * i / kSteps;
          double w2 = center.w2 + range * j / kSteps;
          double b = center.b + range * k / kSteps;
          double obj = primal_objective(data, w1, w2, b, c);
          if (obj < best_obj) {
            best_obj = obj;
            best = {w1, w2, b};
          }
        }
    range *= 0.7;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Confusion-matrix oracle

struct OracleClassMetrics {
  double precision = 0, recall = 0, f1 = 0;
  std::size_t support = 0;
};

struct OracleReport {
  double accuracy = 0;
  double mean_f1 = 0;
  std::map<std::string, OracleClassMetrics> per_class;
};

inline OracleReport confusion_oracle(const std::vector<std::string>& predicted,
                                     const std::vector<std::string>& truth) {
  OracleReport report;
  std::set<std::string> classes(truth.begin(), truth.end());
  classes.insert(predicted.begin(), predicted.end());

  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (predicted[i] == truth[i]) ++hits;
  report.accuracy = double(hits) / double(truth.size());

  double f1_sum = 0.0;
  std::size_t involved = 0;
  for (const auto& code : classes) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (predicted[i] == code && truth[i] == code) ++tp;
      if (predicted[i] == code && truth[i] != code) ++fp;
      if (predicted[i] != code && truth[i] == code) ++fn;
    }
    OracleClassMetrics m;
    m.support = tp + fn;
    m.precision = (tp + fp) ? double(tp) / double(tp + fp) : 0.0;
    m.recall = (tp + fn) ? double(tp) / double(tp + fn) : 0.0;
    double denom = m.precision + m.recall;
    m.f1 = denom > 0 ? 2.0 * m.precision * m.recall / denom : 0.0;
    report.per_class[code] = m;
    if (m.support > 0) {
      f1_sum += m.f1;
      ++involved;
    }
  }
  report.mean_f1 = involved ? f1_sum / double(involved) : 0.0;
  return report;
}

// ---------------------------------------------------------------------------
// Student-t CDF by adaptive Simpson integration of the density

inline double t_pdf(double x, double dof) {
  double log_norm = std::lgamma((dof + 1.0) / 2.0) - std::lgamma(dof / 2.0) -
                    0.5 * std::log(dof * M_PI);
  return std::exp(log_norm -
                  (dof + 1.0) / 2.0 * std::log1p(x * x / dof));
}

inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double b, double fa, double fb,
                               double fm, double whole, double tol,
                               int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, fm, flm, left, tol / 2.0, depth - 1) +
         adaptive_simpson(f, m, b, fm, fb, frm, right, tol / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-13) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fb, fm, whole, tol, 48);
}

inline double t_two_tailed_p_oracle(double t, double dof) {
  double at = std::fabs(t);
  if (std::isinf(at)) return 0.0;
  auto pdf = [dof](double x) { return t_pdf(x, dof); };
  double central = 2.0 * integrate(pdf, 0.0, at);
  return std::max(0.0, 1.0 - central);
}

// ---------------------------------------------------------------------------
// OLS by uncentered normal equations in extended precision

struct OracleFit {
  long double slope = 0, intercept = 0, r_squared = 0;
};

inline OracleFit ols_oracle(const std::vector<double>& x,
                            const std::vector<double>& y) {
  long double n = (long double)(x.size());
  long double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += (long double)(x[i]) * x[i];
    sxy += (long double)(x[i]) * y[i];
  }
  OracleFit fit;
  long double denom = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;

  long double mean_y = sy / n;
  long double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    long double e = y[i] - (fit.slope * x[i] + fit.intercept);
    ss_res += e * e;
    ss_tot += ((long double)(y[i]) - mean_y) * ((long double)(y[i]) - mean_y);
  }
  fit.r_squared = ss_tot > 0 ? 1.0L - ss_res / ss_tot : 0.0L;
  return fit;
}

// ---------------------------------------------------------------------------
// Small deterministic RNG for test data

struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + int(next() % std::uint64_t(hi - lo + 1));
  }
};

}  // namespace oracles
