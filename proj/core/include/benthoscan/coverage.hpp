#pragma once

#include <map>
#include <string>
#include <vector>

#include "benthoscan/dataset.hpp"

namespace benthoscan {

struct CoverageRecord {
  std::string image_id;
  std::string site_id;
  int year = 0;
  double expert_pct = 0.0;     // 100 * kelp points / labeled points
  double estimated_pct = 0.0;  // same point set, predicted labels
  std::size_t n_points = 0;
};

// One labeled point with its expert and predicted kelp determination.
struct PointOutcome {
  std::string image_id;
  bool expert_kelp = false;
  bool predicted_kelp = false;
};

// One record per image, in the order images appear in `images`. Every image
// passed in must have at least one outcome.
std::vector<CoverageRecord> estimate_cover(
    const std::vector<PointOutcome>& outcomes,
    const std::vector<SurveyImage>& images);

struct RegressionFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
  double residual_std = 0.0;  // s = sqrt(SS_res / (n - 2))
  double mean_x = 0.0;
  double sxx = 0.0;
  double t_critical = 0.0;  // t(0.975, n-2)
  // 95% mean-response half-width at each record's expert_pct, aligned with
  // the input order.
  std::vector<double> ci95;

  double band_half_width(double x) const;
  double predict(double x) const;
};

// Least squares of estimated_pct on expert_pct with intercept. R^2 is
// 1 - SS_res/SS_tot, defined as 0 when the responses are constant.
RegressionFit fit_ols(const std::vector<CoverageRecord>& records);

enum class GroupBy { site, year, site_year };

struct GroupCoverage {
  double mean_expert_pct = 0.0;
  double mean_estimated_pct = 0.0;
  std::size_t n_images = 0;
};

// Unweighted mean of per-image percentages within each group. Keys are the
// site id, the year as text, or "site/year".
std::map<std::string, GroupCoverage> aggregate(
    const std::vector<CoverageRecord>& records, GroupBy group_by);

std::string coverage_to_csv(const std::vector<CoverageRecord>& records);
std::string fit_to_json(const RegressionFit& fit);

// Coverage scatter plot: records as dots, the fitted line, the identity
// dashed, and the shaded 95% mean-response band.
std::string scatter_svg(const std::vector<CoverageRecord>& records,
                        const RegressionFit& fit, const std::string& title);

}  // namespace benthoscan
