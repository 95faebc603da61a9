#include "benthoscan/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include <json.hpp>

#include "benthoscan/csv.hpp"
#include "benthoscan/error.hpp"
#include "benthoscan/metrics.hpp"

namespace benthoscan {

std::vector<CoverageRecord> estimate_cover(
    const std::vector<PointOutcome>& outcomes,
    const std::vector<SurveyImage>& images) {
  struct Tally {
    std::size_t points = 0;
    std::size_t expert_kelp = 0;
    std::size_t predicted_kelp = 0;
  };
  std::unordered_map<std::string, Tally> tallies;
  for (const auto& outcome : outcomes) {
    Tally& tally = tallies[outcome.image_id];
    ++tally.points;
    if (outcome.expert_kelp) ++tally.expert_kelp;
    if (outcome.predicted_kelp) ++tally.predicted_kelp;
  }

  std::vector<CoverageRecord> records;
  records.reserve(images.size());
  for (const auto& image : images) {
    auto it = tallies.find(image.image_id);
    if (it == tallies.end() || it->second.points == 0)
      raise(Errc::no_labeled_points, image.image_id);
    const Tally& tally = it->second;
    CoverageRecord record;
    record.image_id = image.image_id;
    record.site_id = image.site_id;
    record.year = image.year;
    record.n_points = tally.points;
    record.expert_pct =
        100.0 * double(tally.expert_kelp) / double(tally.points);
    record.estimated_pct =
        100.0 * double(tally.predicted_kelp) / double(tally.points);
    records.push_back(std::move(record));
  }
  return records;
}

double RegressionFit::predict(double x) const { return slope * x + intercept; }

double RegressionFit::band_half_width(double x) const {
  if (n < 3 || sxx <= 0.0) return 0.0;
  double dx = x - mean_x;
  return t_critical * residual_std *
         std::sqrt(1.0 / double(n) + dx * dx / sxx);
}

RegressionFit fit_ols(const std::vector<CoverageRecord>& records) {
  std::size_t n = records.size();
  if (n < 3) raise(Errc::degenerate_x, "need at least 3 records");

  double mean_x = 0.0, mean_y = 0.0;
  for (const auto& r : records) {
    mean_x += r.expert_pct;
    mean_y += r.estimated_pct;
  }
  mean_x /= double(n);
  mean_y /= double(n);

  // Centered sums keep the normal equations well conditioned.
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& r : records) {
    double dx = r.expert_pct - mean_x;
    double dy = r.estimated_pct - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0)
    raise(Errc::degenerate_x, "expert cover is constant across records");

  RegressionFit fit;
  fit.n = n;
  fit.mean_x = mean_x;
  fit.sxx = sxx;
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;

  double ss_res = 0.0;
  for (const auto& r : records) {
    double e = r.estimated_pct - fit.predict(r.expert_pct);
    ss_res += e * e;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 0.0;
  fit.r_squared = std::clamp(fit.r_squared, 0.0, 1.0);

  fit.residual_std = std::sqrt(std::max(ss_res, 0.0) / double(n - 2));
  fit.t_critical = student_t_critical(0.95, double(n - 2));
  fit.ci95.reserve(n);
  for (const auto& r : records)
    fit.ci95.push_back(fit.band_half_width(r.expert_pct));
  return fit;
}

std::map<std::string, GroupCoverage> aggregate(
    const std::vector<CoverageRecord>& records, GroupBy group_by) {
  std::map<std::string, GroupCoverage> groups;
  for (const auto& record : records) {
    std::string key;
    switch (group_by) {
      case GroupBy::site: key = record.site_id; break;
      case GroupBy::year: key = std::to_string(record.year); break;
      case GroupBy::site_year:
        key = record.site_id + "/" + std::to_string(record.year);
        break;
    }
    GroupCoverage& group = groups[key];
    group.mean_expert_pct += record.expert_pct;
    group.mean_estimated_pct += record.estimated_pct;
    ++group.n_images;
  }
  for (auto& [key, group] : groups) {
    (void)key;
    group.mean_expert_pct /= double(group.n_images);
    group.mean_estimated_pct /= double(group.n_images);
  }
  return groups;
}

std::string coverage_to_csv(const std::vector<CoverageRecord>& records) {
  std::string out = "image_id,site,year,expert_pct,estimated_pct\n";
  char buf[64];
  for (const auto& r : records) {
    out += csv_escape(r.image_id) + "," + csv_escape(r.site_id) + "," +
           std::to_string(r.year);
    std::snprintf(buf, sizeof(buf), ",%.6f,%.6f\n", r.expert_pct,
                  r.estimated_pct);
    out += buf;
  }
  return out;
}

std::string fit_to_json(const RegressionFit& fit) {
  nlohmann::json doc;
  doc["slope"] = fit.slope;
  doc["intercept"] = fit.intercept;
  doc["r_squared"] = fit.r_squared;
  doc["n"] = fit.n;
  doc["residual_std"] = fit.residual_std;
  doc["mean_x"] = fit.mean_x;
  doc["sxx"] = fit.sxx;
  doc["t_critical"] = fit.t_critical;
  doc["ci95"] = fit.ci95;
  doc["band"] = "95% mean response";
  return doc.dump(2) + "\n";
}

namespace {

struct PlotFrame {
  double left = 60, top = 40, right = 520, bottom = 440;

  double px(double x) const { return left + (right - left) * x / 100.0; }
  double py(double y) const { return bottom - (bottom - top) * y / 100.0; }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string scatter_svg(const std::vector<CoverageRecord>& records,
                        const RegressionFit& fit, const std::string& title) {
  PlotFrame frame;
  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"560\" height=\"500\" "
      "viewBox=\"0 0 560 500\">\n"
      "<rect width=\"560\" height=\"500\" fill=\"white\"/>\n";
  svg += "<text x=\"280\" y=\"24\" text-anchor=\"middle\" font-size=\"15\" "
         "font-family=\"sans-serif\">" + title +
         " (R&#178; = " + fmt(fit.r_squared) + ")</text>\n";

  // axes
  svg += "<line x1=\"" + fmt(frame.left) + "\" y1=\"" + fmt(frame.bottom) +
         "\" x2=\"" + fmt(frame.right) + "\" y2=\"" + fmt(frame.bottom) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fmt(frame.left) + "\" y1=\"" + fmt(frame.top) +
         "\" x2=\"" + fmt(frame.left) + "\" y2=\"" + fmt(frame.bottom) +
         "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 100; tick += 20) {
    svg += "<text x=\"" + fmt(frame.px(tick)) + "\" y=\"" +
           fmt(frame.bottom + 18) + "\" text-anchor=\"middle\" "
           "font-size=\"11\" font-family=\"sans-serif\">" +
           std::to_string(tick) + "</text>\n";
    svg += "<text x=\"" + fmt(frame.left - 10) + "\" y=\"" +
           fmt(frame.py(tick) + 4) + "\" text-anchor=\"end\" "
           "font-size=\"11\" font-family=\"sans-serif\">" +
           std::to_string(tick) + "</text>\n";
  }
  svg += "<text x=\"290\" y=\"478\" text-anchor=\"middle\" font-size=\"13\" "
         "font-family=\"sans-serif\">Expert identified cover (%)</text>\n";
  svg += "<text x=\"16\" y=\"240\" text-anchor=\"middle\" font-size=\"13\" "
         "font-family=\"sans-serif\" transform=\"rotate(-90 16 240)\">"
         "Estimated cover (%)</text>\n";

  // shaded 95% mean-response band, sampled across the axis
  std::string upper, lower;
  constexpr int kBandSamples = 64;
  for (int i = 0; i <= kBandSamples; ++i) {
    double x = 100.0 * double(i) / kBandSamples;
    double h = fit.band_half_width(x);
    double yu = std::clamp(fit.predict(x) + h, 0.0, 100.0);
    double yl = std::clamp(fit.predict(x) - h, 0.0, 100.0);
    upper += fmt(frame.px(x)) + "," + fmt(frame.py(yu)) + " ";
    lower = fmt(frame.px(x)) + "," + fmt(frame.py(yl)) + " " + lower;
  }
  svg += "<polygon points=\"" + upper + lower +
         "\" fill=\"#4a90d9\" fill-opacity=\"0.25\" stroke=\"none\"/>\n";

  // identity dashed (perfect estimation)
  svg += "<line x1=\"" + fmt(frame.px(0)) + "\" y1=\"" + fmt(frame.py(0)) +
         "\" x2=\"" + fmt(frame.px(100)) + "\" y2=\"" + fmt(frame.py(100)) +
         "\" stroke=\"green\" stroke-dasharray=\"6,4\"/>\n";

  // fitted line, clipped to the [0,100] y-range
  {
    std::string points;
    for (int i = 0; i <= kBandSamples; ++i) {
      double x = 100.0 * double(i) / kBandSamples;
      double y = std::clamp(fit.predict(x), 0.0, 100.0);
      points += fmt(frame.px(x)) + "," + fmt(frame.py(y)) + " ";
    }
    svg += "<polyline points=\"" + points +
           "\" fill=\"none\" stroke=\"#1f4fd9\" stroke-width=\"2\"/>\n";
  }

  for (const auto& r : records) {
    svg += "<circle cx=\"" + fmt(frame.px(r.expert_pct)) + "\" cy=\"" +
           fmt(frame.py(r.estimated_pct)) +
           "\" r=\"3\" fill=\"#333333\" fill-opacity=\"0.7\"/>\n";
  }

  svg += "<text x=\"" + fmt(frame.right) + "\" y=\"" + fmt(frame.top - 6) +
         "\" text-anchor=\"end\" font-size=\"11\" "
         "font-family=\"sans-serif\">shaded: 95% CI (mean response), "
         "dashed: perfect estimation</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace benthoscan
