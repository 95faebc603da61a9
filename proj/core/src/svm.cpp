#include "benthoscan/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>

#include <json.hpp>

#include "benthoscan/error.hpp"
#include "benthoscan/metrics.hpp"
#include "benthoscan/util.hpp"

namespace benthoscan {

void Samples::add(std::span<const float> row) {
  if (row.size() != dim_)
    raise(Errc::dimension_mismatch,
          "sample of length " + std::to_string(row.size()) + ", expected " +
              std::to_string(dim_));
  data_.insert(data_.end(), row.begin(), row.end());
}

namespace {

double dot(std::span<const float> x, const std::vector<double>& w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += double(x[i]) * w[i];
  return acc;
}

}  // namespace

// Solves  min_alpha  0.5 * alpha^T Qbar alpha - e^T alpha
//         s.t.       0 <= alpha_i <= C_i
// where Qbar_ij = y_i y_j (x_i . x_j + 1); the +1 is the implicit constant
// bias feature. w and b are recovered as sum_i alpha_i y_i [x_i; 1].
// Stops when the largest projected-gradient magnitude over a full pass drops
// below the tolerance, with the usual shrinking of coordinates pinned at
// their bounds.
LinearModel train_binary(const Samples& x, const std::vector<int>& y, double c,
                         const TrainConfig& cfg, TrainStats* stats) {
  const std::size_t n = x.size();
  const std::size_t dim = x.dim();
  if (n != y.size())
    raise(Errc::dimension_mismatch, "label count != sample count");
  if (n < 2) raise(Errc::single_class_input, "need at least 2 samples");
  if (!(c > 0.0)) raise(Errc::config_error, "C must be positive");

  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] != 1 && y[i] != -1)
      raise(Errc::config_error, "labels must be +1/-1");
    if (y[i] == 1) ++n_pos;
  }
  if (n_pos == 0 || n_pos == n)
    raise(Errc::single_class_input, "both labels must be present");

  for (std::size_t i = 0; i < n; ++i)
    for (float v : x[i])
      if (!std::isfinite(v))
        raise(Errc::non_finite_feature,
              "sample " + std::to_string(i) + " has a non-finite value");

  double c_pos = c, c_neg = c;
  if (cfg.weighting == ClassWeighting::inverse_frequency) {
    c_pos = c * double(n) / (2.0 * double(n_pos));
    c_neg = c * double(n) / (2.0 * double(n - n_pos));
  }

  std::vector<double> w(dim, 0.0);
  double bias = 0.0;
  std::vector<double> alpha(n, 0.0);
  std::vector<double> qdiag(n);
  for (std::size_t i = 0; i < n; ++i) {
    double q = 1.0;  // bias feature
    for (float v : x[i]) q += double(v) * double(v);
    qdiag[i] = q;
  }

  std::vector<std::size_t> index(n);
  for (std::size_t i = 0; i < n; ++i) index[i] = i;
  std::size_t active = n;

  std::mt19937_64 rng(cfg.seed);
  const double inf = std::numeric_limits<double>::infinity();
  double pg_max_old = inf, pg_min_old = -inf;

  int epoch = 0;
  double violation = inf;
  if (stats) {
    stats->dual_objective.clear();
    stats->dual_objective.push_back(0.0);  // all-zero starting point
  }

  while (epoch < cfg.max_iterations) {
    double pg_max_new = -inf, pg_min_new = inf;

    for (std::size_t i = 0; i < active; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, active - 1);
      std::swap(index[i], index[pick(rng)]);
    }

    for (std::size_t s = 0; s < active; ++s) {
      std::size_t i = index[s];
      double yi = y[i];
      double ci = y[i] > 0 ? c_pos : c_neg;
      double g = yi * (dot(x[i], w) + bias) - 1.0;

      double pg = 0.0;
      if (alpha[i] == 0.0) {
        if (g > pg_max_old) {
          --active;
          std::swap(index[s], index[active]);
          --s;
          continue;
        }
        if (g < 0.0) pg = g;
      } else if (alpha[i] == ci) {
        if (g < pg_min_old) {
          --active;
          std::swap(index[s], index[active]);
          --s;
          continue;
        }
        if (g > 0.0) pg = g;
      } else {
        pg = g;
      }

      pg_max_new = std::max(pg_max_new, pg);
      pg_min_new = std::min(pg_min_new, pg);

      if (std::fabs(pg) > 1e-12) {
        double old = alpha[i];
        alpha[i] = std::min(std::max(old - g / qdiag[i], 0.0), ci);
        double step = (alpha[i] - old) * yi;
        if (step != 0.0) {
          auto xi = x[i];
          for (std::size_t d = 0; d < dim; ++d) w[d] += step * double(xi[d]);
          bias += step;
        }
      }
    }

    ++epoch;
    if (stats) {
      double wnorm2 = bias * bias;
      for (double v : w) wnorm2 += v * v;
      double alpha_sum = 0.0;
      for (double a : alpha) alpha_sum += a;
      stats->dual_objective.push_back(alpha_sum - 0.5 * wnorm2);
    }

    violation = std::max(pg_max_new == -inf ? 0.0 : pg_max_new,
                         pg_min_new == inf ? 0.0 : -pg_min_new);
    if (violation < cfg.tolerance) {
      if (active == n) break;
      // Converged on the shrunk set: restore everything and confirm.
      active = n;
      pg_max_old = inf;
      pg_min_old = -inf;
      continue;
    }
    pg_max_old = pg_max_new <= 0.0 ? inf : pg_max_new;
    pg_min_old = pg_min_new >= 0.0 ? -inf : pg_min_new;
  }

  LinearModel model;
  model.weights = std::move(w);
  model.bias = bias;
  model.c_value = c;
  model.iterations = epoch;
  model.final_violation = violation;
  model.low_support = n_pos < 2;
  if (stats) {
    stats->epochs = epoch;
    stats->final_violation = violation;
    stats->alpha = std::move(alpha);
  }
  return model;
}

double decision_value(const LinearModel& model, std::span<const float> x) {
  if (x.size() != model.weights.size())
    raise(Errc::dimension_mismatch,
          "vector of length " + std::to_string(x.size()) + " against model of " +
              std::to_string(model.weights.size()));
  return dot(x, model.weights) + model.bias;
}

std::vector<LinearModel> train_one_vs_all_fixed_c(
    const Samples& x, const std::vector<std::string>& y, double c,
    const TrainConfig& cfg, int workers) {
  std::set<std::string> distinct(y.begin(), y.end());
  if (distinct.size() < 2)
    raise(Errc::single_class_input, "one-vs-all needs at least 2 classes");
  std::vector<std::string> classes(distinct.begin(), distinct.end());

  std::vector<LinearModel> models(classes.size());
  parallel_for(classes.size(), workers, [&](std::size_t k) {
    std::vector<int> labels(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
      labels[i] = y[i] == classes[k] ? 1 : -1;
    models[k] = train_binary(x, labels, c, cfg);
    models[k].positive_label = classes[k];
  });
  return models;
}

std::vector<LinearModel> train_one_vs_all(const Samples& x,
                                          const std::vector<std::string>& y,
                                          const TrainConfig& cfg,
                                          int workers) {
  if (cfg.c_grid.empty()) raise(Errc::config_error, "empty C grid");
  double c = cfg.c_grid.front();
  if (cfg.c_grid.size() > 1) c = cross_validate(x, y, cfg, workers).best_c;
  return train_one_vs_all_fixed_c(x, y, c, cfg, workers);
}

const std::string& predict_multiclass(std::span<const LinearModel> models,
                                      std::span<const float> x) {
  if (models.empty()) raise(Errc::config_error, "no models to predict with");
  const LinearModel* best = &models[0];
  double best_value = decision_value(models[0], x);
  for (std::size_t k = 1; k < models.size(); ++k) {
    double value = decision_value(models[k], x);
    if (value > best_value ||
        (value == best_value &&
         models[k].positive_label < best->positive_label)) {
      best = &models[k];
      best_value = value;
    }
  }
  return best->positive_label;
}

std::vector<int> stratified_folds(const std::vector<std::string>& y, int folds,
                                  std::uint64_t seed) {
  if (folds < 2) raise(Errc::config_error, "folds must be >= 2");
  if (y.size() < std::size_t(folds))
    raise(Errc::insufficient_samples_for_folds,
          std::to_string(y.size()) + " samples for " + std::to_string(folds) +
              " folds");

  std::map<std::string, std::vector<std::size_t>> per_class;
  for (std::size_t i = 0; i < y.size(); ++i) per_class[y[i]].push_back(i);

  std::vector<int> assignment(y.size(), 0);
  // Per-class offset staggers which fold starts filling first so small
  // classes do not all land in fold 0.
  int offset = 0;
  for (auto& [code, members] : per_class) {
    std::mt19937_64 rng(mix_seed(seed, code));
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t i = 0; i < members.size(); ++i)
      assignment[members[i]] = int((i + std::size_t(offset)) % std::size_t(folds));
    offset = (offset + int(members.size())) % folds;
  }
  return assignment;
}

CvResult cross_validate(const Samples& x, const std::vector<std::string>& y,
                        const TrainConfig& cfg, int workers) {
  if (cfg.c_grid.empty()) raise(Errc::config_error, "empty C grid");
  if (x.size() != y.size())
    raise(Errc::dimension_mismatch, "label count != sample count");

  std::vector<int> fold_of = stratified_folds(y, cfg.folds, cfg.seed);
  for (int f = 0; f < cfg.folds; ++f)
    if (std::count(fold_of.begin(), fold_of.end(), f) == 0)
      raise(Errc::insufficient_samples_for_folds,
            "fold " + std::to_string(f) + " is empty");

  struct FoldData {
    Samples train_x;
    std::vector<std::string> train_y;
    Samples val_x;
    std::vector<std::string> val_y;
    FoldData(std::size_t dim) : train_x(dim), val_x(dim) {}
  };
  std::vector<FoldData> fold_data;
  fold_data.reserve(std::size_t(cfg.folds));
  for (int f = 0; f < cfg.folds; ++f) {
    FoldData data(x.dim());
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (fold_of[i] == f) {
        data.val_x.add(x[i]);
        data.val_y.push_back(y[i]);
      } else {
        data.train_x.add(x[i]);
        data.train_y.push_back(y[i]);
      }
    }
    std::set<std::string> train_classes(data.train_y.begin(),
                                        data.train_y.end());
    if (train_classes.size() < 2)
      raise(Errc::insufficient_samples_for_folds,
            "fold " + std::to_string(f) + " leaves a single-class train set");
    fold_data.push_back(std::move(data));
  }

  CvResult result;
  result.mean_scores.assign(cfg.c_grid.size(), 0.0);
  result.fold_scores.assign(cfg.c_grid.size(),
                            std::vector<double>(std::size_t(cfg.folds), 0.0));

  struct Task {
    std::size_t c_index;
    int fold;
  };
  std::vector<Task> tasks;
  for (std::size_t ci = 0; ci < cfg.c_grid.size(); ++ci)
    for (int f = 0; f < cfg.folds; ++f) tasks.push_back({ci, f});
  std::vector<double> scores(tasks.size(), 0.0);

  parallel_for(tasks.size(), workers, [&](std::size_t t) {
    const FoldData& data = fold_data[std::size_t(tasks[t].fold)];
    auto models = train_one_vs_all_fixed_c(data.train_x, data.train_y,
                                           cfg.c_grid[tasks[t].c_index], cfg,
                                           /*workers=*/1);
    std::vector<std::string> predicted;
    predicted.reserve(data.val_y.size());
    for (std::size_t i = 0; i < data.val_y.size(); ++i)
      predicted.push_back(predict_multiclass(models, data.val_x[i]));
    scores[t] = evaluate(predicted, data.val_y).mean_f1;
  });

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    result.fold_scores[tasks[t].c_index][std::size_t(tasks[t].fold)] =
        scores[t];
    result.mean_scores[tasks[t].c_index] += scores[t] / double(cfg.folds);
  }

  std::size_t best = 0;
  for (std::size_t ci = 1; ci < cfg.c_grid.size(); ++ci) {
    bool better = result.mean_scores[ci] > result.mean_scores[best];
    bool tie_smaller = result.mean_scores[ci] == result.mean_scores[best] &&
                       cfg.c_grid[ci] < cfg.c_grid[best];
    if (better || tie_smaller) best = ci;
  }
  result.best_c = cfg.c_grid[best];
  return result;
}

double CvResult::std_score(std::size_t c_index) const {
  const auto& folds = fold_scores[c_index];
  if (folds.size() < 2) return 0.0;
  double mean = mean_scores[c_index];
  double ss = 0.0;
  for (double s : folds) ss += (s - mean) * (s - mean);
  return std::sqrt(ss / double(folds.size() - 1));
}

// ---------------------------------------------------------------------------
// Model files

std::string model_to_json(const LinearModel& model) {
  std::vector<float> weights32(model.weights.begin(), model.weights.end());
  nlohmann::json doc;
  doc["positive_label"] = model.positive_label;
  doc["bias"] = model.bias;
  doc["c_value"] = model.c_value;
  doc["dim"] = model.weights.size();
  doc["backend_id"] = model.backend_id;
  doc["created_at"] = model.created_at;
  doc["iterations"] = model.iterations;
  doc["final_violation"] = model.final_violation;
  doc["low_support"] = model.low_support;
  doc["weights_b64"] =
      base64_encode(weights32.data(), weights32.size() * sizeof(float));
  return doc.dump(2) + "\n";
}

LinearModel model_from_json(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::io_error, std::string("invalid model JSON: ") + e.what());
  }
  LinearModel model;
  model.positive_label = doc.at("positive_label").get<std::string>();
  model.bias = doc.at("bias").get<double>();
  model.c_value = doc.at("c_value").get<double>();
  model.backend_id = doc.value("backend_id", std::string());
  model.created_at = doc.value("created_at", std::string());
  model.iterations = doc.value("iterations", 0);
  model.final_violation = doc.value("final_violation", 0.0);
  model.low_support = doc.value("low_support", false);
  auto bytes = base64_decode(doc.at("weights_b64").get<std::string>());
  std::size_t dim = doc.at("dim").get<std::size_t>();
  if (bytes.size() != dim * sizeof(float))
    raise(Errc::io_error, "weight block size does not match dim");
  std::vector<float> weights32(dim);
  std::memcpy(weights32.data(), bytes.data(), bytes.size());
  model.weights.assign(weights32.begin(), weights32.end());
  return model;
}

void save_model(const LinearModel& model, const std::filesystem::path& path) {
  write_file_bytes(path.string(), model_to_json(model));
}

LinearModel load_model(const std::filesystem::path& path) {
  return model_from_json(read_file_bytes(path.string()));
}

}  // namespace benthoscan
