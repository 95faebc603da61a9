#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace benthoscan {

// Row-major dense feature matrix shared by the solver and the classifiers.
class Samples {
 public:
  explicit Samples(std::size_t dim) : dim_(dim) {}

  void add(std::span<const float> row);
  std::span<const float> operator[](std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::size_t size() const { return dim_ ? data_.size() / dim_ : 0; }
  std::size_t dim() const { return dim_; }
  void reserve(std::size_t rows) { data_.reserve(rows * dim_); }

 private:
  std::size_t dim_;
  std::vector<float> data_;
};

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  std::string positive_label;
  double c_value = 1.0;
  std::string backend_id;
  std::string created_at;
  // training metadata
  int iterations = 0;            // epochs actually run
  double final_violation = 0.0;  // max |projected gradient| at termination
  bool low_support = false;      // fewer than 2 positive training samples
};

enum class ClassWeighting { none, inverse_frequency };

struct TrainConfig {
  std::vector<double> c_grid = {0.01, 0.1, 1.0, 10.0};
  int folds = 3;
  double tolerance = 1e-4;
  int max_iterations = 1000;  // epochs over the active set
  std::uint64_t seed = 0;
  ClassWeighting weighting = ClassWeighting::none;
};

// Filled by train_binary when requested; the dual objective is recorded once
// per epoch and must be non-decreasing.
struct TrainStats {
  std::vector<double> dual_objective;
  std::vector<double> alpha;  // final dual variables, 0 <= alpha_i <= C_i
  int epochs = 0;
  double final_violation = 0.0;
};

// L2-regularized hinge-loss SVM trained by dual coordinate descent with box
// constraints 0 <= alpha_i <= C, random permutation per epoch and a
// shrinking heuristic. The bias is an appended constant-1 feature, so it is
// regularized along with the weights. y entries are +1/-1.
LinearModel train_binary(const Samples& x, const std::vector<int>& y, double c,
                         const TrainConfig& cfg, TrainStats* stats = nullptr);

double decision_value(const LinearModel& model, std::span<const float> x);

// One binary model per distinct code in y, decision "code vs rest". When the
// config carries more than one C the choice is made by cross_validate first;
// a single-entry grid is used as-is.
std::vector<LinearModel> train_one_vs_all(const Samples& x,
                                          const std::vector<std::string>& y,
                                          const TrainConfig& cfg,
                                          int workers = 1);

std::vector<LinearModel> train_one_vs_all_fixed_c(
    const Samples& x, const std::vector<std::string>& y, double c,
    const TrainConfig& cfg, int workers = 1);

// Argmax of decision values; ties go to the lexicographically smallest
// positive_label.
const std::string& predict_multiclass(std::span<const LinearModel> models,
                                      std::span<const float> x);

struct CvResult {
  double best_c = 0.0;
  std::vector<double> mean_scores;  // aligned with cfg.c_grid
  // fold_scores[i][f]: mean-f1 of c_grid[i] on fold f. Reports quote these
  // as mean +/- sample standard deviation over folds.
  std::vector<std::vector<double>> fold_scores;

  double std_score(std::size_t c_index) const;
};

// Stratified k-fold selection of C, scored by mean f1 over the classes
// present in each validation fold. Ties resolve to the smaller C.
CvResult cross_validate(const Samples& x, const std::vector<std::string>& y,
                        const TrainConfig& cfg, int workers = 1);

// Deterministic stratified fold assignment (fold index per sample), seeded by
// cfg.seed. Exposed for tests.
std::vector<int> stratified_folds(const std::vector<std::string>& y, int folds,
                                  std::uint64_t seed);

// Model file: JSON with a base64-encoded f32 weight block.
void save_model(const LinearModel& model, const std::filesystem::path& path);
LinearModel load_model(const std::filesystem::path& path);
std::string model_to_json(const LinearModel& model);
LinearModel model_from_json(const std::string& json_text);

}  // namespace benthoscan
