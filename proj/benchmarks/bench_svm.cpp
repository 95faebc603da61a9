#include <benchmark/benchmark.h>

#include <random>

#include "benthoscan/svm.hpp"

using namespace benthoscan;

namespace {

struct Problem {
  Samples x{0};
  std::vector<int> y;
};

Problem make_problem(std::size_t n, std::size_t dim) {
  std::mt19937_64 rng(7);
  std::normal_distribution<float> noise(0.0f, 1.0f);
  Problem problem{Samples(dim), {}};
  for (std::size_t i = 0; i < n; ++i) {
    int label = i % 2 ? 1 : -1;
    std::vector<float> row(dim);
    for (auto& v : row) v = noise(rng) + float(label) * 0.5f;
    problem.x.add(row);
    problem.y.push_back(label);
  }
  return problem;
}

}  // namespace

static void BM_TrainBinary(benchmark::State& state) {
  auto problem = make_problem(std::size_t(state.range(0)),
                              std::size_t(state.range(1)));
  TrainConfig cfg;
  cfg.tolerance = 1e-3;
  for (auto _ : state) {
    LinearModel model = train_binary(problem.x, problem.y, 1.0, cfg);
    benchmark::DoNotOptimize(model.bias);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainBinary)->Args({256, 128})->Args({1024, 128})->Args({512, 2048});

static void BM_DecisionValue(benchmark::State& state) {
  auto problem = make_problem(2, std::size_t(state.range(0)));
  TrainConfig cfg;
  cfg.max_iterations = 5;
  LinearModel model = train_binary(problem.x, problem.y, 1.0, cfg);
  std::vector<float> probe(std::size_t(state.range(0)), 0.5f);
  for (auto _ : state)
    benchmark::DoNotOptimize(decision_value(model, probe));
}
BENCHMARK(BM_DecisionValue)->Arg(2048);
