#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "benthoscan/error.hpp"
#include "benthoscan/hierclass.hpp"
#include "helpers/fixtures.hpp"
#include "helpers/oracles.hpp"

using namespace benthoscan;

namespace {

std::vector<PointLabel> labels_of(const std::vector<std::string>& codes) {
  std::vector<PointLabel> labels;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    PointLabel label;
    label.image_id = "img-" + std::to_string(i);
    label.x_px = int(i);
    label.y_px = 0;
    label.class_code = codes[i];
    labels.push_back(label);
  }
  return labels;
}

}  // namespace

TEST_CASE("inclusive negatives draw from both non-kelp branches") {
  TaxonomyTree tree = parse_taxonomy(fixtures::kKelpTreeJson);
  auto labels = labels_of(
      {"MAECK", "MAECK", "MAENR", "MASCY", "SPC", "SUS", "MAECK"});

  TrainingSet inclusive = assemble_training_set(tree, labels, "1.1.1",
                                                NegativePolicy::inclusive);
  CHECK(inclusive.positives == std::vector<std::size_t>{0, 1, 6});
  // negatives: the other-macroalgae labels (node 1.1.2) and the
  // non-macroalgae labels (node 1.2)
  CHECK(inclusive.negatives == std::vector<std::size_t>{2, 3, 4, 5});

  TrainingSet sibling =
      assemble_training_set(tree, labels, "1.1.1", NegativePolicy::sibling);
  CHECK(sibling.positives == inclusive.positives);
  CHECK(sibling.negatives == std::vector<std::size_t>{2, 3});

  // sibling negatives are a strict subset when non-MA labels exist
  for (std::size_t i : sibling.negatives)
    CHECK(std::count(inclusive.negatives.begin(), inclusive.negatives.end(),
                     i) == 1);
  CHECK(sibling.negatives.size() < inclusive.negatives.size());
}

TEST_CASE("assembly errors when a side is empty") {
  TaxonomyTree tree = parse_taxonomy(fixtures::kKelpTreeJson);
  try {
    assemble_training_set(tree, labels_of({"SPC", "SUS"}), "1.1.1",
                          NegativePolicy::inclusive);
    FAIL("expected NoPositives");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::no_positives);
  }
  try {
    assemble_training_set(tree, labels_of({"MAECK", "MAECK"}), "1.1.1",
                          NegativePolicy::sibling);
    FAIL("expected NoNegatives");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::no_negatives);
  }
}

namespace {

// brute-force oracle: recompute both sets straight from the definitions
// using an independent recursive collector over the tree
void collect_codes(const TaxonomyTree& tree, const std::string& node_id,
                   std::set<std::string>& out) {
  const TaxonomyNode& node = tree.node(node_id);
  if (!node.code.empty()) out.insert(node.code);
  for (const auto& child : node.children) collect_codes(tree, child, out);
}

struct OracleSets {
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
};

OracleSets policy_oracle(const TaxonomyTree& tree,
                         const std::vector<PointLabel>& labels,
                         const std::string& node_id, NegativePolicy policy) {
  std::set<std::string> pos_codes;
  collect_codes(tree, node_id, pos_codes);
  std::set<std::string> neg_codes;
  if (policy == NegativePolicy::sibling) {
    std::set<std::string> parent_codes;
    collect_codes(tree, tree.node(node_id).parent_id, parent_codes);
    for (const auto& code : parent_codes)
      if (!pos_codes.count(code)) neg_codes.insert(code);
  }
  OracleSets out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (pos_codes.count(labels[i].class_code))
      out.positives.push_back(i);
    else if (policy == NegativePolicy::inclusive ||
             neg_codes.count(labels[i].class_code))
      out.negatives.push_back(i);
  }
  return out;
}

std::string random_tree_json(oracles::Rng& rng, const std::string& node_id,
                             int depth, int& code_counter,
                             std::vector<std::string>& node_ids) {
  node_ids.push_back(node_id);
  std::string json = "{\"node_id\": \"" + node_id + "\"";
  if (rng.uniform() < 0.75)
    json += ", \"code\": \"C" + std::to_string(code_counter++) + "\"";
  int children = depth >= 3 ? 0 : rng.uniform_int(0, 3);
  if (children) {
    json += ", \"children\": [";
    for (int i = 0; i < children; ++i) {
      if (i) json += ",";
      json += random_tree_json(rng, node_id + "." + std::to_string(i + 1),
                               depth + 1, code_counter, node_ids);
    }
    json += "]";
  }
  return json + "}";
}

}  // namespace

TEST_CASE("policy set algebra matches the brute-force oracle on random trees") {
  int checked = 0;
  for (std::uint64_t seed = 1; checked < 200; ++seed) {
    oracles::Rng rng(seed * 977);
    int code_counter = 0;
    std::vector<std::string> node_ids;
    std::string json = random_tree_json(rng, "1", 0, code_counter, node_ids);
    if (code_counter < 2) continue;
    TaxonomyTree tree = parse_taxonomy(json);

    std::vector<std::string> codes;
    for (int i = 0; i < 40; ++i)
      codes.push_back("C" + std::to_string(rng.uniform_int(0, code_counter - 1)));
    auto labels = labels_of(codes);

    std::string target = node_ids[std::size_t(
        rng.uniform_int(1, int(node_ids.size()) - 1))];  // non-root

    for (NegativePolicy policy :
         {NegativePolicy::inclusive, NegativePolicy::sibling}) {
      OracleSets expected = policy_oracle(tree, labels, target, policy);
      if (expected.positives.empty() || expected.negatives.empty()) {
        CHECK_THROWS_AS(assemble_training_set(tree, labels, target, policy),
                        Error);
        continue;
      }
      TrainingSet got = assemble_training_set(tree, labels, target, policy);
      CHECK(got.positives == expected.positives);
      CHECK(got.negatives == expected.negatives);
    }

    // sibling negatives are a subset of inclusive negatives, positives equal
    OracleSets inc =
        policy_oracle(tree, labels, target, NegativePolicy::inclusive);
    OracleSets sib =
        policy_oracle(tree, labels, target, NegativePolicy::sibling);
    CHECK(inc.positives == sib.positives);
    std::set<std::size_t> inc_set(inc.negatives.begin(), inc.negatives.end());
    for (std::size_t i : sib.negatives) CHECK(inc_set.count(i) == 1);

    ++checked;
  }
}

namespace {

// kelp and other-MA clusters linearly separable; non-MA in a third cluster
struct SeparableFixture {
  Samples x{2};
  std::vector<PointLabel> labels;
};

SeparableFixture separable_fixture() {
  SeparableFixture fixture;
  oracles::Rng rng(5);
  auto add = [&](double cx, double cy, const char* code, int n) {
    for (int i = 0; i < n; ++i) {
      fixture.x.add(std::vector<float>{float(cx + rng.uniform(-0.2, 0.2)),
                                       float(cy + rng.uniform(-0.2, 0.2))});
      PointLabel label;
      label.image_id = "img-" + std::to_string(fixture.labels.size());
      label.class_code = code;
      fixture.labels.push_back(label);
    }
  };
  add(2.0, 2.0, "MAECK", 10);
  add(-2.0, 2.0, "MAENR", 6);
  add(-2.0, 1.0, "MASCY", 6);
  add(0.0, -2.5, "SPC", 8);
  return fixture;
}

}  // namespace

TEST_CASE("local binary training on a separable fixture recalls every kelp") {
  TaxonomyTree tree = parse_taxonomy(fixtures::kKelpTreeJson);
  SeparableFixture fixture = separable_fixture();
  TrainConfig cfg;
  cfg.seed = 3;

  for (NegativePolicy policy :
       {NegativePolicy::sibling, NegativePolicy::inclusive}) {
    Strategy strategy = policy == NegativePolicy::sibling
                            ? Strategy::local_binary(policy, "1.1.1")
                            : Strategy::local_binary(policy, "1.1.1");
    TrainedClassifier classifier =
        train_strategy(strategy, tree, fixture.x, fixture.labels, cfg);
    REQUIRE(classifier.node.has_value());
    CHECK(classifier.node->positive_codes == std::set<std::string>{"MAECK"});

    for (std::size_t i = 0; i < fixture.labels.size(); ++i) {
      bool is_kelp = fixture.labels[i].class_code == "MAECK";
      if (is_kelp)  // held-in recall on the separable construction
        CHECK(predict_node_positive(classifier, fixture.x[i]));
    }
  }
}

TEST_CASE("flat training yields one model per class and separates the toy set") {
  TaxonomyTree tree = parse_taxonomy(fixtures::kKelpTreeJson);
  SeparableFixture fixture = separable_fixture();
  TrainConfig cfg;
  cfg.seed = 3;

  TrainedClassifier classifier = train_strategy(Strategy::flat(), tree,
                                                fixture.x, fixture.labels, cfg);
  CHECK(classifier.flat_models.size() == 4);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < fixture.labels.size(); ++i)
    if (predict_flat(classifier, fixture.x[i]) == fixture.labels[i].class_code)
      ++correct;
  CHECK(correct == fixture.labels.size());
}

TEST_CASE("global strategy is constructible but untrainable") {
  TaxonomyTree tree = parse_taxonomy(fixtures::kKelpTreeJson);
  SeparableFixture fixture = separable_fixture();
  try {
    train_strategy(Strategy::global(), tree, fixture.x, fixture.labels, {});
    FAIL("expected UnsupportedStrategy");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unsupported_strategy);
  }
}

TEST_CASE("decision value exactly zero goes to the positive side") {
  TrainedClassifier classifier;
  classifier.strategy = Strategy::local_binary(NegativePolicy::sibling, "1.1.1");
  NodeClassifier node;
  node.node_id = "1.1.1";
  node.model.weights = {1.0, 0.0};
  node.model.bias = 0.0;
  classifier.node = node;
  CHECK(predict_node_positive(classifier, std::vector<float>{0.0f, 5.0f}));
  CHECK(predict_node_positive(classifier, std::vector<float>{1.0f, 0.0f}));
  CHECK_FALSE(predict_node_positive(classifier, std::vector<float>{-0.1f, 0.0f}));
}

TEST_CASE("node predictions equal the sign of an independent dot product") {
  TaxonomyTree tree = parse_taxonomy(fixtures::kKelpTreeJson);
  SeparableFixture fixture = separable_fixture();
  TrainConfig cfg;
  TrainedClassifier classifier = train_strategy(
      Strategy::local_binary(NegativePolicy::inclusive, "1.1.1"), tree,
      fixture.x, fixture.labels, cfg);

  oracles::Rng rng(71);
  const LinearModel& model = classifier.node->model;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<float> probe{float(rng.uniform(-4, 4)), float(rng.uniform(-4, 4))};
    double value = model.bias;
    for (std::size_t d = 0; d < 2; ++d)
      value += model.weights[d] * double(probe[d]);
    CHECK(predict_node_positive(classifier, probe) == (value >= 0.0));
  }
}

TEST_CASE("all-nodes training skips untrainable nodes with a reason") {
  TaxonomyTree tree = parse_taxonomy(fixtures::kKelpTreeJson);
  SeparableFixture fixture = separable_fixture();  // no SUS labels
  TrainConfig cfg;
  cfg.c_grid = {1.0};

  AllNodesResult inclusive = train_all_nodes(
      tree, fixture.x, fixture.labels, NegativePolicy::inclusive, cfg, 2);
  std::set<std::string> trained_ids;
  for (const auto& node : inclusive.trained) trained_ids.insert(node.node_id);
  // trainable: macroalgae (vs SPC), kelp, other-MA, both MA leaves, SPC leaf
  CHECK(trained_ids.count("1.1"));
  CHECK(trained_ids.count("1.1.1"));
  CHECK(trained_ids.count("1.1.2"));
  CHECK(trained_ids.count("1.2.1"));
  // untrainable: the root (no negatives left) and the unlabeled SUS leaf
  std::set<std::string> skipped_ids;
  for (const auto& [node_id, reason] : inclusive.skipped) {
    skipped_ids.insert(node_id);
    CHECK_FALSE(reason.empty());
  }
  CHECK(skipped_ids.count("1"));
  CHECK(skipped_ids.count("1.2.2"));
  CHECK(trained_ids.size() + skipped_ids.size() == tree.nodes.size());

  AllNodesResult sibling = train_all_nodes(
      tree, fixture.x, fixture.labels, NegativePolicy::sibling, cfg, 2);
  // sibling policy additionally skips the root (no siblings) and any node
  // whose sibling subtree carries no labels
  std::set<std::string> sibling_ids;
  for (const auto& node : sibling.trained) sibling_ids.insert(node.node_id);
  CHECK(sibling_ids.count("1.1.1"));  // kelp vs other macroalgae
  for (const auto& node : sibling.trained)
    CHECK(node.policy == NegativePolicy::sibling);
}

TEST_CASE("training is deterministic end-to-end for a fixed seed") {
  TaxonomyTree tree = parse_taxonomy(fixtures::kKelpTreeJson);
  SeparableFixture fixture = separable_fixture();
  TrainConfig cfg;
  cfg.seed = 99;

  auto run = [&]() {
    return train_strategy(
        Strategy::local_binary(NegativePolicy::sibling, "1.1.1"), tree,
        fixture.x, fixture.labels, cfg, /*workers=*/2);
  };
  TrainedClassifier a = run();
  TrainedClassifier b = run();
  CHECK(a.node->model.weights == b.node->model.weights);  // bit-for-bit
  CHECK(a.node->model.bias == b.node->model.bias);
  CHECK(a.chosen_c == b.chosen_c);
}
