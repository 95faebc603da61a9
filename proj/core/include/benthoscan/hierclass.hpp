#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "benthoscan/dataset.hpp"
#include "benthoscan/svm.hpp"
#include "benthoscan/taxonomy.hpp"

namespace benthoscan {

enum class NegativePolicy { inclusive, sibling };

struct Strategy {
  enum class Kind { flat, local_binary, global };

  Kind kind = Kind::flat;
  NegativePolicy policy = NegativePolicy::inclusive;  // local_binary only
  std::string target_node_id;                         // local_binary only

  static Strategy flat() { return Strategy{Kind::flat, {}, {}}; }
  static Strategy local_binary(NegativePolicy policy, std::string node_id) {
    return Strategy{Kind::local_binary, policy, std::move(node_id)};
  }
  static Strategy global() { return Strategy{Kind::global, {}, {}}; }
};

struct TrainingSet {
  std::vector<std::size_t> positives;  // indices into the label sequence
  std::vector<std::size_t> negatives;
};

// Positives are labels whose code descends from the node (including the
// node's own code). Inclusive negatives are every other label; sibling
// negatives are labels under the node's parent but outside the node.
TrainingSet assemble_training_set(const TaxonomyTree& tree,
                                  const std::vector<PointLabel>& labels,
                                  const std::string& node_id,
                                  NegativePolicy policy);

struct NodeClassifier {
  std::string node_id;
  NegativePolicy policy = NegativePolicy::inclusive;
  LinearModel model;
  std::set<std::string> positive_codes;
  std::set<std::string> negative_codes;
};

struct TrainedClassifier {
  Strategy strategy;
  // flat
  std::vector<LinearModel> flat_models;
  // local_binary
  std::optional<NodeClassifier> node;
  double chosen_c = 0.0;
  // present when the C grid had more than one entry
  std::optional<CvResult> cv;
};

// labels[i] is the class code of samples row i.
TrainedClassifier train_strategy(const Strategy& strategy,
                                 const TaxonomyTree& tree, const Samples& x,
                                 const std::vector<PointLabel>& labels,
                                 const TrainConfig& cfg, int workers = 1);

struct AllNodesResult {
  std::vector<NodeClassifier> trained;
  // node_id -> reason ("no positives", "no negatives", "root has no
  // siblings") for nodes that could not be trained under the policy
  std::vector<std::pair<std::string, std::string>> skipped;
};

// Trains one binary classifier for every tree node that has both positives
// and negatives under the policy; untrainable nodes are skipped with a
// reason instead of failing the run.
AllNodesResult train_all_nodes(const TaxonomyTree& tree, const Samples& x,
                               const std::vector<PointLabel>& labels,
                               NegativePolicy policy, const TrainConfig& cfg,
                               int workers = 1);

// Flat prediction: argmax class code.
const std::string& predict_flat(const TrainedClassifier& classifier,
                                std::span<const float> x);

// Node prediction: positive ("kelp") iff the decision value is >= 0. The
// boundary is assigned to the positive side.
bool predict_node_positive(const TrainedClassifier& classifier,
                           std::span<const float> x);

}  // namespace benthoscan
