#include "benthoscan/hierclass.hpp"

#include <algorithm>
#include <mutex>

#include "benthoscan/error.hpp"
#include "benthoscan/util.hpp"

namespace benthoscan {

TrainingSet assemble_training_set(const TaxonomyTree& tree,
                                  const std::vector<PointLabel>& labels,
                                  const std::string& node_id,
                                  NegativePolicy policy) {
  std::set<std::string> positive_codes = descendants(tree, node_id);
  std::set<std::string> negative_codes;
  if (policy == NegativePolicy::sibling)
    negative_codes = siblings_under(tree, node_id);

  TrainingSet out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string& code = labels[i].class_code;
    if (positive_codes.count(code)) {
      out.positives.push_back(i);
    } else if (policy == NegativePolicy::inclusive ||
               negative_codes.count(code)) {
      out.negatives.push_back(i);
    }
  }
  if (out.positives.empty())
    raise(Errc::no_positives, "no labels under node " + node_id);
  if (out.negatives.empty())
    raise(Errc::no_negatives, "no negative labels for node " + node_id);
  return out;
}

TrainedClassifier train_strategy(const Strategy& strategy,
                                 const TaxonomyTree& tree, const Samples& x,
                                 const std::vector<PointLabel>& labels,
                                 const TrainConfig& cfg, int workers) {
  if (x.size() != labels.size())
    raise(Errc::dimension_mismatch, "feature rows != label count");

  TrainedClassifier out;
  out.strategy = strategy;

  if (strategy.kind == Strategy::Kind::global)
    raise(Errc::unsupported_strategy,
          "global classification is modeled but not trainable");

  if (strategy.kind == Strategy::Kind::flat) {
    std::vector<std::string> codes;
    codes.reserve(labels.size());
    for (const auto& label : labels) codes.push_back(label.class_code);
    double c = cfg.c_grid.front();
    if (cfg.c_grid.size() > 1) {
      out.cv = cross_validate(x, codes, cfg, workers);
      c = out.cv->best_c;
    }
    out.flat_models = train_one_vs_all_fixed_c(x, codes, c, cfg, workers);
    out.chosen_c = c;
    return out;
  }

  if (!tree.has_node(strategy.target_node_id))
    raise(Errc::unknown_node, strategy.target_node_id);
  TrainingSet sets = assemble_training_set(tree, labels,
                                           strategy.target_node_id,
                                           strategy.policy);

  Samples node_x(x.dim());
  node_x.reserve(sets.positives.size() + sets.negatives.size());
  std::vector<int> node_y;
  std::vector<std::string> cv_codes;
  for (std::size_t i : sets.positives) {
    node_x.add(x[i]);
    node_y.push_back(1);
    cv_codes.emplace_back("pos");
  }
  for (std::size_t i : sets.negatives) {
    node_x.add(x[i]);
    node_y.push_back(-1);
    cv_codes.emplace_back("neg");
  }

  double c = cfg.c_grid.front();
  if (cfg.c_grid.size() > 1) {
    out.cv = cross_validate(node_x, cv_codes, cfg, workers);
    c = out.cv->best_c;
  }

  NodeClassifier node;
  node.node_id = strategy.target_node_id;
  node.policy = strategy.policy;
  node.model = train_binary(node_x, node_y, c, cfg);
  node.model.positive_label = strategy.target_node_id;
  node.positive_codes = descendants(tree, strategy.target_node_id);
  node.negative_codes = strategy.policy == NegativePolicy::sibling
                            ? siblings_under(tree, strategy.target_node_id)
                            : std::set<std::string>{};
  if (strategy.policy == NegativePolicy::inclusive) {
    for (const auto& [code, id] : tree.code_index) {
      (void)id;
      if (!node.positive_codes.count(code)) node.negative_codes.insert(code);
    }
  }
  out.node = std::move(node);
  out.chosen_c = c;
  return out;
}

AllNodesResult train_all_nodes(const TaxonomyTree& tree, const Samples& x,
                               const std::vector<PointLabel>& labels,
                               NegativePolicy policy, const TrainConfig& cfg,
                               int workers) {
  AllNodesResult result;
  std::vector<std::string> node_ids;
  for (const auto& [node_id, node] : tree.nodes) {
    (void)node;
    node_ids.push_back(node_id);
  }

  std::vector<std::optional<NodeClassifier>> trained(node_ids.size());
  std::vector<std::pair<std::string, std::string>> skipped;
  std::mutex skip_mutex;
  parallel_for(node_ids.size(), workers, [&](std::size_t i) {
    const std::string& node_id = node_ids[i];
    try {
      Strategy strategy = Strategy::local_binary(policy, node_id);
      TrainedClassifier classifier =
          train_strategy(strategy, tree, x, labels, cfg, /*workers=*/1);
      trained[i] = std::move(*classifier.node);
    } catch (const Error& e) {
      if (e.code() != Errc::no_positives && e.code() != Errc::no_negatives &&
          e.code() != Errc::root_has_no_siblings)
        throw;
      std::lock_guard<std::mutex> lock(skip_mutex);
      skipped.emplace_back(node_id, e.what());
    }
  });

  for (auto& node : trained)
    if (node) result.trained.push_back(std::move(*node));
  std::sort(skipped.begin(), skipped.end());
  result.skipped = std::move(skipped);
  return result;
}

const std::string& predict_flat(const TrainedClassifier& classifier,
                                std::span<const float> x) {
  if (classifier.strategy.kind != Strategy::Kind::flat ||
      classifier.flat_models.empty())
    raise(Errc::config_error, "classifier is not a trained flat classifier");
  return predict_multiclass(classifier.flat_models, x);
}

bool predict_node_positive(const TrainedClassifier& classifier,
                           std::span<const float> x) {
  if (!classifier.node)
    raise(Errc::config_error, "classifier has no node model");
  return decision_value(classifier.node->model, x) >= 0.0;
}

}  // namespace benthoscan
