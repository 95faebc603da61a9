#include "benthoscan/taxonomy.hpp"

#include <fstream>

#include <json.hpp>

#include "benthoscan/error.hpp"

namespace benthoscan {

const TaxonomyNode& TaxonomyTree::node(const std::string& node_id) const {
  auto it = nodes.find(node_id);
  if (it == nodes.end()) raise(Errc::unknown_node, node_id);
  return it->second;
}

namespace {

// A child id must be parent id + "." + one dot-free component.
bool extends_by_one_component(const std::string& parent,
                              const std::string& child) {
  if (child.size() <= parent.size() + 1) return false;
  if (child.compare(0, parent.size(), parent) != 0) return false;
  if (child[parent.size()] != '.') return false;
  return child.find('.', parent.size() + 1) == std::string::npos;
}

void insert_subtree(const nlohmann::json& doc, const std::string& parent_id,
                    TaxonomyTree& tree) {
  if (!doc.is_object() || !doc.contains("node_id"))
    raise(Errc::orphan_node, "taxonomy entry without node_id");
  std::string node_id = doc.at("node_id").get<std::string>();
  if (node_id.empty()) raise(Errc::orphan_node, "empty node_id");
  if (!parent_id.empty() && !extends_by_one_component(parent_id, node_id))
    raise(Errc::orphan_node,
          "node " + node_id + " does not extend parent " + parent_id);
  if (tree.nodes.count(node_id))
    raise(Errc::cycle_detected, "node id " + node_id + " appears twice");

  TaxonomyNode node;
  node.node_id = node_id;
  node.parent_id = parent_id;
  if (doc.contains("code")) node.code = doc.at("code").get<std::string>();
  if (doc.contains("name")) node.display_name = doc.at("name").get<std::string>();
  if (!node.code.empty()) {
    auto [it, inserted] = tree.code_index.emplace(node.code, node_id);
    (void)it;
    if (!inserted) raise(Errc::duplicate_code, node.code);
  }
  tree.nodes.emplace(node_id, node);
  if (!parent_id.empty()) tree.nodes.at(parent_id).children.push_back(node_id);

  if (doc.contains("children")) {
    for (const auto& child : doc.at("children"))
      insert_subtree(child, node_id, tree);
  }
}

}  // namespace

TaxonomyTree parse_taxonomy(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::io_error, std::string("invalid taxonomy JSON: ") + e.what());
  }
  TaxonomyTree tree;
  insert_subtree(doc, "", tree);
  tree.root_id = doc.at("node_id").get<std::string>();
  return tree;
}

TaxonomyTree load_taxonomy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::io_error, "cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_taxonomy(text);
}

std::set<std::string> descendants(const TaxonomyTree& tree,
                                  const std::string& node_id) {
  const TaxonomyNode& start = tree.node(node_id);
  std::set<std::string> codes;
  std::vector<const TaxonomyNode*> stack{&start};
  while (!stack.empty()) {
    const TaxonomyNode* n = stack.back();
    stack.pop_back();
    if (!n->code.empty()) codes.insert(n->code);
    for (const auto& child : n->children) stack.push_back(&tree.node(child));
  }
  return codes;
}

std::set<std::string> siblings_under(const TaxonomyTree& tree,
                                     const std::string& target_node_id) {
  const TaxonomyNode& target = tree.node(target_node_id);
  if (target.parent_id.empty())
    raise(Errc::root_has_no_siblings, target_node_id);
  std::set<std::string> result = descendants(tree, target.parent_id);
  for (const auto& code : descendants(tree, target_node_id))
    result.erase(code);
  return result;
}

}  // namespace benthoscan
