#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace benthoscan {

// One node of the class hierarchy. node_id is a dotted path ("1.1.1"); a
// child id always extends its parent id by exactly one component. `code` is
// the annotation class code attached to this node, or empty for a pure
// grouping node that never receives labels directly.
struct TaxonomyNode {
  std::string node_id;
  std::string code;
  std::string display_name;
  std::string parent_id;  // empty for the root
  std::vector<std::string> children;
};

struct TaxonomyTree {
  std::map<std::string, TaxonomyNode> nodes;
  std::unordered_map<std::string, std::string> code_index;  // code -> node_id
  std::string root_id;

  bool has_node(const std::string& node_id) const {
    return nodes.count(node_id) != 0;
  }
  const TaxonomyNode& node(const std::string& node_id) const;
  bool has_code(const std::string& code) const {
    return code_index.count(code) != 0;
  }
};

// Document schema: {"node_id": "...", "code": "...", "name": "...",
// "children": [...]} applied recursively. "code" and "children" may be
// omitted.
TaxonomyTree load_taxonomy(const std::filesystem::path& path);
TaxonomyTree parse_taxonomy(const std::string& json_text);

// Codes attached anywhere in the subtree rooted at node_id, including the
// node's own code when it has one.
std::set<std::string> descendants(const TaxonomyTree& tree,
                                  const std::string& node_id);

// descendants(parent) minus descendants(target).
std::set<std::string> siblings_under(const TaxonomyTree& tree,
                                     const std::string& target_node_id);

}  // namespace benthoscan
