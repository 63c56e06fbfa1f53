#include "oracles.hpp"

#include <algorithm>
#include <tuple>
#include <utility>
#include <vector>

namespace taxwb::testkit {

TraversalCounts count_iteratively(const TypeNode& root) {
  const ordered_json doc = branch_to_json(root);
  TraversalCounts counts;
  std::vector<std::pair<const ordered_json*, std::size_t>> stack{{&doc, 1}};
  while (!stack.empty()) {
    auto [node, depth] = stack.back();
    stack.pop_back();
    ++counts.nodes;
    counts.max_depth = std::max(counts.max_depth, depth);
    const auto& children = node->at("children");
    if (children.empty()) ++counts.leaves;
    for (const auto& child : children) stack.emplace_back(&child, depth + 1);
  }
  return counts;
}

std::string serialize_pruned(const TypeNode& root, const TypePath& path) {
  ordered_json doc = branch_to_json(root);
  ordered_json* node = &doc;
  for (std::size_t i = 1; i < path.depth(); ++i) {
    auto& children = node->at("children");
    auto it = std::find_if(children.begin(), children.end(), [&](const auto& c) {
      return c.at("label").template get<std::string>() == path[i].str();
    });
    node = &*it;
  }
  (*node)["children"] = ordered_json::array();
  return doc.dump(2);
}

namespace {

struct Entry {
  std::vector<std::size_t> index_path;
  std::string label_path;
};

void enumerate(const ordered_json& node, std::vector<std::size_t>& index,
               const std::string& prefix, std::vector<Entry>& out) {
  const std::string label_path =
      prefix.empty() ? node.at("label").get<std::string>()
                     : prefix + " / " + node.at("label").get<std::string>();
  out.push_back({index, label_path});
  std::size_t i = 0;
  for (const auto& child : node.at("children")) {
    index.push_back(i++);
    enumerate(child, index, label_path, out);
    index.pop_back();
  }
}

}  // namespace

std::set<std::string> path_set(const TypeNode& root) {
  std::vector<Entry> entries;
  std::vector<std::size_t> index;
  enumerate(branch_to_json(root), index, "", entries);
  std::set<std::string> out;
  for (auto& e : entries) out.insert(std::move(e.label_path));
  return out;
}

std::set<std::string> expected_context_subset(const TypeNode& root,
                                              const TypePath& focus,
                                              std::size_t budget) {
  std::vector<Entry> entries;
  std::vector<std::size_t> index;
  enumerate(branch_to_json(root), index, "", entries);

  const std::string focus_label = focus.str();
  const auto focus_entry = std::find_if(entries.begin(), entries.end(), [&](const Entry& e) {
    return e.label_path == focus_label;
  });
  const auto& focus_index = focus_entry->index_path;

  auto is_prefix = [](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
  };

  using Key = std::tuple<int, std::size_t, std::vector<std::size_t>>;
  std::vector<std::pair<Key, std::string>> ranked;
  for (const auto& e : entries) {
    const std::size_t depth = e.index_path.size() + 1;
    int cls = 3;
    std::vector<std::size_t> order = e.index_path;
    if (is_prefix(e.index_path, focus_index)) {
      cls = 0;
    } else if (is_prefix(focus_index, e.index_path)) {
      cls = 1;
    } else {
      std::vector<std::size_t> parent(e.index_path.begin(), e.index_path.end() - 1);
      if (is_prefix(parent, focus_index) && parent.size() < focus_index.size()) {
        cls = 2;
        order = {e.index_path.back()};
      }
    }
    ranked.push_back({Key{cls, depth, order}, e.label_path});
  }
  std::sort(ranked.begin(), ranked.end());
  std::set<std::string> out;
  for (std::size_t i = 0; i < std::min(budget, ranked.size()); ++i) {
    out.insert(ranked[i].second);
  }
  return out;
}

}  // namespace taxwb::testkit
