#include "taxwb/combination/combination.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "taxwb/core/error.hpp"
#include "taxwb/core/text.hpp"

namespace taxwb {
namespace {

const TypeNode& resolve_anchor(const Taxonomy& taxonomy, const TypePath& anchor,
                               std::string_view side) {
  const TypeNode* node = taxonomy.try_resolve(anchor);
  if (node == nullptr) {
    throw Error(ErrorCode::unresolvable_anchor,
                std::string(side) + " anchor '" + anchor.str() + "' does not resolve");
  }
  return *node;
}

struct TemplatePart {
  bool placeholder;
  std::string text;  // literal text, or "left" / "right"
};

std::vector<TemplatePart> parse_template(std::string_view tmpl) {
  std::vector<TemplatePart> parts;
  std::string literal;
  bool any_placeholder = false;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '}') {
      throw Error(ErrorCode::malformed_template,
                  "unmatched '}' in template '" + std::string(tmpl) + "'");
    }
    if (tmpl[i] != '{') {
      literal.push_back(tmpl[i]);
      continue;
    }
    const auto close = tmpl.find('}', i);
    if (close == std::string_view::npos) {
      throw Error(ErrorCode::malformed_template,
                  "unmatched '{' in template '" + std::string(tmpl) + "'");
    }
    const auto name = tmpl.substr(i + 1, close - i - 1);
    if (name != "left" && name != "right") {
      throw Error(ErrorCode::malformed_template,
                  "unknown placeholder {" + std::string(name) + "} in template '" +
                      std::string(tmpl) + "'");
    }
    if (!literal.empty()) parts.push_back({false, std::move(literal)});
    literal.clear();
    parts.push_back({true, std::string(name)});
    any_placeholder = true;
    i = close;
  }
  if (!literal.empty()) parts.push_back({false, std::move(literal)});
  if (!any_placeholder) {
    throw Error(ErrorCode::malformed_template,
                "template '" + std::string(tmpl) + "' has neither {left} nor {right}");
  }
  return parts;
}

std::string surface(const CombinationRule& rule, const std::string& label) {
  const auto it = rule.aliases.find(label);
  return it == rule.aliases.end() ? label : it->second;
}

Label render(const CombinationRule& rule, const std::vector<TemplatePart>& parts,
             const Label& left_child) {
  std::string out;
  for (const auto& part : parts) {
    if (!part.placeholder) {
      out += part.text;
    } else if (part.text == "left") {
      out += surface(rule, left_child.str());
    } else {
      out += surface(rule, rule.right_anchor.leaf().str());
    }
  }
  try {
    return Label(out);
  } catch (const Error&) {
    throw Error(ErrorCode::malformed_template,
                "template '" + rule.template_text + "' renders '" + out + "' for '" +
                    left_child.str() + "', which is not a valid label");
  }
}

// Labels strictly below node, first occurrence in preorder.
std::vector<Label> descendant_labels(const TypeNode& node) {
  std::vector<Label> out;
  std::set<std::string> seen;
  std::function<void(const TypeNode&)> walk = [&](const TypeNode& n) {
    for (const auto& child : n.children()) {
      if (seen.insert(child.label().str()).second) out.push_back(child.label());
      walk(child);
    }
  };
  walk(node);
  return out;
}

void check_membership(const CombinationRule& rule, const TypeNode& left,
                      const TypeNode& right) {
  if (rule.membership.empty()) return;
  std::set<std::string> available;
  for (const auto& label : descendant_labels(right)) available.insert(label.str());
  for (const auto& [key, members] : rule.membership) {
    if (left.find_child(Label(key)) == nullptr) {
      throw Error(ErrorCode::unresolvable_anchor,
                  "membership key '" + key + "' is not a child of '" +
                      rule.left_anchor.str() + "'");
    }
    for (const auto& member : members) {
      if (!available.contains(member)) {
        throw Error(ErrorCode::unresolvable_anchor,
                    "membership label '" + member + "' does not occur under '" +
                        rule.right_anchor.str() + "'");
      }
    }
  }
}

}  // namespace

CombinationRule define_rule(const Taxonomy& taxonomy, std::string name, TypePath left_anchor,
                            TypePath right_anchor, std::string template_text,
                            std::map<std::string, std::string> aliases,
                            std::map<std::string, std::vector<std::string>> membership) {
  CombinationRule rule{Label(name).str(),     std::move(left_anchor),
                       std::move(right_anchor), std::move(template_text),
                       std::move(aliases),      std::move(membership)};
  const auto& left = resolve_anchor(taxonomy, rule.left_anchor, "left");
  const auto& right = resolve_anchor(taxonomy, rule.right_anchor, "right");
  const auto parts = parse_template(rule.template_text);
  for (const auto& child : left.children()) render(rule, parts, child.label());
  check_membership(rule, left, right);
  return rule;
}

VirtualBranch expand_rule(const Taxonomy& taxonomy, const CombinationRule& rule) {
  const auto& left = resolve_anchor(taxonomy, rule.left_anchor, "left");
  const auto& right = resolve_anchor(taxonomy, rule.right_anchor, "right");
  check_membership(rule, left, right);
  const auto parts = parse_template(rule.template_text);
  const auto right_labels = descendant_labels(right);

  std::vector<TypeNode> categories;
  std::unordered_map<std::string, std::string> rendered_from;
  for (const auto& child : left.children()) {
    Label label = render(rule, parts, child.label());
    const auto [it, inserted] = rendered_from.emplace(label.str(), child.label().str());
    if (!inserted) {
      throw Error(ErrorCode::label_collision,
                  "'" + it->second + "' and '" + child.label().str() + "' both render as '" +
                      label.str() + "'");
    }
    std::vector<TypeNode> members;
    if (const auto m = rule.membership.find(child.label().str()); m != rule.membership.end()) {
      const std::set<std::string> wanted(m->second.begin(), m->second.end());
      for (const auto& candidate : right_labels) {
        if (wanted.contains(candidate.str())) members.emplace_back(candidate);
      }
    }
    categories.emplace_back(std::move(label), std::move(members));
  }
  return {rule.name, TypeNode(Label(rule.name), std::move(categories))};
}

Taxonomy materialize(const Taxonomy& taxonomy, const VirtualBranch& branch,
                     const TypePath& parent) {
  return taxonomy.insert_branch(parent, branch.generated);
}

namespace {

TypePath json_path(const nlohmann::json& value, const std::string& where) {
  if (value.is_string()) return TypePath::parse(value.get<std::string>());
  if (value.is_array() && !value.empty()) {
    std::vector<Label> segments;
    for (const auto& s : value) {
      if (!s.is_string()) throw Error(ErrorCode::schema_violation, where + ": path segments must be strings");
      segments.emplace_back(s.get<std::string>());
    }
    return TypePath(std::move(segments));
  }
  throw Error(ErrorCode::schema_violation, where + ": expected a path string or label array");
}

std::string json_string(const nlohmann::json& rule, const char* key, const std::string& where) {
  const auto it = rule.find(key);
  if (it == rule.end() || !it->is_string()) {
    throw Error(ErrorCode::schema_violation, where + ": missing string '" + key + "'");
  }
  return it->get<std::string>();
}

}  // namespace

std::vector<CombinationRule> parse_rules(const nlohmann::json& document,
                                         const Taxonomy& taxonomy) {
  if (!document.is_object() || !document.contains("rules") || !document["rules"].is_array()) {
    throw Error(ErrorCode::schema_violation, "rules file needs a 'rules' array");
  }
  std::vector<CombinationRule> rules;
  std::set<std::string> names;
  for (std::size_t i = 0; i < document["rules"].size(); ++i) {
    const auto& item = document["rules"][i];
    const std::string where = "/rules/" + std::to_string(i);
    if (!item.is_object()) throw Error(ErrorCode::schema_violation, where + ": expected an object");
    std::map<std::string, std::string> aliases;
    if (const auto it = item.find("aliases"); it != item.end()) {
      if (!it->is_object()) throw Error(ErrorCode::schema_violation, where + "/aliases: expected an object");
      for (const auto& [label, form] : it->items()) {
        if (!form.is_string()) throw Error(ErrorCode::schema_violation, where + "/aliases: values must be strings");
        aliases.emplace(label, form.get<std::string>());
      }
    }
    std::map<std::string, std::vector<std::string>> membership;
    if (const auto it = item.find("membership"); it != item.end()) {
      if (!it->is_object()) throw Error(ErrorCode::schema_violation, where + "/membership: expected an object");
      for (const auto& [label, members] : it->items()) {
        if (!members.is_array()) throw Error(ErrorCode::schema_violation, where + "/membership: values must be arrays");
        auto& list = membership[label];
        for (const auto& m : members) {
          if (!m.is_string()) throw Error(ErrorCode::schema_violation, where + "/membership: members must be strings");
          list.push_back(m.get<std::string>());
        }
      }
    }
    auto rule = define_rule(taxonomy, json_string(item, "name", where),
                            json_path(item.value("left", nlohmann::json()), where + "/left"),
                            json_path(item.value("right", nlohmann::json()), where + "/right"),
                            json_string(item, "template", where), std::move(aliases),
                            std::move(membership));
    if (!names.insert(rule.name).second) {
      throw Error(ErrorCode::schema_violation, where + ": duplicate rule name '" + rule.name + "'");
    }
    rules.push_back(std::move(rule));
  }
  return rules;
}

std::vector<CombinationRule> load_rules(const std::filesystem::path& file,
                                        const Taxonomy& taxonomy) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read rules file '" + file.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const auto document = nlohmann::json::parse(buffer.str(), nullptr, false);
  if (document.is_discarded()) throw Error(ErrorCode::parse, "rules file is not valid JSON");
  return parse_rules(document, taxonomy);
}

nlohmann::ordered_json rule_to_json(const CombinationRule& rule) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  out["name"] = rule.name;
  out["left"] = rule.left_anchor.str();
  out["right"] = rule.right_anchor.str();
  out["template"] = rule.template_text;
  out["aliases"] = rule.aliases;
  out["membership"] = rule.membership;
  return out;
}

namespace {

bool tokens_match(const std::string& a, const std::string& b) {
  if (a == b) return true;
  const auto& shorter = a.size() < b.size() ? a : b;
  const auto& longer = a.size() < b.size() ? b : a;
  return shorter.size() >= 4 && longer.compare(0, shorter.size(), shorter) == 0;
}

bool keys_match(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return false;
  auto covered = [](const std::vector<std::string>& from, const std::vector<std::string>& to) {
    return std::all_of(from.begin(), from.end(), [&](const std::string& t) {
      return std::any_of(to.begin(), to.end(),
                         [&](const std::string& u) { return tokens_match(t, u); });
    });
  };
  return covered(a, b) && covered(b, a);
}

struct Parent {
  TypePath path;
  const TypeNode* node;
  std::vector<std::vector<std::string>> keys;
};

std::vector<std::string> child_key(const TypeNode& child,
                                   const std::unordered_set<std::string>& parent_tokens) {
  std::vector<std::string> key;
  for (auto& token : text::tokenize(child.label().str())) {
    if (!parent_tokens.contains(token) &&
        std::find(key.begin(), key.end(), token) == key.end()) {
      key.push_back(std::move(token));
    }
  }
  return key;
}

}  // namespace

RepetitionReport detect_repetition(const Taxonomy& taxonomy, const RepetitionConfig& config) {
  RepetitionReport report;

  std::vector<Parent> parents;
  std::vector<std::string> group_order;
  std::unordered_map<std::string, DuplicatedLabelGroup> groups;
  std::unordered_map<std::string, std::set<std::string>> group_parents;
  std::vector<Label> stack;
  std::function<void(const TypeNode&)> walk = [&](const TypeNode& node) {
    stack.push_back(node.label());
    TypePath here(stack);
    if (stack.size() >= 2) {
      const auto key = text::normalize_label(node.label().str());
      auto [it, inserted] = groups.try_emplace(key, DuplicatedLabelGroup{node.label().str(), {}});
      if (inserted) group_order.push_back(key);
      it->second.paths.push_back(here);
      group_parents[key].insert(here.parent().str());
    }
    if (node.children().size() >= 2) {
      const auto tokens = text::tokenize(node.label().str());
      const std::unordered_set<std::string> parent_tokens(tokens.begin(), tokens.end());
      Parent p{here, &node, {}};
      for (const auto& child : node.children()) p.keys.push_back(child_key(child, parent_tokens));
      parents.push_back(std::move(p));
    }
    for (const auto& child : node.children()) walk(child);
    stack.pop_back();
  };
  walk(taxonomy.root());

  for (const auto& key : group_order) {
    if (group_parents[key].size() >= config.min_parents) {
      report.duplicated_label_groups.push_back(std::move(groups[key]));
    }
  }

  // Matching tokens always share their first four characters (or are equal
  // when shorter), so parents are only compared when such a prefix is shared.
  std::unordered_map<std::string, std::set<std::size_t>> index;
  for (std::size_t i = 0; i < parents.size(); ++i) {
    for (const auto& key : parents[i].keys) {
      for (const auto& token : key) index[token.substr(0, 4)].insert(i);
    }
  }
  std::set<std::pair<std::size_t, std::size_t>> candidates;
  for (const auto& [prefix, members] : index) {
    for (auto a = members.begin(); a != members.end(); ++a) {
      for (auto b = std::next(a); b != members.end(); ++b) candidates.emplace(*a, *b);
    }
  }

  for (const auto& [i, j] : candidates) {
    const auto& a = parents[i];
    const auto& b = parents[j];
    const double na = static_cast<double>(a.keys.size());
    const double nb = static_cast<double>(b.keys.size());
    if (std::min(na, nb) / std::max(na, nb) + 1e-12 < config.jaccard_threshold) continue;
    std::vector<bool> used(b.keys.size(), false);
    std::vector<std::pair<std::string, std::string>> matches;
    for (std::size_t x = 0; x < a.keys.size(); ++x) {
      for (std::size_t y = 0; y < b.keys.size(); ++y) {
        if (used[y] || !keys_match(a.keys[x], b.keys[y])) continue;
        used[y] = true;
        matches.emplace_back(a.node->children()[x].label().str(),
                             b.node->children()[y].label().str());
        break;
      }
    }
    const double m = static_cast<double>(matches.size());
    const double jaccard = m / (na + nb - m);
    if (jaccard + 1e-12 < config.jaccard_threshold) continue;
    report.mirrored_sibling_sets.push_back({a.path, b.path, jaccard, std::move(matches)});
  }
  return report;
}

nlohmann::ordered_json repetition_to_json(const RepetitionReport& report) {
  nlohmann::ordered_json groups = nlohmann::ordered_json::array();
  for (const auto& g : report.duplicated_label_groups) {
    nlohmann::ordered_json paths = nlohmann::ordered_json::array();
    for (const auto& p : g.paths) paths.push_back(p.str());
    groups.push_back({{"label", g.label}, {"paths", std::move(paths)}});
  }
  nlohmann::ordered_json mirrored = nlohmann::ordered_json::array();
  for (const auto& m : report.mirrored_sibling_sets) {
    nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
    for (const auto& [x, y] : m.matches) pairs.push_back({x, y});
    mirrored.push_back({{"first", m.first.str()},
                        {"second", m.second.str()},
                        {"jaccard", m.jaccard},
                        {"matches", std::move(pairs)}});
  }
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  out["duplicated_label_groups"] = std::move(groups);
  out["mirrored_sibling_sets"] = std::move(mirrored);
  return out;
}

}  // namespace taxwb
