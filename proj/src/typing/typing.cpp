#include "taxwb/typing/typing.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "taxwb/core/error.hpp"
#include "taxwb/core/text.hpp"
#include "taxwb/llm/response_parser.hpp"

namespace taxwb::typing {

EntityMention::EntityMention(std::string sentence, std::size_t start, std::size_t end)
    : sentence_(std::move(sentence)), start_(start), end_(end) {
  if (start_ >= end_ || end_ > sentence_.size()) {
    throw Error(ErrorCode::invariant_violation,
                "mention span [" + std::to_string(start_) + ", " + std::to_string(end_) +
                    ") is not within a sentence of length " +
                    std::to_string(sentence_.size()));
  }
}

EntityMention EntityMention::from_span(std::string sentence, std::string_view span) {
  const auto colon = span.find(':');
  std::size_t start = 0;
  std::size_t end = 0;
  auto parse_offset = [&](std::string_view s, std::size_t& out) {
    s = text::trim(s);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size() && !s.empty();
  };
  if (colon == std::string_view::npos || !parse_offset(span.substr(0, colon), start) ||
      !parse_offset(span.substr(colon + 1), end)) {
    throw Error(ErrorCode::parse, "span '" + std::string(span) + "' is not START:END");
  }
  return EntityMention(std::move(sentence), start, end);
}

std::vector<Label> closure_labels(const Taxonomy& taxonomy, const TypePath& leaf_path) {
  taxonomy.resolve(leaf_path);
  const auto segments = leaf_path.segments();
  return {segments.begin(), segments.end()};
}

TypingResult type_by_closure(const Taxonomy& taxonomy, const TypePath& leaf_path) {
  return TypingResult{leaf_path, closure_labels(taxonomy, leaf_path), std::nullopt};
}

std::string_view to_string(StopPolicy policy) {
  return policy == StopPolicy::scorer_may_stop ? "scorer-may-stop" : "leaf-only";
}

std::string_view to_string(BeamSelection selection) {
  return selection == BeamSelection::nested ? "nested" : "top-k";
}

void check_scores(const StepScores& scores, std::span<const Candidate> candidates,
                  bool allow_stop) {
  auto check_value = [](double v, const std::string& what) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw Error(ErrorCode::scorer_contract,
                  "score for " + what + " is outside [0, 1]: " + std::to_string(v));
    }
  };
  for (const auto& c : candidates) {
    const auto it = scores.children.find(c.label);
    if (it == scores.children.end()) {
      throw Error(ErrorCode::scorer_contract, "no score for candidate '" + c.label.str() + "'");
    }
    check_value(it->second, "'" + c.label.str() + "'");
  }
  if (scores.children.size() != candidates.size()) {
    for (const auto& [label, value] : scores.children) {
      const bool presented = std::any_of(candidates.begin(), candidates.end(),
                                         [&](const Candidate& c) { return c.label == label; });
      if (!presented) {
        throw Error(ErrorCode::scorer_contract,
                    "score for unpresented candidate '" + label.str() + "'");
      }
    }
  }
  if (allow_stop && !scores.stop) {
    throw Error(ErrorCode::scorer_contract, "no score for STOP");
  }
  if (!allow_stop && scores.stop) {
    throw Error(ErrorCode::scorer_contract, "STOP scored although not allowed");
  }
  if (scores.stop) check_value(*scores.stop, "STOP");
}

double log_step(double score) { return std::log(std::max(score, kScoreFloor)); }

namespace {

struct Beam {
  TypePath path;
  const TypeNode* node;
  double score;
};

struct Extension {
  TypePath path;
  const TypeNode* node;
  double score;
  bool terminal;
  std::size_t owner;
};

bool better(double score_a, const TypePath& a, double score_b, const TypePath& b) {
  if (score_a != score_b) return score_a > score_b;
  return a < b;
}

bool better(const Extension& a, const Extension& b) {
  return better(a.score, a.path, b.score, b.path);
}

}  // namespace

std::vector<TypingResult> type_entity_beamed(const EntityMention& mention,
                                             const Taxonomy& taxonomy,
                                             NodeScorer& scorer,
                                             const BeamConfig& config) {
  if (config.beam_width == 0) {
    throw Error(ErrorCode::invariant_violation, "beam_width must be at least 1");
  }
  if (config.max_depth == 0) {
    throw Error(ErrorCode::invariant_violation, "max_depth must be at least 1");
  }
  const bool allow_stop = config.stop_policy == StopPolicy::scorer_may_stop;
  const std::size_t width = config.beam_width;

  std::vector<Beam> finished;
  std::vector<std::optional<Beam>> slots(width);
  const TypeNode& root = taxonomy.root();
  if (root.is_leaf() || config.max_depth == 1) {
    finished.push_back(Beam{taxonomy.root_path(), &root, 0.0});
  } else {
    slots[0] = Beam{taxonomy.root_path(), &root, 0.0};
  }

  auto any_live = [&] {
    return std::any_of(slots.begin(), slots.end(), [](const auto& s) { return s.has_value(); });
  };

  while (any_live()) {
    std::vector<Extension> extensions;
    for (std::size_t i = 0; i < width; ++i) {
      if (!slots[i]) continue;
      const Beam& beam = *slots[i];
      std::vector<Candidate> candidates;
      for (const auto& child : beam.node->children()) {
        candidates.push_back(Candidate{child.label(), beam.path.child(child.label())});
      }
      const StepScores scores = scorer.score(mention, beam.path, candidates, allow_stop);
      check_scores(scores, candidates, allow_stop);
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        const TypeNode& child = beam.node->children()[c];
        const bool terminal =
            child.is_leaf() || candidates[c].path.depth() >= config.max_depth;
        extensions.push_back(Extension{candidates[c].path, &child,
                                       beam.score + log_step(scores.children.at(candidates[c].label)),
                                       terminal, i});
      }
      if (allow_stop) {
        extensions.push_back(
            Extension{beam.path, beam.node, beam.score + log_step(*scores.stop), true, i});
      }
    }

    std::vector<std::optional<std::size_t>> chosen(width);
    if (config.selection == BeamSelection::top_k) {
      std::vector<std::size_t> order(extensions.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return better(extensions[a], extensions[b]);
      });
      for (std::size_t k = 0; k < width && k < order.size(); ++k) chosen[k] = order[k];
    } else {
      std::vector<bool> taken(extensions.size(), false);
      for (std::size_t k = 0; k < width; ++k) {
        std::optional<std::size_t> best;
        for (std::size_t e = 0; e < extensions.size(); ++e) {
          if (taken[e] || extensions[e].owner > k) continue;
          if (!best || better(extensions[e], extensions[*best])) best = e;
        }
        if (best) {
          taken[*best] = true;
          chosen[k] = best;
        }
      }
    }

    for (std::size_t k = 0; k < width; ++k) {
      slots[k].reset();
      if (!chosen[k]) continue;
      const Extension& ext = extensions[*chosen[k]];
      Beam beam{ext.path, ext.node, ext.score};
      if (ext.terminal) {
        finished.push_back(std::move(beam));
      } else {
        slots[k] = std::move(beam);
      }
    }
  }

  std::sort(finished.begin(), finished.end(), [](const Beam& a, const Beam& b) {
    return better(a.score, a.path, b.score, b.path);
  });
  std::vector<TypingResult> results;
  results.reserve(finished.size());
  for (auto& beam : finished) {
    const auto segments = beam.path.segments();
    results.push_back(TypingResult{beam.path, {segments.begin(), segments.end()}, beam.score});
  }
  return results;
}

ScriptedScorer::ScriptedScorer(std::map<std::string, double> scores,
                               std::map<std::string, double> stop, double default_score,
                               double default_stop)
    : scores_(std::move(scores)),
      stop_(std::move(stop)),
      default_score_(default_score),
      default_stop_(default_stop) {}

ScriptedScorer ScriptedScorer::parse(std::string_view json_text) {
  const auto doc = nlohmann::json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::parse, "scorer fixture is not a JSON object");
  }
  auto number = [&](const char* key, double fallback) {
    const auto it = doc.find(key);
    if (it == doc.end()) return fallback;
    if (!it->is_number()) throw Error(ErrorCode::schema_violation, std::string("/") + key + ": expected a number");
    return it->get<double>();
  };
  auto table = [&](const char* key) {
    std::map<std::string, double> out;
    const auto it = doc.find(key);
    if (it == doc.end()) return out;
    if (!it->is_object()) throw Error(ErrorCode::schema_violation, std::string("/") + key + ": expected an object");
    for (const auto& [path, value] : it->items()) {
      if (!value.is_number()) {
        throw Error(ErrorCode::schema_violation,
                    std::string("/") + key + "/" + path + ": expected a number");
      }
      out.emplace(path, value.get<double>());
    }
    return out;
  };
  return ScriptedScorer(table("scores"), table("stop"), number("default", 0.0),
                        number("stop_default", 0.0));
}

ScriptedScorer ScriptedScorer::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read scorer fixture '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

StepScores ScriptedScorer::score(const EntityMention&, const TypePath& parent,
                                 std::span<const Candidate> candidates, bool allow_stop) {
  StepScores out;
  for (const auto& c : candidates) {
    const auto it = scores_.find(c.path.str());
    out.children.emplace(c.label, it == scores_.end() ? default_score_ : it->second);
  }
  if (allow_stop) {
    const auto it = stop_.find(parent.str());
    out.stop = it == stop_.end() ? default_stop_ : it->second;
  }
  return out;
}

LlmScorer::LlmScorer(llm::ChatBackend& backend, llm::PromptTemplate tmpl)
    : backend_(backend), template_(std::move(tmpl)) {}

std::string LlmScorer::render(const EntityMention& mention, const TypePath& parent,
                              std::span<const Candidate> candidates, bool allow_stop) const {
  std::string listing;
  for (const auto& c : candidates) listing += "- " + c.label.str() + "\n";
  std::string stop_note;
  if (allow_stop) {
    stop_note = "\nAlso give \"" + std::string(kStopKey) +
                "\" the probability that the current type is already the most specific "
                "applicable one.";
  }
  return template_.render({{"sentence", mention.sentence()},
                           {"mention", std::string(mention.surface())},
                           {"target_path", parent.str()},
                           {"candidates", listing},
                           {"stop_note", stop_note}});
}

StepScores LlmScorer::score(const EntityMention& mention, const TypePath& parent,
                            std::span<const Candidate> candidates, bool allow_stop) {
  llm::ChatRequest request;
  request.prompt = render(mention, parent, candidates, allow_stop);
  const auto reply = backend_.complete(request);
  const auto object = llm::extract_first_json_object(reply.text);
  if (!object) throw Error(ErrorCode::no_json_found, "scorer reply contains no JSON object");

  auto lookup = [&](std::string_view key) {
    for (const auto& [name, value] : object->items()) {
      if (value.is_number() && text::normalize_label(name) == text::normalize_label(key)) {
        return std::clamp(value.get<double>(), 0.0, 1.0);
      }
    }
    return 0.0;
  };
  StepScores out;
  for (const auto& c : candidates) out.children.emplace(c.label, lookup(c.label.str()));
  if (allow_stop) out.stop = lookup(kStopKey);
  return out;
}

TypeRef parse_type_ref(std::string_view raw) {
  std::string_view s = text::trim(raw);
  if (s.find(" / ") != std::string_view::npos) return TypePath::parse(s);
  if (!s.empty() && s.front() == '$') s.remove_prefix(1);
  return Label(s);
}

std::string type_ref_str(const TypeRef& ref) {
  if (const auto* label = std::get_if<Label>(&ref)) return label->str();
  return std::get<TypePath>(ref).str();
}

bool matches_type(const TypeRef& ref, const TypingResult& result) {
  if (const auto* label = std::get_if<Label>(&ref)) {
    return std::any_of(result.closure.begin(), result.closure.end(), [&](const Label& l) {
      return text::equals_folded(l.str(), label->str());
    });
  }
  return std::get<TypePath>(ref).is_prefix_of_folded(result.leaf_path);
}

bool match_pattern(const TypePattern& pattern, const TypingResult& subject,
                   const TypingResult& object, std::string_view relation) {
  return text::equals_folded(text::trim(pattern.relation), text::trim(relation)) &&
         matches_type(pattern.subject_type, subject) &&
         matches_type(pattern.object_type, object);
}

std::vector<TypePattern> parse_patterns(std::string_view text) {
  std::vector<TypePattern> patterns;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty() || text::trim(line).front() == '#') continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    const std::string where = "pattern line " + std::to_string(line_no);
    if (fields.size() != 3) {
      throw Error(ErrorCode::parse, where + ": expected 3 TAB-separated fields, got " +
                                        std::to_string(fields.size()));
    }
    if (text::trim(fields[1]).empty()) throw Error(ErrorCode::parse, where + ": empty relation");
    try {
      patterns.push_back(TypePattern{parse_type_ref(fields[0]), std::string(text::trim(fields[1])),
                                     parse_type_ref(fields[2])});
    } catch (const Error& e) {
      throw Error(ErrorCode::parse, where + ": " + e.what());
    }
  }
  return patterns;
}

std::vector<TypePattern> load_patterns(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read pattern file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_patterns(buffer.str());
}

}  // namespace taxwb::typing
