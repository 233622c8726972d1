// Copyright 2026 The kgner Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kgner/type_prediction.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>

#include "kgner/errors.hpp"
#include "kgner/text.hpp"

namespace kgner {

namespace fs = std::filesystem;

CategoryMap CategoryMap::load(const fs::path& path, const std::vector<std::string>& allowed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open category map {}", path.string()));
  std::map<std::string, Label, std::less<>> mapping;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw ValidationError(fmt::format("{}: line {}: expected kb_category<TAB>entity_type",
                                        path.string(), line_no));
    }
    auto category = line.substr(0, tab);
    auto target = line.substr(tab + 1);
    Label label = Label::other();
    if (text::ascii_lower(target) != kOtherLabel) {
      if (std::find(allowed.begin(), allowed.end(), target) == allowed.end()) {
        throw ValidationError(fmt::format("{}: line {}: '{}' is not a configured entity type",
                                          path.string(), line_no, target));
      }
      label = Label::entity(target);
    }
    if (!mapping.emplace(std::move(category), label).second) {
      throw ValidationError(fmt::format("{}: line {}: category mapped twice", path.string(),
                                        line_no));
    }
  }
  return CategoryMap(std::move(mapping));
}

Label CategoryMap::map(std::string_view kb_category) const {
  auto it = mapping_.find(kb_category);
  return it == mapping_.end() ? Label::other() : it->second;
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kPassthrough:
      return "passthrough";
    case Strategy::kRetypeGpt:
      return "retype-gpt";
    case Strategy::kKgVote:
      return "kg-vote";
    case Strategy::kKgGpt:
      return "kg-gpt";
  }
  return "passthrough";
}

std::string_view display_name(Strategy s) {
  switch (s) {
    case Strategy::kPassthrough:
      return "GPTNER-RR";
    case Strategy::kRetypeGpt:
      return "ReType-GPT";
    case Strategy::kKgVote:
      return "ReType-KG+VOTE";
    case Strategy::kKgGpt:
      return "ReType-KG+GPT";
  }
  return "GPTNER-RR";
}

Strategy parse_strategy(std::string_view name) {
  for (auto s : {Strategy::kPassthrough, Strategy::kRetypeGpt, Strategy::kKgVote,
                 Strategy::kKgGpt}) {
    if (name == to_string(s)) return s;
  }
  throw ConfigError(fmt::format(
      "unknown strategy '{}' (expected passthrough, retype-gpt, kg-vote or kg-gpt)", name));
}

Label vote_type(const KnowledgeContext& ctx, const CategoryMap& map) {
  if (ctx.neighbors.empty()) throw ValidationError("cannot vote over an empty knowledge context");

  struct Tally {
    std::size_t votes = 0;
    double best_similarity = 0.0;
    std::size_t best_rank = 0;
  };
  std::map<std::string, Tally> tallies;
  for (std::size_t rank = 0; rank < ctx.neighbors.size(); ++rank) {
    const auto label = map.map(ctx.neighbors[rank].entry.category);
    if (label.is_other()) continue;
    auto [it, first] = tallies.try_emplace(label.name());
    auto& t = it->second;
    ++t.votes;
    const double sim = ctx.neighbors[rank].similarity;
    if (first || sim > t.best_similarity) {
      t.best_similarity = sim;
      t.best_rank = rank;
    }
  }
  if (tallies.empty()) return Label::other();

  const auto winner = std::max_element(tallies.begin(), tallies.end(), [](const auto& a,
                                                                          const auto& b) {
    const auto& [an, at] = a;
    const auto& [bn, bt] = b;
    if (at.votes != bt.votes) return at.votes < bt.votes;
    if (at.best_similarity != bt.best_similarity) return at.best_similarity < bt.best_similarity;
    return at.best_rank > bt.best_rank;
  });
  return Label::entity(winner->first);
}

namespace {

constexpr std::string_view kDefaultRetypeTemplate = R"([system]
You are an expert in biomedical named entity recognition.
[user]
Sentence: {sentence}
Entity: "{entity}"
Which category does the entity belong to in this sentence? Choose one of the following options:
{options}
If the entity is not a biomedical entity of any listed category, choose "other". Answer with the option name only.
)";

constexpr std::string_view kDefaultKnowledgeTemplate = R"([system]
You are an expert in biomedical named entity recognition.
[user]
Sentence: {sentence}
Entity: "{entity}"
Similar entities retrieved from a biomedical knowledge base, as (name, category, similarity):
{references}
Using these references where they help, which category does the entity belong to in this sentence? Choose one of the following options:
{options}
If the entity is not a biomedical entity of any listed category, choose "other". Answer with the option name only.
)";

const std::vector<std::string>& retype_placeholders() {
  static const std::vector<std::string> p = {"sentence", "entity", "options"};
  return p;
}

const std::vector<std::string>& knowledge_placeholders() {
  static const std::vector<std::string> p = {"sentence", "entity", "options", "references"};
  return p;
}

bool word_char(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

}  // namespace

TypingTemplates TypingTemplates::defaults() {
  return {PromptTemplate::parse(kDefaultRetypeTemplate, retype_placeholders(),
                                "default retype template"),
          PromptTemplate::parse(kDefaultKnowledgeTemplate, knowledge_placeholders(),
                                "default knowledge template")};
}

TypingTemplates TypingTemplates::load(const std::optional<fs::path>& retype,
                                      const std::optional<fs::path>& knowledge) {
  auto out = defaults();
  if (retype) out.retype = PromptTemplate::load(*retype, retype_placeholders());
  if (knowledge) out.knowledge = PromptTemplate::load(*knowledge, knowledge_placeholders());
  return out;
}

std::string render_options(const std::vector<std::string>& allowed) {
  std::string out;
  for (const auto& label : allowed) out += fmt::format("- {}\n", label);
  out += fmt::format("- {}", kOtherLabel);
  return out;
}

std::string render_references(const KnowledgeContext& ctx) {
  std::string out;
  for (std::size_t i = 0; i < ctx.neighbors.size(); ++i) {
    const auto& n = ctx.neighbors[i];
    if (i > 0) out += '\n';
    out += fmt::format("Reference{}: ({}, {}, {:.3f})", i + 1, n.entry.name, n.entry.category,
                       n.similarity);
  }
  return out;
}

Prompt render_retype_prompt(const Sentence& sentence, const CandidateSpan& candidate,
                            const std::vector<std::string>& allowed, const PromptTemplate& tmpl) {
  return tmpl.render({{"sentence", sentence.text},
                      {"entity", candidate.surface},
                      {"options", render_options(allowed)}});
}

Prompt render_knowledge_prompt(const Sentence& sentence, const CandidateSpan& candidate,
                               const KnowledgeContext& ctx,
                               const std::vector<std::string>& allowed,
                               const PromptTemplate& tmpl) {
  return tmpl.render({{"sentence", sentence.text},
                      {"entity", candidate.surface},
                      {"options", render_options(allowed)},
                      {"references", render_references(ctx)}});
}

TypeAnswer parse_type_response(std::string_view response, const std::vector<std::string>& allowed) {
  const auto haystack = text::ascii_lower(response);
  std::optional<std::size_t> best_pos;
  std::size_t best_len = 0;
  Label best = Label::other();

  auto consider = [&](const std::string& label, Label as) {
    const auto needle = text::ascii_lower(label);
    for (auto pos = haystack.find(needle); pos != std::string::npos;
         pos = haystack.find(needle, pos + 1)) {
      const bool left_ok = pos == 0 || !word_char(static_cast<unsigned char>(haystack[pos - 1]));
      const auto end = pos + needle.size();
      const bool right_ok =
          end == haystack.size() || !word_char(static_cast<unsigned char>(haystack[end]));
      if (!left_ok || !right_ok) continue;
      if (!best_pos || pos < *best_pos || (pos == *best_pos && needle.size() > best_len)) {
        best_pos = pos;
        best_len = needle.size();
        best = as;
      }
      return;
    }
  };
  for (const auto& label : allowed) consider(label, Label::entity(label));
  consider(std::string(kOtherLabel), Label::other());

  TypeAnswer out;
  out.label = best;
  if (!best_pos) {
    out.warning = fmt::format("no category found in response '{}'; treated as other",
                              std::string(text::trim(response)));
  }
  return out;
}

namespace {

KnowledgeContext retrieve_context(const CandidateSpan& candidate, const TypingDeps& deps) {
  if (!deps.index || !deps.embedder) {
    throw ConfigError("knowledge strategies need a knowledge base index and embedder");
  }
  return {candidate.surface, retrieve_top_k(*deps.index, candidate.surface, deps.k, *deps.embedder)};
}

std::string describe(const Sentence& s, const CandidateSpan& c) {
  return fmt::format("{}#{} {} '{}'", s.doc_id, s.index, to_string(c.span), c.surface);
}

}  // namespace

Typing predict_type(Strategy strategy, const Sentence& sentence, const CandidateSpan& candidate,
                    const TypingDeps& deps) {
  Typing out;
  out.entity.candidate = candidate;
  out.entity.strategy = strategy;

  auto ask = [&](const Prompt& prompt) {
    if (!deps.gateway) throw ConfigError("LLM typing strategies need a gateway");
    const auto answer = parse_type_response(deps.gateway->complete(prompt).text, deps.allowed);
    if (answer.warning) {
      out.warnings.push_back(fmt::format("{}: {}", describe(sentence, candidate), *answer.warning));
    }
    return answer.label;
  };

  switch (strategy) {
    case Strategy::kPassthrough: {
      if (candidate.source_type) {
        out.entity.predicted = Label::entity(*candidate.source_type);
        break;
      }
      for (const auto& t : deps.allowed) {
        if (std::find(candidate.proposed_by.begin(), candidate.proposed_by.end(), t) !=
            candidate.proposed_by.end()) {
          out.entity.predicted = Label::entity(t);
          break;
        }
      }
      break;
    }
    case Strategy::kRetypeGpt:
      if (!deps.templates) throw ConfigError("typing templates not configured");
      out.entity.predicted =
          ask(render_retype_prompt(sentence, candidate, deps.allowed, deps.templates->retype));
      break;
    case Strategy::kKgVote: {
      if (!deps.category_map) throw ConfigError("kg-vote needs a category map");
      out.context = retrieve_context(candidate, deps);
      out.entity.predicted = vote_type(*out.context, *deps.category_map);
      break;
    }
    case Strategy::kKgGpt: {
      if (!deps.templates) throw ConfigError("typing templates not configured");
      out.context = retrieve_context(candidate, deps);
      out.entity.predicted = ask(render_knowledge_prompt(sentence, candidate, *out.context,
                                                         deps.allowed, deps.templates->knowledge));
      break;
    }
  }
  return out;
}

std::vector<TypedEntity> filter_other(std::vector<TypedEntity> entities) {
  std::erase_if(entities, [](const TypedEntity& e) { return e.predicted.is_other(); });
  return entities;
}

}  // namespace kgner
