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

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgner/corpus.hpp"
#include "kgner/knowledge_base.hpp"
#include "kgner/llm_gateway.hpp"
#include "kgner/prompt.hpp"
#include "kgner/span_extraction.hpp"

namespace kgner {

// Knowledge-base category -> entity type. Unmapped categories are other.
class CategoryMap {
 public:
  CategoryMap() = default;
  explicit CategoryMap(std::map<std::string, Label, std::less<>> mapping)
      : mapping_(std::move(mapping)) {}

  // TSV kb_category<TAB>entity_type; the target must be one of `allowed` or
  // "other".
  static CategoryMap load(const std::filesystem::path& path,
                          const std::vector<std::string>& allowed);

  Label map(std::string_view kb_category) const;
  std::size_t size() const { return mapping_.size(); }

 private:
  std::map<std::string, Label, std::less<>> mapping_;
};

struct KnowledgeContext {
  std::string query;
  std::vector<Neighbor> neighbors;  // retrieval order
};

enum class Strategy { kPassthrough, kRetypeGpt, kKgVote, kKgGpt };

std::string_view to_string(Strategy s);
// Throws ConfigError on an unknown name.
Strategy parse_strategy(std::string_view name);
// Row label used in reports, e.g. "ReType-KG+GPT".
std::string_view display_name(Strategy s);

struct TypedEntity {
  CandidateSpan candidate;
  Label predicted = Label::other();
  Strategy strategy = Strategy::kPassthrough;
};

// Plurality of mapped neighbor categories, ignoring those that map to other
// unless every neighbor does. Ties go to the label whose best-ranked
// supporter has the highest similarity. Throws ValidationError on an empty
// context.
Label vote_type(const KnowledgeContext& ctx, const CategoryMap& map);

struct TypingTemplates {
  PromptTemplate retype;     // {sentence} {entity} {options}
  PromptTemplate knowledge;  // {sentence} {entity} {options} {references}

  static TypingTemplates defaults();
  static TypingTemplates load(const std::optional<std::filesystem::path>& retype,
                              const std::optional<std::filesystem::path>& knowledge);
};

// "- <label>" per allowed label, then "- other".
std::string render_options(const std::vector<std::string>& allowed);
// "ReferenceN: (name, category, similarity)" per neighbor, similarity to 3
// decimals.
std::string render_references(const KnowledgeContext& ctx);

Prompt render_retype_prompt(const Sentence& sentence, const CandidateSpan& candidate,
                            const std::vector<std::string>& allowed, const PromptTemplate& tmpl);
Prompt render_knowledge_prompt(const Sentence& sentence, const CandidateSpan& candidate,
                               const KnowledgeContext& ctx,
                               const std::vector<std::string>& allowed,
                               const PromptTemplate& tmpl);

struct TypeAnswer {
  Label label = Label::other();
  std::optional<std::string> warning;
};

// Earliest case-insensitive, word-bounded occurrence of an allowed label or
// "other" in the response (longest label on a tie). No match is other, with a
// warning.
TypeAnswer parse_type_response(std::string_view text, const std::vector<std::string>& allowed);

// Everything a strategy may need. Only the members its strategy uses must be
// set: retype-gpt needs the gateway, kg-vote the index, embedder and map,
// kg-gpt all of them.
struct TypingDeps {
  std::vector<std::string> allowed;
  Gateway* gateway = nullptr;
  const KbIndex* index = nullptr;
  EmbeddingProvider* embedder = nullptr;
  const CategoryMap* category_map = nullptr;
  const TypingTemplates* templates = nullptr;
  std::size_t k = 5;
};

struct Typing {
  TypedEntity entity;
  std::optional<KnowledgeContext> context;
  std::vector<std::string> warnings;
};

// Passthrough keeps the extraction type; for a candidate proposed by several
// types it takes the first of them in `allowed` order.
Typing predict_type(Strategy strategy, const Sentence& sentence, const CandidateSpan& candidate,
                    const TypingDeps& deps);

std::vector<TypedEntity> filter_other(std::vector<TypedEntity> entities);

}  // namespace kgner
