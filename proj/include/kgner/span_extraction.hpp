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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kgner/corpus.hpp"
#include "kgner/llm_gateway.hpp"
#include "kgner/markers.hpp"
#include "kgner/prompt.hpp"

namespace kgner {

struct CandidateSpan {
  Span span;
  // Type requested by the prompt that produced the span. Empty when prompts
  // for different types proposed the same offsets; typing decides those.
  std::optional<std::string> source_type;
  std::string surface;  // always a slice of the original sentence
  std::vector<std::string> proposed_by;

  bool operator==(const CandidateSpan&) const = default;
};

// Placeholders: {entity_type}, {examples}, {input_sentence}.
PromptTemplate default_span_template();
PromptTemplate load_span_template(const std::filesystem::path& path);

// "Input: <plain>\nOutput: <marked>" per example, blank-line separated.
std::string render_examples_block(const std::vector<FewShotExample>& examples);

Prompt render_span_prompt(const Sentence& sentence, const std::string& entity_type,
                          const std::vector<FewShotExample>& examples,
                          const PromptTemplate& tmpl);

struct Extraction {
  std::vector<CandidateSpan> candidates;
  std::vector<std::string> warnings;
};

// render -> complete -> parse for one sentence and one type. Transport
// errors propagate.
Extraction extract_spans_for_type(const Sentence& sentence, const std::string& entity_type,
                                  Gateway& gateway, const PromptTemplate& tmpl,
                                  const std::vector<FewShotExample>& examples,
                                  const MarkerConfig& markers = {});

// Union of per-type lists for one sentence, ordered by (start, end). Equal
// offsets collapse to one candidate; if they came from different types the
// source type is left undetermined.
std::vector<CandidateSpan> merge_candidates(
    const std::vector<std::vector<CandidateSpan>>& per_type);

}  // namespace kgner
