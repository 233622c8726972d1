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

#include "kgner/span_extraction.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "kgner/errors.hpp"

namespace kgner {

namespace {

constexpr std::string_view kDefaultSpanTemplate = R"([system]
You are an excellent linguist working on biomedical literature.
[user]
The task is to find every {entity_type} entity in the input sentence. Copy the sentence exactly and surround each entity with @@ and ##, for example "@@entity##". Do not change any other character. If the sentence contains no such entity, copy it unchanged.

{examples}

Input: {input_sentence}
Output:
)";

const std::vector<std::string>& span_placeholders() {
  static const std::vector<std::string> p = {"entity_type", "examples", "input_sentence"};
  return p;
}

}  // namespace

PromptTemplate default_span_template() {
  return PromptTemplate::parse(kDefaultSpanTemplate, span_placeholders(), "default span template");
}

PromptTemplate load_span_template(const std::filesystem::path& path) {
  return PromptTemplate::load(path, span_placeholders());
}

std::string render_examples_block(const std::vector<FewShotExample>& examples) {
  std::string out;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (i > 0) out += "\n\n";
    out += fmt::format("Input: {}\nOutput: {}", examples[i].text, examples[i].marked);
  }
  return out;
}

Prompt render_span_prompt(const Sentence& sentence, const std::string& entity_type,
                          const std::vector<FewShotExample>& examples,
                          const PromptTemplate& tmpl) {
  for (const auto& ex : examples) {
    if (ex.entity_type != entity_type) {
      throw ValidationError(fmt::format("demonstration of type '{}' used in a '{}' prompt",
                                        ex.entity_type, entity_type));
    }
  }
  return tmpl.render({{"entity_type", entity_type},
                      {"examples", render_examples_block(examples)},
                      {"input_sentence", sentence.text}});
}

Extraction extract_spans_for_type(const Sentence& sentence, const std::string& entity_type,
                                  Gateway& gateway, const PromptTemplate& tmpl,
                                  const std::vector<FewShotExample>& examples,
                                  const MarkerConfig& markers) {
  const auto response = gateway.complete(render_span_prompt(sentence, entity_type, examples, tmpl));
  auto parsed = parse_marked(response.text, sentence.text, markers);

  Extraction out;
  for (auto& w : parsed.warnings) {
    out.warnings.push_back(fmt::format("{}#{} [{}]: {}", sentence.doc_id, sentence.index,
                                       entity_type, w));
  }
  for (const auto& span : parsed.spans) {  // already sorted and unique
    out.candidates.push_back({span, entity_type, slice_text(sentence, span), {entity_type}});
  }
  return out;
}

std::vector<CandidateSpan> merge_candidates(
    const std::vector<std::vector<CandidateSpan>>& per_type) {
  std::map<Span, CandidateSpan> merged;
  for (const auto& list : per_type) {
    for (const auto& c : list) {
      auto [it, inserted] = merged.try_emplace(c.span, c);
      if (inserted) continue;
      auto& into = it->second;
      for (const auto& t : c.proposed_by) {
        if (std::find(into.proposed_by.begin(), into.proposed_by.end(), t) ==
            into.proposed_by.end()) {
          into.proposed_by.push_back(t);
        }
      }
      if (into.source_type != c.source_type) into.source_type.reset();
    }
  }
  std::vector<CandidateSpan> out;
  out.reserve(merged.size());
  for (auto& [span, c] : merged) {
    std::sort(c.proposed_by.begin(), c.proposed_by.end());
    if (c.proposed_by.size() > 1) c.source_type.reset();
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace kgner
