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
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kgner/span.hpp"

namespace kgner {

// Entity categories are plain labels from a configured closed set. The
// rejection class is kept out of that set: a predicted label is either one of
// those names or other.
inline constexpr std::string_view kOtherLabel = "other";

class Label {
 public:
  static Label other() { return Label(); }
  static Label entity(std::string name) { return Label(std::move(name)); }

  bool is_other() const { return !name_.has_value(); }
  // Precondition: !is_other().
  const std::string& name() const { return *name_; }
  std::string str() const { return name_ ? *name_ : std::string(kOtherLabel); }

  bool operator==(const Label&) const = default;

 private:
  Label() = default;
  explicit Label(std::string name) : name_(std::move(name)) {}
  std::optional<std::string> name_;
};

struct Sentence {
  std::string doc_id;
  int index = 0;
  std::string text;        // UTF-8
  std::size_t length = 0;  // code points
};

struct GoldMention {
  std::size_t sentence = 0;  // index into Corpus::sentences
  Span span;
  std::string type;
};

struct FewShotExample {
  std::string text;
  std::string marked;
  std::string entity_type;
};

class Corpus {
 public:
  std::vector<std::string> entity_types;
  std::vector<Sentence> sentences;
  std::vector<GoldMention> mentions;
  std::string digest;  // SHA-256 of the source bytes

  std::optional<std::size_t> find_sentence(std::string_view doc_id, int index) const;
  bool has_type(std::string_view type) const;
  std::vector<const GoldMention*> mentions_in(std::size_t sentence) const;

  // Builds the (doc_id, index) lookup; called by the loaders.
  void reindex();

 private:
  std::map<std::pair<std::string, int>, std::size_t, std::less<>> by_key_;
};

// Standoff JSON corpus. Throws ValidationError with the line (for syntax
// errors) or the record path (for schema errors) of the offending input.
Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_corpus(std::string_view json_text, std::string_view source_name = "<memory>");

std::string slice_text(const Sentence& sentence, const Span& span);

// n demonstrations for one type, with every gold mention of that type
// marked. Candidates are sentences with at least one such mention whose
// marked form encodes unambiguously. Pure function of its arguments.
std::vector<FewShotExample> sample_fewshot(const Corpus& corpus, const std::string& entity_type,
                                           std::size_t n, std::uint64_t seed);

}  // namespace kgner
