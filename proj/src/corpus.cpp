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

#include "kgner/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"
#include "kgner/digest.hpp"
#include "kgner/errors.hpp"
#include "kgner/markers.hpp"
#include "kgner/rng.hpp"
#include "kgner/text.hpp"

namespace kgner {

using nlohmann::json;

std::optional<std::size_t> Corpus::find_sentence(std::string_view doc_id, int index) const {
  auto it = by_key_.find(std::pair<std::string, int>(std::string(doc_id), index));
  if (it == by_key_.end()) return std::nullopt;
  return it->second;
}

bool Corpus::has_type(std::string_view type) const {
  return std::find(entity_types.begin(), entity_types.end(), type) != entity_types.end();
}

std::vector<const GoldMention*> Corpus::mentions_in(std::size_t sentence) const {
  std::vector<const GoldMention*> out;
  for (const auto& m : mentions) {
    if (m.sentence == sentence) out.push_back(&m);
  }
  return out;
}

void Corpus::reindex() {
  by_key_.clear();
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    by_key_.emplace(std::pair(sentences[i].doc_id, sentences[i].index), i);
  }
}

namespace {

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

template <typename T>
T required(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ValidationError(fmt::format("{}: missing field '{}'", where, key));
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(fmt::format("{}: field '{}' has the wrong type", where, key));
  }
}

}  // namespace

Corpus parse_corpus(std::string_view json_text, std::string_view source_name) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("{}: line {}: JSON parse error: {}", source_name,
                                      line_of(json_text, e.byte == 0 ? 0 : e.byte - 1), e.what()));
  }

  Corpus corpus;
  corpus.digest = sha256_hex(json_text);
  const std::string root(source_name);
  corpus.entity_types = required<std::vector<std::string>>(doc, "entity_types", root);
  std::set<std::string> seen_types;
  for (const auto& t : corpus.entity_types) {
    if (t.empty()) throw ValidationError(fmt::format("{}: empty entity type label", root));
    if (text::ascii_lower(t) == kOtherLabel) {
      throw ValidationError(fmt::format("{}: '{}' is reserved for the rejection class", root, t));
    }
    if (!seen_types.insert(t).second) {
      throw ValidationError(fmt::format("{}: duplicate entity type '{}'", root, t));
    }
  }

  if (!doc.contains("sentences") || !doc["sentences"].is_array()) {
    throw ValidationError(fmt::format("{}: missing array 'sentences'", root));
  }
  std::set<std::pair<std::string, int>> keys;
  const auto& sentences = doc["sentences"];
  for (std::size_t si = 0; si < sentences.size(); ++si) {
    const auto where = fmt::format("{}: sentences[{}]", root, si);
    const auto& rec = sentences[si];
    Sentence s;
    s.doc_id = required<std::string>(rec, "doc_id", where);
    s.index = required<int>(rec, "index", where);
    s.text = required<std::string>(rec, "text", where);
    if (s.text.empty()) throw ValidationError(fmt::format("{}: empty text", where));
    try {
      s.length = text::codepoint_count(s.text);
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("{}: {}", where, e.what()));
    }
    if (!keys.emplace(s.doc_id, s.index).second) {
      throw ValidationError(
          fmt::format("{}: duplicate sentence ({}, {})", where, s.doc_id, s.index));
    }
    const std::size_t sentence_no = corpus.sentences.size();

    if (rec.contains("mentions")) {
      const auto& mentions = rec["mentions"];
      if (!mentions.is_array()) {
        throw ValidationError(fmt::format("{}: 'mentions' must be an array", where));
      }
      for (std::size_t mi = 0; mi < mentions.size(); ++mi) {
        const auto mwhere = fmt::format("{}.mentions[{}]", where, mi);
        const auto& m = mentions[mi];
        const auto start = required<long long>(m, "start", mwhere);
        const auto end = required<long long>(m, "end", mwhere);
        auto type = required<std::string>(m, "type", mwhere);
        if (start < 0 || end < 0 ||
            !Span{static_cast<std::size_t>(start), static_cast<std::size_t>(end)}.valid_within(
                s.length)) {
          throw ValidationError(fmt::format("{}: span ({},{}) out of bounds for sentence of length {}",
                                            mwhere, start, end, s.length));
        }
        if (!seen_types.count(type)) {
          throw ValidationError(fmt::format("{}: unknown entity type '{}'", mwhere, type));
        }
        GoldMention gm{sentence_no,
                       {static_cast<std::size_t>(start), static_cast<std::size_t>(end)},
                       std::move(type)};
        if (m.contains("surface")) {
          const auto surface = required<std::string>(m, "surface", mwhere);
          const auto actual = slice_text(s, gm.span);
          if (surface != actual) {
            throw ValidationError(fmt::format("{}: surface '{}' does not match text '{}' at {}",
                                              mwhere, surface, actual, to_string(gm.span)));
          }
        }
        corpus.mentions.push_back(std::move(gm));
      }
    }
    corpus.sentences.push_back(std::move(s));
  }
  corpus.reindex();
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(fmt::format("cannot open corpus file {}", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_corpus(buf.str(), path.string());
}

std::string slice_text(const Sentence& sentence, const Span& span) {
  if (!span.valid_within(sentence.length)) {
    throw ValidationError(fmt::format("span {} out of bounds for sentence of length {}",
                                      to_string(span), sentence.length));
  }
  const auto begin = text::byte_offset(sentence.text, span.start);
  const auto end = begin + text::byte_offset(std::string_view(sentence.text).substr(begin),
                                             span.length());
  return sentence.text.substr(begin, end - begin);
}

std::vector<FewShotExample> sample_fewshot(const Corpus& corpus, const std::string& entity_type,
                                           std::size_t n, std::uint64_t seed) {
  if (n == 0) return {};
  std::vector<FewShotExample> eligible;
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
    std::vector<Span> spans;
    for (const auto* m : corpus.mentions_in(i)) {
      if (m->type == entity_type) spans.push_back(m->span);
    }
    if (spans.empty()) continue;
    try {
      const auto& s = corpus.sentences[i];
      eligible.push_back({s.text, encode_marked(s.text, spans), entity_type});
    } catch (const ValidationError&) {
      // Overlapping gold spans or marker collisions cannot be demonstrated.
    }
  }
  if (eligible.size() < n) {
    throw ValidationError(fmt::format("need {} demonstration(s) of type '{}', only {} available",
                                      n, entity_type, eligible.size()));
  }
  Rng rng(seed);
  std::vector<FewShotExample> out;
  for (auto i : sample_indices(eligible.size(), n, rng)) out.push_back(eligible[i]);
  return out;
}

}  // namespace kgner
