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

#include <set>

#include "doctest.h"
#include "kgner/corpus.hpp"
#include "kgner/errors.hpp"
#include "kgner/markers.hpp"
#include "support.hpp"

using namespace kgner;

namespace {

const char* kOneSentence = R"({
  "entity_types": ["Gene/Protein"],
  "sentences": [{"doc_id": "d", "index": 0, "text": "p53 binds DNA",
                 "mentions": [{"start": 0, "end": 3, "type": "Gene/Protein"}]}]
})";

std::string with_mention(const std::string& mention) {
  return R"({"entity_types": ["Gene/Protein"], "sentences": [{"doc_id": "d", "index": 0,
    "text": "p53 binds DNA", "mentions": [)" + mention + "]}]}";
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("minimal corpus loads") {
    const auto c = parse_corpus(kOneSentence);
    REQUIRE(c.sentences.size() == 1);
    REQUIRE(c.mentions.size() == 1);
    CHECK(c.sentences[0].length == 13);
    CHECK(c.mentions[0].span == Span{0, 3});
    CHECK(c.find_sentence("d", 0) == 0);
    CHECK_FALSE(c.find_sentence("d", 1));
    CHECK(c.has_type("Gene/Protein"));
    CHECK_FALSE(c.has_type("Species"));
  }

  TEST_CASE("out of bounds mention names the record") {
    try {
      parse_corpus(with_mention(R"({"start": 0, "end": 99, "type": "Gene/Protein"})"));
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("sentences[0].mentions[0]") != std::string::npos);
    }
  }

  TEST_CASE("schema violations") {
    CHECK_THROWS_AS(parse_corpus(with_mention(R"({"start": 0, "end": 3, "type": "Species"})")),
                    ValidationError);
    CHECK_THROWS_AS(parse_corpus(with_mention(R"({"start": 3, "end": 3, "type": "Gene/Protein"})")),
                    ValidationError);
    CHECK_THROWS_AS(
        parse_corpus(with_mention(R"({"start": 0, "end": 3, "type": "Gene/Protein", "surface": "p5"})")),
        ValidationError);
    CHECK_THROWS_AS(parse_corpus(R"({"entity_types": ["other"], "sentences": []})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_corpus(R"({"entity_types": ["A"], "sentences": [
        {"doc_id": "d", "index": 0, "text": "x", "mentions": []},
        {"doc_id": "d", "index": 0, "text": "y", "mentions": []}]})"),
                    ValidationError);
  }

  TEST_CASE("syntax errors name the line") {
    try {
      parse_corpus("{\n\"entity_types\": [\n}", "broken.json");
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      const std::string what = e.what();
      CHECK(what.find("broken.json") != std::string::npos);
      CHECK(what.find("line 3") != std::string::npos);
    }
  }

  TEST_CASE("overlapping gold mentions are kept") {
    const auto c = parse_corpus(with_mention(
        R"({"start": 0, "end": 3, "type": "Gene/Protein"}, {"start": 0, "end": 9, "type": "Gene/Protein"})"));
    CHECK(c.mentions.size() == 2);
  }

  TEST_CASE("slice_text") {
    const auto c = parse_corpus(kOneSentence);
    const auto& s = c.sentences[0];
    CHECK(slice_text(s, {0, 3}) == "p53");
    CHECK(slice_text(s, {10, 13}) == "DNA");
    CHECK(slice_text(s, {0, 13}) == s.text);
    CHECK_THROWS_AS(slice_text(s, {10, 14}), ValidationError);
  }

  TEST_CASE("bundled fixture") {
    const auto c = load_corpus(testing::data_dir() / "corpus.json");
    CHECK(c.sentences.size() == 10);
    CHECK(c.mentions.size() == 17);
    CHECK(c.digest.size() == 64);
    for (const auto& m : c.mentions) {
      CHECK(m.span.valid_within(c.sentences[m.sentence].length));
    }
    // The β-catenin sentence has a two-byte character before the mention.
    const auto i = c.find_sentence("craft-05", 1);
    REQUIRE(i);
    CHECK(slice_text(c.sentences[*i], c.mentions_in(*i)[0]->span) == "β-catenin");
  }

  TEST_CASE("sample_fewshot") {
    const auto c = load_corpus(testing::data_dir() / "corpus.json");
    CHECK(sample_fewshot(c, "Chemical", 0, 1).empty());

    const auto a = sample_fewshot(c, "Species", 2, 7);
    const auto b = sample_fewshot(c, "Species", 2, 7);
    REQUIRE(a.size() == 2);
    CHECK(a[0].marked == b[0].marked);
    CHECK(a[1].marked == b[1].marked);
    CHECK(a[0].text != a[1].text);

    const auto chem = sample_fewshot(c, "Chemical", 1, 1);
    REQUIRE(chem.size() == 1);
    CHECK(strip_markers(chem[0].marked) == chem[0].text);
    CHECK(chem[0].entity_type == "Chemical");
    CHECK(chem[0].marked.find("@@") != std::string::npos);

    try {
      sample_fewshot(c, "Species", 5, 1);
      FAIL("expected an error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("4") != std::string::npos);
    }
  }

  TEST_CASE("sample_fewshot marks every mention of the type and only that type") {
    const auto c = load_corpus(testing::data_dir() / "corpus.json");
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      for (const auto& ex : sample_fewshot(c, "Gene/Protein", 3, seed)) {
        CHECK(strip_markers(ex.marked) == ex.text);
        std::size_t sentence = 0;
        for (; sentence < c.sentences.size(); ++sentence) {
          if (c.sentences[sentence].text == ex.text) break;
        }
        REQUIRE(sentence < c.sentences.size());
        std::size_t expected = 0;
        for (const auto* m : c.mentions_in(sentence)) expected += m->type == "Gene/Protein";
        CHECK(parse_marked(ex.marked, ex.text).spans.size() == expected);
      }
    }
  }

  TEST_CASE("labels") {
    CHECK(Label::other().is_other());
    CHECK(Label::other().str() == "other");
    CHECK(Label::entity("Species").name() == "Species");
    CHECK(Label::entity("Species") != Label::other());
  }
}
