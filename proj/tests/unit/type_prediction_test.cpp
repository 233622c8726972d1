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

#include "doctest.h"
#include "kgner/errors.hpp"
#include "kgner/rng.hpp"
#include "kgner/text.hpp"
#include "kgner/type_prediction.hpp"
#include "support.hpp"

using namespace kgner;

namespace {

const std::vector<std::string> kTypes = {"Gene/Protein", "Species", "Chemical"};

CategoryMap test_map() {
  return CategoryMap({{"Gene or Genome", Label::entity("Gene/Protein")},
                      {"Mammal", Label::entity("Species")},
                      {"Organic Chemical", Label::entity("Chemical")},
                      {"Intellectual Product", Label::other()}});
}

KnowledgeContext context(const std::vector<std::pair<std::string, double>>& cats) {
  KnowledgeContext ctx{"q", {}};
  int i = 0;
  for (const auto& [cat, sim] : cats) ctx.neighbors.push_back({{"n" + std::to_string(i++), cat}, sim});
  return ctx;
}

Sentence sentence(const std::string& text) { return {"d", 0, text, text::codepoint_count(text)}; }

CandidateSpan candidate(const Sentence& s, Span span, std::optional<std::string> type) {
  std::vector<std::string> by;
  if (type) by.push_back(*type);
  return {span, type, text::encode_utf8(text::decode_utf8(s.text).substr(span.start, span.length())),
          by};
}

}  // namespace

TEST_SUITE("type_prediction") {
  TEST_CASE("vote: unanimity") {
    CHECK(vote_type(context({{"Mammal", .9}, {"Mammal", .8}, {"Mammal", .7}, {"Mammal", .6},
                             {"Mammal", .5}}),
                    test_map()) == Label::entity("Species"));
  }

  TEST_CASE("vote: plurality ignores OTHER") {
    CHECK(vote_type(context({{"Gene or Genome", .9},
                             {"Gene or Genome", .8},
                             {"Organic Chemical", .7},
                             {"Intellectual Product", .6},
                             {"Unmapped", .5}}),
                    test_map()) == Label::entity("Gene/Protein"));
    // OTHER-mapped neighbors do not outvote a single typed one.
    CHECK(vote_type(context({{"Intellectual Product", .9}, {"Unmapped", .8}, {"Mammal", .1}}),
                    test_map()) == Label::entity("Species"));
  }

  TEST_CASE("vote: rank tie-break") {
    CHECK(vote_type(context({{"Gene or Genome", .9},
                             {"Organic Chemical", .8},
                             {"Organic Chemical", .7},
                             {"Gene or Genome", .6}}),
                    test_map()) == Label::entity("Gene/Protein"));
    CHECK(vote_type(context({{"Organic Chemical", .9},
                             {"Gene or Genome", .8},
                             {"Gene or Genome", .7},
                             {"Organic Chemical", .6}}),
                    test_map()) == Label::entity("Chemical"));
  }

  TEST_CASE("vote: all OTHER rejects; empty context errors") {
    CHECK(vote_type(context({{"Intellectual Product", .9}, {"Unmapped", .5}}), test_map())
              .is_other());
    CHECK_THROWS_AS(vote_type(context({}), test_map()), ValidationError);
  }

  TEST_CASE("vote: k=1 is the mapped category") {
    for (const auto* cat : {"Gene or Genome", "Mammal", "Organic Chemical", "Unmapped"}) {
      CHECK(vote_type(context({{cat, .4}}), test_map()) == test_map().map(cat));
    }
  }

  TEST_CASE("vote: invariant under positive rescaling") {
    const std::vector<std::string> cats = {"Gene or Genome", "Mammal", "Organic Chemical",
                                           "Intellectual Product", "Unmapped"};
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
      std::vector<std::pair<std::string, double>> raw;
      const auto k = 1 + rng.below(8);
      double sim = 1.0;
      for (std::size_t j = 0; j < k; ++j) {
        sim -= static_cast<double>(rng.below(100)) / 1000.0;
        raw.emplace_back(cats[rng.below(cats.size())], sim);
      }
      const double alpha = 0.01 + static_cast<double>(rng.below(1000)) / 10.0;
      auto scaled = raw;
      for (auto& [c, s] : scaled) s *= alpha;
      CHECK(vote_type(context(raw), test_map()) == vote_type(context(scaled), test_map()));
    }
  }

  TEST_CASE("category map file") {
    const auto m = CategoryMap::load(testing::data_dir() / "category_map.tsv", kTypes);
    CHECK(m.map("Mammal") == Label::entity("Species"));
    CHECK(m.map("Intellectual Product").is_other());
    CHECK(m.map("never heard of it").is_other());
    testing::TempDir dir;
    testing::write_text(dir / "m.tsv", "Mammal\tAnimal\n");
    CHECK_THROWS_AS(CategoryMap::load(dir / "m.tsv", kTypes), ValidationError);
  }

  TEST_CASE("options and references") {
    CHECK(render_options(kTypes) == "- Gene/Protein\n- Species\n- Chemical\n- other");
    const auto ctx = context({{"Mammal", 0.87349}, {"Fish", 0.5}});
    CHECK(render_references(ctx) ==
          "Reference1: (n0, Mammal, 0.873)\nReference2: (n1, Fish, 0.500)");
    CHECK(render_references(context({})).empty());
  }

  TEST_CASE("retype prompt") {
    const auto s = sentence("Mutations in the Brca1 gene cause breast cancer in mice.");
    const auto c = candidate(s, {10, 12}, "Species");
    const auto t = TypingTemplates::defaults();
    const auto p = render_retype_prompt(s, c, kTypes, t.retype);
    const auto& u = p.messages.back().content;
    CHECK(u.find(s.text) != std::string::npos);
    CHECK(u.find("Entity: \"in\"") != std::string::npos);
    CHECK(text::count_occurrences(u, "\n- ") == 4);
    CHECK(p == render_retype_prompt(s, c, kTypes, t.retype));
  }

  TEST_CASE("knowledge prompt") {
    const auto s = sentence("p53 binds DNA");
    const auto c = candidate(s, {0, 3}, "Gene/Protein");
    const auto t = TypingTemplates::defaults();
    const auto five = context({{"A", .9}, {"B", .8}, {"C", .7}, {"D", .6}, {"E", .5}});
    const auto p = render_knowledge_prompt(s, c, five, kTypes, t.knowledge);
    const auto& u = p.messages.back().content;
    for (int i = 1; i <= 5; ++i) {
      CHECK(u.find("Reference" + std::to_string(i) + ": ") != std::string::npos);
    }
    CHECK(u.find("Reference6") == std::string::npos);
    CHECK(u.find("Reference5") < u.find("Choose one"));
    const auto empty = render_knowledge_prompt(s, c, context({}), kTypes, t.knowledge);
    CHECK(empty.messages.back().content.find("Reference") == std::string::npos);
    CHECK_NOTHROW(empty.validate());
  }

  TEST_CASE("shipped typing templates match the defaults") {
    const auto root = testing::data_dir() / ".." / "..";
    const auto file = TypingTemplates::load(root / "templates" / "retype.txt",
                                            root / "templates" / "knowledge.txt");
    const auto def = TypingTemplates::defaults();
    CHECK(file.retype.user_text() == def.retype.user_text());
    CHECK(file.knowledge.user_text() == def.knowledge.user_text());
    CHECK(file.knowledge.system_text() == def.knowledge.system_text());
  }

  TEST_CASE("response parsing") {
    CHECK(parse_type_response("The entity is a Chemical.", kTypes).label == Label::entity("Chemical"));
    CHECK(parse_type_response("other", kTypes).label.is_other());
    CHECK_FALSE(parse_type_response("other", kTypes).warning);
    CHECK(parse_type_response("I believe it could be a gene/protein entity", kTypes).label ==
          Label::entity("Gene/Protein"));
    CHECK(parse_type_response("Species, not Chemical", kTypes).label == Label::entity("Species"));
    CHECK(parse_type_response("OTHER", kTypes).label.is_other());
    // "others" and "chemicals" are not the labels as words.
    const auto none = parse_type_response("Nothing fits; others might say chemicals", kTypes);
    CHECK(none.label.is_other());
    CHECK(none.warning);
    CHECK(parse_type_response("", kTypes).warning);
  }

  TEST_CASE("longest label wins at the same position") {
    const std::vector<std::string> types = {"Gene", "Gene/Protein"};
    CHECK(parse_type_response("Gene/Protein", types).label == Label::entity("Gene/Protein"));
    CHECK(parse_type_response("Gene only", types).label == Label::entity("Gene"));
  }

  TEST_CASE("echoing any allowed label recovers it") {
    for (const auto& t : kTypes) {
      CHECK(parse_type_response(t, kTypes).label == Label::entity(t));
      CHECK(parse_type_response(text::ascii_lower(t) + "\n", kTypes).label == Label::entity(t));
    }
  }

  TEST_CASE("predict: passthrough") {
    const auto s = sentence("p53 binds DNA");
    TypingDeps deps;
    deps.allowed = kTypes;
    const auto species = candidate(s, {0, 3}, "Species");
    CHECK(predict_type(Strategy::kPassthrough, s, species, deps).entity.predicted ==
          Label::entity("Species"));
    CandidateSpan collapsed{{0, 3}, std::nullopt, "p53", {"Chemical", "Gene/Protein"}};
    CHECK(predict_type(Strategy::kPassthrough, s, collapsed, deps).entity.predicted ==
          Label::entity("Gene/Protein"));
  }

  TEST_CASE("predict: llm and knowledge paths") {
    const auto s = sentence("Mutations in the Brca1 gene cause breast cancer in mice.");
    auto mock = MockProvider::from_json_text(R"({"rules": [
      {"contains": ["Reference1:", "Entity: \"Brca1\""], "response": "Gene/Protein"},
      {"contains": "Entity: \"in\"", "response": "other"},
      {"contains": "Entity: \"Brca1\"", "response": "Chemical"},
      {"response": "no idea"}]})");
    Gateway gateway(mock, GatewayOptions{});
    FallbackEmbedder fb(512);
    const auto index = build_index({testing::data_dir() / "dictionary.tsv", 1000, 1}, fb);
    const auto map = CategoryMap::load(testing::data_dir() / "category_map.tsv", kTypes);
    const auto templates = TypingTemplates::defaults();
    TypingDeps deps{kTypes, &gateway, &index, &fb, &map, &templates, 5};

    const auto brca1 = candidate(s, {17, 22}, "Gene/Protein");
    CHECK(predict_type(Strategy::kRetypeGpt, s, brca1, deps).entity.predicted ==
          Label::entity("Chemical"));
    const auto kg = predict_type(Strategy::kKgGpt, s, brca1, deps);
    CHECK(kg.entity.predicted == Label::entity("Gene/Protein"));
    REQUIRE(kg.context);
    CHECK(kg.context->neighbors.size() == 5);
    CHECK(kg.context->neighbors[0].entry.name == "Brca1");
    CHECK(kg.entity.strategy == Strategy::kKgGpt);

    const auto vote = predict_type(Strategy::kKgVote, s, brca1, deps);
    CHECK(vote.entity.predicted == Label::entity("Gene/Protein"));

    const auto in = candidate(s, {10, 12}, "Species");
    CHECK(predict_type(Strategy::kRetypeGpt, s, in, deps).entity.predicted.is_other());
    CHECK(predict_type(Strategy::kKgVote, s, in, deps).entity.predicted.is_other());

    const auto mice = candidate(s, {51, 55}, "Species");
    const auto unsure = predict_type(Strategy::kRetypeGpt, s, mice, deps);
    CHECK(unsure.entity.predicted.is_other());
    CHECK(unsure.warnings.size() == 1);

    TypingDeps bare;
    bare.allowed = kTypes;
    CHECK_THROWS_AS(predict_type(Strategy::kRetypeGpt, s, brca1, bare), ConfigError);
  }

  TEST_CASE("filter_other") {
    const TypedEntity keep{{{0, 3}, "Species", "p53", {}}, Label::entity("Species"),
                           Strategy::kKgVote};
    const TypedEntity drop{{{4, 9}, "Species", "binds", {}}, Label::other(), Strategy::kKgVote};
    CHECK(filter_other({drop, drop}).empty());
    CHECK(filter_other({keep, keep}).size() == 2);
    const auto once = filter_other({drop, keep, drop});
    REQUIRE(once.size() == 1);
    CHECK(once[0].candidate.span == Span{0, 3});
    CHECK(filter_other(once).size() == once.size());
  }

  TEST_CASE("strategy names") {
    for (auto s : {Strategy::kPassthrough, Strategy::kRetypeGpt, Strategy::kKgVote,
                   Strategy::kKgGpt}) {
      CHECK(parse_strategy(to_string(s)) == s);
    }
    CHECK(display_name(Strategy::kPassthrough) == "GPTNER-RR");
    CHECK(display_name(Strategy::kKgGpt) == "ReType-KG+GPT");
    CHECK_THROWS_AS(parse_strategy("vote"), ConfigError);
  }
}
