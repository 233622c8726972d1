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

// Acceptance suite: one PASS/FAIL line per criterion, each with a pinned
// runtime budget. Exit status is nonzero if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../unit/support.hpp"
#include "CLI11.hpp"
#include "json.hpp"
#include "kgner/digest.hpp"
#include "kgner/embedding.hpp"
#include "kgner/errors.hpp"
#include "kgner/evaluation.hpp"
#include "kgner/knowledge_base.hpp"
#include "kgner/markers.hpp"
#include "kgner/text.hpp"
#include "kgner/type_prediction.hpp"

namespace fs = std::filesystem;
using namespace kgner;
using kgner::testing::read_text;
using kgner::testing::TempDir;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failures; the first few are kept for the report line.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) messages_.push_back(what);
  }
  Outcome outcome() const {
    std::ostringstream s;
    s << (checks_ - failures_) << "/" << checks_ << " checks";
    for (const auto& m : messages_) s << "; " << m;
    if (failures_ > 3) s << "; ...";
    return {failures_ == 0, s.str()};
  }

 private:
  std::size_t checks_ = 0;
  std::size_t failures_ = 0;
  std::vector<std::string> messages_;
};

struct Env {
  fs::path cli;
  fs::path data;
};

std::string fixed(double v, int decimals = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(decimals);
  s << v;
  return s.str();
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

// Runs the CLI with stdout captured to `stdout_path`; returns the exit code.
int run_cli(const Env& env, const std::vector<std::string>& args, const fs::path& stdout_path) {
  std::string cmd = quote(env.cli.string());
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " > " + quote(stdout_path.string()) + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// --- F1 arithmetic -------------------------------------------------------

Outcome f1_arithmetic(const Env& env) {
  Checker c;
  std::istringstream rows(read_text(env.data / "published_scores.tsv"));
  std::string line;
  std::getline(rows, line);  // header
  while (std::getline(rows, line)) {
    std::vector<std::string> f;
    std::istringstream fields(line);
    for (std::string x; std::getline(fields, x, '\t');) f.push_back(x);
    if (f.size() != 5) {
      c.expect(false, "malformed row: " + line);
      continue;
    }
    const double p = std::stod(f[2]), r = std::stod(f[3]), reported = std::stod(f[4]);
    const double f1 = harmonic_f1(p, r);
    c.expect(std::abs(f1 - reported) <= 0.01, f[0] + " " + f[1] + ": (" + f[2] + ", " + f[3] +
                                                  ") gives " + fixed(f1) + ", table says " + f[4]);
  }
  return c.outcome();
}

// --- marker round trip ---------------------------------------------------

Outcome marker_round_trip(const Env&) {
  Checker c;
  const std::string example =
      "A common feature of these proteins is involvement with heterochromatin and/or "
      "transcriptional repression";
  const std::string example_marked =
      "A common feature of these @@proteins## is involvement with heterochromatin and/or "
      "transcriptional repression";
  c.expect(encode_marked(example, {{26, 34}}) == example_marked, "worked example encoding");
  c.expect(parse_marked(example_marked, example).spans == std::vector<Span>{{26, 34}},
           "worked example parse");

  // Mixed ASCII and multi-byte code points, none of them marker characters.
  const std::vector<std::string> alphabet = {
      "a", "b", "e", "k", "n", "r", "s", "t", "z", "A", "B", "Q", "0", "1", "7", "-", "/", "(",
      ")", ",", ".", "β", "é", "µ", "α", "ü", "→", "中"};
  std::mt19937_64 gen(20240611);
  const auto pick = [&](std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen);
  };
  for (int t = 0; t < 1000; ++t) {
    std::vector<std::string> cps;
    const std::size_t words = 1 + pick(15);
    for (std::size_t w = 0; w < words; ++w) {
      if (w) cps.push_back(" ");
      const std::size_t len = 1 + pick(10);
      for (std::size_t i = 0; i < len; ++i) cps.push_back(alphabet[pick(alphabet.size())]);
    }
    std::string sentence;
    for (const auto& cp : cps) sentence += cp;

    // Non-overlapping spans from sorted distinct cut points, kept at random.
    const std::size_t n = cps.size();
    std::set<std::size_t> cuts;
    const std::size_t ncuts = pick(std::min<std::size_t>(n, 12) + 1);
    while (cuts.size() < ncuts) cuts.insert(pick(n + 1));
    std::vector<std::size_t> cv(cuts.begin(), cuts.end());
    std::vector<Span> spans;
    for (std::size_t i = 0; i + 1 < cv.size(); i += 1 + pick(2)) {
      if (cv[i] < cv[i + 1]) spans.push_back({cv[i], cv[i + 1]});
    }

    const auto marked = encode_marked(sentence, spans);
    const auto parsed = parse_marked(marked, sentence);
    c.expect(parsed.spans == spans, "case " + std::to_string(t) + ": " + marked);
    c.expect(parsed.warnings.empty(), "case " + std::to_string(t) + " warned");
  }
  return c.outcome();
}

// --- retrieval oracle ----------------------------------------------------

Outcome retrieval_oracle(const Env&) {
  Checker c;
  std::mt19937_64 gen(7);
  const auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(gen);
  };
  const std::string letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789- ";
  const auto random_name = [&] {
    std::string s;
    const std::size_t len = pick(1, 14);
    while (s.size() < len) {
      const char ch = letters[pick(0, letters.size() - 1)];
      if (ch == ' ' && (s.empty() || s.size() + 1 == len)) continue;
      s += ch;
    }
    return s;
  };
  const std::vector<std::string> categories = {"Gene or Genome", "Mammal", "Organic Chemical",
                                               "Enzyme", "Spatial Concept"};

  for (int d = 0; d < 200; ++d) {
    const std::size_t size = d < 10 ? 10000 : pick(1, 10000);
    const std::size_t dim = d % 2 ? 64 : 128;
    std::vector<std::string> pool;
    for (std::size_t i = 0; i < std::max<std::size_t>(size / 3, 1); ++i) pool.push_back(random_name());
    std::set<KbEntry> unique;
    while (unique.size() < size) {
      unique.insert({pool[pick(0, pool.size() - 1)], categories[pick(0, categories.size() - 1)]});
    }
    FallbackEmbedder embedder(dim);
    const auto index = attach_embeddings({unique.begin(), unique.end()}, embedder);

    for (int q = 0; q < 3; ++q) {
      const std::string query = q == 0 ? pool[pick(0, pool.size() - 1)] : random_name();
      const auto qv = fallback_embed(query, dim);
      struct Scored {
        double sim;
        std::size_t i;
      };
      std::vector<Scored> all;
      for (std::size_t i = 0; i < index.size(); ++i) {
        const auto row = index.vector(i);
        double dot = 0, na = 0, nb = 0;
        for (std::size_t k = 0; k < dim; ++k) {
          dot += static_cast<double>(row[k]) * qv.values[k];
          na += static_cast<double>(row[k]) * row[k];
          nb += static_cast<double>(qv.values[k]) * qv.values[k];
        }
        all.push_back({dot / (std::sqrt(na) * std::sqrt(nb)), i});
      }
      std::sort(all.begin(), all.end(), [&](const Scored& a, const Scored& b) {
        if (a.sim != b.sim) return a.sim > b.sim;
        const auto& ea = index.entries()[a.i];
        const auto& eb = index.entries()[b.i];
        if (ea.name != eb.name) return ea.name < eb.name;
        return ea.category < eb.category;
      });

      for (std::size_t k : {1, 5, 20}) {
        const auto got = retrieve_top_k(index, query, k, embedder);
        const std::size_t want = std::min(k, all.size());
        const std::string where = "dict " + std::to_string(d) + " query '" + query + "' k=" +
                                  std::to_string(k);
        c.expect(got.size() == want, where + ": size");
        for (std::size_t r = 0; r < std::min(got.size(), want); ++r) {
          const auto& e = index.entries()[all[r].i];
          c.expect(got[r].entry == e && std::abs(got[r].similarity - all[r].sim) <= 1e-9,
                   where + ": rank " + std::to_string(r));
        }
      }
    }
  }
  return c.outcome();
}

// --- scoring oracle ------------------------------------------------------

// Maximum one-to-one matching between predictions and gold mentions where an
// edge joins identical (sentence, span, type), by augmenting paths.
std::size_t max_matching(const std::vector<std::vector<std::size_t>>& edges, std::size_t ngold) {
  std::vector<long> owner(ngold, -1);
  std::size_t matched = 0;
  for (std::size_t p = 0; p < edges.size(); ++p) {
    std::vector<bool> seen(ngold, false);
    std::function<bool(std::size_t)> augment = [&](std::size_t u) {
      for (std::size_t g : edges[u]) {
        if (seen[g]) continue;
        seen[g] = true;
        if (owner[g] < 0 || augment(static_cast<std::size_t>(owner[g]))) {
          owner[g] = static_cast<long>(u);
          return true;
        }
      }
      return false;
    };
    if (augment(p)) ++matched;
  }
  return matched;
}

Outcome scoring_oracle(const Env&) {
  Checker c;
  std::mt19937_64 gen(99);
  const auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(gen);
  };
  const std::vector<std::string> types = {"Gene/Protein", "Species", "Chemical"};

  for (int t = 0; t < 500; ++t) {
    Corpus corpus;
    corpus.entity_types = types;
    const std::size_t nsent = pick(1, 6);
    for (std::size_t s = 0; s < nsent; ++s) {
      corpus.sentences.push_back({"d" + std::to_string(s % 2), static_cast<int>(s), "", 20});
    }
    corpus.reindex();
    // A small span vocabulary makes collisions and duplicates common.
    const auto random_mention = [&] {
      const std::size_t start = pick(0, 5);
      return GoldMention{pick(0, nsent - 1), {start, start + pick(1, 3)}, types[pick(0, 2)]};
    };
    const std::size_t ngold = pick(0, 50);
    for (std::size_t i = 0; i < ngold; ++i) corpus.mentions.push_back(random_mention());

    std::vector<Prediction> preds;
    std::vector<GoldMention> pred_keys;
    const std::size_t npred = pick(0, 50);
    for (std::size_t i = 0; i < npred; ++i) {
      auto m = (ngold && pick(0, 1)) ? corpus.mentions[pick(0, ngold - 1)] : random_mention();
      pred_keys.push_back(m);
      const auto& sent = corpus.sentences[m.sentence];
      preds.push_back({sent.doc_id, sent.index, m.span, m.type, "test"});
    }

    const auto result = match_strict(corpus, preds);
    Counts micro;
    for (const auto& type : types) {
      std::vector<std::size_t> gold_ids, pred_ids;
      for (std::size_t g = 0; g < ngold; ++g) {
        if (corpus.mentions[g].type == type) gold_ids.push_back(g);
      }
      for (std::size_t p = 0; p < npred; ++p) {
        if (pred_keys[p].type == type) pred_ids.push_back(p);
      }
      std::vector<std::vector<std::size_t>> edges(pred_ids.size());
      for (std::size_t i = 0; i < pred_ids.size(); ++i) {
        for (std::size_t j = 0; j < gold_ids.size(); ++j) {
          const auto& a = pred_keys[pred_ids[i]];
          const auto& b = corpus.mentions[gold_ids[j]];
          if (a.sentence == b.sentence && a.span == b.span) edges[i].push_back(j);
        }
      }
      const std::size_t tp = max_matching(edges, gold_ids.size());
      const Counts want{tp, pred_ids.size() - tp, gold_ids.size() - tp};
      micro += want;
      const auto it = result.per_type.find(type);
      c.expect(it != result.per_type.end() && it->second == want,
               "corpus " + std::to_string(t) + " type " + type);
    }
    c.expect(result.micro == micro, "corpus " + std::to_string(t) + " micro");
  }
  return c.outcome();
}

// --- vote contract -------------------------------------------------------

Outcome vote_contract(const Env&) {
  Checker c;
  const CategoryMap map({{"Gene or Genome", Label::entity("Gene/Protein")},
                         {"Enzyme", Label::entity("Gene/Protein")},
                         {"Mammal", Label::entity("Species")},
                         {"Organic Chemical", Label::entity("Chemical")},
                         {"Spatial Concept", Label::other()}});
  const auto ctx = [](std::vector<std::pair<std::string, double>> rows) {
    KnowledgeContext k{"q", {}};
    for (std::size_t i = 0; i < rows.size(); ++i) {
      k.neighbors.push_back({{"n" + std::to_string(i), rows[i].first}, rows[i].second});
    }
    return k;
  };
  const auto check = [&](const std::string& name, const KnowledgeContext& k, const Label& want) {
    const auto got = vote_type(k, map);
    c.expect(got == want, name + ": got " + got.str() + ", want " + want.str());
  };

  check("unanimity", ctx({{"Mammal", 0.9}, {"Mammal", 0.8}, {"Mammal", 0.7}}),
        Label::entity("Species"));
  check("unanimity through two categories",
        ctx({{"Gene or Genome", 0.9}, {"Enzyme", 0.8}}), Label::entity("Gene/Protein"));
  check("plurality", ctx({{"Mammal", 0.95}, {"Organic Chemical", 0.9}, {"Organic Chemical", 0.8},
                          {"Gene or Genome", 0.7}}),
        Label::entity("Chemical"));
  check("plurality ignores other",
        ctx({{"Spatial Concept", 0.99}, {"Spatial Concept", 0.98}, {"Spatial Concept", 0.97},
             {"Mammal", 0.5}}),
        Label::entity("Species"));
  check("unmapped category counts as other",
        ctx({{"Intellectual Product", 0.9}, {"Intellectual Product", 0.8}, {"Enzyme", 0.1}}),
        Label::entity("Gene/Protein"));
  check("all other is rejected",
        ctx({{"Spatial Concept", 0.9}, {"Intellectual Product", 0.8}}), Label::other());
  check("tie goes to the higher best similarity",
        ctx({{"Mammal", 0.6}, {"Organic Chemical", 0.9}, {"Mammal", 0.5},
             {"Organic Chemical", 0.4}}),
        Label::entity("Chemical"));
  check("exact tie goes to the better rank",
        ctx({{"Organic Chemical", 0.8}, {"Mammal", 0.8}, {"Mammal", 0.3},
             {"Organic Chemical", 0.3}}),
        Label::entity("Chemical"));
  check("exact tie, other order", ctx({{"Mammal", 0.8}, {"Organic Chemical", 0.8}}),
        Label::entity("Species"));
  bool threw = false;
  try {
    vote_type(ctx({}), map);
  } catch (const ValidationError&) {
    threw = true;
  }
  c.expect(threw, "empty context must be rejected");

  std::mt19937_64 gen(5);
  const std::vector<std::string> cats = {"Gene or Genome", "Enzyme", "Mammal", "Organic Chemical",
                                         "Spatial Concept", "Intellectual Product"};
  for (int t = 0; t < 100; ++t) {
    std::uniform_int_distribution<std::size_t> n(1, 20), cat(0, cats.size() - 1);
    std::uniform_real_distribution<double> sim(0.05, 1.0), scale(0.01, 100.0);
    std::vector<std::pair<std::string, double>> rows;
    const std::size_t len = n(gen);
    for (std::size_t i = 0; i < len; ++i) rows.push_back({cats[cat(gen)], sim(gen)});
    // Include exact ties sometimes so the rank tie-break is exercised.
    if (t % 3 == 0 && len > 1) rows[1].second = rows[0].second;
    std::sort(rows.begin(), rows.end(), [](auto& a, auto& b) { return a.second > b.second; });
    const auto base = vote_type(ctx(rows), map);
    // Powers of two rescale exactly; the other factor checks the general case.
    for (double s : {scale(gen), 0.25, 8.0}) {
      auto scaled = rows;
      for (auto& r : scaled) r.second *= s;
      c.expect(vote_type(ctx(scaled), map) == base, "context " + std::to_string(t) + " scale " +
                                                        fixed(s));
    }
  }
  return c.outcome();
}

// --- end to end ------------------------------------------------------------

const std::vector<std::string> kStrategies = {"passthrough", "retype-gpt", "kg-vote", "kg-gpt"};

Outcome end_to_end(const Env& env) {
  Checker c;
  TempDir root;
  for (const auto& s : kStrategies) {
    const auto config_path = env.data / "configs" / (s + ".json");
    // No network: the gateway is scripted and the embedder is local.
    const auto config = nlohmann::json::parse(read_text(config_path));
    c.expect(config["gateway"]["provider"].get<std::string>().rfind("mock:", 0) == 0,
             s + ": gateway is not the mock");
    if (config.contains("kb")) {
      c.expect(config["kb"]["provider"].get<std::string>().rfind("fallback", 0) == 0,
               s + ": embedder is not the fallback");
    }

    const auto out = root.path() / s;
    const int code = run_cli(env, {"run", "-c", config_path.string(), "--set",
                                   "output_dir=" + out.string()},
                             root.path() / (s + ".stdout"));
    c.expect(code == 0, s + ": exit code " + std::to_string(code));
    const auto golden = env.data / "golden";
    c.expect(read_text(out / "predictions.jsonl") ==
                 read_text(golden / (s + ".predictions.jsonl")),
             s + ": predictions differ from golden");
    c.expect(read_text(out / "report.tsv") == read_text(golden / (s + ".report.tsv")),
             s + ": report differs from golden");

    // The spurious "in" of "Mutations in the Brca1 gene" is proposed by
    // extraction and must be dropped by every re-typing strategy.
    bool proposed = false;
    std::istringstream cands(read_text(out / "candidates.jsonl"));
    for (std::string line; std::getline(cands, line);) {
      const auto j = nlohmann::json::parse(line);
      proposed = proposed || (j["doc_id"] == "craft-01" && j["sentence_index"] == 0 &&
                              j["start"] == 10 && j["end"] == 12);
    }
    c.expect(proposed, s + ": 'in' was not proposed");
    bool kept = false;
    for (const auto& p : read_predictions(out / "predictions.jsonl")) {
      kept = kept || (p.doc_id == "craft-01" && p.sentence_index == 0 && p.span == Span{10, 12});
    }
    c.expect(kept == (s == "passthrough"), s + ": 'in' handling");
  }
  return c.outcome();
}

Outcome determinism(const Env& env) {
  Checker c;
  TempDir root;
  const auto cache = root.path() / "cache";
  std::vector<nlohmann::json> outputs;
  for (int i = 0; i < 2; ++i) {
    const auto out = root.path() / ("run" + std::to_string(i));
    const int code = run_cli(env, {"run", "-c", (env.data / "configs" / "kg-gpt.json").string(),
                                   "--set", "output_dir=" + out.string(), "--set",
                                   "gateway.cache_dir=" + cache.string()},
                             root.path() / "stdout");
    c.expect(code == 0, "run " + std::to_string(i) + " exit code " + std::to_string(code));
    const auto manifest = nlohmann::json::parse(read_text(out / "manifest.json"));
    c.expect(manifest["outputs"]["predictions.jsonl"] == file_sha256(out / "predictions.jsonl"),
             "manifest digest does not match the file");
    outputs.push_back(manifest["outputs"]);
    if (i == 1) {
      c.expect(manifest["runtime"]["gateway"]["provider_calls"] == 0,
               "second run was not served from the cache");
    }
  }
  c.expect(outputs[0] == outputs[1], "output digests differ");
  return c.outcome();
}

Outcome sweep(const Env& env) {
  Checker c;
  TempDir root;
  const auto stdout_path = root.path() / "sweep.tsv";
  const int code = run_cli(env, {"sweep", "-c", (env.data / "configs" / "kg-vote.json").string(),
                                 "--set", "output_dir=" + (root.path() / "out").string(),
                                 "--sizes", "100,500"},
                           stdout_path);
  c.expect(code == 0, "exit code " + std::to_string(code));
  std::vector<std::vector<std::string>> rows;
  std::istringstream lines(read_text(stdout_path));
  for (std::string line; std::getline(lines, line);) {
    std::vector<std::string> f;
    std::istringstream fields(line);
    for (std::string x; std::getline(fields, x, '\t');) f.push_back(x);
    rows.push_back(f);
  }
  c.expect(rows.size() == 5, "expected a header and 4 rows, got " + std::to_string(rows.size()));
  if (rows.empty()) return c.outcome();

  std::vector<std::string> header = {"Model"};
  for (const std::string t : {"Gene/Protein", "Species", "Chemical", "Micro"}) {
    for (const std::string m : {"Pre", "Rec", "F1"}) header.push_back(t + " " + m);
  }
  c.expect(rows[0] == header, "header schema");
  const std::vector<std::string> labels = {"VOTE-KG (100)", "VOTE-KG (500)", "GPT-KG (100)",
                                           "GPT-KG (500)"};
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    c.expect(r.size() == header.size(), "row " + std::to_string(i) + " width");
    if (i - 1 < labels.size()) c.expect(r[0] == labels[i - 1], "row label " + r[0]);
    for (std::size_t j = 1; j < r.size(); ++j) {
      char* end = nullptr;
      const double v = std::strtod(r[j].c_str(), &end);
      const auto dot = r[j].find('.');
      c.expect(*end == '\0' && v >= 0 && v <= 100 && dot != std::string::npos &&
                   r[j].size() - dot == 3,
               "cell '" + r[j] + "' in row " + std::to_string(i));
    }
  }
  return c.outcome();
}

struct Criterion {
  std::string name;
  std::string title;
  double budget_s;
  std::function<Outcome(const Env&)> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {"f1_arithmetic", "published F1 matches its precision and recall within 0.01 on every row", 1, f1_arithmetic},
      {"marker_round_trip", "marker encode/parse round trip on 1000 cases", 5, marker_round_trip},
      {"retrieval_oracle", "top-k retrieval equals brute force on 200 dictionaries", 60,
       retrieval_oracle},
      {"scoring_oracle", "strict matching equals a one-to-one matching oracle on 500 corpora", 30,
       scoring_oracle},
      {"vote_contract", "vote fixtures and similarity rescaling invariance", 5, vote_contract},
      {"end_to_end", "fixture runs byte-identical to goldens for all four strategies", 30,
       end_to_end},
      {"determinism", "two warm-cache runs give identical output digests", 30, determinism},
      {"sweep", "size sweep emits one row per (size, strategy)", 30, sweep},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kgner acceptance checks"};
  Env env;
  std::vector<std::string> selected;
  app.add_option("--cli", env.cli, "Path to the kgner executable")->required();
  app.add_option("--data", env.data, "Fixture directory")->default_val(KGNER_TEST_DATA);
  app.add_option("--criterion", selected, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  bool all_pass = true;
  std::size_t ran = 0;
  for (const auto& cr : criteria()) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), cr.name) == selected.end()) {
      continue;
    }
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = cr.run(env);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > cr.budget_s) {
      o.pass = false;
      o.detail += "; over the " + fixed(cr.budget_s, 0) + " s budget";
    }
    all_pass = all_pass && o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << cr.name << " (" << fixed(secs, 2) << " s) "
              << cr.title << ": " << o.detail << "\n";
  }
  if (ran == 0) {
    std::cerr << "no criterion matched\n";
    return 2;
  }
  return all_pass ? 0 : 1;
}
