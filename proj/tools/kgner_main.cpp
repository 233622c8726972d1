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

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "kgner/config.hpp"
#include "kgner/corpus.hpp"
#include "kgner/errors.hpp"
#include "kgner/evaluation.hpp"
#include "kgner/knowledge_base.hpp"
#include "kgner/orchestrator.hpp"
#include "kgner/type_prediction.hpp"

namespace fs = std::filesystem;
using namespace kgner;

namespace {

ReportFormat parse_format(const std::string& name) {
  if (name == "tsv") return ReportFormat::kTsv;
  if (name == "md" || name == "markdown") return ReportFormat::kMarkdown;
  throw ConfigError(fmt::format("unknown report format '{}' (tsv or md)", name));
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) spdlog::warn("{}", w);
}

// Report label for a predictions file: the strategy's display name when the
// file holds a single known strategy.
std::string default_label(const std::vector<Prediction>& predictions) {
  if (predictions.empty()) return "predictions";
  const auto& first = predictions.front().strategy;
  for (const auto& p : predictions) {
    if (p.strategy != first) return "predictions";
  }
  try {
    return std::string(display_name(parse_strategy(first)));
  } catch (const ConfigError&) {
    return first;
  }
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Two-stage biomedical NER with LLM span extraction and knowledge-based typing"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  std::string config_path;
  std::vector<std::string> overrides;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config,-c", config_path, "Pipeline config (JSON)")->required();
    sub->add_option("--set", overrides, "Override a config key: dotted.key=value");
  };
  auto load_config = [&] { return PipelineConfig::load(config_path, overrides); };

  auto* ingest = app.add_subcommand("ingest", "Validate a corpus and print a summary");
  std::string corpus_path;
  ingest->add_option("corpus", corpus_path, "Standoff JSON corpus")->required();

  auto* build_kb = app.add_subcommand("build-kb", "Sample and embed a knowledge-base index");
  std::string dict_path;
  std::string provider_spec = "fallback";
  std::string kb_out;
  std::size_t kb_size = 500000;
  std::uint64_t kb_seed = 0;
  build_kb->add_option("--dict", dict_path, "Dictionary TSV (name<TAB>category)")->required();
  build_kb->add_option("--size", kb_size, "Sample size")->capture_default_str();
  build_kb->add_option("--seed", kb_seed, "Sampling seed")->capture_default_str();
  build_kb->add_option("--provider", provider_spec, "fallback[:DIM] | file:PATH | http:URL")
      ->capture_default_str();
  build_kb->add_option("--out", kb_out, "Snapshot path")->required();

  auto* lookup = app.add_subcommand("lookup", "Print the nearest knowledge-base entries");
  std::vector<std::string> queries;
  std::size_t lookup_k = 5;
  lookup->add_option("--dict", dict_path, "Dictionary TSV (name<TAB>category)")->required();
  lookup->add_option("--size", kb_size, "Sample size")->capture_default_str();
  lookup->add_option("--seed", kb_seed, "Sampling seed")->capture_default_str();
  lookup->add_option("--provider", provider_spec, "fallback[:DIM] | file:PATH | http:URL")
      ->capture_default_str();
  lookup->add_option("-k", lookup_k, "Neighbors per query")->capture_default_str();
  lookup->add_option("names", queries, "Query names")->required();

  auto* extract = app.add_subcommand("extract", "Stage 1: write candidates.jsonl");
  add_config(extract);

  auto* retype = app.add_subcommand("retype", "Stage 2: candidates.jsonl -> predictions.jsonl");
  add_config(retype);
  std::optional<std::string> strategy_name;
  retype->add_option("--strategy", strategy_name, "passthrough | retype-gpt | kg-vote | kg-gpt");

  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against a gold corpus");
  std::string gold_path;
  std::vector<std::string> pred_paths;
  std::vector<std::string> labels;
  std::string format_name = "tsv";
  evaluate->add_option("--gold", gold_path, "Gold corpus")->required();
  evaluate->add_option("--pred", pred_paths, "Predictions JSONL (repeatable)")->required();
  evaluate->add_option("--label", labels, "Row label per --pred");
  evaluate->add_option("--format", format_name, "tsv | md")->capture_default_str();

  auto* run = app.add_subcommand("run", "Run extraction, typing and evaluation");
  add_config(run);
  bool resume = false;
  run->add_flag("--resume", resume, "Reuse outputs of completed stages");
  run->add_option("--format", format_name, "tsv | md")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Knowledge-base size ablation");
  add_config(sweep);
  std::vector<std::size_t> sizes;
  sweep->add_option("--sizes", sizes, "Comma-separated sample sizes")
      ->required()
      ->delimiter(',');
  sweep->add_option("--format", format_name, "tsv | md")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const auto code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  spdlog::set_default_logger(spdlog::stderr_color_mt("kgner"));
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  if (*ingest) {
    const auto corpus = load_corpus(corpus_path);
    std::map<std::string, std::size_t> per_type;
    for (const auto& m : corpus.mentions) ++per_type[m.type];
    fmt::print("sentences\t{}\nmentions\t{}\n", corpus.sentences.size(), corpus.mentions.size());
    for (const auto& t : corpus.entity_types) fmt::print("{}\t{}\n", t, per_type[t]);
    fmt::print("digest\t{}\n", corpus.digest);
    return 0;
  }

  if (*build_kb) {
    auto provider = make_embedding_provider(provider_spec);
    std::vector<std::string> warnings;
    const auto index = load_or_build_index({dict_path, kb_size, kb_seed}, *provider, kb_out,
                                           &warnings);
    print_warnings(warnings);
    fmt::print("entries\t{}\ndim\t{}\nprovider\t{}\ndigest\t{}\n", index.size(), index.dim(),
               provider->id(), index.digest());
    return 0;
  }

  if (*lookup) {
    auto provider = make_embedding_provider(provider_spec);
    std::vector<std::string> warnings;
    const auto index = build_index({dict_path, kb_size, kb_seed}, *provider, &warnings);
    print_warnings(warnings);
    for (const auto& q : queries) {
      for (const auto& n : retrieve_top_k(index, q, lookup_k, *provider)) {
        fmt::print("{}\t{}\t{}\t{:.6f}\n", q, n.entry.name, n.entry.category, n.similarity);
      }
    }
    return 0;
  }

  if (*extract) {
    const auto config = load_config();
    Pipeline pipeline(config);
    std::vector<std::string> warnings;
    const auto candidates = pipeline.extract(&warnings);
    print_warnings(warnings);
    fs::create_directories(config.output_dir);
    const auto path = config.output_dir / "candidates.jsonl";
    write_candidates(path, pipeline.corpus(), candidates);
    fmt::print("{}\t{} candidates\n", path.string(), candidates.size());
    return 0;
  }

  if (*retype) {
    const auto config = load_config();
    const auto strategy = strategy_name ? parse_strategy(*strategy_name) : config.strategy;
    config.validate_for(strategy);
    Pipeline pipeline(config);
    const auto candidates =
        read_candidates(config.output_dir / "candidates.jsonl", pipeline.corpus());
    std::vector<std::string> warnings;
    const auto predictions = pipeline.retype(candidates, strategy, &warnings);
    print_warnings(warnings);
    const auto path = config.output_dir / "predictions.jsonl";
    write_predictions(path, predictions);
    fmt::print("{}\t{} predictions\n", path.string(), predictions.size());
    return 0;
  }

  const auto format = parse_format(format_name);

  if (*evaluate) {
    if (!labels.empty() && labels.size() != pred_paths.size()) {
      throw ConfigError("give one --label per --pred, or none");
    }
    const auto corpus = load_corpus(gold_path);
    std::vector<ReportRow> rows;
    for (std::size_t i = 0; i < pred_paths.size(); ++i) {
      const auto predictions = read_predictions(pred_paths[i]);
      rows.push_back({labels.empty() ? default_label(predictions) : labels[i],
                      match_strict(corpus, predictions)});
    }
    fmt::print("{}", render_report(rows, format));
    return 0;
  }

  if (*run) {
    const auto config = load_config();
    RunOptions options;
    options.resume = resume;
    const auto result = run_pipeline(config, options);
    const std::vector<ReportRow> rows{{std::string(display_name(config.strategy)), result.eval}};
    fmt::print("{}", render_report(rows, format));
    return 0;
  }

  if (*sweep) {
    const auto config = load_config();
    std::vector<std::string> warnings;
    const auto rows = ablation_sweep(config, sizes, {}, &warnings);
    print_warnings(warnings);
    fmt::print("{}", render_report(rows, format));
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const TransportError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
