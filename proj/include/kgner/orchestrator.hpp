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
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kgner/config.hpp"
#include "kgner/corpus.hpp"
#include "kgner/evaluation.hpp"
#include "kgner/knowledge_base.hpp"
#include "kgner/llm_gateway.hpp"
#include "kgner/span_extraction.hpp"
#include "kgner/type_prediction.hpp"

namespace kgner {

// Stage-1 output for one sentence, persisted as candidates.jsonl.
struct SentenceCandidate {
  std::size_t sentence = 0;  // index into Corpus::sentences
  CandidateSpan candidate;
};

// Runs fn(i) for i in [0, n) on up to `workers` threads. Every index runs at
// most once; after a failure no new indices start and the exception of the
// lowest failing index is rethrown.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

void write_candidates(const std::filesystem::path& path, const Corpus& corpus,
                      const std::vector<SentenceCandidate>& candidates);
std::vector<SentenceCandidate> read_candidates(const std::filesystem::path& path,
                                               const Corpus& corpus);

// Hooks for tests and the CLI. A provider set here replaces the one named in
// the gateway config.
struct RunOptions {
  bool resume = false;
  std::shared_ptr<Provider> provider;
  std::shared_ptr<Clock> clock;
};

// Loaded inputs shared by the stages of one run.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config, RunOptions options = {});

  const PipelineConfig& config() const { return config_; }
  const Corpus& corpus() const { return corpus_; }
  const std::vector<std::string>& entity_types() const { return types_; }
  Gateway& gateway() { return *gateway_; }

  // Stage 1: per (sentence, type) extraction, merged per sentence.
  std::vector<SentenceCandidate> extract(std::vector<std::string>* warnings);

  // Builds (or reuses) the knowledge-base index the config describes; `size`
  // overrides the configured sample size.
  const KbIndex& index(std::vector<std::string>* warnings,
                       std::optional<std::size_t> size = std::nullopt);

  // Stage 2 plus the OTHER filter.
  std::vector<Prediction> retype(const std::vector<SentenceCandidate>& candidates,
                                 Strategy strategy, std::vector<std::string>* warnings);

 private:
  PipelineConfig config_;
  RunOptions options_;
  Corpus corpus_;
  std::vector<std::string> types_;
  std::unique_ptr<Gateway> gateway_;
  std::unique_ptr<EmbeddingProvider> embedder_;
  std::optional<CategoryMap> category_map_;
  std::optional<KbIndex> index_;
  std::optional<std::size_t> index_size_;
  TypingTemplates typing_templates_;
  PromptTemplate span_template_;
};

struct RunResult {
  std::vector<Prediction> predictions;
  EvalResult eval;
  nlohmann::ordered_json manifest;
  std::vector<std::string> warnings;
};

// Writes candidates.jsonl, predictions.jsonl, report.tsv, report.md,
// warnings.txt and manifest.json into the output directory. Errors are
// rethrown with the failing stage and progress prepended, keeping their type.
RunResult run_pipeline(const PipelineConfig& config, const RunOptions& options = {});

// One row per (size, strategy) for kg-vote and kg-gpt over a single shared
// extraction. Sizes beyond the dictionary are clamped with a warning.
std::vector<ReportRow> ablation_sweep(const PipelineConfig& config,
                                      const std::vector<std::size_t>& sizes,
                                      const RunOptions& options = {},
                                      std::vector<std::string>* warnings = nullptr);

// "50k" for multiples of 1000, the plain number otherwise.
std::string size_label(std::size_t size);

}  // namespace kgner
