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

#include "kgner/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "kgner/digest.hpp"
#include "kgner/errors.hpp"
#include "kgner/rng.hpp"
#include "kgner/text.hpp"

namespace kgner {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex err_mu;
  std::size_t err_index = n;
  std::exception_ptr err;

  auto body = [&] {
    for (;;) {
      if (failed.load()) return;
      const auto i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (i < err_index) {
          err_index = i;
          err = std::current_exception();
        }
        failed.store(true);
      }
    }
  };

  if (workers == 1) {
    body();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(body);
    for (auto& t : threads) t.join();
  }
  if (err) std::rethrow_exception(err);
}

namespace {

// Rethrows the active exception with `context` prepended, as the same type.
[[noreturn]] void rethrow_with(const std::string& context) {
  try {
    throw;
  } catch (const ProviderError& e) {
    throw ProviderError(context + e.what(), e.retryable(), e.status());
  } catch (const TransportError& e) {
    throw TransportError(context + e.what());
  } catch (const TemplateError& e) {
    throw TemplateError(context + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(context + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(context + e.what());
  } catch (const Error& e) {
    throw Error(context + e.what());
  } catch (const std::exception& e) {
    throw Error(context + e.what());
  }
}

// Serializes calls into a provider that may not be safe to share.
class LockedEmbedder final : public EmbeddingProvider {
 public:
  explicit LockedEmbedder(std::unique_ptr<EmbeddingProvider> inner) : inner_(std::move(inner)) {}
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& names) override {
    std::lock_guard lock(mu_);
    return inner_->embed(names);
  }
  std::string id() const override { return inner_->id(); }

 private:
  std::unique_ptr<EmbeddingProvider> inner_;
  std::mutex mu_;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(fmt::format("cannot open {}", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, std::string_view text) {
  const auto tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write {}", tmp.string()));
    out << text;
    if (!out) throw Error(fmt::format("write failed for {}", tmp.string()));
  }
  fs::rename(tmp, path);
}

std::string describe(const Sentence& s) { return fmt::format("{}#{}", s.doc_id, s.index); }

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

}  // namespace

void write_candidates(const fs::path& path, const Corpus& corpus,
                      const std::vector<SentenceCandidate>& candidates) {
  std::string text;
  for (const auto& sc : candidates) {
    const auto& s = corpus.sentences.at(sc.sentence);
    const auto& c = sc.candidate;
    ordered_json line;
    line["doc_id"] = s.doc_id;
    line["sentence_index"] = s.index;
    line["start"] = c.span.start;
    line["end"] = c.span.end;
    line["type"] = c.source_type ? json(*c.source_type) : json(nullptr);
    line["strategy"] = "extract";
    line["proposed_by"] = c.proposed_by;
    line["surface"] = c.surface;
    text += line.dump();
    text += '\n';
  }
  write_file(path, text);
}

std::vector<SentenceCandidate> read_candidates(const fs::path& path, const Corpus& corpus) {
  std::istringstream in(read_file(path));
  std::vector<SentenceCandidate> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto where = fmt::format("{}:{}", path.string(), line_no);
    try {
      const auto j = json::parse(line);
      const auto doc_id = j.at("doc_id").get<std::string>();
      const auto index = j.at("sentence_index").get<int>();
      const auto sentence = corpus.find_sentence(doc_id, index);
      if (!sentence) throw ValidationError(fmt::format("unknown sentence {}#{}", doc_id, index));
      const auto& s = corpus.sentences[*sentence];
      SentenceCandidate sc;
      sc.sentence = *sentence;
      sc.candidate.span = {j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>()};
      if (!sc.candidate.span.valid_within(s.length)) {
        throw ValidationError(fmt::format("span {} outside sentence", to_string(sc.candidate.span)));
      }
      if (!j.at("type").is_null()) sc.candidate.source_type = j["type"].get<std::string>();
      sc.candidate.proposed_by = j.at("proposed_by").get<std::vector<std::string>>();
      sc.candidate.surface = slice_text(s, sc.candidate.span);
      out.push_back(std::move(sc));
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("{}: {}", where, e.what()));
    } catch (const json::exception& e) {
      throw ValidationError(fmt::format("{}: {}", where, e.what()));
    }
  }
  return out;
}

Pipeline::Pipeline(PipelineConfig config, RunOptions options)
    : config_(std::move(config)),
      options_(std::move(options)),
      typing_templates_(TypingTemplates::defaults()),
      span_template_(default_span_template()) {
  corpus_ = load_corpus(config_.corpus);
  types_ = config_.entity_types.empty() ? corpus_.entity_types : config_.entity_types;
  for (const auto& t : types_) {
    if (!corpus_.has_type(t)) {
      throw ConfigError(fmt::format("entity type '{}' is not declared by the corpus", t));
    }
  }
  if (config_.extraction_template) span_template_ = load_span_template(*config_.extraction_template);
  typing_templates_ = TypingTemplates::load(config_.retype_template, config_.knowledge_template);
  if (config_.category_map) category_map_ = CategoryMap::load(*config_.category_map, types_);
  if (config_.kb) {
    embedder_ = std::make_unique<LockedEmbedder>(make_embedding_provider(config_.kb->provider));
  }
  auto provider = options_.provider ? options_.provider : make_llm_provider(config_.gateway);
  auto clock = options_.clock ? options_.clock : system_clock();
  gateway_ = std::make_unique<Gateway>(std::move(provider), gateway_options(config_.gateway),
                                       std::move(clock));
}

std::vector<SentenceCandidate> Pipeline::extract(std::vector<std::string>* warnings) {
  const auto& sentences = corpus_.sentences;
  const auto n_types = types_.size();

  // One pool per type, one spare so a sentence never demonstrates itself.
  std::vector<std::vector<FewShotExample>> pools(n_types);
  for (std::size_t t = 0; t < n_types; ++t) {
    if (config_.shots == 0) continue;
    const auto seed = derive_seed(config_.seed, "fewshot:" + types_[t]);
    try {
      pools[t] = sample_fewshot(corpus_, types_[t], config_.shots + 1, seed);
    } catch (const ValidationError&) {
      pools[t] = sample_fewshot(corpus_, types_[t], config_.shots, seed);
    }
  }

  const auto n_tasks = sentences.size() * n_types;
  std::vector<Extraction> slots(n_tasks);
  std::atomic<std::size_t> done{0};
  parallel_for(n_tasks, config_.workers, [&](std::size_t i) {
    const auto& s = sentences[i / n_types];
    const auto& type = types_[i % n_types];
    try {
      std::vector<FewShotExample> examples;
      for (const auto& ex : pools[i % n_types]) {
        if (examples.size() == config_.shots) break;
        if (ex.text != s.text) examples.push_back(ex);
      }
      slots[i] = extract_spans_for_type(s, type, *gateway_, span_template_, examples,
                                        config_.markers);
      done.fetch_add(1);
    } catch (...) {
      rethrow_with(fmt::format("stage extract failed at {} [{}] after {}/{} requests: ",
                               describe(s), type, done.load(), n_tasks));
    }
  });

  std::vector<SentenceCandidate> out;
  for (std::size_t si = 0; si < sentences.size(); ++si) {
    std::vector<std::vector<CandidateSpan>> per_type;
    for (std::size_t t = 0; t < n_types; ++t) {
      auto& slot = slots[si * n_types + t];
      if (warnings) warnings->insert(warnings->end(), slot.warnings.begin(), slot.warnings.end());
      per_type.push_back(std::move(slot.candidates));
    }
    for (auto& c : merge_candidates(per_type)) out.push_back({si, std::move(c)});
  }
  return out;
}

const KbIndex& Pipeline::index(std::vector<std::string>* warnings,
                               std::optional<std::size_t> size) {
  if (!config_.kb) throw ConfigError("no 'kb' section configured");
  const auto& kb = *config_.kb;
  const auto want = size.value_or(kb.size);
  if (index_ && index_size_ == want) return *index_;

  KbBuildSpec spec{kb.dictionary, want, kb.seed};
  std::vector<std::string> local;
  try {
    // The snapshot describes the configured size only.
    if (kb.snapshot && !size) {
      index_ = load_or_build_index(spec, *embedder_, *kb.snapshot, &local);
    } else {
      index_ = build_index(spec, *embedder_, &local);
    }
  } catch (...) {
    rethrow_with(fmt::format("stage kb failed building a {}-entry index: ", want));
  }
  index_size_ = want;
  if (warnings) {
    for (auto& w : local) warnings->push_back("kb: " + w);
  }
  return *index_;
}

std::vector<Prediction> Pipeline::retype(const std::vector<SentenceCandidate>& candidates,
                                         Strategy strategy, std::vector<std::string>* warnings) {
  config_.validate_for(strategy);
  TypingDeps deps;
  deps.allowed = types_;
  deps.gateway = gateway_.get();
  deps.templates = &typing_templates_;
  deps.k = config_.k;
  if (strategy == Strategy::kKgVote || strategy == Strategy::kKgGpt) {
    deps.index = index_ ? &*index_ : &index(warnings);
    deps.embedder = embedder_.get();
    deps.category_map = &*category_map_;
  }

  std::vector<Typing> slots(candidates.size());
  std::atomic<std::size_t> done{0};
  parallel_for(candidates.size(), config_.workers, [&](std::size_t i) {
    const auto& sc = candidates[i];
    const auto& s = corpus_.sentences.at(sc.sentence);
    try {
      slots[i] = predict_type(strategy, s, sc.candidate, deps);
      done.fetch_add(1);
    } catch (...) {
      rethrow_with(fmt::format("stage retype ({}) failed at {} {} after {}/{} candidates: ",
                               to_string(strategy), describe(s), to_string(sc.candidate.span),
                               done.load(), candidates.size()));
    }
  });

  std::vector<Prediction> out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (warnings) {
      warnings->insert(warnings->end(), slots[i].warnings.begin(), slots[i].warnings.end());
    }
    const auto& e = slots[i].entity;
    if (e.predicted.is_other()) continue;
    const auto& s = corpus_.sentences[candidates[i].sentence];
    out.push_back({s.doc_id, s.index, e.candidate.span, e.predicted.name(),
                   std::string(to_string(strategy))});
  }
  return out;
}

namespace {

struct Checkpoint {
  ordered_json doc = ordered_json::object();

  static Checkpoint load(const fs::path& path) {
    Checkpoint c;
    std::ifstream in(path, std::ios::binary);
    if (!in) return c;
    try {
      c.doc = ordered_json::parse(in);
    } catch (const json::exception&) {
      spdlog::warn("ignoring unreadable checkpoint {}", path.string());
      c.doc = ordered_json::object();
    }
    return c;
  }

  // The stage's saved warnings when its entry matches `key` and its output
  // file is unchanged.
  std::optional<std::vector<std::string>> completed(const std::string& stage,
                                                    const std::string& key,
                                                    const fs::path& output) const {
    if (!doc.contains(stage) || !fs::exists(output)) return std::nullopt;
    const auto& e = doc[stage];
    if (e.value("key", "") != key || e.value("output_sha256", "") != file_sha256(output)) {
      return std::nullopt;
    }
    return e.at("warnings").get<std::vector<std::string>>();
  }

  void mark(const std::string& stage, const std::string& key, const fs::path& output,
            const std::vector<std::string>& warnings) {
    doc[stage] = {{"key", key}, {"output_sha256", file_sha256(output)}, {"warnings", warnings}};
  }
};

}  // namespace

RunResult run_pipeline(const PipelineConfig& config, const RunOptions& options) {
  config.validate_for(config.strategy);
  const auto t_start = std::chrono::steady_clock::now();
  ordered_json timings = ordered_json::object();

  std::optional<Pipeline> pipeline;
  try {
    pipeline.emplace(config, options);
  } catch (...) {
    rethrow_with("stage load failed: ");
  }
  timings["load_ms"] = elapsed_ms(t_start);

  const auto& out_dir = config.output_dir;
  fs::create_directories(out_dir);
  const auto candidates_path = out_dir / "candidates.jsonl";
  const auto predictions_path = out_dir / "predictions.jsonl";
  const auto checkpoint_path = out_dir / "checkpoint.json";
  auto checkpoint = options.resume ? Checkpoint::load(checkpoint_path) : Checkpoint{};
  const auto& corpus = pipeline->corpus();
  const auto base_key = sha256_hex(config.extraction_digest + "\n" + corpus.digest);

  RunResult result;
  std::vector<std::string> extract_warnings;
  std::vector<SentenceCandidate> candidates;
  auto t = std::chrono::steady_clock::now();
  if (auto saved = checkpoint.completed("extract", base_key, candidates_path)) {
    spdlog::info("resuming: reusing {}", candidates_path.string());
    extract_warnings = std::move(*saved);
    candidates = read_candidates(candidates_path, corpus);
  } else {
    candidates = pipeline->extract(&extract_warnings);
    write_candidates(candidates_path, corpus, candidates);
    checkpoint.mark("extract", base_key, candidates_path, extract_warnings);
    write_file(checkpoint_path, checkpoint.doc.dump(2) + "\n");
  }
  timings["extract_ms"] = elapsed_ms(t);

  std::vector<std::string> retype_warnings;
  const auto retype_key =
      sha256_hex(config.digest + "\n" + corpus.digest + "\n" +
                 std::string(to_string(config.strategy)) + "\n" + file_sha256(candidates_path));
  t = std::chrono::steady_clock::now();
  if (auto saved = checkpoint.completed("retype", retype_key, predictions_path)) {
    spdlog::info("resuming: reusing {}", predictions_path.string());
    retype_warnings = std::move(*saved);
    result.predictions = read_predictions(predictions_path);
  } else {
    result.predictions = pipeline->retype(candidates, config.strategy, &retype_warnings);
    write_predictions(predictions_path, result.predictions);
    checkpoint.mark("retype", retype_key, predictions_path, retype_warnings);
    write_file(checkpoint_path, checkpoint.doc.dump(2) + "\n");
  }
  timings["retype_ms"] = elapsed_ms(t);

  t = std::chrono::steady_clock::now();
  try {
    result.eval = match_strict(corpus, result.predictions);
  } catch (...) {
    rethrow_with("stage evaluate failed: ");
  }
  const std::vector<ReportRow> rows{{std::string(display_name(config.strategy)), result.eval}};
  write_file(out_dir / "report.tsv", render_report(rows, ReportFormat::kTsv));
  write_file(out_dir / "report.md", render_report(rows, ReportFormat::kMarkdown));
  timings["evaluate_ms"] = elapsed_ms(t);

  result.warnings = extract_warnings;
  result.warnings.insert(result.warnings.end(), retype_warnings.begin(), retype_warnings.end());
  std::string warning_text;
  for (const auto& w : result.warnings) warning_text += w + "\n";
  write_file(out_dir / "warnings.txt", warning_text);
  for (const auto& w : result.warnings) spdlog::warn("{}", w);

  std::size_t kb_warnings = 0;
  for (const auto& w : retype_warnings) kb_warnings += w.rfind("kb: ", 0) == 0;

  auto& m = result.manifest;
  m["name"] = config.name;
  m["strategy"] = to_string(config.strategy);
  m["config_digest"] = config.digest;
  m["corpus_digest"] = corpus.digest;
  // On a resumed retype stage the index was never needed, so rebuild it here
  // only if it is part of the strategy.
  if (config.strategy == Strategy::kKgVote || config.strategy == Strategy::kKgGpt) {
    m["index_digest"] = pipeline->index(nullptr).digest();
  } else {
    m["index_digest"] = nullptr;
  }
  m["counts"] = {{"sentences", corpus.sentences.size()},
                 {"candidates", candidates.size()},
                 {"predictions", result.predictions.size()}};
  m["warnings"] = {{"extract", extract_warnings.size()},
                   {"kb", kb_warnings},
                   {"retype", retype_warnings.size() - kb_warnings}};
  m["outputs"] = {{"candidates.jsonl", file_sha256(candidates_path)},
                  {"predictions.jsonl", file_sha256(predictions_path)},
                  {"report.tsv", file_sha256(out_dir / "report.tsv")}};
  const auto stats = pipeline->gateway().stats();
  timings["total_ms"] = elapsed_ms(t_start);
  m["runtime"] = {{"timings", timings},
                  {"gateway",
                   {{"requests", stats.requests},
                    {"cache_hits", stats.cache_hits},
                    {"provider_calls", stats.provider_calls},
                    {"retries", stats.retries}}}};
  write_file(out_dir / "manifest.json", m.dump(2) + "\n");
  return result;
}

std::string size_label(std::size_t size) {
  if (size >= 1000 && size % 1000 == 0) return fmt::format("{}k", size / 1000);
  return std::to_string(size);
}

std::vector<ReportRow> ablation_sweep(const PipelineConfig& config,
                                      const std::vector<std::size_t>& sizes,
                                      const RunOptions& options,
                                      std::vector<std::string>* warnings) {
  config.validate_for(Strategy::kKgVote);
  if (sizes.empty()) throw ConfigError("sweep needs at least one kb size");
  std::optional<Pipeline> pipeline;
  try {
    pipeline.emplace(config, options);
  } catch (...) {
    rethrow_with("stage load failed: ");
  }
  const auto candidates = pipeline->extract(warnings);

  std::vector<ReportRow> vote_rows;
  std::vector<ReportRow> gpt_rows;
  for (const auto size : sizes) {
    if (size == 0) throw ConfigError("kb sizes must be positive");
    pipeline->index(warnings, size);
    const auto label = size_label(size);
    const auto vote = pipeline->retype(candidates, Strategy::kKgVote, warnings);
    vote_rows.push_back({fmt::format("VOTE-KG ({})", label), match_strict(pipeline->corpus(), vote)});
    const auto gpt = pipeline->retype(candidates, Strategy::kKgGpt, warnings);
    gpt_rows.push_back({fmt::format("GPT-KG ({})", label), match_strict(pipeline->corpus(), gpt)});
  }
  vote_rows.insert(vote_rows.end(), std::make_move_iterator(gpt_rows.begin()),
                   std::make_move_iterator(gpt_rows.end()));
  return vote_rows;
}

}  // namespace kgner
