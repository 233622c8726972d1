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

#include "kgner/knowledge_base.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "json.hpp"
#include "kgner/digest.hpp"
#include "kgner/errors.hpp"
#include "kgner/rng.hpp"

namespace kgner {

using nlohmann::json;
namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little,
              "index snapshots store little-endian floats");

std::vector<KbEntry> load_dictionary(const fs::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(fmt::format("cannot open dictionary {}", path.string()));
  std::vector<KbEntry> out;
  std::set<KbEntry> seen;
  std::size_t rejected = 0;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    const bool ok = tab != std::string::npos && tab > 0 && tab + 1 < line.size() &&
                    line.find('\t', tab + 1) == std::string::npos;
    if (!ok) {
      ++rejected;
      if (warnings) {
        warnings->push_back(fmt::format("{}: line {}: expected name<TAB>category; skipped",
                                        path.string(), line_no));
      }
      continue;
    }
    KbEntry entry{line.substr(0, tab), line.substr(tab + 1)};
    if (seen.insert(entry).second) out.push_back(std::move(entry));
  }
  if (out.empty()) {
    throw ValidationError(fmt::format("dictionary {} has no usable entries", path.string()));
  }
  if (rejected > 0) {
    spdlog::warn("{}: skipped {} malformed line(s)", path.string(), rejected);
  }
  return out;
}

std::vector<KbEntry> sample_entries(const std::vector<KbEntry>& entries, std::size_t n,
                                    std::uint64_t seed) {
  if (n == 0) throw ConfigError("knowledge base sample size must be at least 1");
  if (n >= entries.size()) return entries;
  Rng rng(seed);
  auto picked = sample_indices(entries.size(), n, rng);
  std::sort(picked.begin(), picked.end());
  std::vector<KbEntry> out;
  out.reserve(picked.size());
  for (auto i : picked) out.push_back(entries[i]);
  return out;
}

KbIndex attach_embeddings(std::vector<KbEntry> entries, EmbeddingProvider& provider,
                          IndexMetadata metadata) {
  KbIndex index;
  index.metadata_ = std::move(metadata);
  if (index.metadata_.provider.empty()) index.metadata_.provider = provider.id();

  constexpr std::size_t kBatch = 512;
  for (std::size_t i = 0; i < entries.size(); i += kBatch) {
    const auto end = std::min(entries.size(), i + kBatch);
    std::vector<std::string> names;
    for (std::size_t j = i; j < end; ++j) names.push_back(entries[j].name);
    const auto vectors = provider.embed(names);
    if (vectors.size() != names.size()) {
      throw ValidationError(fmt::format("embedding provider returned {} vectors for {} names",
                                        vectors.size(), names.size()));
    }
    for (std::size_t j = 0; j < vectors.size(); ++j) {
      const auto& v = vectors[j];
      if (index.dim_ == 0) index.dim_ = v.dim();
      if (v.dim() != index.dim_ || v.dim() == 0) {
        throw ValidationError(fmt::format("embedding for '{}' has dim {}, expected {}", names[j],
                                          v.dim(), index.dim_));
      }
      double norm = 0.0;
      for (float x : v.values) norm += static_cast<double>(x) * x;
      norm = std::sqrt(norm);
      if (norm == 0.0) throw ValidationError(fmt::format("zero embedding for '{}'", names[j]));
      for (float x : v.values) index.vectors_.push_back(static_cast<float>(x / norm));
    }
  }
  index.entries_ = std::move(entries);
  return index;
}

std::string KbIndex::digest() const {
  Sha256 h;
  h.field(metadata_.source_digest)
      .field(std::to_string(metadata_.seed))
      .field(std::to_string(metadata_.requested_size))
      .field(std::to_string(dim_));
  for (const auto& e : entries_) h.field(e.name).field(e.category);
  h.update(vectors_.data(), vectors_.size() * sizeof(float));
  return h.hex();
}

std::vector<Neighbor> KbIndex::nearest(std::span<const float> query, std::size_t k) const {
  if (entries_.empty()) throw ValidationError("knowledge base index is empty");
  if (k == 0) throw ConfigError("k must be at least 1");
  if (query.size() != dim_) {
    throw ValidationError(
        fmt::format("query dim {} does not match index dim {}", query.size(), dim_));
  }
  double qnorm = 0.0;
  for (float x : query) qnorm += static_cast<double>(x) * x;
  qnorm = std::sqrt(qnorm);
  if (qnorm == 0.0) throw ValidationError("zero query embedding");

  struct Scored {
    double score;
    std::size_t i;
  };
  std::vector<Scored> scored(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const float* row = vectors_.data() + i * dim_;
    double dot = 0.0;
    double rnorm = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) {
      dot += static_cast<double>(row[d]) * query[d];
      rnorm += static_cast<double>(row[d]) * row[d];
    }
    scored[i] = {std::clamp(dot / (qnorm * std::sqrt(rnorm)), -1.0, 1.0), i};
  }
  const auto better = [&](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return entries_[a.i] < entries_[b.i];
  };
  k = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(),
                    better);
  std::vector<Neighbor> out;
  out.reserve(k);
  for (std::size_t j = 0; j < k; ++j) out.push_back({entries_[scored[j].i], scored[j].score});
  return out;
}

namespace {
constexpr char kSnapshotMagic[8] = {'K', 'G', 'N', 'E', 'R', 'I', 'D', 'X'};
constexpr std::uint32_t kSnapshotVersion = 1;
}  // namespace

void KbIndex::save(const fs::path& path, std::string_view build_key) const {
  json meta = {{"build_key", build_key},
               {"source_digest", metadata_.source_digest},
               {"seed", metadata_.seed},
               {"requested_size", metadata_.requested_size},
               {"provider", metadata_.provider},
               {"build_warnings", metadata_.build_warnings},
               {"dim", dim_}};
  json names = json::array(), categories = json::array();
  for (const auto& e : entries_) {
    names.push_back(e.name);
    categories.push_back(e.category);
  }
  meta["names"] = std::move(names);
  meta["categories"] = std::move(categories);
  const auto header = meta.dump();

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const auto tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write index snapshot {}", tmp.string()));
    const std::uint64_t header_len = header.size();
    out.write(kSnapshotMagic, sizeof kSnapshotMagic);
    out.write(reinterpret_cast<const char*>(&kSnapshotVersion), sizeof kSnapshotVersion);
    out.write(reinterpret_cast<const char*>(&header_len), sizeof header_len);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(vectors_.data()),
              static_cast<std::streamsize>(vectors_.size() * sizeof(float)));
  }
  fs::rename(tmp, path);
}

bool KbIndex::load(const fs::path& path, std::string_view build_key, KbIndex* out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t header_len = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&header_len), sizeof header_len);
  if (!in || std::memcmp(magic, kSnapshotMagic, sizeof magic) != 0 ||
      version != kSnapshotVersion || header_len > (1ULL << 34)) {
    return false;
  }
  std::string header(header_len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header_len));
  if (!in) return false;

  KbIndex index;
  try {
    const auto meta = json::parse(header);
    if (meta.at("build_key").get<std::string>() != build_key) return false;
    index.metadata_.source_digest = meta.at("source_digest").get<std::string>();
    index.metadata_.seed = meta.at("seed").get<std::uint64_t>();
    index.metadata_.requested_size = meta.at("requested_size").get<std::size_t>();
    index.metadata_.provider = meta.at("provider").get<std::string>();
    index.metadata_.build_warnings = meta.at("build_warnings").get<std::vector<std::string>>();
    index.dim_ = meta.at("dim").get<std::size_t>();
    const auto& names = meta.at("names");
    const auto& categories = meta.at("categories");
    if (names.size() != categories.size()) return false;
    for (std::size_t i = 0; i < names.size(); ++i) {
      index.entries_.push_back({names[i].get<std::string>(), categories[i].get<std::string>()});
    }
  } catch (const json::exception&) {
    return false;
  }
  index.vectors_.resize(index.entries_.size() * index.dim_);
  in.read(reinterpret_cast<char*>(index.vectors_.data()),
          static_cast<std::streamsize>(index.vectors_.size() * sizeof(float)));
  if (!in) return false;
  *out = std::move(index);
  return true;
}

std::vector<Neighbor> retrieve_top_k(const KbIndex& index, std::string_view query_name,
                                     std::size_t k, EmbeddingProvider& provider) {
  const auto query = provider.embed({std::string(query_name)});
  if (query.size() != 1) throw ValidationError("embedding provider returned no query vector");
  return index.nearest(query.front().view(), k);
}

KbIndex build_index(const KbBuildSpec& spec, EmbeddingProvider& provider,
                    std::vector<std::string>* warnings) {
  IndexMetadata meta{file_sha256(spec.dictionary), spec.seed, spec.size, provider.id(), {}};
  auto entries = load_dictionary(spec.dictionary, &meta.build_warnings);
  if (spec.size > entries.size()) {
    meta.build_warnings.push_back(
        fmt::format("requested knowledge base size {} exceeds dictionary size {}; "
                    "using the full dictionary",
                    spec.size, entries.size()));
  }
  if (warnings) {
    warnings->insert(warnings->end(), meta.build_warnings.begin(), meta.build_warnings.end());
  }
  return attach_embeddings(sample_entries(entries, spec.size, spec.seed), provider,
                           std::move(meta));
}

KbIndex load_or_build_index(const KbBuildSpec& spec, EmbeddingProvider& provider,
                            const fs::path& snapshot, std::vector<std::string>* warnings) {
  const auto key = Sha256()
                       .field(file_sha256(spec.dictionary))
                       .field(std::to_string(spec.size))
                       .field(std::to_string(spec.seed))
                       .field(provider.id())
                       .hex();
  KbIndex index;
  if (KbIndex::load(snapshot, key, &index)) {
    // Replayed so that warm and cold builds report the same warnings.
    if (warnings) {
      const auto& w = index.metadata().build_warnings;
      warnings->insert(warnings->end(), w.begin(), w.end());
    }
    return index;
  }
  index = build_index(spec, provider, warnings);
  index.save(snapshot, key);
  return index;
}

}  // namespace kgner
