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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgner/embedding.hpp"

namespace kgner {

// A (name, category) pair; the category is in the knowledge base's own label
// space, not the corpus entity types.
struct KbEntry {
  std::string name;
  std::string category;

  auto operator<=>(const KbEntry&) const = default;
};

struct Neighbor {
  KbEntry entry;
  double similarity = 0.0;
};

struct IndexMetadata {
  std::string source_digest;       // SHA-256 of the dictionary file
  std::uint64_t seed = 0;          // sampling seed
  std::size_t requested_size = 0;  // sample size asked for
  std::string provider;            // embedding provider id
  std::vector<std::string> build_warnings;
};

// Entries with unit-norm vectors of one dimension, searched exhaustively.
class KbIndex {
 public:
  const std::vector<KbEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t dim() const { return dim_; }
  std::span<const float> vector(std::size_t i) const {
    return std::span<const float>(vectors_).subspan(i * dim_, dim_);
  }
  const IndexMetadata& metadata() const { return metadata_; }

  // Covers metadata other than the provider id, entries and vector bytes, so
  // two providers producing the same vectors yield the same digest.
  std::string digest() const;

  // Top min(k, size()) entries by cosine similarity to `query`, ordered by
  // similarity descending, then name, then category.
  std::vector<Neighbor> nearest(std::span<const float> query, std::size_t k) const;

  void save(const std::filesystem::path& path, std::string_view build_key) const;
  // Returns false (and leaves *out untouched) if the snapshot is missing,
  // unreadable or was built under a different key.
  static bool load(const std::filesystem::path& path, std::string_view build_key, KbIndex* out);

 private:
  friend KbIndex attach_embeddings(std::vector<KbEntry> entries, EmbeddingProvider& provider,
                                   IndexMetadata metadata);

  std::vector<KbEntry> entries_;
  std::size_t dim_ = 0;
  std::vector<float> vectors_;  // row-major, size() x dim()
  IndexMetadata metadata_;
};

// UTF-8 TSV, name<TAB>category, no header. Rows that do not have exactly two
// non-empty columns are skipped, with a warning naming the line. Duplicate
// pairs keep their first occurrence. Throws ValidationError if nothing loads.
std::vector<KbEntry> load_dictionary(const std::filesystem::path& path,
                                     std::vector<std::string>* warnings = nullptr);

// min(n, |entries|) entries, uniform without replacement, in dictionary order.
std::vector<KbEntry> sample_entries(const std::vector<KbEntry>& entries, std::size_t n,
                                    std::uint64_t seed);

KbIndex attach_embeddings(std::vector<KbEntry> entries, EmbeddingProvider& provider,
                          IndexMetadata metadata = {});

std::vector<Neighbor> retrieve_top_k(const KbIndex& index, std::string_view query_name,
                                     std::size_t k, EmbeddingProvider& provider);

struct KbBuildSpec {
  std::filesystem::path dictionary;
  std::size_t size = 500000;
  std::uint64_t seed = 0;
};

KbIndex build_index(const KbBuildSpec& spec, EmbeddingProvider& provider,
                    std::vector<std::string>* warnings = nullptr);

// Reuses the snapshot at `snapshot` when it was built from the same
// dictionary bytes, size, seed and provider; otherwise rebuilds and rewrites it.
KbIndex load_or_build_index(const KbBuildSpec& spec, EmbeddingProvider& provider,
                            const std::filesystem::path& snapshot,
                            std::vector<std::string>* warnings = nullptr);

}  // namespace kgner
