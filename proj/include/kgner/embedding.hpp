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

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kgner/llm_gateway.hpp"

namespace kgner {

struct EmbeddingVector {
  std::vector<float> values;

  std::size_t dim() const { return values.size(); }
  std::span<const float> view() const { return values; }
};

// dot(a, b) / (|a| |b|), clamped to [-1, 1]. Throws ValidationError on a
// dimension mismatch or a zero vector.
double cosine_similarity(std::span<const float> a, std::span<const float> b);
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

// Offline stand-in for a name encoder: character trigrams of the
// ASCII-lowercased name, padded with one boundary symbol on each side, hashed
// (FNV-1a) into `dim` count buckets, then L2-normalised.
EmbeddingVector fallback_embed(std::string_view name, std::size_t dim);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  // One vector per name, in order. Vectors need not be normalised.
  virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& names) = 0;
  // Stable identifier recorded in index build metadata.
  virtual std::string id() const = 0;
};

class FallbackEmbedder final : public EmbeddingProvider {
 public:
  explicit FallbackEmbedder(std::size_t dim = 128);
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& names) override;
  std::string id() const override;

 private:
  std::size_t dim_;
};

// JSON-lines {"name": ..., "vector": [...]}; the first line fixes the dim.
class PrecomputedEmbeddings final : public EmbeddingProvider {
 public:
  static std::unique_ptr<PrecomputedEmbeddings> load(const std::filesystem::path& path);

  std::vector<EmbeddingVector> embed(const std::vector<std::string>& names) override;
  std::string id() const override { return id_; }
  std::size_t dim() const { return dim_; }

 private:
  std::string id_;
  std::size_t dim_ = 0;
  std::unordered_map<std::string, EmbeddingVector> vectors_;
};

// Client for an embedding service: POST {base_url}/embed with
// {"names": [...]}, reply {"dim": n, "vectors": [[...], ...]}.
class HttpEmbedder final : public EmbeddingProvider {
 public:
  HttpEmbedder(std::string base_url, RetryPolicy retry = {}, std::size_t batch_size = 64,
               std::shared_ptr<Clock> clock = system_clock(),
               std::chrono::seconds timeout = std::chrono::seconds(120));

  std::vector<EmbeddingVector> embed(const std::vector<std::string>& names) override;
  std::string id() const override { return "http:" + base_url_; }

 private:
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& names);

  std::string base_url_;
  RetryPolicy retry_;
  std::size_t batch_size_;
  std::shared_ptr<Clock> clock_;
  std::chrono::seconds timeout_;
};

// "fallback", "fallback:DIM", "file:PATH" or "http:URL".
std::unique_ptr<EmbeddingProvider> make_embedding_provider(std::string_view spec);

}  // namespace kgner
