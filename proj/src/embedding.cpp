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

#include "kgner/embedding.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "json.hpp"
#include "kgner/digest.hpp"
#include "kgner/errors.hpp"
#include "kgner/text.hpp"

namespace kgner {

using nlohmann::json;

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw ValidationError(fmt::format("dimension mismatch: {} vs {}", a.size(), b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw ValidationError("cosine similarity of a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  return cosine_similarity(a.view(), b.view());
}

EmbeddingVector fallback_embed(std::string_view name, std::size_t dim) {
  if (dim < 8) throw ConfigError(fmt::format("fallback embedding dim must be >= 8, got {}", dim));
  if (name.empty()) throw ValidationError("cannot embed an empty name");

  std::u32string padded = U"\x02";
  padded += text::ascii_lower(text::decode_utf8(name));
  padded += U'\x03';

  std::vector<double> counts(dim, 0.0);
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    const auto trigram = text::encode_utf8(std::u32string_view(padded).substr(i, 3));
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : trigram) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    counts[h % dim] += 1.0;
  }
  double norm = 0.0;
  for (double c : counts) norm += c * c;
  norm = std::sqrt(norm);

  EmbeddingVector v;
  v.values.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) v.values[i] = static_cast<float>(counts[i] / norm);
  return v;
}

FallbackEmbedder::FallbackEmbedder(std::size_t dim) : dim_(dim) {
  if (dim_ < 8) throw ConfigError(fmt::format("fallback embedding dim must be >= 8, got {}", dim));
}

std::vector<EmbeddingVector> FallbackEmbedder::embed(const std::vector<std::string>& names) {
  std::vector<EmbeddingVector> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(fallback_embed(n, dim_));
  return out;
}

std::string FallbackEmbedder::id() const { return fmt::format("fallback:{}", dim_); }

std::unique_ptr<PrecomputedEmbeddings> PrecomputedEmbeddings::load(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open embedding file {}", path.string()));
  auto out = std::unique_ptr<PrecomputedEmbeddings>(new PrecomputedEmbeddings());
  out->id_ = "file:" + file_sha256(path);
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (text::trim(line).empty()) continue;
    EmbeddingVector v;
    std::string name;
    try {
      const auto rec = json::parse(line);
      name = rec.at("name").get<std::string>();
      v.values = rec.at("vector").get<std::vector<float>>();
    } catch (const json::exception& e) {
      throw ValidationError(fmt::format("{}: line {}: {}", path.string(), line_no, e.what()));
    }
    if (out->dim_ == 0) out->dim_ = v.dim();
    if (v.dim() != out->dim_ || v.dim() == 0) {
      throw ValidationError(fmt::format("{}: line {}: vector for '{}' has dim {}, expected {}",
                                        path.string(), line_no, name, v.dim(), out->dim_));
    }
    out->vectors_.insert_or_assign(std::move(name), std::move(v));
  }
  if (out->vectors_.empty()) {
    throw ValidationError(fmt::format("{}: no embeddings", path.string()));
  }
  return out;
}

std::vector<EmbeddingVector> PrecomputedEmbeddings::embed(const std::vector<std::string>& names) {
  std::vector<EmbeddingVector> out;
  out.reserve(names.size());
  for (const auto& n : names) {
    auto it = vectors_.find(n);
    if (it == vectors_.end()) {
      throw ValidationError(fmt::format("no precomputed embedding for '{}'", n));
    }
    out.push_back(it->second);
  }
  return out;
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(std::string_view spec) {
  if (spec == "fallback") return std::make_unique<FallbackEmbedder>();
  if (spec.rfind("fallback:", 0) == 0) {
    const auto dim_text = std::string(spec.substr(9));
    std::size_t dim = 0;
    try {
      dim = std::stoul(dim_text);
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("bad fallback dim '{}'", dim_text));
    }
    return std::make_unique<FallbackEmbedder>(dim);
  }
  if (spec.rfind("file:", 0) == 0) return PrecomputedEmbeddings::load(std::string(spec.substr(5)));
  if (spec.rfind("http:", 0) == 0) return std::make_unique<HttpEmbedder>(std::string(spec.substr(5)));
  throw ConfigError(fmt::format(
      "unknown embedding provider '{}' (expected fallback, file:PATH or http:URL)", spec));
}

}  // namespace kgner
