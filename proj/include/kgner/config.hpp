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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kgner/llm_gateway.hpp"
#include "kgner/markers.hpp"
#include "kgner/type_prediction.hpp"

namespace kgner {

struct GatewayConfig {
  // "http" for an OpenAI-compatible endpoint, or "mock:PATH" for a scripted
  // provider (rule script .json or recorded transcript .jsonl).
  std::string provider = "http";
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-3.5-turbo";
  double temperature = 0.0;
  int max_tokens = 256;
  std::optional<std::filesystem::path> cache_dir;
  int rate_limit = 0;
  int max_attempts = 3;
  int backoff_base_ms = 1000;
  double backoff_factor = 2.0;
  int max_in_flight = 4;
  int timeout_s = 60;
  std::optional<std::filesystem::path> record;
};

struct KbConfig {
  std::filesystem::path dictionary;
  std::size_t size = 500000;
  std::uint64_t seed = 0;
  std::string provider = "fallback";
  std::optional<std::filesystem::path> snapshot;
};

// A declarative run description. Relative paths are resolved against the
// directory of the config file.
struct PipelineConfig {
  std::string name;
  std::filesystem::path corpus;
  std::vector<std::string> entity_types;  // empty: all corpus types
  std::optional<std::filesystem::path> extraction_template;
  std::optional<std::filesystem::path> retype_template;
  std::optional<std::filesystem::path> knowledge_template;
  std::size_t shots = 1;
  Strategy strategy = Strategy::kPassthrough;
  std::size_t k = 5;
  std::optional<KbConfig> kb;
  std::optional<std::filesystem::path> category_map;
  GatewayConfig gateway;
  MarkerConfig markers;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  // SHA-256 of the settings that influence results (output and cache
  // locations excluded), computed over the config as written.
  std::string digest;
  // The same, restricted to what candidate extraction reads.
  std::string extraction_digest;

  // `overrides` are "dotted.key=value" assignments applied before parsing;
  // values are read as JSON when they parse as JSON, else as strings.
  static PipelineConfig load(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});
  static PipelineConfig parse(std::string_view json_text, const std::filesystem::path& base_dir,
                              const std::vector<std::string>& overrides = {});

  // Throws ConfigError when a strategy lacks what it needs.
  void validate_for(Strategy strategy) const;
};

GatewayOptions gateway_options(const GatewayConfig& config);
std::shared_ptr<Provider> make_llm_provider(const GatewayConfig& config);

}  // namespace kgner
