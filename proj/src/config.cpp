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

#include "kgner/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "json.hpp"
#include "kgner/digest.hpp"
#include "kgner/errors.hpp"
#include "kgner/rng.hpp"

namespace kgner {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(fmt::format("override '{}' is not key=value", assignment));
  }
  const auto key = assignment.substr(0, eq);
  const auto raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json* node = &doc;
  std::size_t begin = 0;
  for (;;) {
    const auto dot = key.find('.', begin);
    const auto part = key.substr(begin, dot == std::string::npos ? std::string::npos : dot - begin);
    if (!node->is_object()) *node = json::object();
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    node = &(*node)[part];
    begin = dot + 1;
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key) || obj[key].is_null()) return fallback;
  try {
    return obj[key].get<T>();
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("config field '{}' has the wrong type", key));
  }
}

std::optional<fs::path> optional_path(const json& obj, const char* key, const fs::path& base) {
  if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
  return resolve(base, get_or<std::string>(obj, key, ""));
}

}  // namespace

PipelineConfig PipelineConfig::load(const fs::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open config {}", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  const auto base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  try {
    return parse(buf.str(), base, overrides);
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

PipelineConfig PipelineConfig::parse(std::string_view json_text, const fs::path& base_dir,
                                     const std::vector<std::string>& overrides) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("invalid JSON: {}", e.what()));
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& o : overrides) apply_override(doc, o);

  PipelineConfig c;
  c.name = get_or<std::string>(doc, "name", "pipeline");
  if (!doc.contains("corpus")) throw ConfigError("missing 'corpus'");
  c.corpus = resolve(base_dir, get_or<std::string>(doc, "corpus", ""));
  c.entity_types = get_or<std::vector<std::string>>(doc, "entity_types", {});
  if (doc.contains("templates")) {
    const auto& t = doc["templates"];
    c.extraction_template = optional_path(t, "extraction", base_dir);
    c.retype_template = optional_path(t, "retype", base_dir);
    c.knowledge_template = optional_path(t, "knowledge", base_dir);
  }
  c.shots = get_or<std::size_t>(doc, "shots", 1);
  c.strategy = parse_strategy(get_or<std::string>(doc, "strategy", "passthrough"));
  c.k = get_or<std::size_t>(doc, "k", 5);
  if (c.k == 0) throw ConfigError("k must be at least 1");
  c.seed = get_or<std::uint64_t>(doc, "seed", 0);
  c.workers = std::max<std::size_t>(1, get_or<std::size_t>(doc, "workers", 1));
  c.output_dir = resolve(base_dir, get_or<std::string>(doc, "output_dir", "out"));
  c.category_map = optional_path(doc, "category_map", base_dir);

  if (doc.contains("kb") && !doc["kb"].is_null()) {
    const auto& k = doc["kb"];
    KbConfig kb;
    if (!k.contains("dictionary")) throw ConfigError("kb: missing 'dictionary'");
    kb.dictionary = resolve(base_dir, get_or<std::string>(k, "dictionary", ""));
    kb.size = get_or<std::size_t>(k, "size", 500000);
    kb.seed = k.contains("seed") ? get_or<std::uint64_t>(k, "seed", 0) : derive_seed(c.seed, "kb");
    kb.provider = get_or<std::string>(k, "provider", "fallback");
    if (kb.provider.rfind("file:", 0) == 0) {
      kb.provider = "file:" + resolve(base_dir, kb.provider.substr(5)).string();
    }
    kb.snapshot = optional_path(k, "snapshot", base_dir);
    c.kb = std::move(kb);
  }

  if (doc.contains("markers")) {
    c.markers.open = get_or<std::string>(doc["markers"], "open", c.markers.open);
    c.markers.close = get_or<std::string>(doc["markers"], "close", c.markers.close);
  }
  c.markers.validate();

  if (doc.contains("gateway")) {
    const auto& g = doc["gateway"];
    auto& gw = c.gateway;
    gw.provider = get_or<std::string>(g, "provider", gw.provider);
    if (gw.provider.rfind("mock:", 0) == 0) {
      gw.provider = "mock:" + resolve(base_dir, gw.provider.substr(5)).string();
    }
    gw.base_url = get_or<std::string>(g, "base_url", gw.base_url);
    gw.model = get_or<std::string>(g, "model", gw.model);
    gw.temperature = get_or<double>(g, "temperature", gw.temperature);
    gw.max_tokens = get_or<int>(g, "max_tokens", gw.max_tokens);
    gw.cache_dir = optional_path(g, "cache_dir", base_dir);
    gw.rate_limit = get_or<int>(g, "rate_limit", gw.rate_limit);
    gw.max_attempts = get_or<int>(g, "max_attempts", gw.max_attempts);
    gw.backoff_base_ms = get_or<int>(g, "backoff_base_ms", gw.backoff_base_ms);
    gw.backoff_factor = get_or<double>(g, "backoff_factor", gw.backoff_factor);
    gw.max_in_flight = get_or<int>(g, "max_in_flight", gw.max_in_flight);
    gw.timeout_s = get_or<int>(g, "timeout_s", gw.timeout_s);
    gw.record = optional_path(g, "record", base_dir);
  }

  json material = doc;
  material.erase("output_dir");
  material.erase("workers");
  if (material.contains("gateway") && material["gateway"].is_object()) {
    material["gateway"].erase("cache_dir");
    material["gateway"].erase("record");
  }
  if (material.contains("kb") && material["kb"].is_object()) material["kb"].erase("snapshot");
  c.digest = sha256_hex(material.dump());

  for (const char* key : {"name", "strategy", "k", "kb", "category_map"}) material.erase(key);
  if (material.contains("templates") && material["templates"].is_object()) {
    material["templates"].erase("retype");
    material["templates"].erase("knowledge");
  }
  c.extraction_digest = sha256_hex(material.dump());
  return c;
}

void PipelineConfig::validate_for(Strategy s) const {
  if (s == Strategy::kKgVote || s == Strategy::kKgGpt) {
    if (!kb) throw ConfigError(fmt::format("strategy {} needs a 'kb' section", to_string(s)));
    if (!category_map) {
      throw ConfigError(fmt::format("strategy {} needs a 'category_map'", to_string(s)));
    }
  }
}

GatewayOptions gateway_options(const GatewayConfig& config) {
  GatewayOptions o;
  o.model_id = config.model;
  o.temperature = config.temperature;
  o.max_tokens = config.max_tokens;
  o.retry = {config.max_attempts, std::chrono::milliseconds(config.backoff_base_ms),
             config.backoff_factor};
  o.rate_limit = config.rate_limit;
  o.max_in_flight = config.max_in_flight;
  o.cache_dir = config.cache_dir;
  o.transcript = config.record;
  return o;
}

std::shared_ptr<Provider> make_llm_provider(const GatewayConfig& config) {
  if (config.provider.rfind("mock:", 0) == 0) {
    return MockProvider::load(config.provider.substr(5));
  }
  if (config.provider == "http") {
    const char* key = std::getenv("LLM_API_KEY");
    if (key == nullptr) spdlog::warn("LLM_API_KEY is not set; sending requests without a token");
    return std::make_shared<HttpChatProvider>(config.base_url, key ? key : "",
                                              std::chrono::seconds(config.timeout_s));
  }
  throw ConfigError(
      fmt::format("unknown gateway provider '{}' (expected http or mock:PATH)", config.provider));
}

}  // namespace kgner
