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

#include "httplib.h"

#include <cmath>
#include <regex>

#include <spdlog/spdlog.h>

#include <fmt/format.h>

#include "json.hpp"
#include "kgner/errors.hpp"
#include "kgner/embedding.hpp"
#include "kgner/llm_gateway.hpp"

namespace kgner {

using nlohmann::json;

namespace {

std::pair<std::string, std::string> split_url(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) {
    throw ConfigError(fmt::format("base URL '{}' is not an http(s) URL", url));
  }
  std::string path = m[2].matched ? m[2].str() : "";
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {m[1].str(), path};
}

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

HttpChatProvider::HttpChatProvider(std::string base_url, std::string api_key,
                                   std::chrono::seconds timeout)
    : api_key_(std::move(api_key)), timeout_(timeout) {
  std::tie(scheme_host_port_, path_prefix_) = split_url(base_url);
}

std::string HttpChatProvider::complete(const CompletionRequest& request, std::string_view) {
  json messages = json::array();
  for (const auto& m : request.prompt.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  const json body = {{"model", request.model_id},
                     {"temperature", request.temperature},
                     {"max_tokens", request.max_tokens},
                     {"messages", messages}};

  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  auto res = client.Post(path_prefix_ + "/chat/completions", headers, body.dump(),
                         "application/json");
  if (!res) {
    throw ProviderError(
        fmt::format("{}: {}", scheme_host_port_, httplib::to_string(res.error())), true);
  }
  if (res->status != 200) {
    std::string message = res->body;
    try {
      const auto err = json::parse(res->body);
      if (err.contains("error") && err["error"].contains("message")) {
        message = err["error"]["message"].get<std::string>();
      }
    } catch (const json::exception&) {
    }
    throw ProviderError(fmt::format("provider returned HTTP {}: {}", res->status, message),
                        retryable_status(res->status), res->status);
  }
  try {
    const auto reply = json::parse(res->body);
    const auto& content = reply.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string{} : content.get<std::string>();
  } catch (const json::exception& e) {
    throw ProviderError(fmt::format("malformed completion response: {}", e.what()), false,
                        res->status);
  }
}

HttpEmbedder::HttpEmbedder(std::string base_url, RetryPolicy retry, std::size_t batch_size,
                           std::shared_ptr<Clock> clock, std::chrono::seconds timeout)
    : base_url_(std::move(base_url)),
      retry_(retry),
      batch_size_(batch_size),
      clock_(std::move(clock)),
      timeout_(timeout) {
  if (batch_size_ == 0) throw ConfigError("embedding batch size must be positive");
  split_url(base_url_);
}

std::vector<EmbeddingVector> HttpEmbedder::embed(const std::vector<std::string>& names) {
  std::vector<EmbeddingVector> out;
  out.reserve(names.size());
  for (std::size_t i = 0; i < names.size(); i += batch_size_) {
    const auto end = std::min(names.size(), i + batch_size_);
    std::vector<std::string> batch(names.begin() + static_cast<std::ptrdiff_t>(i),
                                   names.begin() + static_cast<std::ptrdiff_t>(end));
    auto part = embed_batch(batch);
    for (auto& v : part) out.push_back(std::move(v));
  }
  return out;
}

std::vector<EmbeddingVector> HttpEmbedder::embed_batch(const std::vector<std::string>& names) {
  const auto [host, prefix] = split_url(base_url_);
  const json body = {{"names", names}};
  std::string last_error;
  for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
    httplib::Client client(host);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    auto res = client.Post(prefix + "/embed", body.dump(), "application/json");
    if (res && res->status == 200) {
      std::vector<EmbeddingVector> out;
      try {
        const auto reply = json::parse(res->body);
        const auto dim = reply.at("dim").get<std::size_t>();
        for (const auto& v : reply.at("vectors")) {
          out.push_back({v.get<std::vector<float>>()});
          if (out.back().dim() != dim) {
            throw ValidationError(fmt::format("embedding service returned dim {} for '{}', declared {}",
                                              out.back().dim(), names[out.size() - 1], dim));
          }
        }
      } catch (const json::exception& e) {
        throw TransportError(fmt::format("malformed embedding response: {}", e.what()));
      }
      if (out.size() != names.size()) {
        throw TransportError(fmt::format("embedding service returned {} vectors for {} names",
                                         out.size(), names.size()));
      }
      return out;
    }
    if (res && !retryable_status(res->status)) {
      throw TransportError(
          fmt::format("embedding service rejected request: HTTP {}: {}", res->status, res->body));
    }
    last_error = res ? fmt::format("HTTP {}", res->status) : httplib::to_string(res.error());
    spdlog::warn("embedding request attempt {}/{} failed: {}", attempt, retry_.max_attempts,
                 last_error);
    if (attempt < retry_.max_attempts) {
      const auto delay = std::chrono::duration<double, std::milli>(
          static_cast<double>(retry_.base_delay.count()) * std::pow(retry_.factor, attempt - 1));
      clock_->sleep_for(std::chrono::duration_cast<std::chrono::nanoseconds>(delay));
    }
  }
  throw TransportError(fmt::format("embedding service {} failed after {} attempt(s): {}",
                                   base_url_, retry_.max_attempts, last_error));
}

}  // namespace kgner
