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

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "kgner/prompt.hpp"

namespace kgner {

struct CompletionRequest {
  Prompt prompt;
  std::string model_id;
  double temperature = 0.0;
  int max_tokens = 256;
};

struct CompletionResponse {
  std::string text;
  bool cached = false;
  std::optional<std::chrono::milliseconds> provider_latency;
};

// Hex SHA-256 over model, temperature, max_tokens and the messages with
// trailing whitespace trimmed from each content.
std::string cache_key(const CompletionRequest& request);

class Provider {
 public:
  virtual ~Provider() = default;
  // Throws ProviderError.
  virtual std::string complete(const CompletionRequest& request, std::string_view digest) = 0;
};

// Scripted provider: the first rule whose conditions all hold wins. A rule
// with no conditions is a catch-all, and the script must contain one.
class MockProvider final : public Provider {
 public:
  struct Rule {
    std::vector<std::string> contains;
    std::optional<std::string> ends_with;
    std::optional<std::string> regex;
    std::optional<std::string> digest;
    std::string response;

    bool catch_all() const { return contains.empty() && !ends_with && !regex && !digest; }
  };

  explicit MockProvider(std::vector<Rule> rules);

  // Either a JSON rule script {"rules": [...]} or, for *.jsonl, a recorded
  // transcript replayed by request digest (unknown requests get "").
  static std::shared_ptr<MockProvider> load(const std::filesystem::path& path);
  static std::shared_ptr<MockProvider> from_json_text(std::string_view json_text);

  std::string complete(const CompletionRequest& request, std::string_view digest) override;
  std::size_t calls() const { return calls_.load(); }

 private:
  std::vector<Rule> rules_;
  std::vector<std::optional<std::regex>> compiled_;
  std::atomic<std::size_t> calls_{0};
};

// OpenAI-compatible chat completion endpoint: POST {base_url}/chat/completions.
class HttpChatProvider final : public Provider {
 public:
  HttpChatProvider(std::string base_url, std::string api_key,
                   std::chrono::seconds timeout = std::chrono::seconds(60));

  std::string complete(const CompletionRequest& request, std::string_view digest) override;

 private:
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::string api_key_;
  std::chrono::seconds timeout_;
};

class Clock {
 public:
  using time_point = std::chrono::steady_clock::time_point;
  virtual ~Clock() = default;
  virtual time_point now() = 0;
  virtual void sleep_for(std::chrono::nanoseconds d) = 0;
};

std::shared_ptr<Clock> system_clock();

// At most `per_second` acquisitions in any sliding one-second window.
class RateLimiter {
 public:
  RateLimiter(int per_second, std::shared_ptr<Clock> clock);
  void acquire();

 private:
  int per_second_;
  std::shared_ptr<Clock> clock_;
  std::mutex mu_;
  std::deque<Clock::time_point> recent_;
};

// One file per key in `dir`; writes go through a temp file and a rename.
class ResponseCache {
 public:
  // Throws ConfigError if the directory cannot be created or written.
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const std::string& response_text);

 private:
  std::filesystem::path dir_;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;
};

struct GatewayOptions {
  std::string model_id = "gpt-3.5-turbo";
  double temperature = 0.0;
  int max_tokens = 256;
  RetryPolicy retry;
  int rate_limit = 0;  // provider calls per second; 0 disables
  int max_in_flight = 4;
  std::optional<std::filesystem::path> cache_dir;
  std::optional<std::filesystem::path> transcript;  // record mode when set
};

class Gateway {
 public:
  struct Stats {
    std::size_t requests = 0;
    std::size_t cache_hits = 0;
    std::size_t provider_calls = 0;
    std::size_t retries = 0;
  };

  Gateway(std::shared_ptr<Provider> provider, GatewayOptions options,
          std::shared_ptr<Clock> clock = system_clock());

  CompletionResponse complete(const CompletionRequest& request);
  // Uses the model settings from the options.
  CompletionResponse complete(const Prompt& prompt);

  CompletionRequest make_request(const Prompt& prompt) const;
  Stats stats() const;
  const GatewayOptions& options() const { return options_; }

 private:
  std::string call_with_retry(const CompletionRequest& request, const std::string& key);
  void record(const std::string& key, const CompletionRequest& request, const std::string& text);

  std::shared_ptr<Provider> provider_;
  GatewayOptions options_;
  std::shared_ptr<Clock> clock_;
  std::optional<ResponseCache> cache_;
  std::optional<RateLimiter> limiter_;

  std::mutex in_flight_mu_;
  std::condition_variable in_flight_cv_;
  int in_flight_ = 0;

  std::mutex transcript_mu_;
  std::ofstream transcript_;
  std::set<std::string> recorded_;

  mutable std::mutex stats_mu_;
  Stats stats_;
};

}  // namespace kgner
