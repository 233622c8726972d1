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

#include "kgner/llm_gateway.hpp"

#include <cmath>
#include <ctime>
#include <random>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "json.hpp"
#include "kgner/digest.hpp"
#include "kgner/errors.hpp"
#include "kgner/text.hpp"

namespace kgner {

using nlohmann::json;
namespace fs = std::filesystem;

std::string cache_key(const CompletionRequest& request) {
  json messages = json::array();
  for (const auto& m : request.prompt.messages) {
    messages.push_back({{"role", to_string(m.role)},
                        {"content", std::string(text::trim_right(m.content))}});
  }
  const json canonical = {{"model", request.model_id},
                          {"temperature", request.temperature},
                          {"max_tokens", request.max_tokens},
                          {"messages", messages}};
  return sha256_hex(canonical.dump());
}

// --- MockProvider ----------------------------------------------------------

MockProvider::MockProvider(std::vector<Rule> rules) : rules_(std::move(rules)) {
  if (rules_.empty()) throw ConfigError("mock script has no rules");
  bool has_default = false;
  for (const auto& rule : rules_) {
    has_default = has_default || rule.catch_all();
    if (rule.regex) {
      try {
        compiled_.emplace_back(std::regex(*rule.regex));
      } catch (const std::regex_error& e) {
        throw ConfigError(fmt::format("mock rule regex '{}': {}", *rule.regex, e.what()));
      }
    } else {
      compiled_.emplace_back(std::nullopt);
    }
  }
  if (!has_default) throw ConfigError("mock script needs a catch-all default rule");
}

std::shared_ptr<MockProvider> MockProvider::from_json_text(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("mock script: {}", e.what()));
  }
  if (!doc.contains("rules") || !doc["rules"].is_array()) {
    throw ConfigError("mock script: missing array 'rules'");
  }
  std::vector<Rule> rules;
  for (const auto& r : doc["rules"]) {
    Rule rule;
    try {
      if (r.contains("contains")) {
        if (r["contains"].is_string()) {
          rule.contains.push_back(r["contains"].get<std::string>());
        } else {
          rule.contains = r["contains"].get<std::vector<std::string>>();
        }
      }
      if (r.contains("ends_with")) rule.ends_with = r["ends_with"].get<std::string>();
      if (r.contains("regex")) rule.regex = r["regex"].get<std::string>();
      if (r.contains("digest")) rule.digest = r["digest"].get<std::string>();
      rule.response = r.at("response").get<std::string>();
    } catch (const json::exception& e) {
      throw ConfigError(fmt::format("mock script rule {}: {}", rules.size(), e.what()));
    }
    rules.push_back(std::move(rule));
  }
  return std::make_shared<MockProvider>(std::move(rules));
}

std::shared_ptr<MockProvider> MockProvider::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open mock script {}", path.string()));
  if (path.extension() != ".jsonl") {
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
  }
  std::vector<Rule> rules;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (text::trim(line).empty()) continue;
    try {
      const auto rec = json::parse(line);
      Rule rule;
      rule.digest = rec.at("digest").get<std::string>();
      rule.response = rec.at("response_text").get<std::string>();
      rules.push_back(std::move(rule));
    } catch (const json::exception& e) {
      throw ConfigError(fmt::format("{}: line {}: {}", path.string(), line_no, e.what()));
    }
  }
  rules.push_back(Rule{});
  return std::make_shared<MockProvider>(std::move(rules));
}

std::string MockProvider::complete(const CompletionRequest& request, std::string_view digest) {
  ++calls_;
  const auto text = request.prompt.flatten();
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const auto& rule = rules_[i];
    bool ok = true;
    for (const auto& needle : rule.contains) ok = ok && text.find(needle) != std::string::npos;
    if (ok && rule.ends_with) {
      ok = text.size() >= rule.ends_with->size() &&
           text.compare(text.size() - rule.ends_with->size(), std::string::npos,
                        *rule.ends_with) == 0;
    }
    if (ok && rule.digest) ok = *rule.digest == digest;
    if (ok && compiled_[i]) ok = std::regex_search(text, *compiled_[i]);
    if (ok) return rule.response;
  }
  return {};  // unreachable: the constructor requires a catch-all
}

// --- Clock / RateLimiter ---------------------------------------------------

namespace {

class SystemClock final : public Clock {
 public:
  time_point now() override { return std::chrono::steady_clock::now(); }
  void sleep_for(std::chrono::nanoseconds d) override { std::this_thread::sleep_for(d); }
};

}  // namespace

std::shared_ptr<Clock> system_clock() {
  static auto clock = std::make_shared<SystemClock>();
  return clock;
}

RateLimiter::RateLimiter(int per_second, std::shared_ptr<Clock> clock)
    : per_second_(per_second), clock_(std::move(clock)) {
  if (per_second_ <= 0) throw ConfigError("rate limit must be positive");
}

void RateLimiter::acquire() {
  using namespace std::chrono_literals;
  std::unique_lock lock(mu_);
  for (;;) {
    const auto now = clock_->now();
    while (!recent_.empty() && now - recent_.front() >= 1s) recent_.pop_front();
    if (static_cast<int>(recent_.size()) < per_second_) {
      recent_.push_back(now);
      return;
    }
    const auto wait = recent_.front() + 1s - now;
    lock.unlock();
    clock_->sleep_for(wait);
    lock.lock();
  }
}

// --- ResponseCache ---------------------------------------------------------

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  const auto probe = dir_ / ".write-probe";
  std::ofstream out(probe);
  if (ec || !out) {
    throw ConfigError(fmt::format("cache directory {} is not writable", dir_.string()));
  }
  out.close();
  fs::remove(probe, ec);
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
  std::ifstream in(dir_ / key, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    const auto rec = json::parse(in);
    return rec.at("response_text").get<std::string>();
  } catch (const json::exception& e) {
    spdlog::warn("ignoring unreadable cache entry {}: {}", key, e.what());
    return std::nullopt;
  }
}

void ResponseCache::put(const std::string& key, const std::string& response_text) {
  const auto stamp = std::time(nullptr);
  char created[32];
  std::strftime(created, sizeof created, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&stamp));
  const json rec = {{"request_digest", key}, {"response_text", response_text},
                    {"created_at", created}};

  thread_local std::mt19937_64 salt{std::random_device{}()};
  const auto tmp = dir_ / fmt::format("{}.tmp.{:016x}", key, salt());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write cache entry {}", tmp.string()));
    out << rec.dump();
  }
  fs::rename(tmp, dir_ / key);
}

// --- Gateway ---------------------------------------------------------------

Gateway::Gateway(std::shared_ptr<Provider> provider, GatewayOptions options,
                 std::shared_ptr<Clock> clock)
    : provider_(std::move(provider)), options_(std::move(options)), clock_(std::move(clock)) {
  if (!provider_) throw ConfigError("gateway needs a provider");
  if (options_.retry.max_attempts < 1) throw ConfigError("max_attempts must be at least 1");
  if (options_.max_in_flight < 1) throw ConfigError("max_in_flight must be at least 1");
  if (options_.temperature < 0) throw ConfigError("temperature must be non-negative");
  if (options_.cache_dir) cache_.emplace(*options_.cache_dir);
  if (options_.rate_limit > 0) limiter_.emplace(options_.rate_limit, clock_);
  if (options_.transcript) {
    if (options_.transcript->has_parent_path()) {
      fs::create_directories(options_.transcript->parent_path());
    }
    transcript_.open(*options_.transcript, std::ios::binary | std::ios::trunc);
    if (!transcript_) {
      throw ConfigError(
          fmt::format("cannot open transcript file {}", options_.transcript->string()));
    }
  }
}

CompletionRequest Gateway::make_request(const Prompt& prompt) const {
  return {prompt, options_.model_id, options_.temperature, options_.max_tokens};
}

CompletionResponse Gateway::complete(const Prompt& prompt) { return complete(make_request(prompt)); }

CompletionResponse Gateway::complete(const CompletionRequest& request) {
  request.prompt.validate();
  const auto key = cache_key(request);
  {
    std::lock_guard lock(stats_mu_);
    ++stats_.requests;
  }
  if (cache_) {
    if (auto hit = cache_->get(key)) {
      {
        std::lock_guard lock(stats_mu_);
        ++stats_.cache_hits;
      }
      record(key, request, *hit);
      return {std::move(*hit), true, std::nullopt};
    }
  }

  {
    std::unique_lock lock(in_flight_mu_);
    in_flight_cv_.wait(lock, [&] { return in_flight_ < options_.max_in_flight; });
    ++in_flight_;
  }
  struct Release {
    Gateway* g;
    ~Release() {
      {
        std::lock_guard lock(g->in_flight_mu_);
        --g->in_flight_;
      }
      g->in_flight_cv_.notify_one();
    }
  } release{this};

  const auto started = clock_->now();
  auto text = call_with_retry(request, key);
  const auto latency =
      std::chrono::duration_cast<std::chrono::milliseconds>(clock_->now() - started);
  if (cache_) cache_->put(key, text);
  record(key, request, text);
  return {std::move(text), false, latency};
}

std::string Gateway::call_with_retry(const CompletionRequest& request, const std::string& key) {
  const auto& policy = options_.retry;
  std::string last_error;
  for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
    if (limiter_) limiter_->acquire();
    {
      std::lock_guard lock(stats_mu_);
      ++stats_.provider_calls;
      if (attempt > 1) ++stats_.retries;
    }
    try {
      return provider_->complete(request, key);
    } catch (const ProviderError& e) {
      if (!e.retryable()) throw;
      last_error = e.what();
      spdlog::warn("llm request {} attempt {}/{} failed: {}", key.substr(0, 12), attempt,
                   policy.max_attempts, e.what());
    }
    if (attempt < policy.max_attempts) {
      const auto delay = std::chrono::duration<double, std::milli>(
          static_cast<double>(policy.base_delay.count()) * std::pow(policy.factor, attempt - 1));
      clock_->sleep_for(std::chrono::duration_cast<std::chrono::nanoseconds>(delay));
    }
  }
  throw TransportError(fmt::format("llm request failed after {} attempt(s): {}",
                                   policy.max_attempts, last_error));
}

void Gateway::record(const std::string& key, const CompletionRequest& request,
                     const std::string& text) {
  if (!transcript_.is_open()) return;
  std::lock_guard lock(transcript_mu_);
  if (!recorded_.insert(key).second) return;
  const json rec = {
      {"digest", key}, {"prompt_text", request.prompt.flatten()}, {"response_text", text}};
  transcript_ << rec.dump() << '\n';
  transcript_.flush();
}

Gateway::Stats Gateway::stats() const {
  std::lock_guard lock(stats_mu_);
  return stats_;
}

}  // namespace kgner
