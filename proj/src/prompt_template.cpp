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

#include "kgner/prompt.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include <fmt/format.h>

#include "kgner/errors.hpp"
#include "kgner/text.hpp"

namespace kgner {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kSystem:
      return "system";
    case Role::kUser:
      return "user";
    case Role::kAssistant:
      return "assistant";
  }
  return "user";
}

void Prompt::validate() const {
  if (messages.empty()) throw ValidationError("prompt has no messages");
  if (messages.back().role != Role::kUser) {
    throw ValidationError("prompt must end with a user message");
  }
}

std::string Prompt::flatten() const {
  std::string out;
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (i > 0) out += '\n';
    out += to_string(messages[i].role);
    out += ": ";
    out += messages[i].content;
  }
  return out;
}

namespace {

const std::regex& placeholder_pattern() {
  static const std::regex re(R"(\{([A-Za-z_][A-Za-z0-9_]*)\})");
  return re;
}

std::string substitute(const std::string& text, const std::map<std::string, std::string>& values,
                       const std::string& template_name) {
  std::string out;
  std::size_t cursor = 0;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), placeholder_pattern());
       it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    out.append(text, cursor, static_cast<std::size_t>(m.position(0)) - cursor);
    auto value = values.find(m[1].str());
    if (value == values.end()) {
      throw TemplateError(fmt::format("{}: no value bound for {{{}}}", template_name, m[1].str()));
    }
    out += value->second;
    cursor = static_cast<std::size_t>(m.position(0) + m.length(0));
  }
  out.append(text, cursor);
  return out;
}

}  // namespace

PromptTemplate PromptTemplate::parse(std::string_view text, std::vector<std::string> placeholders,
                                     std::string_view name) {
  PromptTemplate t;
  t.name_ = std::string(name);
  t.placeholders_ = std::move(placeholders);

  std::string body(text);
  static constexpr std::string_view kSystemHeader = "[system]\n";
  static constexpr std::string_view kUserHeader = "\n[user]\n";
  if (body.rfind(kSystemHeader, 0) == 0) {
    const auto user_at = body.find(kUserHeader);
    if (user_at == std::string::npos) {
      throw TemplateError(fmt::format("{}: [system] section without a [user] section", name));
    }
    t.system_ = std::string(text::trim_right(body.substr(kSystemHeader.size(),
                                                         user_at - kSystemHeader.size())));
    t.user_ = std::string(text::trim_right(body.substr(user_at + kUserHeader.size())));
  } else {
    t.user_ = std::string(text::trim_right(body));
  }
  if (t.user_.empty()) throw TemplateError(fmt::format("{}: empty user section", name));

  std::map<std::string, int> seen;
  for (const auto* section : {&t.system_, &t.user_}) {
    for (auto it = std::sregex_iterator(section->begin(), section->end(), placeholder_pattern());
         it != std::sregex_iterator(); ++it) {
      ++seen[(*it)[1].str()];
    }
  }
  for (const auto& [key, count] : seen) {
    if (std::find(t.placeholders_.begin(), t.placeholders_.end(), key) == t.placeholders_.end()) {
      throw TemplateError(fmt::format("{}: unknown placeholder {{{}}}", name, key));
    }
  }
  for (const auto& p : t.placeholders_) {
    const int count = seen.count(p) ? seen[p] : 0;
    if (count != 1) {
      throw TemplateError(fmt::format("{}: placeholder {{{}}} must appear exactly once, found {}",
                                      name, p, count));
    }
  }
  return t;
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path,
                                    std::vector<std::string> placeholders) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TemplateError(fmt::format("cannot open template {}", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), std::move(placeholders), path.string());
}

Prompt PromptTemplate::render(const std::map<std::string, std::string>& values) const {
  Prompt prompt;
  if (!system_.empty()) {
    prompt.messages.push_back({Role::kSystem, substitute(system_, values, name_)});
  }
  prompt.messages.push_back({Role::kUser, substitute(user_, values, name_)});
  return prompt;
}

}  // namespace kgner
