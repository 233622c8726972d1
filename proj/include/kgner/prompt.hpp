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

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace kgner {

enum class Role { kSystem, kUser, kAssistant };

std::string_view to_string(Role role);

struct Message {
  Role role = Role::kUser;
  std::string content;

  bool operator==(const Message&) const = default;
};

struct Prompt {
  std::vector<Message> messages;

  // Non-empty and ending with a user message; throws ValidationError.
  void validate() const;

  // "role: content" per message, newline separated. This is the text mock
  // rules match against and the prompt_text recorded in transcripts.
  std::string flatten() const;

  bool operator==(const Prompt&) const = default;
};

// Plain-text prompt template with {name} placeholders. A template may start
// with a "[system]" line, in which case everything up to a "[user]" line is
// the system message; otherwise the whole text is the user message. Every
// declared placeholder must occur exactly once and no undeclared {name} may
// occur. Substitution is single pass, so values are never re-expanded.
class PromptTemplate {
 public:
  static PromptTemplate parse(std::string_view text, std::vector<std::string> placeholders,
                              std::string_view name = "<template>");
  static PromptTemplate load(const std::filesystem::path& path,
                             std::vector<std::string> placeholders);

  Prompt render(const std::map<std::string, std::string>& values) const;

  const std::string& system_text() const { return system_; }
  const std::string& user_text() const { return user_; }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  std::string system_;
  std::string user_;
  std::vector<std::string> placeholders_;
};

}  // namespace kgner
