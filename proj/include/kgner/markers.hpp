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

#include <string>
#include <string_view>
#include <vector>

#include "kgner/span.hpp"

namespace kgner {

struct MarkerConfig {
  std::string open = "@@";
  std::string close = "##";

  // Throws ConfigError if either is empty or one contains the other.
  void validate() const;
};

// Wraps every span of `text` in markers. Spans may arrive in any order but
// must not overlap. Refuses text that already contains a marker string, and
// any layout whose markers would not read back unambiguously.
std::string encode_marked(std::string_view text, std::vector<Span> spans,
                          const MarkerConfig& markers = {});

// Removes every marker occurrence, scanning left to right.
std::string strip_markers(std::string_view marked, const MarkerConfig& markers = {});

struct MarkedParse {
  std::vector<Span> spans;  // sorted, unique, within the original sentence
  std::vector<std::string> warnings;
  bool positional = false;  // stripped output reproduced the sentence exactly
};

// Recovers spans of `original` from untrusted model output. When the output
// with markers removed equals the sentence, offsets are positional; otherwise
// each marked fragment is located at its leftmost occurrence in the sentence
// that no earlier fragment has claimed. Nested, unbalanced, empty and
// unlocatable fragments are dropped with a warning. Never throws on content.
MarkedParse parse_marked(std::string_view llm_output, std::string_view original,
                         const MarkerConfig& markers = {});

}  // namespace kgner
