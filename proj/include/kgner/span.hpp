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

#include <compare>
#include <cstddef>
#include <string>

namespace kgner {

// Half-open range [start, end) of code points within a sentence.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  bool valid_within(std::size_t text_length) const { return start < end && end <= text_length; }
  bool overlaps(const Span& other) const { return start < other.end && other.start < end; }

  auto operator<=>(const Span&) const = default;
};

std::string to_string(const Span& span);

}  // namespace kgner
