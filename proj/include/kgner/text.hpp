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
#include <string>
#include <string_view>

namespace kgner::text {

// Offsets throughout the project count Unicode code points of UTF-8 text.

// Throws ValidationError on malformed UTF-8.
std::u32string decode_utf8(std::string_view utf8);
std::string encode_utf8(std::u32string_view text);

std::size_t codepoint_count(std::string_view utf8);

// Byte offset of code point `cp_offset`; cp_offset == count gives size().
std::size_t byte_offset(std::string_view utf8, std::size_t cp_offset);

std::string_view trim_right(std::string_view s);
std::string_view trim(std::string_view s);

// ASCII-only lowercasing; other code points pass through unchanged.
std::string ascii_lower(std::string_view s);
std::u32string ascii_lower(std::u32string_view s);

std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

}  // namespace kgner::text
