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

#include "kgner/markers.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "kgner/errors.hpp"
#include "kgner/text.hpp"

namespace kgner {

std::string to_string(const Span& span) { return fmt::format("({},{})", span.start, span.end); }

void MarkerConfig::validate() const {
  if (open.empty() || close.empty()) throw ConfigError("marker strings must be non-empty");
  if (open == close) throw ConfigError("open and close markers must differ");
  if (open.find(close) != std::string::npos || close.find(open) != std::string::npos) {
    throw ConfigError(
        fmt::format("markers '{}' and '{}' must not contain one another", open, close));
  }
}

namespace {

bool starts_with_at(std::u32string_view s, std::size_t i, std::u32string_view prefix) {
  return s.substr(i, prefix.size()) == prefix;
}

struct Scan {
  std::u32string stripped;
  std::vector<Span> fragments;  // in stripped coordinates, output order
  std::vector<std::string> warnings;
};

Scan scan_markers(std::u32string_view output, std::u32string_view open,
                  std::u32string_view close) {
  Scan scan;
  std::size_t depth = 0;
  std::size_t region_start = 0;
  std::size_t region_output_offset = 0;
  bool region_nested = false;

  for (std::size_t i = 0; i < output.size();) {
    if (starts_with_at(output, i, open)) {
      if (depth == 0) {
        region_start = scan.stripped.size();
        region_output_offset = i;
        region_nested = false;
      } else {
        region_nested = true;
      }
      ++depth;
      i += open.size();
    } else if (starts_with_at(output, i, close)) {
      if (depth == 0) {
        scan.warnings.push_back(fmt::format("unmatched close marker at output offset {}", i));
      } else if (--depth == 0) {
        if (region_nested) {
          scan.warnings.push_back(fmt::format(
              "nested markers in region at output offset {}; region skipped",
              region_output_offset));
        } else if (scan.stripped.size() == region_start) {
          scan.warnings.push_back(
              fmt::format("empty marked region at output offset {}", region_output_offset));
        } else {
          scan.fragments.push_back({region_start, scan.stripped.size()});
        }
      }
      i += close.size();
    } else {
      scan.stripped.push_back(output[i]);
      ++i;
    }
  }
  if (depth > 0) {
    scan.warnings.push_back(fmt::format(
        "unclosed open marker at output offset {}; region skipped", region_output_offset));
  }
  return scan;
}

std::vector<Span> sorted_unique(std::vector<Span> spans) {
  std::sort(spans.begin(), spans.end());
  spans.erase(std::unique(spans.begin(), spans.end()), spans.end());
  return spans;
}

}  // namespace

std::string strip_markers(std::string_view marked, const MarkerConfig& markers) {
  const auto output = text::decode_utf8(marked);
  const auto open = text::decode_utf8(markers.open);
  const auto close = text::decode_utf8(markers.close);
  std::u32string out;
  for (std::size_t i = 0; i < output.size();) {
    if (starts_with_at(output, i, open)) {
      i += open.size();
    } else if (starts_with_at(output, i, close)) {
      i += close.size();
    } else {
      out.push_back(output[i++]);
    }
  }
  return text::encode_utf8(out);
}

MarkedParse parse_marked(std::string_view llm_output, std::string_view original,
                         const MarkerConfig& markers) {
  MarkedParse result;
  std::u32string output;
  try {
    output = text::decode_utf8(llm_output);
  } catch (const ValidationError& e) {
    result.warnings.push_back(fmt::format("model output is not valid UTF-8: {}", e.what()));
    return result;
  }
  const auto sentence = text::decode_utf8(original);
  auto scan =
      scan_markers(output, text::decode_utf8(markers.open), text::decode_utf8(markers.close));
  result.warnings = std::move(scan.warnings);

  if (scan.stripped == sentence) {
    result.positional = true;
    result.spans = sorted_unique(std::move(scan.fragments));
    return result;
  }

  std::vector<Span> claimed;
  for (const auto& fragment : scan.fragments) {
    const auto needle = std::u32string_view(scan.stripped).substr(fragment.start, fragment.length());
    bool placed = false;
    for (auto pos = sentence.find(needle); pos != std::u32string::npos;
         pos = sentence.find(needle, pos + 1)) {
      const Span candidate{pos, pos + needle.size()};
      const bool taken = std::any_of(claimed.begin(), claimed.end(),
                                     [&](const Span& s) { return s.overlaps(candidate); });
      if (!taken) {
        claimed.push_back(candidate);
        placed = true;
        break;
      }
    }
    if (!placed) {
      result.warnings.push_back(fmt::format("marked fragment '{}' not found in sentence; dropped",
                                            text::encode_utf8(needle)));
    }
  }
  result.spans = sorted_unique(std::move(claimed));
  return result;
}

std::string encode_marked(std::string_view text_utf8, std::vector<Span> spans,
                          const MarkerConfig& markers) {
  markers.validate();
  if (text_utf8.find(markers.open) != std::string_view::npos ||
      text_utf8.find(markers.close) != std::string_view::npos) {
    throw ValidationError(fmt::format("sentence contains a marker string ('{}' or '{}')",
                                      markers.open, markers.close));
  }
  const auto sentence = text::decode_utf8(text_utf8);
  std::sort(spans.begin(), spans.end());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (!spans[i].valid_within(sentence.size())) {
      throw ValidationError(fmt::format("span {} invalid for sentence of length {}",
                                        to_string(spans[i]), sentence.size()));
    }
    if (i > 0 && spans[i - 1].overlaps(spans[i])) {
      throw ValidationError(fmt::format("overlapping spans {} and {}", to_string(spans[i - 1]),
                                        to_string(spans[i])));
    }
  }

  const auto open = text::decode_utf8(markers.open);
  const auto close = text::decode_utf8(markers.close);
  std::u32string out;
  std::size_t cursor = 0;
  for (const auto& span : spans) {
    out.append(sentence, cursor, span.start - cursor);
    out += open;
    out.append(sentence, span.start, span.length());
    out += close;
    cursor = span.end;
  }
  out.append(sentence, cursor);
  auto encoded = text::encode_utf8(out);

  // Marker characters adjacent to sentence characters can fuse into a
  // different marker reading, e.g. "a@" + "@@b##".
  const auto check = parse_marked(encoded, text_utf8, markers);
  if (!check.positional || !check.warnings.empty() || check.spans != sorted_unique(spans)) {
    throw ValidationError(
        fmt::format("marker encoding of '{}' would be ambiguous", std::string(text_utf8)));
  }
  return encoded;
}

}  // namespace kgner
