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
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "kgner/corpus.hpp"

namespace kgner {

struct Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  Counts& operator+=(const Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  bool operator==(const Counts&) const = default;
};

// Percentages in [0, 100].
struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// 2PR / (P + R), or 0 when P + R == 0. Works on ratios or percentages alike.
double harmonic_f1(double precision, double recall);
Prf compute_prf(const Counts& counts);

// Half-up rounding to `decimals` places, tolerant of binary representation
// error (42.005 rounds to 42.01).
double round_half_up(double value, int decimals);

// One line of the predictions interchange file.
struct Prediction {
  std::string doc_id;
  int sentence_index = 0;
  Span span;
  std::string type;
  std::string strategy;

  bool operator==(const Prediction&) const = default;
};

struct EvalResult {
  std::vector<std::string> types;
  std::map<std::string, Counts> per_type;
  Counts micro;
};

// Strict one-to-one matching on (sentence, start, end, type). Throws
// ValidationError for predictions naming an unknown sentence or type.
EvalResult match_strict(const Corpus& corpus, const std::vector<Prediction>& predictions);

enum class ReportFormat { kTsv, kMarkdown };

struct ReportRow {
  std::string label;
  EvalResult result;
};

// One row per configuration: Pre/Rec/F1 per entity type, then micro, as
// percentages to two decimals.
std::string render_report(const std::vector<ReportRow>& rows, ReportFormat format);

void write_predictions(const std::filesystem::path& path,
                       const std::vector<Prediction>& predictions);
std::vector<Prediction> read_predictions(const std::filesystem::path& path);

}  // namespace kgner
