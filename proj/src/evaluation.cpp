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

#include "kgner/evaluation.hpp"

#include <cmath>
#include <fstream>
#include <tuple>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "json.hpp"
#include "kgner/errors.hpp"
#include "kgner/text.hpp"

namespace kgner {

using nlohmann::json;
using nlohmann::ordered_json;

double harmonic_f1(double precision, double recall) {
  const double sum = precision + recall;
  return sum == 0.0 ? 0.0 : 2.0 * precision * recall / sum;
}

Prf compute_prf(const Counts& c) {
  Prf out;
  if (c.tp + c.fp > 0) out.precision = 100.0 * static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) out.recall = 100.0 * static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  out.f1 = harmonic_f1(out.precision, out.recall);
  return out;
}

double round_half_up(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::floor(value * scale + 0.5 + 1e-9) / scale;
}

EvalResult match_strict(const Corpus& corpus, const std::vector<Prediction>& predictions) {
  using Key = std::tuple<std::size_t, std::size_t, std::size_t, std::string>;
  EvalResult result;
  result.types = corpus.entity_types;
  for (const auto& t : result.types) result.per_type[t] = {};

  // Remaining unmatched gold mentions per key.
  std::map<Key, std::size_t> open_gold;
  for (const auto& m : corpus.mentions) {
    ++open_gold[{m.sentence, m.span.start, m.span.end, m.type}];
    ++result.per_type[m.type].fn;
  }
  for (const auto& p : predictions) {
    const auto sentence = corpus.find_sentence(p.doc_id, p.sentence_index);
    if (!sentence) {
      throw ValidationError(fmt::format("prediction references unknown sentence ({}, {})",
                                        p.doc_id, p.sentence_index));
    }
    auto counts = result.per_type.find(p.type);
    if (counts == result.per_type.end()) {
      throw ValidationError(fmt::format("prediction has type '{}', which is not an entity type",
                                        p.type));
    }
    auto gold = open_gold.find({*sentence, p.span.start, p.span.end, p.type});
    if (gold != open_gold.end() && gold->second > 0) {
      --gold->second;
      ++counts->second.tp;
      --counts->second.fn;
    } else {
      ++counts->second.fp;
    }
  }
  for (const auto& [type, c] : result.per_type) result.micro += c;
  return result;
}

namespace {

std::vector<std::string> report_cells(const Counts& c) {
  const auto prf = compute_prf(c);
  return {fmt::format("{:.2f}", round_half_up(prf.precision, 2)),
          fmt::format("{:.2f}", round_half_up(prf.recall, 2)),
          fmt::format("{:.2f}", round_half_up(prf.f1, 2))};
}

}  // namespace

std::string render_report(const std::vector<ReportRow>& rows, ReportFormat format) {
  std::vector<std::string> types = rows.empty() ? std::vector<std::string>{} : rows[0].result.types;
  std::vector<std::string> header = {"Model"};
  for (const auto& t : types) {
    for (const char* m : {"Pre", "Rec", "F1"}) header.push_back(fmt::format("{} {}", t, m));
  }
  for (const char* m : {"Pre", "Rec", "F1"}) header.push_back(fmt::format("Micro {}", m));

  std::vector<std::vector<std::string>> body;
  for (const auto& row : rows) {
    std::vector<std::string> cells = {row.label};
    for (const auto& t : types) {
      auto it = row.result.per_type.find(t);
      const auto part = report_cells(it == row.result.per_type.end() ? Counts{} : it->second);
      cells.insert(cells.end(), part.begin(), part.end());
    }
    const auto micro = report_cells(row.result.micro);
    cells.insert(cells.end(), micro.begin(), micro.end());
    body.push_back(std::move(cells));
  }

  std::string out;
  if (format == ReportFormat::kTsv) {
    out += fmt::format("{}\n", fmt::join(header, "\t"));
    for (const auto& cells : body) out += fmt::format("{}\n", fmt::join(cells, "\t"));
    return out;
  }
  out += fmt::format("| {} |\n", fmt::join(header, " | "));
  out += "|---";
  for (std::size_t i = 1; i < header.size(); ++i) out += "|---:";
  out += "|\n";
  for (const auto& cells : body) out += fmt::format("| {} |\n", fmt::join(cells, " | "));
  return out;
}

void write_predictions(const std::filesystem::path& path,
                       const std::vector<Prediction>& predictions) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  for (const auto& p : predictions) {
    ordered_json rec;
    rec["doc_id"] = p.doc_id;
    rec["sentence_index"] = p.sentence_index;
    rec["start"] = p.span.start;
    rec["end"] = p.span.end;
    rec["type"] = p.type;
    rec["strategy"] = p.strategy;
    out << rec.dump() << '\n';
  }
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(fmt::format("cannot open predictions file {}", path.string()));
  std::vector<Prediction> out;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (text::trim(line).empty()) continue;
    try {
      const auto rec = json::parse(line);
      Prediction p;
      p.doc_id = rec.at("doc_id").get<std::string>();
      p.sentence_index = rec.at("sentence_index").get<int>();
      p.span = {rec.at("start").get<std::size_t>(), rec.at("end").get<std::size_t>()};
      p.type = rec.at("type").get<std::string>();
      p.strategy = rec.value("strategy", std::string{});
      if (p.span.start >= p.span.end) {
        throw ValidationError(fmt::format("empty or reversed span {}", to_string(p.span)));
      }
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw ValidationError(fmt::format("{}: line {}: {}", path.string(), line_no, e.what()));
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("{}: line {}: {}", path.string(), line_no, e.what()));
    }
  }
  return out;
}

}  // namespace kgner
