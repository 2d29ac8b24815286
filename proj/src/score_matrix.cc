// Copyright 2026 The xling Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "xling/score_matrix.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "xling/error.h"
#include "xling/text_util.h"

namespace xling {
namespace {

void check_value(double v, const std::string& where) {
  if (!(v > 0.0 && v <= 1.0)) {
    throw ValidationError(where + ": MRR " + std::to_string(v) + " outside (0, 1]");
  }
}

}  // namespace

std::string_view to_string(Provenance p) {
  return p == Provenance::kProxy ? "proxy" : "ingested";
}

std::string_view to_string(Orientation o) {
  return o == Orientation::kRowSource ? "row-source" : "col-source";
}

Orientation parse_orientation(std::string_view s) {
  if (s == "row-source") return Orientation::kRowSource;
  if (s == "col-source") return Orientation::kColumnSource;
  throw ValidationError("unknown orientation '" + std::string(s) +
                        "' (expected row-source or col-source)");
}

void ScoreMatrix::validate() const {
  const std::set<std::string> known(languages.begin(), languages.end());
  if (known.size() != languages.size()) throw ValidationError("score matrix: duplicate language");
  for (const auto& code : languages) {
    auto it = mono.find(code);
    if (it == mono.end()) {
      throw ValidationError("score matrix: missing monolingual (diagonal) entry for '" + code + "'");
    }
  }
  for (const auto& [code, v] : mono) {
    if (!known.count(code)) throw ValidationError("score matrix: unknown language '" + code + "'");
    check_value(v, "mono " + code);
  }
  for (const auto& [pair, v] : bilingual) {
    const auto& [s, t] = pair;
    if (s == t) throw ValidationError("score matrix: bilingual self pair '" + s + "'");
    if (!known.count(s) || !known.count(t)) {
      throw ValidationError("score matrix: bilingual entry for unknown pair " + s + "->" + t);
    }
    check_value(v, "bilingual " + s + "->" + t);
  }
}

bool ScoreMatrix::complete() const {
  for (const auto& s : languages) {
    for (const auto& t : languages) {
      if (s != t && !bilingual.count({s, t})) return false;
    }
  }
  return true;
}

ScoreMatrix parse_score_matrix(std::string_view content, std::string_view source_name,
                               std::optional<Orientation> expected, const MetaTable* metas) {
  const std::string name(source_name);
  std::optional<Orientation> orientation;
  double scale = 1.0;
  ScoreMatrix m;
  m.provenance = Provenance::kIngested;
  std::vector<std::string> header;
  std::set<std::string> seen_rows;

  std::istringstream in{std::string(content)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    const std::string where = name + ":" + std::to_string(lineno);
    if (trim(line).empty()) continue;
    if (line[0] == '#') {
      const std::string body = trim(std::string_view(line).substr(1));
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(body.substr(0, eq));
      const std::string value = trim(body.substr(eq + 1));
      if (key == "orientation") {
        orientation = parse_orientation(value);
      } else if (key == "scale") {
        if (value == "percent") {
          scale = 0.01;
        } else if (value == "fraction") {
          scale = 1.0;
        } else {
          throw ValidationError(where + ": unknown scale '" + value + "'");
        }
      } else if (key == "provenance" && value == "proxy") {
        m.provenance = Provenance::kProxy;
      } else if (key == "regime") {
        m.regime = value;
      } else if (key == "seeds" && !value.empty()) {
        for (const auto& s : split(value, ',')) {
          m.seeds.push_back(static_cast<std::uint64_t>(parse_int(s, "seeds")));
        }
      }
      continue;
    }
    auto fields = split(line, '\t');
    if (header.empty()) {
      if (fields.empty() || (fields[0] != "src" && fields[0] != "src/trgt")) {
        throw ValidationError(where + ": header must start with 'src'");
      }
      header.assign(fields.begin() + 1, fields.end());
      for (auto& code : header) code = trim(code);
      std::set<std::string> uniq(header.begin(), header.end());
      if (uniq.size() != header.size() || uniq.count("")) {
        throw ValidationError(where + ": empty or duplicate language code in header");
      }
      m.languages = header;
      continue;
    }
    if (!orientation) {
      throw ValidationError(name + ": missing '# orientation=row-source' declaration");
    }
    const std::string row = trim(fields[0]);
    if (!std::count(header.begin(), header.end(), row)) {
      throw ValidationError(where + ": row language '" + row + "' not in header");
    }
    if (!seen_rows.insert(row).second) {
      throw ValidationError(where + ": duplicate row '" + row + "'");
    }
    if (fields.size() - 1 > header.size()) {
      throw ValidationError(where + ": more cells than header columns");
    }
    for (std::size_t j = 1; j < fields.size(); ++j) {
      const std::string cell = trim(fields[j]);
      if (cell.empty()) continue;
      const std::string& col = header[j - 1];
      const double v = parse_double(cell, where) * scale;
      check_value(v, where + " (" + row + "," + col + ")");
      if (row == col) {
        m.mono[row] = v;
      } else if (*orientation == Orientation::kRowSource) {
        m.bilingual[{row, col}] = v;
      } else {
        m.bilingual[{col, row}] = v;
      }
    }
  }
  if (!orientation) {
    throw ValidationError(name + ": missing '# orientation=row-source' declaration");
  }
  if (expected && *expected != *orientation) {
    throw ValidationError(name + ": file declares orientation=" +
                          std::string(to_string(*orientation)) + " but " +
                          std::string(to_string(*expected)) + " was requested");
  }
  if (header.empty()) throw ValidationError(name + ": no header line");
  if (metas) {
    for (const auto& code : m.languages) {
      if (!metas->count(code)) throw ValidationError(name + ": unknown language code '" + code + "'");
    }
  }
  m.validate();
  return m;
}

ScoreMatrix ingest_score_matrix(const std::filesystem::path& path,
                                std::optional<Orientation> expected, const MetaTable* metas) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open score matrix " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_score_matrix(ss.str(), path.string(), expected, metas);
}

void write_score_matrix(std::ostream& out, const ScoreMatrix& m) {
  out << "# orientation=row-source\n";
  out << "# provenance=" << to_string(m.provenance) << '\n';
  if (!m.regime.empty()) out << "# regime=" << m.regime << '\n';
  if (!m.seeds.empty()) {
    out << "# seeds=";
    for (std::size_t i = 0; i < m.seeds.size(); ++i) out << (i ? "," : "") << m.seeds[i];
    out << '\n';
  }
  out << "src";
  for (const auto& c : m.languages) out << '\t' << c;
  out << '\n';
  for (const auto& s : m.languages) {
    out << s;
    for (const auto& t : m.languages) {
      out << '\t';
      if (s == t) {
        if (auto it = m.mono.find(s); it != m.mono.end()) out << format_round_trip(it->second, 4);
      } else if (auto it = m.bilingual.find({s, t}); it != m.bilingual.end()) {
        out << format_round_trip(it->second, 4);
      }
    }
    out << '\n';
  }
}

void write_score_matrix(const std::filesystem::path& path, const ScoreMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_score_matrix(out, m);
}

}  // namespace xling
