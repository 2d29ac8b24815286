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

#include "xling/language.h"

#include <fstream>

#include "xling/error.h"
#include "xling/text_util.h"

namespace xling {

void LanguageMeta::validate() const {
  if (code.empty()) throw ValidationError("language code is empty");
  if (family.empty()) throw ValidationError("language '" + code + "' has no family");
  if (script.empty()) throw ValidationError("language '" + code + "' has no script");
}

std::string LanguagePartition::text() const {
  std::string out;
  for (const auto& s : sentences) {
    out += s;
    out += '\n';
  }
  return out;
}

MetaTable read_language_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open language table " + path.string());
  MetaTable out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line, '\t');
    if (lineno == 1 && !fields.empty() && fields[0] == "code") continue;
    if (fields.size() != 3) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                            ": expected code, family, script");
    }
    LanguageMeta meta{fields[0], fields[1], fields[2], {}};
    meta.validate();
    if (!out.emplace(meta.code, meta).second) {
      throw ValidationError(path.string() + ": duplicate language '" + meta.code + "'");
    }
  }
  return out;
}

void attach_wals(MetaTable& metas, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open WALS table " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line, ',');
    if (lineno == 1 && !fields.empty() && fields[0] == "language_code") continue;
    if (fields.size() != 3) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                            ": expected language_code,feature_id,value");
    }
    auto it = metas.find(fields[0]);
    if (it != metas.end()) it->second.wals[fields[1]] = fields[2];
  }
}

}  // namespace xling
