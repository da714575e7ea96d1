// Copyright 2026 The cvxdp Authors
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

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cvxdp/core/error.hpp"

namespace cvxdp {

using Json = nlohmann::ordered_json;

inline std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  Require(static_cast<bool>(in), ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  Require(!in.bad(), ErrorKind::kIo, "read failed for " + path.string());
  return os.str();
}

// Writes to a sibling temporary and renames, so readers never see a partial file.
inline void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    Require(static_cast<bool>(out), ErrorKind::kIo, "cannot write " + tmp.string());
    out << text;
    out.flush();
    Require(static_cast<bool>(out), ErrorKind::kIo, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  Require(!ec, ErrorKind::kIo, "cannot move " + tmp.string() + " to " + path.string() +
                                   ": " + ec.message());
}

inline Json ParseJson(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kFormat, what + ": malformed JSON (" + e.what() + ")");
  }
}

inline Json ReadJsonFile(const std::filesystem::path& path) {
  return ParseJson(ReadTextFile(path), path.string());
}

inline void WriteJsonFile(const std::filesystem::path& path, const Json& j) {
  WriteTextFile(path, j.dump(2) + "\n");
}

// Typed field access that reports the offending key.
template <typename T>
T JsonField(const Json& j, const std::string& key, ErrorKind kind = ErrorKind::kFormat) {
  Require(j.is_object() && j.contains(key), kind, "missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    Fail(kind, "field '" + key + "' has the wrong type");
  }
}

}  // namespace cvxdp
