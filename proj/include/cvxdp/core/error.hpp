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

#include <stdexcept>
#include <string>

namespace cvxdp {

// Broad failure classes. The CLI maps them onto process exit codes.
enum class ErrorKind {
  kDomain,    // invalid argument for a mathematical operation
  kShape,     // dimension mismatch
  kNumeric,   // a computation failed to produce a trustworthy number
  kResource,  // a requested grid or buffer exceeds the configured limit
  kConfig,    // run/sweep configuration rejected
  kFormat,    // malformed input file
  kIo,        // file could not be opened/read/written
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* ToString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDomain: return "domain error";
    case ErrorKind::kShape: return "shape error";
    case ErrorKind::kNumeric: return "numeric error";
    case ErrorKind::kResource: return "resource error";
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kIo: return "I/O error";
  }
  return "error";
}

// 0 success, 2 config, 3 numeric, 4 I/O.
inline int ExitCode(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kDomain:
    case ErrorKind::kShape:
      return 2;
    case ErrorKind::kNumeric:
    case ErrorKind::kResource:
      return 3;
    case ErrorKind::kFormat:
    case ErrorKind::kIo:
      return 4;
  }
  return 1;
}

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void Require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) Fail(kind, what);
}

}  // namespace cvxdp
