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

#include <cstdint>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>

namespace cvxdp {

// Every source of randomness in a run gets its own engine so that, e.g.,
// switching noise off never perturbs batch selection.
using Engine = std::mt19937_64;

inline Engine MakeEngine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return Engine(seq);
}

// Stream identifiers.
inline constexpr std::uint64_t kGateStream = 0x67617465;   // "gate"
inline constexpr std::uint64_t kInitStream = 0x696e6974;   // "init"
inline constexpr std::uint64_t kBatchStream = 0x62617463;  // "batc"
inline constexpr std::uint64_t kNoiseStream = 0x6e6f6973;  // "nois"
inline constexpr std::uint64_t kDataStream = 0x64617461;   // "data"

inline std::uint64_t Fnv1a64(const std::string& bytes,
                             std::uint64_t hash = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline std::string HexDigest(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

// Digest of the full engine state (the textual serialization of mt19937_64).
inline std::string EngineDigest(const Engine& engine) {
  std::ostringstream os;
  os << engine;
  return HexDigest(Fnv1a64(os.str()));
}

// Standard normal draw; std::normal_distribution carries hidden state, so a
// fresh distribution is used per call to keep draws a function of the engine.
inline double StandardNormal(Engine& engine) {
  return std::normal_distribution<double>(0.0, 1.0)(engine);
}

}  // namespace cvxdp
