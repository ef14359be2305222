/*
 * Copyright 2026 The FKGE Privacy Lab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FKGE_COMMON_RNG_H_
#define FKGE_COMMON_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fkge {

// All randomness flows through explicitly passed engines; there is no global
// generator anywhere in the library.
using Rng = std::mt19937_64;

// SplitMix64 finalizer, used to derive independent stream seeds.
constexpr std::uint64_t MixSeed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives a seed from a root seed and a path of stream identifiers, e.g.
// DeriveSeed(seed, {client, round}). Independent of call order.
inline std::uint64_t DeriveSeed(std::uint64_t root,
                                std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = MixSeed(root);
  for (std::uint64_t p : path) s = MixSeed(s ^ MixSeed(p + 0x632be59bd9b4e019ULL));
  return s;
}

inline Rng MakeRng(std::uint64_t root,
                   std::initializer_list<std::uint64_t> path = {}) {
  return Rng(DeriveSeed(root, path));
}

// Uniform double in the open interval (0, 1).
inline double UniformOpen(Rng& rng) {
  // 53 random bits, shifted off zero.
  const std::uint64_t bits = rng() >> 11;
  return (static_cast<double>(bits) + 0.5) * (1.0 / 9007199254740992.0);
}

inline std::uint64_t UniformIndex(Rng& rng, std::uint64_t n) {
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng);
}

inline double StandardNormal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace fkge

#endif  // FKGE_COMMON_RNG_H_
