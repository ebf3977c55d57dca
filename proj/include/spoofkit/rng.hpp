// Copyright 2026 The spoofkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPOOFKIT_RNG_HPP
#define SPOOFKIT_RNG_HPP

#include <cstdint>
#include <random>

namespace spoofkit {

// splitmix64 finalizer.
inline std::uint64_t MixBits(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream per (seed, epoch, index): reproducible regardless of
// worker count or scheduling order.
inline std::mt19937_64 DeriveRng(std::uint64_t seed, std::uint64_t epoch,
                                 std::uint64_t index) {
  std::uint64_t s = MixBits(MixBits(MixBits(seed) ^ epoch) ^ index);
  return std::mt19937_64(s);
}

}  // namespace spoofkit

#endif  // SPOOFKIT_RNG_HPP
