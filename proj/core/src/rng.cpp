// Copyright 2026 The mimoadv Authors
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

#include "mimoadv/rng.hpp"

namespace mimoadv {
namespace {

// splitmix64 finalizer.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, StreamKind kind, std::uint64_t index,
                          std::uint64_t sub_index) {
  std::uint64_t s = mix(master);
  s = mix(s ^ static_cast<std::uint64_t>(kind));
  s = mix(s ^ index);
  return mix(s ^ sub_index);
}

Rng make_rng(std::uint64_t master, StreamKind kind, std::uint64_t index, std::uint64_t sub_index) {
  return Rng(derive_seed(master, kind, index, sub_index));
}

}  // namespace mimoadv
