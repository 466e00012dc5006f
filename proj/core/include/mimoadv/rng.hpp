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

#pragma once

#include <complex>
#include <cstdint>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace mimoadv {

using Rng = boost::random::mt19937_64;

// Independent stream families derived from one master seed. Each family is
// further indexed (sample number, draw block, ...), so any piece of work can
// be reproduced without replaying the work that came before it.
enum class StreamKind : std::uint64_t {
  kUserDrop = 1,
  kShadowing = 2,
  kChannelDraws = 3,
  kTestDrop = 4,
  kTraining = 5,
  kAttack = 6,
};

std::uint64_t derive_seed(std::uint64_t master, StreamKind kind, std::uint64_t index,
                          std::uint64_t sub_index = 0);

Rng make_rng(std::uint64_t master, StreamKind kind, std::uint64_t index,
             std::uint64_t sub_index = 0);

inline double uniform01(Rng& rng) { return boost::random::uniform_01<double>{}(rng); }

inline double standard_normal(Rng& rng) { return boost::random::normal_distribution<double>{}(rng); }

/// One draw of CN(0, 1).
inline std::complex<double> complex_normal(Rng& rng) {
  constexpr double kHalfSqrt = 0.70710678118654752440;
  boost::random::normal_distribution<double> n;
  const double re = n(rng);
  const double im = n(rng);
  return {kHalfSqrt * re, kHalfSqrt * im};
}

}  // namespace mimoadv
