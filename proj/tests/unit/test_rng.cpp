// Copyright 2026 The feaslab Authors
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


#include <cmath>
#include <cstdint>
#include <set>

#include "doctest.h"
#include "feaslab/rng.hpp"

using namespace feaslab;

TEST_SUITE("rng") {

TEST_CASE("philox4x32-10 known-answer vectors") {
  using detail::philox4x32_10;
  using C = detail::PhiloxCounter;
  using K = detail::PhiloxKey;
  CHECK(philox4x32_10(C{0, 0, 0, 0}, K{0, 0}) ==
        C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32_10(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                      K{0xffffffffu, 0xffffffffu}) ==
        C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32_10(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                      K{0xa4093822u, 0x299f31d0u}) ==
        C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("replay is exact") {
  const ReplayableStream s(StreamKey{42, StreamTag::kObservation});
  const double first = s.uniform_at(5);
  for (std::uint64_t n = 1; n < 100; ++n) (void)s.uniform_at(n);
  CHECK(s.uniform_at(5) == first);
  CHECK(s.uniform_at(5, 3) == ReplayableStream(StreamKey{42, StreamTag::kObservation}).uniform_at(5, 3));
}

TEST_CASE("streams are distinct across seeds, tags, stages and lanes") {
  std::set<double> seen;
  for (std::uint64_t seed : {1ull, 2ull}) {
    for (auto tag : {StreamTag::kObservation, StreamTag::kDummy}) {
      const ReplayableStream s(StreamKey{seed, tag});
      for (std::uint64_t n = 1; n <= 50; ++n) {
        for (std::uint32_t lane = 0; lane < 4; ++lane) seen.insert(s.uniform_at(n, lane));
      }
    }
  }
  CHECK(seen.size() == 2 * 2 * 50 * 4);
}

TEST_CASE("uniform mean and bernoulli frequency sit in 3-sigma bands") {
  const ReplayableStream s(StreamKey{20260101, StreamTag::kObservation});
  constexpr int kN = 1'000'000;
  double sum = 0.0;
  long ones = 0;
  double lo = 1.0, hi = 0.0;
  for (int n = 1; n <= kN; ++n) {
    const double u = s.uniform_at(n);
    sum += u;
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    ones += s.bernoulli_at(n, 0.15, 1) ? 1 : 0;
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(std::abs(sum / kN - 0.5) < 3.0 / std::sqrt(12.0 * kN));
  CHECK(std::abs(static_cast<double>(ones) / kN - 0.15) <
        3.0 * std::sqrt(0.15 * 0.85 / kN));
}

TEST_CASE("dummy indicator is monotone in h") {
  CHECK(dummy_indicator(0.3, 0.5));
  CHECK_FALSE(dummy_indicator(0.7, 0.5));
  CHECK(dummy_indicator(0.5, 0.5));
  const ReplayableStream s(StreamKey{7, StreamTag::kDummy});
  for (std::uint64_t n = 1; n <= 2000; ++n) {
    const double u = s.uniform_at(n);
    bool prev = false;
    for (double h = 0.01; h < 1.0; h += 0.01) {
      const bool now = dummy_indicator(u, h);
      CHECK(now >= prev);
      prev = now;
    }
  }
}

TEST_CASE("bernoulli coupling is monotone in p for a shared uniform") {
  const ReplayableStream s(StreamKey{9, StreamTag::kObservation});
  for (std::uint64_t n = 1; n <= 1000; ++n) {
    CHECK(s.bernoulli_at(n, 0.2) <= s.bernoulli_at(n, 0.3));
  }
}

TEST_CASE("derive_seed is deterministic and spreads indices") {
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  std::set<std::uint64_t> seeds;
  for (std::uint64_t parent = 0; parent < 20; ++parent) {
    for (std::uint64_t i = 0; i < 100; ++i) seeds.insert(derive_seed(parent, i));
  }
  CHECK(seeds.size() == 2000);
}

}  // TEST_SUITE
