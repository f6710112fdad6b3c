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

// Seed-addressed random streams. The value at (key, stage, lane) is a pure
// function of its coordinates (Philox4x32-10), so any prefix of a stream can
// be regenerated in O(length) time without storing it.

#ifndef FEASLAB_RNG_HPP_
#define FEASLAB_RNG_HPP_

#include <array>
#include <compare>
#include <cstdint>

namespace feaslab {

// Which of a system's two streams: simulation observations Y, or the
// uniforms U that drive the dummy indicators.
enum class StreamTag : std::uint32_t { kObservation = 0, kDummy = 1 };

struct StreamKey {
  std::uint64_t seed = 0;
  StreamTag tag = StreamTag::kObservation;

  friend auto operator<=>(const StreamKey&, const StreamKey&) = default;
};

namespace detail {
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;
PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key);
}  // namespace detail

class ReplayableStream {
 public:
  ReplayableStream() = default;
  explicit ReplayableStream(StreamKey key) : key_(key) {}

  const StreamKey& key() const { return key_; }

  // Uniform on [0,1) with 53 bits of resolution. Stages are 1-based; `lane`
  // addresses several independent values within one stage.
  double uniform_at(std::uint64_t n, std::uint32_t lane = 0) const;

  // 1 with probability p.
  bool bernoulli_at(std::uint64_t n, double p, std::uint32_t lane = 0) const {
    return uniform_at(n, lane) < p;
  }

 private:
  StreamKey key_;
};

// Dummy Bernoulli indicator I = 1{u <= h}. Sharing u across thresholds makes
// the indicators monotone in h.
inline bool dummy_indicator(double u, double h) { return u <= h; }

// Deterministic 64-bit seed derivation (SplitMix64 finalizer chain).
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

}  // namespace feaslab

#endif  // FEASLAB_RNG_HPP_
