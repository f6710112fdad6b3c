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

#ifndef FEASLAB_PROBLEM_HPP_
#define FEASLAB_PROBLEM_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "feaslab/odds.hpp"
#include "feaslab/rng.hpp"

namespace feaslab {

struct ProblemSpec {
  int k = 1;                     // systems
  int s = 1;                     // constraints
  double alpha = 0.05;           // overall error
  std::vector<double> theta;     // odds-ratio IZ per constraint, size s
  SamplingMode sampling_mode = SamplingMode::kIndependent;
  ErrorSplit split = ErrorSplit::kPerConstraint;
  // Treat every constraint as if more than one threshold will eventually be
  // tested, even when the first pass lists a single one.
  bool expect_more_passes = false;
  // Per-system cap on raw replications; unset means unbounded.
  std::optional<std::uint64_t> obs_cap;

  void validate() const;
  OddsRatio odds(std::size_t constraint) const {
    return OddsRatio(theta.at(constraint));
  }
};

// Thresholds tested in one pass; thresholds[l] is strictly increasing in
// (0,1). An empty list skips constraint l in this pass.
struct PassPlan {
  std::vector<std::vector<double>> thresholds;
  int pass_index = 1;

  void validate(int s) const;
  bool active(std::size_t constraint) const {
    return !thresholds[constraint].empty();
  }
  std::size_t total_thresholds() const;
};

// Error allocation and half-widths fixed for the lifetime of a session.
struct Calibration {
  double beta = 0.0;               // per-system error
  std::vector<double> beta_l;      // per-constraint error
  std::vector<int> halfwidth;      // H_l
};

// Planned threshold count per constraint across `plans`, raised to 2 where
// the spec expects further passes.
std::vector<int> planned_counts(const ProblemSpec& spec,
                                std::span<const PassPlan> plans);

Calibration calibrate(const ProblemSpec& spec,
                      std::span<const int> planned_counts);

enum class Decision : std::uint8_t { kPending, kFeasible, kInfeasible };

std::string_view to_string(Decision d);

struct DecisionEntry {
  Decision decision = Decision::kPending;
  std::uint64_t stage = 0;  // r at which the decision was made

  friend bool operator==(const DecisionEntry&, const DecisionEntry&) = default;
};

// Z[i][l][m] for one pass, stored row-major per system.
class DecisionMatrix {
 public:
  DecisionMatrix() = default;
  DecisionMatrix(std::size_t systems, const PassPlan& plan);

  std::size_t systems() const { return systems_; }
  std::size_t constraints() const {
    return offsets_.empty() ? 0 : offsets_.size() - 1;
  }
  std::size_t thresholds(std::size_t constraint) const {
    return offsets_[constraint + 1] - offsets_[constraint];
  }
  std::size_t row_size() const { return offsets_.empty() ? 0 : offsets_.back(); }
  // Column of (l, m) within a row.
  std::size_t column(std::size_t constraint, std::size_t m) const {
    return offsets_[constraint] + m;
  }

  DecisionEntry& at(std::size_t i, std::size_t l, std::size_t m) {
    return entries_[i * row_size() + column(l, m)];
  }
  const DecisionEntry& at(std::size_t i, std::size_t l, std::size_t m) const {
    return entries_[i * row_size() + column(l, m)];
  }
  std::span<DecisionEntry> row(std::size_t i) {
    return {entries_.data() + i * row_size(), row_size()};
  }
  std::span<const DecisionEntry> row(std::size_t i) const {
    return {entries_.data() + i * row_size(), row_size()};
  }

  std::size_t pending_count() const;

  friend bool operator==(const DecisionMatrix&, const DecisionMatrix&) = default;

 private:
  std::size_t systems_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<DecisionEntry> entries_;
};

// Produces one Bernoulli bit per constraint for replication n of a system.
// Implementations are pure functions of (system, stream key, n).
class ObservationSource {
 public:
  virtual ~ObservationSource() = default;
  virtual std::size_t systems() const = 0;
  virtual std::size_t constraints() const = 0;
  virtual void observe(std::size_t system, const ReplayableStream& stream,
                       std::uint64_t n, std::span<std::uint8_t> bits) const = 0;
};

}  // namespace feaslab

#endif  // FEASLAB_PROBLEM_HPP_
