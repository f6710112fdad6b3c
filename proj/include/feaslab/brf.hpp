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


// First pass of the recycled Bernoulli feasibility procedure: per-system
// sequential sampling, integer random-walk decisions, and the envelope
// statistics that later passes reuse.

#ifndef FEASLAB_BRF_HPP_
#define FEASLAB_BRF_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "feaslab/problem.hpp"
#include "feaslab/rng.hpp"

namespace feaslab {

// num/den with den > 0, or +-infinity when den == 0 (num carries the sign).
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static constexpr Fraction pos_inf() { return {1, 0}; }
  static constexpr Fraction neg_inf() { return {-1, 0}; }
  bool finite() const { return den != 0; }
  double to_double() const;

  friend bool operator==(const Fraction&, const Fraction&) = default;
};

// Exact comparisons.
std::strong_ordering compare(Fraction a, Fraction b);
std::strong_ordering compare(Fraction a, double x);

enum class LastMove : std::uint8_t { kNone, kLower, kUpper };

struct Envelope {
  Fraction lb = Fraction::neg_inf();  // running max of (sum Y - H) / r
  Fraction ub = Fraction::pos_inf();  // running min of (sum Y + H) / r
  LastMove last = LastMove::kNone;

  friend bool operator==(const Envelope&, const Envelope&) = default;
};

struct SystemState {
  std::uint64_t r = 0;
  std::vector<std::int64_t> successes;  // per constraint
  std::vector<Envelope> envelopes;      // per constraint
  // Per (l, m) of the current pass, aligned with its DecisionMatrix row.
  std::vector<std::int64_t> dummy_counts;
  StreamKey y_key;
  StreamKey u_key;
};

struct NewDecision {
  std::size_t constraint = 0;
  std::size_t threshold = 0;
  Decision decision = Decision::kPending;
};

// Stream seeds for system i of one run: distinct per system, or shared by
// every system under CRN.
std::uint64_t system_seed(const ProblemSpec& spec, std::uint64_t run_seed,
                          std::size_t system);

SystemState init_system(const ProblemSpec& spec, const PassPlan& plan,
                        std::size_t system, std::uint64_t run_seed);

// Adds one replication: r += 1, success counts, then for every constraint
// the LB envelope and then the UB envelope (LAST follows the later update).
void absorb_observation(SystemState& state, std::span<const int> halfwidth,
                        std::span<const std::uint8_t> y);

// One first-pass stage. `row` is the system's DecisionMatrix row for `plan`.
std::vector<NewDecision> step(SystemState& state, std::span<const int> halfwidth,
                              const PassPlan& plan, std::span<DecisionEntry> row,
                              std::span<const std::uint8_t> y, double u);

struct PassResult {
  DecisionMatrix decisions;
  std::vector<std::uint64_t> obs;  // new replications per system
  bool capped = false;

  std::uint64_t obs_total() const;
};

struct FirstPassResult {
  Calibration calibration;
  PassResult pass;
  std::vector<SystemState> states;
};

FirstPassResult run_first_pass(const ProblemSpec& spec,
                               const Calibration& calibration,
                               const PassPlan& plan,
                               const ObservationSource& source,
                               std::uint64_t run_seed);

// Calibrates from `plan` alone (plus expect_more_passes).
FirstPassResult run_first_pass(const ProblemSpec& spec, const PassPlan& plan,
                               const ObservationSource& source,
                               std::uint64_t run_seed);

void check_source(const ProblemSpec& spec, const ObservationSource& source);

}  // namespace feaslab

#endif  // FEASLAB_BRF_HPP_
