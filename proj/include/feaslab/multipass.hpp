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


// Passes w >= 2: new thresholds are checked against the envelopes recycled
// from earlier passes, then sampling resumes only where needed.

#ifndef FEASLAB_MULTIPASS_HPP_
#define FEASLAB_MULTIPASS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "feaslab/brf.hpp"
#include "feaslab/problem.hpp"

namespace feaslab {

enum class Heuristic { kB, kN, kBN };

std::string_view to_string(Heuristic h);
Heuristic parse_heuristic(std::string_view text);

// Four-branch initial check against a comparison value x (the replayed dummy
// mean for B, the threshold itself for N). Throws StateError when the
// envelopes are crossed and LAST is unset.
Decision initial_check_B(const Envelope& env, Fraction dummy_mean);
Decision initial_check_N(const Envelope& env, double h);

struct PassRecord {
  PassPlan plan;
  std::optional<Heuristic> heuristic;  // unset for pass 1
  PassResult result;
  std::uint64_t initial_decisions = 0;  // decided with no new sampling
  std::uint64_t n_rule_decisions = 0;   // continuation, threshold test
  std::uint64_t b_rule_decisions = 0;   // continuation, dummy-mean test
  // Systems excluded from this pass; their entries stay Pending and they
  // take no observations. Sorted, empty for pass 1.
  std::vector<std::size_t> pruned;
  std::vector<std::string> warnings;
};

// Pending entries outside the pruned systems.
std::size_t unresolved(const PassRecord& record);

// Multi-pass session: spec, calibration fixed at creation, per-system state
// carried across passes, and an append-only history.
class Session {
 public:
  Session(ProblemSpec spec, Calibration calibration, std::uint64_t run_seed);

  // Rebuilds a session from persisted parts.
  static Session restore(ProblemSpec spec, Calibration calibration,
                         std::uint64_t run_seed,
                         std::vector<PassRecord> history,
                         std::vector<SystemState> states);

  // Runs pass history().size() + 1. Pass 1 ignores `heuristic`; later passes
  // require it. `pruned` lists systems to leave out of a later pass.
  const PassRecord& run_pass(PassPlan plan, std::optional<Heuristic> heuristic,
                             const ObservationSource& source,
                             std::span<const std::size_t> pruned = {});

  const ProblemSpec& spec() const { return spec_; }
  const Calibration& calibration() const { return calibration_; }
  std::uint64_t run_seed() const { return run_seed_; }
  const std::vector<PassRecord>& history() const { return history_; }
  const std::vector<SystemState>& states() const { return states_; }
  std::uint64_t obs_total() const;

 private:
  const DecisionEntry* prior_decision(std::size_t system, std::size_t l,
                                      double h) const;
  PassRecord later_pass(const PassPlan& plan, Heuristic heuristic,
                        const ObservationSource& source,
                        std::vector<std::size_t> pruned);

  ProblemSpec spec_;
  Calibration calibration_;
  std::uint64_t run_seed_ = 0;
  std::vector<PassRecord> history_;
  std::vector<SystemState> states_;
};

}  // namespace feaslab

#endif  // FEASLAB_MULTIPASS_HPP_
