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

#include "feaslab/problem.hpp"

#include <algorithm>
#include <string>

#include "feaslab/error.hpp"

namespace feaslab {

void ProblemSpec::validate() const {
  if (k < 1) throw DomainError("k must be >= 1", "k");
  if (s < 1) throw DomainError("s must be >= 1", "s");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("alpha must lie in (0,1)", "alpha");
  }
  if (theta.size() != static_cast<std::size_t>(s)) {
    throw DomainError("theta must list one value per constraint", "theta");
  }
  for (double t : theta) OddsRatio{t};
  if (obs_cap && *obs_cap == 0) {
    throw DomainError("obs_cap must be positive", "obs_cap");
  }
}

void PassPlan::validate(int s) const {
  if (thresholds.size() != static_cast<std::size_t>(s)) {
    throw DomainError("plan must list thresholds for every constraint",
                      "thresholds");
  }
  if (pass_index < 1) throw DomainError("pass index must be >= 1", "pass");
  bool any = false;
  for (const auto& list : thresholds) {
    double previous = 0.0;
    for (double h : list) {
      if (!(h > 0.0 && h < 1.0)) {
        throw DomainError("thresholds must lie in (0,1), got " +
                              std::to_string(h),
                          "thresholds");
      }
      if (!(h > previous)) {
        throw DomainError("thresholds must be strictly increasing",
                          "thresholds");
      }
      previous = h;
    }
    any = any || !list.empty();
  }
  if (!any) throw DomainError("plan has no thresholds", "thresholds");
}

std::size_t PassPlan::total_thresholds() const {
  std::size_t n = 0;
  for (const auto& list : thresholds) n += list.size();
  return n;
}

std::vector<int> planned_counts(const ProblemSpec& spec,
                                std::span<const PassPlan> plans) {
  std::vector<int> counts(spec.s, 0);
  for (const auto& plan : plans) {
    for (int l = 0; l < spec.s && l < static_cast<int>(plan.thresholds.size());
         ++l) {
      counts[l] += static_cast<int>(plan.thresholds[l].size());
    }
  }
  if (spec.expect_more_passes) {
    for (int& c : counts) c = std::max(c, 2);
  }
  return counts;
}

Calibration calibrate(const ProblemSpec& spec,
                      std::span<const int> planned_counts) {
  spec.validate();
  if (planned_counts.size() != static_cast<std::size_t>(spec.s)) {
    throw DomainError("planned counts must cover every constraint", "counts");
  }
  Calibration cal;
  cal.beta = error_split(spec.alpha, spec.k, spec.sampling_mode);

  // Constraints that are never tested take no share under the effective-
  // threshold split; under the per-constraint split they still count in s.
  std::vector<int> counts(planned_counts.begin(), planned_counts.end());
  if (spec.split == ErrorSplit::kPerEffectiveThreshold) {
    std::vector<int> tested;
    for (int c : counts) {
      if (c > 0) tested.push_back(c);
    }
    if (tested.empty()) throw DomainError("no constraint is tested", "counts");
    int d = 0;
    for (int c : tested) d += std::min(c, 2);
    cal.beta_l.assign(counts.size(), cal.beta / d);
  } else {
    for (int& c : counts) c = std::max(c, 1);
    cal.beta_l = per_constraint_error(cal.beta, counts, spec.split);
  }
  cal.halfwidth.reserve(counts.size());
  for (std::size_t l = 0; l < counts.size(); ++l) {
    cal.halfwidth.push_back(continuation_halfwidth(cal.beta_l[l], spec.odds(l)));
  }
  return cal;
}

std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::kPending:
      return "pending";
    case Decision::kFeasible:
      return "feasible";
    case Decision::kInfeasible:
      return "infeasible";
  }
  return "?";
}

DecisionMatrix::DecisionMatrix(std::size_t systems, const PassPlan& plan)
    : systems_(systems) {
  offsets_.reserve(plan.thresholds.size() + 1);
  offsets_.push_back(0);
  for (const auto& list : plan.thresholds) {
    offsets_.push_back(offsets_.back() + list.size());
  }
  entries_.assign(systems * offsets_.back(), DecisionEntry{});
}

std::size_t DecisionMatrix::pending_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [](const auto& e) {
        return e.decision == Decision::kPending;
      }));
}

}  // namespace feaslab
