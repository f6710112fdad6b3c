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


#include "feaslab/brf.hpp"

#include <cmath>
#include <string>

#include "feaslab/error.hpp"

namespace feaslab {

namespace {

__extension__ typedef __int128 i128;

std::strong_ordering cmp128(i128 a, i128 b) {
  if (a < b) return std::strong_ordering::less;
  if (a > b) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

}  // namespace

double Fraction::to_double() const {
  if (den == 0) {
    return num > 0 ? INFINITY : -INFINITY;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

std::strong_ordering compare(Fraction a, Fraction b) {
  if (!a.finite() || !b.finite()) {
    const int ra = a.finite() ? 0 : (a.num > 0 ? 1 : -1);
    const int rb = b.finite() ? 0 : (b.num > 0 ? 1 : -1);
    return ra <=> rb;
  }
  return cmp128(static_cast<i128>(a.num) * b.den,
                static_cast<i128>(b.num) * a.den);
}

std::strong_ordering compare(Fraction a, double x) {
  if (!a.finite()) {
    return a.num > 0 ? std::strong_ordering::greater
                     : std::strong_ordering::less;
  }
  if (x == 0.0) return cmp128(a.num, 0);
  // x = mant * 2^-shift exactly, mant a 53-bit integer.
  int e = 0;
  const double frac = std::frexp(x, &e);
  auto mant = static_cast<std::int64_t>(std::ldexp(frac, 53));
  int shift = 53 - e;
  while (shift > 0 && (mant & 1) == 0) {
    mant >>= 1;
    --shift;
  }
  // |num| stays below 2^40 in practice; keep the product inside 127 bits.
  if (shift >= 0 && shift <= 80) {
    return cmp128(static_cast<i128>(a.num) << shift,
                  static_cast<i128>(mant) * a.den);
  }
  const long double lhs = static_cast<long double>(a.num) / a.den;
  const long double rhs = x;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::uint64_t system_seed(const ProblemSpec& spec, std::uint64_t run_seed,
                          std::size_t system) {
  const std::size_t index =
      spec.sampling_mode == SamplingMode::kCrn ? 0 : system;
  return derive_seed(run_seed, index);
}

SystemState init_system(const ProblemSpec& spec, const PassPlan& plan,
                        std::size_t system, std::uint64_t run_seed) {
  SystemState state;
  state.successes.assign(spec.s, 0);
  state.envelopes.assign(spec.s, Envelope{});
  state.dummy_counts.assign(plan.total_thresholds(), 0);
  const std::uint64_t seed = system_seed(spec, run_seed, system);
  state.y_key = {seed, StreamTag::kObservation};
  state.u_key = {seed, StreamTag::kDummy};
  return state;
}

void absorb_observation(SystemState& state, std::span<const int> halfwidth,
                        std::span<const std::uint8_t> y) {
  state.r += 1;
  const auto r = static_cast<std::int64_t>(state.r);
  for (std::size_t l = 0; l < state.successes.size(); ++l) {
    state.successes[l] += y[l];
    Envelope& env = state.envelopes[l];
    const Fraction lower{state.successes[l] - halfwidth[l], r};
    const Fraction upper{state.successes[l] + halfwidth[l], r};
    if (compare(lower, env.lb) > 0) {
      env.lb = lower;
      env.last = LastMove::kLower;
    }
    if (compare(upper, env.ub) < 0) {
      env.ub = upper;
      env.last = LastMove::kUpper;
    }
  }
}

std::vector<NewDecision> step(SystemState& state, std::span<const int> halfwidth,
                              const PassPlan& plan, std::span<DecisionEntry> row,
                              std::span<const std::uint8_t> y, double u) {
  bool any_pending = false;
  for (const auto& e : row) any_pending |= e.decision == Decision::kPending;
  if (!any_pending) throw StateError("step on a fully decided system");

  absorb_observation(state, halfwidth, y);
  std::vector<NewDecision> out;
  std::size_t col = 0;
  for (std::size_t l = 0; l < plan.thresholds.size(); ++l) {
    const std::int64_t sum_y = state.successes[l];
    const std::int64_t hw = halfwidth[l];
    for (std::size_t m = 0; m < plan.thresholds[l].size(); ++m, ++col) {
      DecisionEntry& entry = row[col];
      if (entry.decision != Decision::kPending) continue;
      std::int64_t& sum_i = state.dummy_counts[col];
      sum_i += dummy_indicator(u, plan.thresholds[l][m]) ? 1 : 0;
      Decision d = Decision::kPending;
      if (sum_y + hw <= sum_i) {
        d = Decision::kFeasible;
      } else if (sum_y - hw >= sum_i) {
        d = Decision::kInfeasible;
      }
      if (d != Decision::kPending) {
        entry = {d, state.r};
        out.push_back({l, m, d});
      }
    }
  }
  return out;
}

std::uint64_t PassResult::obs_total() const {
  std::uint64_t total = 0;
  for (auto n : obs) total += n;
  return total;
}

void check_source(const ProblemSpec& spec, const ObservationSource& source) {
  if (source.systems() != static_cast<std::size_t>(spec.k) ||
      source.constraints() != static_cast<std::size_t>(spec.s)) {
    throw DomainError("source shape (" + std::to_string(source.systems()) +
                          " x " + std::to_string(source.constraints()) +
                          ") does not match k x s",
                      "source");
  }
}

FirstPassResult run_first_pass(const ProblemSpec& spec,
                               const Calibration& calibration,
                               const PassPlan& plan,
                               const ObservationSource& source,
                               std::uint64_t run_seed) {
  spec.validate();
  plan.validate(spec.s);
  if (plan.pass_index != 1) throw StateError("first pass must have index 1");
  check_source(spec, source);

  FirstPassResult result;
  result.calibration = calibration;
  result.pass.decisions = DecisionMatrix(spec.k, plan);
  result.pass.obs.assign(spec.k, 0);
  result.states.reserve(spec.k);
  std::vector<std::uint8_t> bits(spec.s);

  for (std::size_t i = 0; i < static_cast<std::size_t>(spec.k); ++i) {
    SystemState state = init_system(spec, plan, i, run_seed);
    const ReplayableStream ys(state.y_key);
    const ReplayableStream us(state.u_key);
    auto row = result.pass.decisions.row(i);
    std::size_t pending = row.size();
    while (pending > 0) {
      if (spec.obs_cap && state.r >= *spec.obs_cap) {
        result.pass.capped = true;
        break;
      }
      const std::uint64_t n = state.r + 1;
      source.observe(i, ys, n, bits);
      const double u = us.uniform_at(n);
      pending -= step(state, calibration.halfwidth, plan, row, bits, u).size();
    }
    result.pass.obs[i] = state.r;
    result.states.push_back(std::move(state));
  }
  return result;
}

FirstPassResult run_first_pass(const ProblemSpec& spec, const PassPlan& plan,
                               const ObservationSource& source,
                               std::uint64_t run_seed) {
  const PassPlan plans[] = {plan};
  const auto counts = planned_counts(spec, plans);
  return run_first_pass(spec, calibrate(spec, counts), plan, source, run_seed);
}

}  // namespace feaslab
