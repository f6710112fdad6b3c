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


#include "feaslab/multipass.hpp"

#include <algorithm>
#include <cstdio>
#include <string>
#include <utility>

#include "feaslab/error.hpp"

namespace feaslab {

namespace {

Decision four_branch(const Envelope& env, std::strong_ordering ub_vs_x,
                     std::strong_ordering lb_vs_x) {
  const bool ub_le = ub_vs_x <= 0;
  const bool lb_ge = lb_vs_x >= 0;
  if (ub_le && !lb_ge) return Decision::kFeasible;
  if (lb_ge && !ub_le) return Decision::kInfeasible;
  if (ub_le && lb_ge) {
    switch (env.last) {
      case LastMove::kLower:
        return Decision::kFeasible;
      case LastMove::kUpper:
        return Decision::kInfeasible;
      case LastMove::kNone:
        throw StateError("crossed envelopes with LAST unset");
    }
  }
  return Decision::kPending;
}

// Continuation test: UB <= x decides Feasible, else LB >= x Infeasible.
template <typename X>
Decision continuation(const Envelope& env, X x) {
  if (compare(env.ub, x) <= 0) return Decision::kFeasible;
  if (compare(env.lb, x) >= 0) return Decision::kInfeasible;
  return Decision::kPending;
}

std::string format_threshold(double h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", h);
  return buf;
}

}  // namespace

std::string_view to_string(Heuristic h) {
  switch (h) {
    case Heuristic::kB:
      return "B";
    case Heuristic::kN:
      return "N";
    case Heuristic::kBN:
      return "BN";
  }
  return "?";
}

Heuristic parse_heuristic(std::string_view text) {
  if (text == "B" || text == "b") return Heuristic::kB;
  if (text == "N" || text == "n") return Heuristic::kN;
  if (text == "BN" || text == "bn") return Heuristic::kBN;
  throw DomainError("unknown heuristic '" + std::string(text) + "'",
                    "heuristic");
}

Decision initial_check_B(const Envelope& env, Fraction dummy_mean) {
  return four_branch(env, compare(env.ub, dummy_mean),
                     compare(env.lb, dummy_mean));
}

Decision initial_check_N(const Envelope& env, double h) {
  return four_branch(env, compare(env.ub, h), compare(env.lb, h));
}

Session::Session(ProblemSpec spec, Calibration calibration,
                 std::uint64_t run_seed)
    : spec_(std::move(spec)),
      calibration_(std::move(calibration)),
      run_seed_(run_seed) {
  spec_.validate();
  if (calibration_.halfwidth.size() != static_cast<std::size_t>(spec_.s) ||
      calibration_.beta_l.size() != static_cast<std::size_t>(spec_.s)) {
    throw DomainError("calibration does not cover every constraint",
                      "calibration");
  }
}

Session Session::restore(ProblemSpec spec, Calibration calibration,
                         std::uint64_t run_seed,
                         std::vector<PassRecord> history,
                         std::vector<SystemState> states) {
  Session session(std::move(spec), std::move(calibration), run_seed);
  if (!history.empty() &&
      states.size() != static_cast<std::size_t>(session.spec_.k)) {
    throw DomainError("restored state count does not match k", "systems");
  }
  for (std::size_t w = 0; w < history.size(); ++w) {
    if (history[w].plan.pass_index != static_cast<int>(w + 1)) {
      throw DomainError("restored pass indices are not consecutive", "passes");
    }
  }
  session.history_ = std::move(history);
  session.states_ = std::move(states);
  return session;
}

std::size_t unresolved(const PassRecord& record) {
  const DecisionMatrix& z = record.result.decisions;
  std::size_t pending = z.pending_count();
  for (std::size_t i : record.pruned) {
    for (const auto& e : z.row(i)) pending -= e.decision == Decision::kPending;
  }
  return pending;
}

std::uint64_t Session::obs_total() const {
  std::uint64_t total = 0;
  for (const auto& s : states_) total += s.r;
  return total;
}

const PassRecord& Session::run_pass(PassPlan plan,
                                    std::optional<Heuristic> heuristic,
                                    const ObservationSource& source,
                                    std::span<const std::size_t> pruned) {
  plan.pass_index = static_cast<int>(history_.size()) + 1;
  plan.validate(spec_.s);
  check_source(spec_, source);
  std::vector<std::size_t> skip(pruned.begin(), pruned.end());
  std::sort(skip.begin(), skip.end());
  skip.erase(std::unique(skip.begin(), skip.end()), skip.end());
  if (!skip.empty() && skip.back() >= static_cast<std::size_t>(spec_.k)) {
    throw DomainError("pruned system index out of range", "pruned");
  }
  if (history_.empty()) {
    if (!skip.empty()) throw DomainError("pass 1 cannot prune systems", "pruned");
    FirstPassResult first =
        run_first_pass(spec_, calibration_, plan, source, run_seed_);
    states_ = std::move(first.states);
    PassRecord record;
    record.plan = std::move(plan);
    record.result = std::move(first.pass);
    history_.push_back(std::move(record));
  } else {
    if (!heuristic) {
      throw DomainError("passes after the first need a heuristic", "heuristic");
    }
    PassRecord record = later_pass(plan, *heuristic, source, std::move(skip));
    history_.push_back(std::move(record));
  }
  return history_.back();
}

const DecisionEntry* Session::prior_decision(std::size_t system, std::size_t l,
                                             double h) const {
  for (auto it = history_.rbegin(); it != history_.rend(); ++it) {
    const auto& list = it->plan.thresholds[l];
    for (std::size_t m = 0; m < list.size(); ++m) {
      if (list[m] != h) continue;
      const DecisionEntry& e = it->result.decisions.at(system, l, m);
      if (e.decision != Decision::kPending) return &e;
    }
  }
  return nullptr;
}

PassRecord Session::later_pass(const PassPlan& plan, Heuristic heuristic,
                               const ObservationSource& source,
                               std::vector<std::size_t> pruned) {
  PassRecord record;
  record.plan = plan;
  record.pruned = std::move(pruned);
  record.heuristic = heuristic;
  record.result.decisions = DecisionMatrix(spec_.k, plan);
  record.result.obs.assign(spec_.k, 0);

  const bool use_b = heuristic != Heuristic::kN;
  const bool use_n = heuristic != Heuristic::kB;
  const auto& hw = calibration_.halfwidth;

  // Flat (l, m, h) list in row order.
  struct Column {
    std::size_t l, m;
    double h;
  };
  std::vector<Column> columns;
  for (std::size_t l = 0; l < plan.thresholds.size(); ++l) {
    for (std::size_t m = 0; m < plan.thresholds[l].size(); ++m) {
      columns.push_back({l, m, plan.thresholds[l][m]});
    }
  }
  std::vector<bool> warned(columns.size(), false);
  std::vector<std::uint8_t> bits(spec_.s);

  for (std::size_t i = 0; i < static_cast<std::size_t>(spec_.k); ++i) {
    SystemState& state = states_[i];
    auto row = record.result.decisions.row(i);
    state.dummy_counts.assign(row.size(), 0);
    if (std::binary_search(record.pruned.begin(), record.pruned.end(), i)) continue;
    const std::uint64_t r0 = state.r;
    const ReplayableStream ys(state.y_key);
    const ReplayableStream us(state.u_key);

    std::size_t pending = 0;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (const DecisionEntry* prior = prior_decision(i, columns[c].l,
                                                      columns[c].h)) {
        row[c] = {prior->decision, r0};
        if (!warned[c]) {
          warned[c] = true;
          record.warnings.push_back(
              "constraint " + std::to_string(columns[c].l + 1) +
              " threshold " + format_threshold(columns[c].h) +
              " was already tested; stored decisions reused");
        }
      } else {
        ++pending;
      }
    }

    if (use_b && pending > 0) {
      for (std::uint64_t n = 1; n <= r0; ++n) {
        const double u = us.uniform_at(n);
        for (std::size_t c = 0; c < columns.size(); ++c) {
          if (row[c].decision == Decision::kPending) {
            state.dummy_counts[c] += dummy_indicator(u, columns[c].h) ? 1 : 0;
          }
        }
      }
    }

    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (row[c].decision != Decision::kPending) continue;
      const Envelope& env = state.envelopes[columns[c].l];
      Decision d = Decision::kPending;
      if (use_n) d = initial_check_N(env, columns[c].h);
      if (d == Decision::kPending && use_b) {
        d = initial_check_B(env, Fraction{state.dummy_counts[c],
                                          static_cast<std::int64_t>(r0)});
      }
      if (d != Decision::kPending) {
        row[c] = {d, r0};
        --pending;
        ++record.initial_decisions;
      }
    }

    while (pending > 0) {
      if (spec_.obs_cap && state.r >= *spec_.obs_cap) {
        record.result.capped = true;
        break;
      }
      const std::uint64_t n = state.r + 1;
      source.observe(i, ys, n, bits);
      absorb_observation(state, hw, bits);
      const double u = use_b ? us.uniform_at(n) : 0.0;
      const auto r = static_cast<std::int64_t>(state.r);
      for (std::size_t c = 0; c < columns.size(); ++c) {
        if (row[c].decision != Decision::kPending) continue;
        const Envelope& env = state.envelopes[columns[c].l];
        Decision d = Decision::kPending;
        if (use_n) {
          d = continuation(env, columns[c].h);
          if (d != Decision::kPending) ++record.n_rule_decisions;
        }
        if (d == Decision::kPending && use_b) {
          state.dummy_counts[c] += dummy_indicator(u, columns[c].h) ? 1 : 0;
          d = continuation(env, Fraction{state.dummy_counts[c], r});
          if (d != Decision::kPending) ++record.b_rule_decisions;
        }
        if (d != Decision::kPending) {
          row[c] = {d, state.r};
          --pending;
        }
      }
    }
    record.result.obs[i] = state.r - r0;
  }
  return record;
}

}  // namespace feaslab
