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


#include "feaslab/rf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "feaslab/error.hpp"

namespace feaslab {

std::string_view to_string(ToleranceMode mode) {
  return mode == ToleranceMode::kAdjusted ? "adjusted" : "conservative";
}

ToleranceMode parse_tolerance_mode(std::string_view text) {
  if (text == "conservative") return ToleranceMode::kConservative;
  if (text == "adjusted") return ToleranceMode::kAdjusted;
  throw DomainError("unknown tolerance mode '" + std::string(text) + "'",
                    "tolerance_mode");
}

void RfParams::validate() const {
  if (n0 < 2) throw DomainError("n0 must be >= 2", "n0");
  if (b < 1) throw DomainError("batch size must be >= 1", "b");
}

std::vector<double> batch_means(std::span<const std::uint8_t> raw, int b) {
  if (b < 1) throw DomainError("batch size must be >= 1", "b");
  std::vector<double> out;
  const std::size_t width = static_cast<std::size_t>(b);
  out.reserve(raw.size() / width);
  for (std::size_t start = 0; start + width <= raw.size(); start += width) {
    int sum = 0;
    for (std::size_t j = start; j < start + width; ++j) sum += raw[j];
    out.push_back(static_cast<double>(sum) / b);
  }
  return out;
}

double rf_g(double eta, int n0) {
  return 0.5 * std::pow(1.0 + 2.0 * eta, -(n0 - 1) / 2.0);
}

double solve_eta(double beta_l, int n0) {
  if (!(beta_l > 0.0 && beta_l < 0.5)) {
    throw DomainError("beta_l must lie in (0, 0.5)", "beta_l");
  }
  if (n0 < 2) throw DomainError("n0 must be >= 2", "n0");
  return (std::pow(2.0 * beta_l, -2.0 / (n0 - 1)) - 1.0) / 2.0;
}

double continuation_radius(double r, double v, double w, double z, int n0) {
  return std::max(0.0, (n0 - 1) * w * z / v - v * r / 2.0);
}

PassResult run_rf(const ProblemSpec& spec, const PassPlan& plan,
                  const RfParams& params, const ObservationSource& source,
                  std::uint64_t run_seed) {
  spec.validate();
  plan.validate(spec.s);
  params.validate();
  check_source(spec, source);

  const PassPlan plans[] = {plan};
  const Calibration cal = calibrate(spec, planned_counts(spec, plans));

  // Per constraint: tolerance, eta and the thresholds actually compared.
  std::vector<double> tolerance(spec.s, 0.0);
  std::vector<double> eta(spec.s, 0.0);
  std::vector<std::vector<double>> targets(spec.s);
  for (int l = 0; l < spec.s; ++l) {
    if (!plan.active(l)) continue;
    const auto conv = tolerance_convert(plan.thresholds[l], spec.odds(l));
    eta[l] = solve_eta(cal.beta_l[l], params.n0);
    if (params.tolerance_mode == ToleranceMode::kAdjusted) {
      tolerance[l] = conv.epsilon_tilde;
      targets[l] = conv.h_tilde();
    } else {
      tolerance[l] = conv.epsilon;
      targets[l] = plan.thresholds[l];
    }
  }

  PassResult result;
  result.decisions = DecisionMatrix(spec.k, plan);
  result.obs.assign(spec.k, 0);
  const auto b = static_cast<std::uint64_t>(params.b);
  std::vector<std::uint8_t> bits(spec.s);

  for (std::size_t i = 0; i < static_cast<std::size_t>(spec.k); ++i) {
    const ReplayableStream ys(
        StreamKey{system_seed(spec, run_seed, i), StreamTag::kObservation});
    auto row = result.decisions.row(i);
    std::uint64_t raw = 0;
    std::vector<std::int64_t> batch_sum(spec.s);
    std::vector<std::int64_t> total(spec.s, 0);
    // Draws one batch; returns false when the cap would be exceeded.
    auto draw_batch = [&]() {
      if (spec.obs_cap && raw + b > *spec.obs_cap) return false;
      std::fill(batch_sum.begin(), batch_sum.end(), 0);
      for (std::uint64_t j = 0; j < b; ++j) {
        source.observe(i, ys, ++raw, bits);
        for (int l = 0; l < spec.s; ++l) batch_sum[l] += bits[l];
      }
      for (int l = 0; l < spec.s; ++l) total[l] += batch_sum[l];
      return true;
    };

    // Variance of the first n0 batch means, frozen afterwards.
    std::vector<double> mean0(spec.s, 0.0);
    std::vector<double> m2(spec.s, 0.0);
    bool capped = false;
    for (int n = 1; n <= params.n0 && !capped; ++n) {
      if (!draw_batch()) {
        capped = true;
        break;
      }
      for (int l = 0; l < spec.s; ++l) {
        const double x = static_cast<double>(batch_sum[l]) / params.b;
        const double delta = x - mean0[l];
        mean0[l] += delta / n;
        m2[l] += delta * (x - mean0[l]);
      }
    }
    std::vector<double> variance(spec.s);
    for (int l = 0; l < spec.s; ++l) variance[l] = m2[l] / (params.n0 - 1);

    std::size_t pending = capped ? 0 : row.size();
    std::uint64_t r = static_cast<std::uint64_t>(params.n0);
    while (pending > 0) {
      for (int l = 0; l < spec.s; ++l) {
        const auto& list = targets[l];
        if (list.empty()) continue;
        const double mean =
            static_cast<double>(total[l]) / (static_cast<double>(r) * params.b);
        const double radius =
            continuation_radius(static_cast<double>(r), tolerance[l], eta[l],
                                variance[l], params.n0) /
            static_cast<double>(r);
        for (std::size_t m = 0; m < list.size(); ++m) {
          DecisionEntry& entry = row[result.decisions.column(l, m)];
          if (entry.decision != Decision::kPending) continue;
          if (mean + radius <= list[m]) {
            entry = {Decision::kFeasible, raw};
          } else if (mean - radius >= list[m]) {
            entry = {Decision::kInfeasible, raw};
          } else {
            continue;
          }
          --pending;
        }
      }
      if (pending == 0) break;
      if (!draw_batch()) {
        capped = true;
        break;
      }
      ++r;
    }
    result.capped = result.capped || capped;
    result.obs[i] = raw;
  }
  return result;
}

}  // namespace feaslab
