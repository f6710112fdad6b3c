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


#include "feaslab/testbeds.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "feaslab/error.hpp"

namespace feaslab {

std::string_view to_string(Coupling c) {
  return c == Coupling::kSharedUniform ? "shared_uniform" : "independent";
}

Coupling parse_coupling(std::string_view text) {
  if (text == "independent") return Coupling::kIndependent;
  if (text == "shared_uniform") return Coupling::kSharedUniform;
  throw DomainError("unknown coupling '" + std::string(text) + "'", "coupling");
}

SyntheticSource::SyntheticSource(std::vector<std::vector<double>> p,
                                 Coupling coupling)
    : p_(std::move(p)), coupling_(coupling) {
  if (p_.empty() || p_.front().empty()) {
    throw DomainError("probability matrix is empty", "p");
  }
  s_ = p_.front().size();
  for (const auto& row : p_) {
    if (row.size() != s_) throw DomainError("probability matrix is ragged", "p");
    for (double x : row) {
      if (!(x > 0.0 && x < 1.0)) {
        throw DomainError("probabilities must lie in (0,1), got " +
                              std::to_string(x),
                          "p");
      }
    }
  }
}

void SyntheticSource::observe(std::size_t system, const ReplayableStream& stream,
                              std::uint64_t n,
                              std::span<std::uint8_t> bits) const {
  const auto& p = p_[system];
  if (coupling_ == Coupling::kSharedUniform) {
    const double u = stream.uniform_at(n, 0);
    for (std::size_t l = 0; l < s_; ++l) bits[l] = u < p[l] ? 1 : 0;
  } else {
    for (std::size_t l = 0; l < s_; ++l) {
      bits[l] = stream.bernoulli_at(n, p[l], static_cast<std::uint32_t>(l));
    }
  }
}

void InventoryParams::validate() const {
  if (!(demand_mean > 0.0)) {
    throw DomainError("demand mean must be positive", "demand_mean");
  }
  if (periods < 1) throw DomainError("periods must be >= 1", "periods");
  if (unit_cost < 0 || fixed_order_cost < 0 || holding_cost < 0 ||
      penalty_cost < 0) {
    throw DomainError("costs must be non-negative", "costs");
  }
}

YearOutcome simulate_inventory_year(InventoryPolicy policy,
                                    std::span<const int> demand,
                                    const InventoryParams& params) {
  YearOutcome out;
  int on_hand = policy.S;
  for (int d : demand) {
    if (d < 0) throw DomainError("negative demand", "demand");
    if (on_hand < policy.s) {
      const int qty = policy.S - on_hand;
      out.total_cost += params.fixed_order_cost + params.unit_cost * qty;
      on_hand = policy.S;
    }
    if (d > on_hand) {
      out.total_cost += params.penalty_cost * (d - on_hand);
      out.stockout = true;
      on_hand = 0;
    } else {
      on_hand -= d;
    }
    out.total_cost += params.holding_cost * on_hand;
  }
  return out;
}

PoissonTable::PoissonTable(double mean) {
  if (!(mean > 0.0) || mean > 1e4) {
    throw DomainError("Poisson mean must lie in (0, 1e4]", "demand_mean");
  }
  // Extend the table until the tail mass is below double resolution.
  double pmf = std::exp(-mean);
  double cdf = pmf;
  cdf_.push_back(cdf);
  for (int k = 1; cdf < 1.0 - 1e-16 || k <= mean; ++k) {
    pmf *= mean / k;
    cdf += pmf;
    cdf_.push_back(std::min(cdf, 1.0));
    if (pmf == 0.0 && k > mean) break;
  }
}

int PoissonTable::sample(double u) const {
  // Smallest d with F(d) > u.
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<int>(it - cdf_.begin());
}

InventorySource::InventorySource(std::vector<InventoryPolicy> policies,
                                 InventoryParams params)
    : policies_(std::move(policies)),
      params_(params),
      demand_(params.demand_mean) {
  params_.validate();
  if (policies_.empty()) throw DomainError("no inventory policies", "policies");
  for (const auto& p : policies_) {
    if (p.s < 0 || p.S < p.s || p.S < 1) {
      throw DomainError("policy needs 0 <= s <= S and S >= 1", "policies");
    }
  }
}

std::vector<InventoryPolicy> InventorySource::standard_grid() {
  std::vector<InventoryPolicy> grid;
  for (int s = 20; s <= 40; s += 2) {
    for (int S = 40; S <= 100; S += 10) grid.push_back({s, S});
  }
  return grid;
}

void InventorySource::observe(std::size_t system, const ReplayableStream& stream,
                              std::uint64_t n,
                              std::span<std::uint8_t> bits) const {
  constexpr int kStackPeriods = 64;
  int stack[kStackPeriods];
  std::vector<int> heap;
  int* demand = stack;
  if (params_.periods > kStackPeriods) {
    heap.resize(params_.periods);
    demand = heap.data();
  }
  for (int t = 0; t < params_.periods; ++t) {
    demand[t] = demand_.sample(stream.uniform_at(n, static_cast<std::uint32_t>(t)));
  }
  const YearOutcome year = simulate_inventory_year(
      policies_[system],
      std::span<const int>(demand, static_cast<std::size_t>(params_.periods)),
      params_);
  bits[0] = year.total_cost > params_.cost_threshold ? 1 : 0;
  bits[1] = year.stockout ? 1 : 0;
}

std::unique_ptr<ObservationSource> make_source(const SourceDescriptor& desc) {
  if (const auto* syn = std::get_if<SyntheticDescriptor>(&desc)) {
    return std::make_unique<SyntheticSource>(syn->p, syn->coupling);
  }
  const auto& inv = std::get<InventoryDescriptor>(desc);
  return std::make_unique<InventorySource>(inv.policies, inv.params);
}

TruthEstimate estimate_truth(const ObservationSource& source, std::uint64_t n,
                             std::uint64_t seed, unsigned threads) {
  if (n == 0) throw DomainError("replication count must be >= 1", "n");
  const std::size_t k = source.systems();
  const std::size_t s = source.constraints();
  TruthEstimate out;
  out.n = n;
  out.p_hat.assign(k, std::vector<double>(s, 0.0));
  out.se.assign(k, std::vector<double>(s, 0.0));

  auto work = [&](std::size_t first, std::size_t stride) {
    std::vector<std::uint8_t> bits(s);
    std::vector<std::uint64_t> count(s);
    for (std::size_t i = first; i < k; i += stride) {
      std::fill(count.begin(), count.end(), 0);
      const ReplayableStream ys(
          StreamKey{derive_seed(seed, i), StreamTag::kObservation});
      for (std::uint64_t r = 1; r <= n; ++r) {
        source.observe(i, ys, r, bits);
        for (std::size_t l = 0; l < s; ++l) count[l] += bits[l];
      }
      for (std::size_t l = 0; l < s; ++l) {
        const double p = static_cast<double>(count[l]) / static_cast<double>(n);
        out.p_hat[i][l] = p;
        out.se[i][l] = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
      }
    }
  };

  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(threads, k));
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  }
  return out;
}

}  // namespace feaslab
