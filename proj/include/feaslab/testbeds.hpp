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


// Observation sources: synthetic Bernoulli systems and a periodic-review
// (s, S) inventory simulator with two Bernoulli performance indicators.

#ifndef FEASLAB_TESTBEDS_HPP_
#define FEASLAB_TESTBEDS_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "feaslab/odds.hpp"
#include "feaslab/problem.hpp"

namespace feaslab {

enum class Coupling {
  kIndependent,    // one uniform lane per constraint
  kSharedUniform,  // one uniform per replication for every constraint
};

std::string_view to_string(Coupling c);
Coupling parse_coupling(std::string_view text);

class SyntheticSource final : public ObservationSource {
 public:
  // p[i][l] in (0,1).
  SyntheticSource(std::vector<std::vector<double>> p, Coupling coupling);

  std::size_t systems() const override { return p_.size(); }
  std::size_t constraints() const override { return s_; }
  void observe(std::size_t system, const ReplayableStream& stream,
               std::uint64_t n, std::span<std::uint8_t> bits) const override;

  const std::vector<std::vector<double>>& probabilities() const { return p_; }
  Coupling coupling() const { return coupling_; }

 private:
  std::vector<std::vector<double>> p_;
  std::size_t s_ = 0;
  Coupling coupling_;
};

struct InventoryParams {
  double demand_mean = 25.0;  // Poisson mean per period
  int periods = 12;
  double unit_cost = 3.0;
  double fixed_order_cost = 32.0;
  double holding_cost = 1.0;  // per item on hand at period end
  double penalty_cost = 5.0;  // per unit of lost demand
  double cost_threshold = 1400.0;

  void validate() const;
};

struct InventoryPolicy {
  int s = 0;  // reorder point
  int S = 0;  // order-up-to level

  friend bool operator==(const InventoryPolicy&, const InventoryPolicy&) = default;
};

struct YearOutcome {
  double total_cost = 0.0;
  bool stockout = false;
};

// Initial inventory S; each period: review, order up to S when on hand < s
// (arrives at once), demand with lost sales, holding on the remainder.
YearOutcome simulate_inventory_year(InventoryPolicy policy,
                                    std::span<const int> demand,
                                    const InventoryParams& params);

// Poisson inversion against a precomputed CDF.
class PoissonTable {
 public:
  explicit PoissonTable(double mean);
  int sample(double u) const;

 private:
  std::vector<double> cdf_;
};

// Bits per replication: Y1 = 1{total cost > threshold}, Y2 = stockout.
// Demand for period t of replication n is drawn from lane t of the stream.
class InventorySource final : public ObservationSource {
 public:
  InventorySource(std::vector<InventoryPolicy> policies, InventoryParams params);

  // s in {20, 22, ..., 40}, S in {40, 50, ..., 100}: 77 systems.
  static std::vector<InventoryPolicy> standard_grid();

  std::size_t systems() const override { return policies_.size(); }
  std::size_t constraints() const override { return 2; }
  void observe(std::size_t system, const ReplayableStream& stream,
               std::uint64_t n, std::span<std::uint8_t> bits) const override;

  const std::vector<InventoryPolicy>& policies() const { return policies_; }
  const InventoryParams& params() const { return params_; }

 private:
  std::vector<InventoryPolicy> policies_;
  InventoryParams params_;
  PoissonTable demand_;
};

struct SyntheticDescriptor {
  std::vector<std::vector<double>> p;
  Coupling coupling = Coupling::kIndependent;
};

struct InventoryDescriptor {
  std::vector<InventoryPolicy> policies;
  InventoryParams params;
};

// Serializable description of a source; make_source builds the live object.
using SourceDescriptor = std::variant<SyntheticDescriptor, InventoryDescriptor>;

std::unique_ptr<ObservationSource> make_source(const SourceDescriptor& desc);

struct TruthEstimate {
  std::vector<std::vector<double>> p_hat;  // [system][constraint]
  std::vector<std::vector<double>> se;
  std::uint64_t n = 0;
};

// Independent streams per system derived from `seed`; systems are split
// across `threads` workers.
TruthEstimate estimate_truth(const ObservationSource& source, std::uint64_t n,
                             std::uint64_t seed, unsigned threads = 1);

}  // namespace feaslab

#endif  // FEASLAB_TESTBEDS_HPP_
