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


// Macro-replication experiment runner: per-replication procedure dispatch,
// correctness scoring against a truth matrix, aggregation with standard
// errors, and CSV emission.

#ifndef FEASLAB_HARNESS_HPP_
#define FEASLAB_HARNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "feaslab/multipass.hpp"
#include "feaslab/odds.hpp"
#include "feaslab/problem.hpp"
#include "feaslab/rf.hpp"
#include "feaslab/testbeds.hpp"

namespace feaslab {

using Matrix = std::vector<std::vector<double>>;

enum class ProcedureKind { kBrf, kMpb, kRf };

struct Procedure {
  ProcedureKind kind = ProcedureKind::kBrf;
  Heuristic heuristic = Heuristic::kBN;  // MPB passes w >= 2
  RfParams rf;
};

// "BRF", "MPB_B", "MPB_N", "MPB_BN" or "RF".
std::string procedure_label(const Procedure& procedure);

// When a later pass runs, judged on the number of systems that are Feasible
// at the smallest tested threshold of every tested constraint so far.
enum class PassCondition { kAlways, kMultipleFeasible, kNoneFeasible };

std::string_view to_string(PassCondition c);
PassCondition parse_pass_condition(std::string_view text);

struct PassAlternative {
  PassCondition when = PassCondition::kAlways;
  Matrix thresholds;  // per constraint
};

// The first alternative whose condition holds runs; if none holds the
// replication stops after the previous pass.
struct PassStep {
  std::vector<PassAlternative> alternatives;
  // Leave out systems already Infeasible, on some constraint the pass tests,
  // at a threshold at or above every threshold the pass lists for it. Such a
  // system fails every threshold combination of the pass.
  bool prune = false;
};

struct ExperimentConfig {
  std::string id;
  ProblemSpec spec;  // k and s must match the source
  Procedure procedure;
  std::vector<PassStep> passes;  // BRF and RF run passes[0] only
  SourceDescriptor source;
  Matrix truth;  // p[system][constraint]
  std::uint64_t macro_reps = 1;
  std::uint64_t master_seed = 0;
  unsigned threads = 1;  // 0: hardware concurrency

  void validate() const;
};

// Truth class with the closed endpoints admitted: p = 0 is Desirable and
// p = 1 Unacceptable for every threshold in (0,1).
Classification truth_class(double p, double h, OddsRatio theta);

// 1 iff every Desirable entry is Feasible and every Unacceptable entry is
// Infeasible, over all passes. Pending never counts as correct. Rows of
// systems pruned from a pass (pruned[w], when given) are not scored.
bool score_cd(std::span<const PassPlan> plans,
              std::span<const DecisionMatrix> decisions, const Matrix& truth,
              const ProblemSpec& spec,
              std::span<const std::vector<std::size_t>> pruned = {});

// Systems Feasible at the smallest tested threshold of every constraint
// tested in any of `plans`; a system with no tested constraint is excluded.
std::size_t feasible_systems(std::span<const PassPlan> plans,
                             std::span<const DecisionMatrix> decisions);

// Systems that a pruning pass with plan `next` leaves out, ascending.
std::vector<std::size_t> prunable_systems(std::span<const PassPlan> plans,
                                          std::span<const DecisionMatrix> decisions,
                                          const PassPlan& next);

// Threshold counts used to calibrate an MPB session: per constraint, the sum
// over steps of the largest alternative, raised to 2 when more passes are
// expected.
std::vector<int> mpb_planned_counts(const ProblemSpec& spec,
                                    std::span<const PassStep> passes);

struct RepOutcome {
  std::vector<PassPlan> plans;  // executed passes
  std::vector<std::size_t> alternatives;
  std::vector<DecisionMatrix> decisions;
  std::vector<std::uint64_t> pass_obs;
  std::vector<std::vector<std::size_t>> pruned;  // per executed pass
  std::uint64_t pending = 0;  // outside pruned rows
  bool capped = false;
  bool correct = false;

  std::uint64_t obs_total() const;
};

std::uint64_t rep_seed(std::uint64_t master_seed, std::uint64_t rep);

RepOutcome run_rep(const ExperimentConfig& config,
                   const ObservationSource& source, std::uint64_t seed);

std::vector<RepOutcome> run_reps(const ExperimentConfig& config);

struct Estimate {
  double mean = 0.0;
  double se = 0.0;  // sample s.d. / sqrt(n); binomial for proportions
};

struct FeasibleCount {
  std::size_t pass = 1;
  std::size_t constraint = 0;
  double threshold = 0.0;
  std::uint64_t reps = 0;  // replications in which it was tested
  double mean = 0.0;       // mean number of Feasible systems over those reps
};

struct ExperimentReport {
  std::string config_id;
  std::string procedure;
  std::uint64_t macro_reps = 0;
  bool se_available = false;  // false when macro_reps == 1
  Estimate pcd;
  std::vector<Estimate> pass_obs;  // zero for reps that skipped the pass
  std::vector<std::uint64_t> pass_reps;
  Estimate obs_total;
  std::uint64_t undecided = 0;  // Pending entries summed over reps
  std::uint64_t capped_reps = 0;
  std::vector<FeasibleCount> feasible;
};

Estimate mean_estimate(std::span<const double> values);
Estimate proportion_estimate(std::uint64_t successes, std::uint64_t n);

ExperimentReport summarize(const ExperimentConfig& config,
                           std::span<const RepOutcome> outcomes);

ExperimentReport run_macro(const ExperimentConfig& config);

// Single system, single threshold placed at odds ratio rho from p, so that
// p sits above h (the system is Acceptable at rho = 1, Unacceptable beyond).
struct RhoSpec {
  double factor = 1.0;
  bool times_theta = false;  // rho = factor * theta

  double value(double theta) const { return times_theta ? factor * theta : factor; }
  std::string label() const;
};

RhoSpec parse_rho(std::string_view text);

struct StoptimeGridConfig {
  std::string id;
  double alpha = 0.05;
  std::vector<double> thetas;
  std::vector<double> ps;
  std::vector<RhoSpec> rhos;
  std::uint64_t macro_reps = 1;
  std::uint64_t master_seed = 0;
  unsigned threads = 1;

  void validate() const;
};

struct StoptimeCell {
  double theta = 0.0;
  double p = 0.0;
  RhoSpec rho;
  double h = 0.0;
  int halfwidth = 0;
  double theory = 0.0;     // expected stopping time of the walk
  Estimate obs;            // empirical stopping stage
  Estimate cd;             // correct-decision rate
  double cd_bound = 0.0;   // theta^H / (1 + theta^H)
};

std::vector<StoptimeCell> run_stoptime_grid(const StoptimeGridConfig& config);

// Deterministic CSV with header config_id,procedure,pass,metric,value,se.
void write_csv_header(std::ostream& out);
void write_csv(std::ostream& out, const ExperimentReport& report);
void write_csv(std::ostream& out, const StoptimeGridConfig& config,
               std::span<const StoptimeCell> cells);

// Columns system,constraint,p_hat,se,n (0-based indices).
void write_truth_csv(std::ostream& out, const TruthEstimate& truth);
Matrix read_truth_csv(std::istream& in);

}  // namespace feaslab

#endif  // FEASLAB_HARNESS_HPP_
