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


#include "feaslab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>
#include <utility>

#include "feaslab/brf.hpp"
#include "feaslab/error.hpp"
#include "feaslab/parallel.hpp"

namespace feaslab {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

PassPlan make_plan(const Matrix& thresholds, std::size_t index) {
  PassPlan plan;
  plan.thresholds = thresholds;
  plan.pass_index = static_cast<int>(index);
  return plan;
}

bool condition_holds(PassCondition when, std::size_t feasible) {
  switch (when) {
    case PassCondition::kAlways:
      return true;
    case PassCondition::kMultipleFeasible:
      return feasible > 1;
    case PassCondition::kNoneFeasible:
      return feasible == 0;
  }
  return false;
}

void record_pass(RepOutcome& out, PassPlan plan, std::size_t alternative,
                 const PassResult& result) {
  out.plans.push_back(std::move(plan));
  out.alternatives.push_back(alternative);
  out.decisions.push_back(result.decisions);
  out.pass_obs.push_back(result.obs_total());
  out.pruned.emplace_back();
  out.pending += result.decisions.pending_count();
  out.capped = out.capped || result.capped;
}

void record_pass(RepOutcome& out, const PassRecord& rec, std::size_t alternative) {
  record_pass(out, rec.plan, alternative, rec.result);
  out.pruned.back() = rec.pruned;
  out.pending -= rec.result.decisions.pending_count() - unresolved(rec);
}

}  // namespace

std::string procedure_label(const Procedure& procedure) {
  switch (procedure.kind) {
    case ProcedureKind::kBrf:
      return "BRF";
    case ProcedureKind::kMpb:
      return "MPB_" + std::string(to_string(procedure.heuristic));
    case ProcedureKind::kRf:
      return "RF";
  }
  return "?";
}

std::string_view to_string(PassCondition c) {
  switch (c) {
    case PassCondition::kAlways:
      return "always";
    case PassCondition::kMultipleFeasible:
      return "multiple_feasible";
    case PassCondition::kNoneFeasible:
      return "none_feasible";
  }
  return "?";
}

PassCondition parse_pass_condition(std::string_view text) {
  if (text == "always") return PassCondition::kAlways;
  if (text == "multiple_feasible") return PassCondition::kMultipleFeasible;
  if (text == "none_feasible") return PassCondition::kNoneFeasible;
  throw DomainError("unknown pass condition '" + std::string(text) + "'", "when");
}

void ExperimentConfig::validate() const {
  spec.validate();
  if (macro_reps < 1) throw DomainError("macro_reps must be >= 1", "macro_reps");
  if (passes.empty()) throw DomainError("at least one pass is required", "passes");
  const auto source_obj = make_source(source);
  check_source(spec, *source_obj);
  if (passes.front().alternatives.size() != 1 ||
      passes.front().alternatives.front().when != PassCondition::kAlways) {
    throw DomainError("the first pass runs unconditionally", "passes");
  }
  if (passes.front().prune) throw DomainError("the first pass cannot prune", "prune");
  for (std::size_t w = 0; w < passes.size(); ++w) {
    if (passes[w].alternatives.empty()) {
      throw DomainError("every pass step needs an alternative", "passes");
    }
    for (const auto& alt : passes[w].alternatives) {
      make_plan(alt.thresholds, w + 1).validate(spec.s);
    }
  }
  if (procedure.kind == ProcedureKind::kRf) procedure.rf.validate();
  if (truth.size() != static_cast<std::size_t>(spec.k)) {
    throw DomainError("truth must cover every system", "truth");
  }
  for (const auto& row : truth) {
    if (row.size() != static_cast<std::size_t>(spec.s)) {
      throw DomainError("truth must cover every constraint", "truth");
    }
    for (double p : row) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError("truth probabilities lie in [0,1]", "truth");
      }
    }
  }
}

Classification truth_class(double p, double h, OddsRatio theta) {
  if (p <= 0.0) return Classification::kDesirable;
  if (p >= 1.0) return Classification::kUnacceptable;
  return classify(p, h, theta);
}

bool score_cd(std::span<const PassPlan> plans,
              std::span<const DecisionMatrix> decisions, const Matrix& truth,
              const ProblemSpec& spec,
              std::span<const std::vector<std::size_t>> pruned) {
  if (truth.size() < static_cast<std::size_t>(spec.k)) {
    throw DomainError("truth must cover every system", "truth");
  }
  for (std::size_t w = 0; w < plans.size(); ++w) {
    const PassPlan& plan = plans[w];
    const DecisionMatrix& z = decisions[w];
    for (std::size_t i = 0; i < z.systems(); ++i) {
      if (w < pruned.size() && std::ranges::binary_search(pruned[w], i)) continue;
      if (truth[i].size() < plan.thresholds.size()) {
        throw DomainError("truth must cover every constraint", "truth");
      }
      for (std::size_t l = 0; l < plan.thresholds.size(); ++l) {
        for (std::size_t m = 0; m < plan.thresholds[l].size(); ++m) {
          const auto c = truth_class(truth[i][l], plan.thresholds[l][m], spec.odds(l));
          const Decision d = z.at(i, l, m).decision;
          if (c == Classification::kDesirable && d != Decision::kFeasible) return false;
          if (c == Classification::kUnacceptable && d != Decision::kInfeasible) {
            return false;
          }
        }
      }
    }
  }
  return true;
}

std::size_t feasible_systems(std::span<const PassPlan> plans,
                             std::span<const DecisionMatrix> decisions) {
  if (plans.empty()) return 0;
  const std::size_t s = plans.front().thresholds.size();
  const std::size_t k = decisions.front().systems();
  // Smallest tested threshold per constraint and where it was tested.
  struct Where {
    double h = 2.0;
    std::size_t w = 0, m = 0;
  };
  std::vector<Where> smallest(s);
  for (std::size_t w = 0; w < plans.size(); ++w) {
    for (std::size_t l = 0; l < s; ++l) {
      const auto& list = plans[w].thresholds[l];
      if (!list.empty() && list.front() < smallest[l].h) smallest[l] = {list.front(), w, 0};
    }
  }
  std::size_t count = 0;
  for (std::size_t i = 0; i < k; ++i) {
    bool tested = false;
    bool feasible = true;
    for (std::size_t l = 0; l < s; ++l) {
      if (smallest[l].h > 1.0) continue;
      tested = true;
      const auto& where = smallest[l];
      feasible = feasible &&
                 decisions[where.w].at(i, l, where.m).decision == Decision::kFeasible;
    }
    if (tested && feasible) ++count;
  }
  return count;
}

std::vector<std::size_t> prunable_systems(std::span<const PassPlan> plans,
                                          std::span<const DecisionMatrix> decisions,
                                          const PassPlan& next) {
  std::vector<std::size_t> out;
  if (decisions.empty()) return out;
  for (std::size_t i = 0; i < decisions.front().systems(); ++i) {
    bool inferior = false;
    for (std::size_t l = 0; l < next.thresholds.size() && !inferior; ++l) {
      if (next.thresholds[l].empty()) continue;
      const double top = next.thresholds[l].back();
      for (std::size_t w = 0; w < plans.size() && !inferior; ++w) {
        const auto& list = plans[w].thresholds[l];
        for (std::size_t m = 0; m < list.size(); ++m) {
          if (list[m] >= top &&
              decisions[w].at(i, l, m).decision == Decision::kInfeasible) {
            inferior = true;
            break;
          }
        }
      }
    }
    if (inferior) out.push_back(i);
  }
  return out;
}

std::vector<int> mpb_planned_counts(const ProblemSpec& spec,
                                    std::span<const PassStep> passes) {
  std::vector<int> counts(spec.s, 0);
  for (const auto& step : passes) {
    for (int l = 0; l < spec.s; ++l) {
      std::size_t widest = 0;
      for (const auto& alt : step.alternatives) {
        widest = std::max(widest, alt.thresholds.at(l).size());
      }
      counts[l] += static_cast<int>(widest);
    }
  }
  if (spec.expect_more_passes) {
    for (int& c : counts) c = std::max(c, 2);
  }
  return counts;
}

std::uint64_t RepOutcome::obs_total() const {
  std::uint64_t total = 0;
  for (auto o : pass_obs) total += o;
  return total;
}

std::uint64_t rep_seed(std::uint64_t master_seed, std::uint64_t rep) {
  return derive_seed(master_seed, rep);
}

RepOutcome run_rep(const ExperimentConfig& config,
                   const ObservationSource& source, std::uint64_t seed) {
  RepOutcome out;
  const ProblemSpec& spec = config.spec;
  const PassPlan first = make_plan(config.passes.front().alternatives.front().thresholds, 1);

  switch (config.procedure.kind) {
    case ProcedureKind::kBrf: {
      const FirstPassResult r = run_first_pass(spec, first, source, seed);
      record_pass(out, first, 0, r.pass);
      break;
    }
    case ProcedureKind::kRf: {
      const PassResult r = run_rf(spec, first, config.procedure.rf, source, seed);
      record_pass(out, first, 0, r);
      break;
    }
    case ProcedureKind::kMpb: {
      const auto counts = mpb_planned_counts(spec, config.passes);
      Session session(spec, calibrate(spec, counts), seed);
      record_pass(out, session.run_pass(first, std::nullopt, source), 0);
      for (std::size_t w = 1; w < config.passes.size(); ++w) {
        const std::size_t feasible = feasible_systems(out.plans, out.decisions);
        const auto& alts = config.passes[w].alternatives;
        std::optional<std::size_t> chosen;
        for (std::size_t a = 0; a < alts.size() && !chosen; ++a) {
          if (condition_holds(alts[a].when, feasible)) chosen = a;
        }
        if (!chosen) break;
        PassPlan plan = make_plan(alts[*chosen].thresholds, w + 1);
        std::vector<std::size_t> pruned;
        if (config.passes[w].prune) pruned = prunable_systems(out.plans, out.decisions, plan);
        const PassRecord& rec =
            session.run_pass(plan, config.procedure.heuristic, source, pruned);
        record_pass(out, rec, *chosen);
      }
      break;
    }
  }
  out.correct = score_cd(out.plans, out.decisions, config.truth, spec, out.pruned);
  return out;
}

std::vector<RepOutcome> run_reps(const ExperimentConfig& config) {
  config.validate();
  const auto source = make_source(config.source);
  std::vector<RepOutcome> outcomes(config.macro_reps);
  parallel_for(outcomes.size(), config.threads, [&](std::size_t rep) {
    outcomes[rep] = run_rep(config, *source, rep_seed(config.master_seed, rep));
  });
  return outcomes;
}

Estimate mean_estimate(std::span<const double> values) {
  Estimate e;
  if (values.empty()) return e;
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  e.mean = sum / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - e.mean) * (v - e.mean);
    e.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return e;
}

Estimate proportion_estimate(std::uint64_t successes, std::uint64_t n) {
  Estimate e;
  if (n == 0) return e;
  e.mean = static_cast<double>(successes) / static_cast<double>(n);
  if (n > 1) e.se = std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(n));
  return e;
}

ExperimentReport summarize(const ExperimentConfig& config,
                           std::span<const RepOutcome> outcomes) {
  ExperimentReport report;
  report.config_id = config.id;
  report.procedure = procedure_label(config.procedure);
  report.macro_reps = outcomes.size();
  report.se_available = outcomes.size() > 1;

  std::size_t max_passes = 0;
  std::uint64_t correct = 0;
  for (const auto& o : outcomes) {
    max_passes = std::max(max_passes, o.pass_obs.size());
    correct += o.correct ? 1 : 0;
    report.undecided += o.pending;
    report.capped_reps += o.capped ? 1 : 0;
  }
  report.pcd = proportion_estimate(correct, outcomes.size());

  std::vector<double> values(outcomes.size());
  report.pass_reps.assign(max_passes, 0);
  for (std::size_t w = 0; w < max_passes; ++w) {
    for (std::size_t r = 0; r < outcomes.size(); ++r) {
      const auto& obs = outcomes[r].pass_obs;
      values[r] = w < obs.size() ? static_cast<double>(obs[w]) : 0.0;
      if (w < obs.size()) ++report.pass_reps[w];
    }
    report.pass_obs.push_back(mean_estimate(values));
  }
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    values[r] = static_cast<double>(outcomes[r].obs_total());
  }
  report.obs_total = mean_estimate(values);

  // (pass, constraint, threshold) -> (reps tested, feasible systems summed).
  std::map<std::tuple<std::size_t, std::size_t, double>,
           std::pair<std::uint64_t, std::uint64_t>>
      table;
  for (const auto& o : outcomes) {
    for (std::size_t w = 0; w < o.plans.size(); ++w) {
      const auto& plan = o.plans[w];
      const auto& z = o.decisions[w];
      for (std::size_t l = 0; l < plan.thresholds.size(); ++l) {
        for (std::size_t m = 0; m < plan.thresholds[l].size(); ++m) {
          auto& cell = table[{w + 1, l, plan.thresholds[l][m]}];
          ++cell.first;
          for (std::size_t i = 0; i < z.systems(); ++i) {
            if (z.at(i, l, m).decision == Decision::kFeasible) ++cell.second;
          }
        }
      }
    }
  }
  for (const auto& [key, cell] : table) {
    FeasibleCount fc;
    std::tie(fc.pass, fc.constraint, fc.threshold) = key;
    fc.reps = cell.first;
    fc.mean = static_cast<double>(cell.second) / static_cast<double>(cell.first);
    report.feasible.push_back(fc);
  }
  return report;
}

ExperimentReport run_macro(const ExperimentConfig& config) {
  const auto outcomes = run_reps(config);
  return summarize(config, outcomes);
}

std::string RhoSpec::label() const {
  if (!times_theta) return fmt(factor);
  return factor == 1.0 ? "theta" : fmt(factor) + "theta";
}

RhoSpec parse_rho(std::string_view text) {
  RhoSpec rho;
  std::string body(text);
  const auto pos = body.find("theta");
  if (pos != std::string::npos) {
    if (pos + 5 != body.size()) throw DomainError("bad rho '" + body + "'", "rho");
    rho.times_theta = true;
    body = body.substr(0, pos);
    if (body.empty()) body = "1";
  }
  std::size_t used = 0;
  try {
    rho.factor = std::stod(body, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != body.size() || !(rho.factor >= 1.0)) {
    throw DomainError("rho must be a number >= 1, optionally times theta", "rho");
  }
  return rho;
}

void StoptimeGridConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)", "alpha");
  if (macro_reps < 1) throw DomainError("macro_reps must be >= 1", "macro_reps");
  if (thetas.empty() || ps.empty() || rhos.empty()) {
    throw DomainError("grid needs theta, p and rho values", "grid");
  }
  for (double t : thetas) OddsRatio{t};
  for (double p : ps) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("p must lie in (0,1)", "p");
  }
}

std::vector<StoptimeCell> run_stoptime_grid(const StoptimeGridConfig& config) {
  config.validate();
  std::vector<StoptimeCell> cells;
  for (double theta : config.thetas) {
    for (double p : config.ps) {
      for (const auto& rho : config.rhos) {
        StoptimeCell c;
        c.theta = theta;
        c.p = p;
        c.rho = rho;
        c.h = p / (p + rho.value(theta) * (1.0 - p));
        cells.push_back(c);
      }
    }
  }

  for (std::size_t idx = 0; idx < cells.size(); ++idx) {
    StoptimeCell& c = cells[idx];
    ProblemSpec spec;
    spec.alpha = config.alpha;
    spec.theta = {c.theta};
    PassPlan plan;
    plan.thresholds = {{c.h}};
    const auto cal = calibrate(spec, planned_counts(spec, std::span(&plan, 1)));
    c.halfwidth = cal.halfwidth.front();
    c.theory = expected_stopping_time(c.p, c.h, c.halfwidth);
    const double tH = std::pow(c.theta, c.halfwidth);
    c.cd_bound = tH / (1.0 + tH);

    const SyntheticSource source({{c.p}}, Coupling::kIndependent);
    const Matrix truth = {{c.p}};
    const std::uint64_t cell_seed = derive_seed(config.master_seed, idx);
    std::vector<double> stages(config.macro_reps);
    std::vector<std::uint8_t> correct(config.macro_reps);
    parallel_for(stages.size(), config.threads, [&](std::size_t rep) {
      const auto r = run_first_pass(spec, cal, plan, source, rep_seed(cell_seed, rep));
      stages[rep] = static_cast<double>(r.pass.decisions.at(0, 0, 0).stage);
      const PassPlan plans[] = {plan};
      correct[rep] = score_cd(plans, std::span(&r.pass.decisions, 1), truth, spec);
    });
    c.obs = mean_estimate(stages);
    std::uint64_t hits = 0;
    for (auto b : correct) hits += b;
    c.cd = proportion_estimate(hits, config.macro_reps);
  }
  return cells;
}

void write_csv_header(std::ostream& out) {
  out << "config_id,procedure,pass,metric,value,se\n";
}

namespace {

void row(std::ostream& out, const std::string& id, const std::string& proc,
         const std::string& pass, const std::string& metric, double value,
         std::optional<double> se) {
  out << id << ',' << proc << ',' << pass << ',' << metric << ',' << fmt(value) << ',';
  if (se) out << fmt(*se);
  out << '\n';
}

}  // namespace

void write_csv(std::ostream& out, const ExperimentReport& r) {
  auto se = [&](double v) -> std::optional<double> {
    return r.se_available ? std::optional(v) : std::nullopt;
  };
  const auto& id = r.config_id;
  const auto& proc = r.procedure;
  row(out, id, proc, "all", "macro_reps", static_cast<double>(r.macro_reps), {});
  row(out, id, proc, "all", "pcd", r.pcd.mean, se(r.pcd.se));
  row(out, id, proc, "all", "obs_total", r.obs_total.mean, se(r.obs_total.se));
  row(out, id, proc, "all", "undecided", static_cast<double>(r.undecided), {});
  row(out, id, proc, "all", "capped_reps", static_cast<double>(r.capped_reps), {});
  for (std::size_t w = 0; w < r.pass_obs.size(); ++w) {
    const std::string pass = std::to_string(w + 1);
    row(out, id, proc, pass, "obs", r.pass_obs[w].mean, se(r.pass_obs[w].se));
    row(out, id, proc, pass, "reps_run", static_cast<double>(r.pass_reps[w]), {});
  }
  for (const auto& f : r.feasible) {
    const std::string metric = "feasible_count[l=" + std::to_string(f.constraint + 1) +
                               ";h=" + fmt(f.threshold) + "]";
    row(out, id, proc, std::to_string(f.pass), metric, f.mean, {});
  }
}

void write_csv(std::ostream& out, const StoptimeGridConfig& config,
               std::span<const StoptimeCell> cells) {
  const bool with_se = config.macro_reps > 1;
  for (const auto& c : cells) {
    const std::string cell = "[theta=" + fmt(c.theta) + ";p=" + fmt(c.p) +
                             ";rho=" + c.rho.label() + "]";
    auto se = [&](double v) -> std::optional<double> {
      return with_se ? std::optional(v) : std::nullopt;
    };
    row(out, config.id, "BRF", "1", "h" + cell, c.h, {});
    row(out, config.id, "BRF", "1", "H" + cell, c.halfwidth, {});
    row(out, config.id, "BRF", "1", "stoptime_theory" + cell, c.theory, {});
    row(out, config.id, "BRF", "1", "stoptime" + cell, c.obs.mean, se(c.obs.se));
    row(out, config.id, "BRF", "1", "cd_rate" + cell, c.cd.mean, se(c.cd.se));
    row(out, config.id, "BRF", "1", "cd_bound" + cell, c.cd_bound, {});
  }
}

void write_truth_csv(std::ostream& out, const TruthEstimate& truth) {
  out << "system,constraint,p_hat,se,n\n";
  for (std::size_t i = 0; i < truth.p_hat.size(); ++i) {
    for (std::size_t l = 0; l < truth.p_hat[i].size(); ++l) {
      out << i << ',' << l << ',' << fmt(truth.p_hat[i][l]) << ','
          << fmt(truth.se[i][l]) << ',' << truth.n << '\n';
    }
  }
}

Matrix read_truth_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("system,constraint,p_hat", 0) != 0) {
    throw SchemaError("truth CSV must start with system,constraint,p_hat,se,n", "csv");
  }
  Matrix p;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string a, b, c;
    if (!std::getline(fields, a, ',') || !std::getline(fields, b, ',') ||
        !std::getline(fields, c, ',')) {
      throw SchemaError("truth CSV row needs system,constraint,p_hat", "csv");
    }
    std::size_t i = 0, l = 0;
    double v = 0.0;
    try {
      i = std::stoul(a);
      l = std::stoul(b);
      v = std::stod(c);
    } catch (const std::exception&) {
      throw SchemaError("truth CSV row is not numeric: " + line, "csv");
    }
    if (p.size() <= i) p.resize(i + 1);
    if (p[i].size() <= l) p[i].resize(l + 1, -1.0);
    p[i][l] = v;
  }
  for (const auto& r : p) {
    for (double v : r) {
      if (v < 0.0) throw SchemaError("truth CSV has gaps", "csv");
    }
  }
  return p;
}

}  // namespace feaslab
