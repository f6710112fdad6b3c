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


#include "feaslab/config.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include "feaslab/error.hpp"

namespace feaslab {

namespace {

using json_io::Json;

const Json& require(const Json& j, const char* key) {
  if (!j.is_object()) throw SchemaError("expected an object", key);
  const auto it = j.find(key);
  if (it == j.end()) {
    throw SchemaError(std::string("missing field '") + key + "'", key);
  }
  return *it;
}

std::string text(const Json& j, const char* field) {
  if (!j.is_string()) {
    throw SchemaError(std::string("field '") + field + "' must be a string", field);
  }
  return j.get<std::string>();
}

std::uint64_t count(const Json& j, const char* field) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw SchemaError(std::string("field '") + field +
                          "' must be a non-negative integer",
                      field);
  }
  return j.get<std::uint64_t>();
}

std::vector<double> numbers(const Json& j, const char* field) {
  if (!j.is_array()) {
    throw SchemaError(std::string("field '") + field + "' must be an array", field);
  }
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) {
      throw SchemaError(std::string("field '") + field + "' must hold numbers", field);
    }
    out.push_back(v.get<double>());
  }
  return out;
}

void read_common(const Json& j, std::string& id, std::uint64_t& reps,
                 std::uint64_t& seed, unsigned& threads) {
  id = text(require(j, "id"), "id");
  if (const auto it = j.find("macro_reps"); it != j.end()) {
    reps = count(*it, "macro_reps");
  }
  if (const auto it = j.find("master_seed"); it != j.end()) {
    seed = json_io::seed_from_json(*it, "master_seed");
  }
  if (const auto it = j.find("threads"); it != j.end()) {
    threads = static_cast<unsigned>(count(*it, "threads"));
  }
}

std::vector<PassStep> passes_from_json(const Json& j) {
  if (!j.is_array()) throw SchemaError("passes must be an array", "passes");
  std::vector<PassStep> steps;
  for (const auto& step_json : j) {
    PassStep step;
    if (const auto alts = step_json.find("alternatives"); alts != step_json.end()) {
      if (!alts->is_array()) {
        throw SchemaError("alternatives must be an array", "alternatives");
      }
      for (const auto& alt_json : *alts) {
        PassAlternative alt;
        alt.when = parse_pass_condition(text(require(alt_json, "when"), "when"));
        alt.thresholds = json_io::thresholds_from_json(require(alt_json, "thresholds"));
        step.alternatives.push_back(std::move(alt));
      }
    } else {
      PassAlternative alt;
      if (const auto w = step_json.find("when"); w != step_json.end()) {
        alt.when = parse_pass_condition(text(*w, "when"));
      }
      alt.thresholds = json_io::thresholds_from_json(require(step_json, "thresholds"));
      step.alternatives.push_back(std::move(alt));
    }
    if (const auto pr = step_json.find("prune"); pr != step_json.end()) {
      if (!pr->is_boolean()) throw SchemaError("prune must be a boolean", "prune");
      step.prune = pr->get<bool>();
    }
    steps.push_back(std::move(step));
  }
  return steps;
}

struct TruthCache {
  std::map<std::string, Matrix> estimates;
};

Matrix truth_from_json(const Json* j, const SourceDescriptor& source,
                       unsigned threads, const std::filesystem::path& base_dir,
                       TruthCache& cache) {
  if (j == nullptr) {
    if (const auto* syn = std::get_if<SyntheticDescriptor>(&source)) return syn->p;
    throw SchemaError("inventory experiments need a truth entry", "truth");
  }
  if (const auto it = j->find("p"); it != j->end()) {
    return json_io::matrix_from_json(*it, "truth.p");
  }
  if (const auto it = j->find("csv"); it != j->end()) {
    std::filesystem::path path = text(*it, "csv");
    if (path.is_relative()) path = base_dir / path;
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open truth CSV " + path.string(), "csv");
    return read_truth_csv(in);
  }
  if (const auto it = j->find("estimate"); it != j->end()) {
    const std::uint64_t n = count(require(*it, "n"), "n");
    if (n < 2) throw DomainError("truth estimate needs n >= 2", "n");
    std::uint64_t seed = 0;
    if (const auto s = it->find("seed"); s != it->end()) {
      seed = json_io::seed_from_json(*s, "seed");
    }
    const std::string key =
        json_io::to_json(source).dump() + "|" + std::to_string(n) + "|" + std::to_string(seed);
    auto found = cache.estimates.find(key);
    if (found == cache.estimates.end()) {
      const auto live = make_source(source);
      found = cache.estimates
                  .emplace(key, estimate_truth(*live, n, seed, threads).p_hat)
                  .first;
    }
    return found->second;
  }
  throw SchemaError("truth needs one of p, csv or estimate", "truth");
}

ExperimentConfig experiment_from_json(const Json& j,
                                      const std::filesystem::path& base_dir,
                                      TruthCache& cache) {
  ExperimentConfig c;
  read_common(j, c.id, c.macro_reps, c.master_seed, c.threads);
  c.source = json_io::source_from_json(require(j, "source"));
  c.spec = json_io::spec_from_json(
      require(j, "spec"), static_cast<int>(json_io::source_systems(c.source)));
  if (static_cast<std::size_t>(c.spec.s) != json_io::source_constraints(c.source)) {
    throw DomainError("theta must list one value per source constraint", "theta");
  }
  c.procedure = procedure_from_json(require(j, "procedure"));
  c.passes = passes_from_json(require(j, "passes"));
  const auto truth = j.find("truth");
  c.truth = truth_from_json(truth == j.end() ? nullptr : &*truth, c.source,
                            c.threads, base_dir, cache);
  c.validate();
  return c;
}

StoptimeGridConfig stoptime_from_json(const Json& j) {
  StoptimeGridConfig c;
  read_common(j, c.id, c.macro_reps, c.master_seed, c.threads);
  if (const auto it = j.find("alpha"); it != j.end()) {
    if (!it->is_number()) throw SchemaError("alpha must be a number", "alpha");
    c.alpha = it->get<double>();
  }
  c.thetas = numbers(require(j, "theta"), "theta");
  c.ps = numbers(require(j, "p"), "p");
  const Json& rhos = require(j, "rho");
  if (!rhos.is_array()) throw SchemaError("rho must be an array", "rho");
  for (const auto& r : rhos) {
    if (r.is_number()) {
      c.rhos.push_back(parse_rho(json_io::Json(r).dump()));
    } else {
      c.rhos.push_back(parse_rho(text(r, "rho")));
    }
  }
  c.validate();
  return c;
}

}  // namespace

Procedure procedure_from_json(const Json& j) {
  Procedure p;
  const std::string type = text(require(j, "type"), "type");
  if (type == "brf") {
    p.kind = ProcedureKind::kBrf;
  } else if (type == "mpb") {
    p.kind = ProcedureKind::kMpb;
    p.heuristic = parse_heuristic(text(require(j, "heuristic"), "heuristic"));
  } else if (type == "rf") {
    p.kind = ProcedureKind::kRf;
    if (const auto it = j.find("n0"); it != j.end()) {
      p.rf.n0 = static_cast<int>(count(*it, "n0"));
    }
    if (const auto it = j.find("b"); it != j.end()) {
      p.rf.b = static_cast<int>(count(*it, "b"));
    }
    if (const auto it = j.find("tolerance_mode"); it != j.end()) {
      p.rf.tolerance_mode = parse_tolerance_mode(text(*it, "tolerance_mode"));
    }
    p.rf.validate();
  } else {
    throw DomainError("unknown procedure '" + type + "'", "type");
  }
  return p;
}

Json to_json(const Procedure& procedure) {
  switch (procedure.kind) {
    case ProcedureKind::kBrf:
      return {{"type", "brf"}};
    case ProcedureKind::kMpb:
      return {{"type", "mpb"},
              {"heuristic", std::string(to_string(procedure.heuristic))}};
    case ProcedureKind::kRf:
      return {{"type", "rf"},
              {"n0", procedure.rf.n0},
              {"b", procedure.rf.b},
              {"tolerance_mode", std::string(to_string(procedure.rf.tolerance_mode))}};
  }
  return {};
}

ConfigFile load_config(const Json& doc, const std::filesystem::path& base_dir) {
  const std::string kind = text(require(doc, "kind"), "kind");
  TruthCache cache;
  if (kind == "experiment") {
    return std::vector<ExperimentConfig>{experiment_from_json(doc, base_dir, cache)};
  }
  if (kind == "suite") {
    const Json& list = require(doc, "experiments");
    if (!list.is_array() || list.empty()) {
      throw SchemaError("experiments must be a non-empty array", "experiments");
    }
    std::vector<ExperimentConfig> out;
    for (const auto& e : list) out.push_back(experiment_from_json(e, base_dir, cache));
    return out;
  }
  if (kind == "stoptime_grid") return stoptime_from_json(doc);
  throw DomainError("unknown config kind '" + kind + "'", "kind");
}

ConfigFile load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open config " + path.string(), "config");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_config(json_io::parse(buffer.str()), path.parent_path());
}

}  // namespace feaslab
