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


#include <string>
#include <utility>

#include "feaslab/error.hpp"
#include "feaslab/harness.hpp"
#include "feaslab/json_io.hpp"

namespace feaslab::json_io {

namespace {

constexpr int kFormatVersion = 1;

const Json& at(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw SchemaError(std::string("missing field '") + key + "'", key);
  return *it;
}

Json fraction_to_json(Fraction f) { return {{"num", f.num}, {"den", f.den}}; }

Fraction fraction_from_json(const Json& j) {
  return {at(j, "num").get<std::int64_t>(), at(j, "den").get<std::int64_t>()};
}

Json key_to_json(StreamKey key) {
  return {{"seed", seed_to_json(key.seed)}, {"tag", static_cast<std::uint32_t>(key.tag)}};
}

StreamKey key_from_json(const Json& j) {
  StreamKey key;
  key.seed = seed_from_json(at(j, "seed"), "seed");
  key.tag = static_cast<StreamTag>(at(j, "tag").get<std::uint32_t>());
  return key;
}

Json calibration_to_json(const Calibration& c) {
  return {{"beta", c.beta}, {"beta_l", c.beta_l}, {"halfwidth", c.halfwidth}};
}

Calibration calibration_from_json(const Json& j) {
  Calibration c;
  c.beta = at(j, "beta").get<double>();
  c.beta_l = at(j, "beta_l").get<std::vector<double>>();
  c.halfwidth = at(j, "halfwidth").get<std::vector<int>>();
  return c;
}

Json record_to_json(const PassRecord& rec) {
  Json j;
  j["thresholds"] = thresholds_to_json(rec.plan.thresholds);
  j["pass"] = rec.plan.pass_index;
  j["heuristic"] =
      rec.heuristic ? Json(std::string(to_string(*rec.heuristic))) : Json(nullptr);
  const DecisionMatrix& z = rec.result.decisions;
  Json rows = Json::array();
  for (std::size_t i = 0; i < z.systems(); ++i) {
    Json row = Json::array();
    for (const auto& e : z.row(i)) {
      row.push_back({static_cast<int>(e.decision), e.stage});
    }
    rows.push_back(std::move(row));
  }
  j["decisions"] = std::move(rows);
  j["obs"] = rec.result.obs;
  j["capped"] = rec.result.capped;
  j["initial_decisions"] = rec.initial_decisions;
  j["n_rule_decisions"] = rec.n_rule_decisions;
  j["b_rule_decisions"] = rec.b_rule_decisions;
  if (!rec.pruned.empty()) j["pruned"] = rec.pruned;
  j["warnings"] = rec.warnings;
  return j;
}

PassRecord record_from_json(const Json& j, std::size_t systems) {
  PassRecord rec;
  rec.plan.thresholds = at(j, "thresholds").get<std::vector<std::vector<double>>>();
  rec.plan.pass_index = at(j, "pass").get<int>();
  if (const Json& h = at(j, "heuristic"); !h.is_null()) {
    rec.heuristic = parse_heuristic(h.get<std::string>());
  }
  rec.result.decisions = DecisionMatrix(systems, rec.plan);
  const Json& rows = at(j, "decisions");
  if (rows.size() != systems) throw SchemaError("decision rows do not match k", "decisions");
  for (std::size_t i = 0; i < systems; ++i) {
    auto row = rec.result.decisions.row(i);
    if (rows[i].size() != row.size()) {
      throw SchemaError("decision row has the wrong width", "decisions");
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      const int code = rows[i][c].at(0).get<int>();
      if (code < 0 || code > 2) throw SchemaError("bad decision code", "decisions");
      row[c].decision = static_cast<Decision>(code);
      row[c].stage = rows[i][c].at(1).get<std::uint64_t>();
    }
  }
  rec.result.obs = at(j, "obs").get<std::vector<std::uint64_t>>();
  rec.result.capped = at(j, "capped").get<bool>();
  rec.initial_decisions = at(j, "initial_decisions").get<std::uint64_t>();
  rec.n_rule_decisions = at(j, "n_rule_decisions").get<std::uint64_t>();
  rec.b_rule_decisions = at(j, "b_rule_decisions").get<std::uint64_t>();
  if (const auto it = j.find("pruned"); it != j.end()) {
    rec.pruned = it->get<std::vector<std::size_t>>();
  }
  rec.warnings = at(j, "warnings").get<std::vector<std::string>>();
  return rec;
}

Json state_to_json(const SystemState& s) {
  Json envs = Json::array();
  for (const auto& e : s.envelopes) {
    envs.push_back({{"lb", fraction_to_json(e.lb)},
                    {"ub", fraction_to_json(e.ub)},
                    {"last", static_cast<int>(e.last)}});
  }
  return {{"r", s.r},
          {"successes", s.successes},
          {"envelopes", std::move(envs)},
          {"dummy_counts", s.dummy_counts},
          {"y_key", key_to_json(s.y_key)},
          {"u_key", key_to_json(s.u_key)}};
}

SystemState state_from_json(const Json& j) {
  SystemState s;
  s.r = at(j, "r").get<std::uint64_t>();
  s.successes = at(j, "successes").get<std::vector<std::int64_t>>();
  for (const auto& e : at(j, "envelopes")) {
    Envelope env;
    env.lb = fraction_from_json(at(e, "lb"));
    env.ub = fraction_from_json(at(e, "ub"));
    const int last = at(e, "last").get<int>();
    if (last < 0 || last > 2) throw SchemaError("bad LAST flag", "envelopes");
    env.last = static_cast<LastMove>(last);
    s.envelopes.push_back(env);
  }
  s.dummy_counts = at(j, "dummy_counts").get<std::vector<std::int64_t>>();
  s.y_key = key_from_json(at(j, "y_key"));
  s.u_key = key_from_json(at(j, "u_key"));
  return s;
}

}  // namespace

Json session_to_json(const Session& session) {
  Json j;
  j["version"] = kFormatVersion;
  j["spec"] = to_json(session.spec());
  j["k"] = session.spec().k;
  j["run_seed"] = seed_to_json(session.run_seed());
  j["calibration"] = calibration_to_json(session.calibration());
  Json history = Json::array();
  for (const auto& rec : session.history()) history.push_back(record_to_json(rec));
  j["history"] = std::move(history);
  Json states = Json::array();
  for (const auto& s : session.states()) states.push_back(state_to_json(s));
  j["states"] = std::move(states);
  return j;
}

Session session_from_json(const Json& j) {
  try {
    if (at(j, "version").get<int>() != kFormatVersion) {
      throw SchemaError("unsupported session format version", "version");
    }
    const int k = at(j, "k").get<int>();
    ProblemSpec spec = spec_from_json(at(j, "spec"), k);
    std::vector<PassRecord> history;
    for (const auto& rec : at(j, "history")) {
      history.push_back(record_from_json(rec, static_cast<std::size_t>(k)));
    }
    std::vector<SystemState> states;
    for (const auto& s : at(j, "states")) states.push_back(state_from_json(s));
    return Session::restore(std::move(spec), calibration_from_json(at(j, "calibration")),
                            seed_from_json(at(j, "run_seed"), "run_seed"),
                            std::move(history), std::move(states));
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("malformed session document: ") + e.what());
  }
}

Json pass_view(const PassRecord& record, const ProblemSpec& spec,
               const std::vector<std::vector<double>>* truth) {
  const PassPlan& plan = record.plan;
  const DecisionMatrix& z = record.result.decisions;
  Json decisions = Json::array();
  Json stages = Json::array();
  Json classes = Json::array();
  for (std::size_t i = 0; i < z.systems(); ++i) {
    Json d_row = Json::array(), s_row = Json::array(), c_row = Json::array();
    for (std::size_t l = 0; l < plan.thresholds.size(); ++l) {
      Json d = Json::array(), s = Json::array(), c = Json::array();
      for (std::size_t m = 0; m < plan.thresholds[l].size(); ++m) {
        const DecisionEntry& e = z.at(i, l, m);
        d.push_back(std::string(to_string(e.decision)));
        s.push_back(e.stage);
        if (truth) {
          c.push_back(std::string(to_string(
              truth_class((*truth)[i][l], plan.thresholds[l][m], spec.odds(l)))));
        }
      }
      d_row.push_back(std::move(d));
      s_row.push_back(std::move(s));
      c_row.push_back(std::move(c));
    }
    decisions.push_back(std::move(d_row));
    stages.push_back(std::move(s_row));
    classes.push_back(std::move(c_row));
  }
  Json j;
  j["pass"] = plan.pass_index;
  j["thresholds"] = thresholds_to_json(plan.thresholds);
  j["heuristic"] =
      record.heuristic ? Json(std::string(to_string(*record.heuristic))) : Json(nullptr);
  j["decisions"] = std::move(decisions);
  j["stages"] = std::move(stages);
  if (truth) j["classification"] = std::move(classes);
  j["obs"] = record.result.obs;
  j["obs_total"] = record.result.obs_total();
  j["pending"] = unresolved(record);
  j["capped"] = record.result.capped;
  j["initial_decisions"] = record.initial_decisions;
  j["n_rule_decisions"] = record.n_rule_decisions;
  j["b_rule_decisions"] = record.b_rule_decisions;
  j["pruned"] = record.pruned;
  j["warnings"] = record.warnings;
  return j;
}

}  // namespace feaslab::json_io
