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


#include <cstring>
#include "feaslab/service.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <system_error>
#include <utility>
#include <vector>

#include "feaslab/error.hpp"
#include "feaslab/harness.hpp"
#include "feaslab/json_io.hpp"
#include "feaslab/multipass.hpp"
#include "httplib.h"

namespace feaslab {

using json_io::Json;
using Matrix = std::vector<std::vector<double>>;

namespace {

constexpr int kDocumentVersion = 1;

enum class Status { kIdle, kRunningPass, kComplete };

std::string_view to_string(Status s) {
  switch (s) {
    case Status::kIdle:
      return "Idle";
    case Status::kRunningPass:
      return "RunningPass";
    case Status::kComplete:
      return "Complete";
  }
  return "?";
}

std::string now_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(ms));
  return buf;
}

HttpResponse error_response(int status, std::string_view code, const std::string& message,
                            const std::string& field = {}) {
  Json body = {{"code", code}, {"message", message}};
  if (!field.empty()) body["field"] = field;
  return {status, body.dump()};
}

const Json& required(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw SchemaError(std::string("missing field '") + key + "'", key);
  return *it;
}

const Json* find_field(const Json& j, const char* key) {
  const auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

}  // namespace

// Immutable once published.
struct Snapshot {
  std::string id;
  Session session;
  SourceDescriptor source;
  std::optional<Matrix> truth;
  Matrix first_thresholds;
  Status status = Status::kIdle;
  std::string created;
  std::string updated;
  std::string view;                     // GET /sessions/{id} body
  std::vector<std::string> pass_views;  // GET /sessions/{id}/passes/{w} bodies

  Json persisted() const {
    Json j;
    j["version"] = kDocumentVersion;
    j["id"] = id;
    j["created"] = created;
    j["updated"] = updated;
    j["final"] = status == Status::kComplete;
    j["source"] = json_io::to_json(source);
    j["truth"] = truth ? Json(*truth) : Json(nullptr);
    j["first_thresholds"] = json_io::thresholds_to_json(first_thresholds);
    j["session"] = json_io::session_to_json(session);
    return j;
  }

  void render() {
    const ProblemSpec& spec = session.spec();
    const Calibration& cal = session.calibration();
    const Matrix* t = truth ? &*truth : nullptr;
    Json constraints = Json::array();
    for (int l = 0; l < spec.s; ++l) {
      constraints.push_back({{"theta", spec.theta[l]},
                             {"beta_l", cal.beta_l[l]},
                             {"halfwidth", cal.halfwidth[l]}});
    }
    Json passes = Json::array();
    pass_views.clear();
    Json pass_totals = Json::array();
    for (const auto& rec : session.history()) {
      Json v = json_io::pass_view(rec, spec, t);
      pass_totals.push_back(rec.result.obs_total());
      pass_views.push_back(v.dump());
      passes.push_back(std::move(v));
    }
    Json per_system = Json::array();
    for (const auto& s : session.states()) per_system.push_back(s.r);
    if (session.states().empty()) per_system = Json(std::vector<int>(spec.k, 0));

    Json j;
    j["id"] = id;
    j["status"] = std::string(to_string(status));
    j["created"] = created;
    j["updated"] = updated;
    j["spec"] = json_io::to_json(spec);
    j["systems"] = spec.k;
    j["source"] = json_io::to_json(source);
    j["seed"] = json_io::seed_to_json(session.run_seed());
    j["beta"] = cal.beta;
    j["constraints"] = std::move(constraints);
    j["first_thresholds"] = json_io::thresholds_to_json(first_thresholds);
    j["next_pass"] = session.history().size() + 1;
    j["passes"] = std::move(passes);
    j["obs"] = {{"per_system", std::move(per_system)},
                {"per_pass", std::move(pass_totals)},
                {"total", session.obs_total()}};
    j["truth_configured"] = truth.has_value();
    view = j.dump();
  }
};

struct SessionService::Entry {
  std::mutex mutation;
  std::shared_ptr<const Snapshot> snapshot;

  std::shared_ptr<const Snapshot> load() const { return std::atomic_load(&snapshot); }
  void publish(std::shared_ptr<const Snapshot> next) {
    std::atomic_store(&snapshot, std::move(next));
  }
};

namespace {

std::shared_ptr<Snapshot> snapshot_from_document(const Json& doc) {
  if (doc.at("version").get<int>() != kDocumentVersion) {
    throw SchemaError("unsupported session document version", "version");
  }
  auto snap = std::make_shared<Snapshot>(Snapshot{
      doc.at("id").get<std::string>(), json_io::session_from_json(doc.at("session")),
      json_io::source_from_json(required(doc, "source")), std::nullopt,
      doc.at("first_thresholds").get<Matrix>(),
      doc.at("final").get<bool>() ? Status::kComplete : Status::kIdle,
      doc.at("created").get<std::string>(), doc.at("updated").get<std::string>(), {}, {}});
  if (const Json* t = find_field(doc, "truth")) snap->truth = t->get<Matrix>();
  snap->render();
  return snap;
}

std::string new_id() {
  static std::mutex mutex;
  static std::mt19937_64 engine{std::random_device{}()};
  std::lock_guard lock(mutex);
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx",
                static_cast<unsigned long long>(engine()),
                static_cast<unsigned long long>(engine()));
  return buf;
}

std::uint64_t random_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) | rd();
}

// Maps library exceptions onto the error body contract.
template <class F>
HttpResponse guarded(F&& f) {
  try {
    return f();
  } catch (const SchemaError& e) {
    return error_response(400, "schema_error", e.what(), e.field());
  } catch (const DomainError& e) {
    return error_response(422, "domain_error", e.what(), e.field());
  } catch (const StateError& e) {
    return error_response(409, "conflict", e.what());
  } catch (const Json::exception& e) {
    return error_response(400, "schema_error", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

}  // namespace

SessionService::SessionService(std::filesystem::path state_dir)
    : state_dir_(std::move(state_dir)) {
  std::filesystem::create_directories(state_dir_);
  for (const auto& file : std::filesystem::directory_iterator(state_dir_)) {
    if (file.path().extension() != ".json") continue;
    try {
      std::ifstream in(file.path());
      std::stringstream buffer;
      buffer << in.rdbuf();
      auto snap = snapshot_from_document(json_io::parse(buffer.str()));
      auto entry = std::make_shared<Entry>();
      const std::string id = snap->id;
      entry->publish(std::move(snap));
      sessions_.emplace(id, std::move(entry));
    } catch (const std::exception& e) {
      std::cerr << "feaslab: skipping unreadable session " << file.path() << ": "
                << e.what() << '\n';
    }
  }
}

SessionService::~SessionService() = default;

std::shared_ptr<SessionService::Entry> SessionService::find(const std::string& id) const {
  std::shared_lock lock(map_mutex_);
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

void SessionService::persist(const std::string& id, const std::string& document) const {
  const auto target = state_dir_ / (id + ".json");
  const auto temp = state_dir_ / (id + ".json.tmp");
  {
    std::ofstream out(temp, std::ios::trunc);
    out << document;
    if (!out) throw std::runtime_error("cannot write " + temp.string());
  }
  std::filesystem::rename(temp, target);
}

std::size_t SessionService::session_count() const {
  std::shared_lock lock(map_mutex_);
  return sessions_.size();
}

HttpResponse SessionService::create_session(std::string_view body) {
  return guarded([&] {
    const Json doc = json_io::parse(body);
    if (!doc.is_object()) throw SchemaError("body must be an object");
    const auto source = json_io::source_from_json(required(doc, "source"));
    const auto k = static_cast<int>(json_io::source_systems(source));
    ProblemSpec spec = json_io::spec_from_json(required(doc, "spec"), k);
    if (static_cast<std::size_t>(spec.s) != json_io::source_constraints(source)) {
      throw DomainError("theta must list one value per source constraint", "theta");
    }
    PassPlan plan;
    plan.thresholds = json_io::thresholds_from_json(required(doc, "thresholds"));
    plan.validate(spec.s);

    std::optional<Matrix> truth;
    if (const Json* t = find_field(doc, "truth")) {
      truth = json_io::matrix_from_json(*t, "truth");
      if (truth->size() != static_cast<std::size_t>(k)) {
        throw DomainError("truth must cover every system", "truth");
      }
      for (const auto& row : *truth) {
        if (row.size() != static_cast<std::size_t>(spec.s)) {
          throw DomainError("truth must cover every constraint", "truth");
        }
        for (double p : row) {
          if (!(p >= 0.0 && p <= 1.0)) throw DomainError("truth lies in [0,1]", "truth");
        }
      }
    }
    const Json* seed_json = find_field(doc, "seed");
    const std::uint64_t seed =
        seed_json ? json_io::seed_from_json(*seed_json, "seed") : random_seed();

    const PassPlan plans[] = {plan};
    Calibration cal = calibrate(spec, planned_counts(spec, plans));
    const std::string created = now_utc();
    auto snap = std::make_shared<Snapshot>(Snapshot{
        new_id(), Session(spec, std::move(cal), seed), source, truth, plan.thresholds,
        Status::kIdle, created, created, {}, {}});
    snap->render();
    persist(snap->id, snap->persisted().dump());

    auto entry = std::make_shared<Entry>();
    const std::string view = snap->view;
    const std::string id = snap->id;
    entry->publish(std::move(snap));
    {
      std::unique_lock lock(map_mutex_);
      sessions_.emplace(id, std::move(entry));
    }
    return HttpResponse{201, view};
  });
}

HttpResponse SessionService::run_pass(const std::string& id, std::string_view body) {
  const auto entry = find(id);
  if (!entry) return error_response(404, "not_found", "unknown session " + id);
  std::unique_lock lock(entry->mutation, std::try_to_lock);
  if (!lock.owns_lock()) {
    return error_response(409, "conflict", "a pass is already running on this session");
  }
  const auto current = entry->load();
  return guarded([&]() -> HttpResponse {
    const Json doc = body.empty() ? Json::object() : json_io::parse(body);
    if (!doc.is_object()) throw SchemaError("body must be an object");
    if (current->status == Status::kComplete) {
      return error_response(409, "conflict", "session is complete");
    }
    const std::size_t next = current->session.history().size() + 1;
    if (const Json* p = find_field(doc, "pass")) {
      if (!p->is_number_integer()) throw SchemaError("pass must be an integer", "pass");
      if (p->get<long long>() != static_cast<long long>(next)) {
        return error_response(409, "conflict",
                              "next pass is " + std::to_string(next), "pass");
      }
    }
    const Json* thresholds = find_field(doc, "thresholds");
    const Json* heuristic = find_field(doc, "heuristic");
    bool final_pass = false;
    if (const Json* f = find_field(doc, "final")) {
      if (!f->is_boolean()) throw SchemaError("final must be a boolean", "final");
      final_pass = f->get<bool>();
    }
    bool prune = false;
    if (const Json* pr = find_field(doc, "prune")) {
      if (!pr->is_boolean()) throw SchemaError("prune must be a boolean", "prune");
      prune = pr->get<bool>();
    }

    PassPlan plan;
    std::optional<Heuristic> h;
    if (next == 1) {
      if (thresholds || heuristic || prune) {
        return error_response(409, "conflict",
                              "pass 1 runs the creation plan before later passes");
      }
      plan.thresholds = current->first_thresholds;
    } else {
      if (!thresholds) throw SchemaError("later passes need thresholds", "thresholds");
      if (!heuristic || !heuristic->is_string()) {
        throw SchemaError("later passes need a heuristic", "heuristic");
      }
      plan.thresholds = json_io::thresholds_from_json(*thresholds);
      h = parse_heuristic(heuristic->get<std::string>());
    }
    plan.pass_index = static_cast<int>(next);
    plan.validate(current->session.spec().s);
    std::vector<std::size_t> pruned;
    if (prune) {
      std::vector<PassPlan> plans;
      std::vector<DecisionMatrix> decisions;
      for (const auto& rec : current->session.history()) {
        plans.push_back(rec.plan);
        decisions.push_back(rec.result.decisions);
      }
      pruned = prunable_systems(plans, decisions, plan);
    }

    auto running = std::make_shared<Snapshot>(*current);
    running->status = Status::kRunningPass;
    running->render();
    entry->publish(running);

    try {
      auto done = std::make_shared<Snapshot>(*current);
      const auto source = make_source(done->source);
      done->session.run_pass(plan, h, *source, pruned);
      done->status = final_pass ? Status::kComplete : Status::kIdle;
      done->updated = now_utc();
      done->render();
      persist(done->id, done->persisted().dump());
      Json reply = json_io::parse(done->pass_views.back());
      reply["status"] = std::string(to_string(done->status));
      reply["obs_cumulative"] = done->session.obs_total();
      entry->publish(std::move(done));
      return HttpResponse{200, reply.dump()};
    } catch (...) {
      entry->publish(current);
      throw;
    }
  });
}

HttpResponse SessionService::get_session(const std::string& id) const {
  const auto entry = find(id);
  if (!entry) return error_response(404, "not_found", "unknown session " + id);
  return {200, entry->load()->view};
}

HttpResponse SessionService::get_pass(const std::string& id, std::size_t pass) const {
  const auto entry = find(id);
  if (!entry) return error_response(404, "not_found", "unknown session " + id);
  const auto snap = entry->load();
  if (pass < 1 || pass > snap->pass_views.size()) {
    return error_response(404, "not_found", "no pass " + std::to_string(pass), "pass");
  }
  return {200, snap->pass_views[pass - 1]};
}

HttpResponse SessionService::health() const {
  return {200, Json{{"status", "ok"}, {"sessions", session_count()}}.dump()};
}

namespace {

bool local_origin(const std::string& origin) {
  for (const char* prefix : {"http://localhost", "http://127.0.0.1", "http://[::1]"}) {
    if (origin.rfind(prefix, 0) == 0) {
      const char next = origin.size() > std::strlen(prefix) ? origin[std::strlen(prefix)] : '\0';
      if (next == '\0' || next == ':' || next == '/') return true;
    }
  }
  return false;
}

void reply(httplib::Response& res, const HttpResponse& r) {
  res.status = r.status;
  res.set_content(r.body, "application/json");
}

}  // namespace

void SessionService::install_routes(httplib::Server& server) {
  server.Post("/v1/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    reply(res, create_session(req.body));
  });
  server.Post(R"(/v1/sessions/([0-9A-Za-z]+)/passes)",
              [this](const httplib::Request& req, httplib::Response& res) {
                reply(res, run_pass(req.matches[1], req.body));
              });
  server.Get(R"(/v1/sessions/([0-9A-Za-z]+))",
             [this](const httplib::Request& req, httplib::Response& res) {
               reply(res, get_session(req.matches[1]));
             });
  server.Get(R"(/v1/sessions/([0-9A-Za-z]+)/passes/(\d{1,9}))",
             [this](const httplib::Request& req, httplib::Response& res) {
               reply(res, get_pass(req.matches[1], std::stoul(req.matches[2])));
             });
  server.Get("/v1/healthz", [this](const httplib::Request&, httplib::Response& res) {
    reply(res, health());
  });
  server.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });
  server.set_post_routing_handler([](const httplib::Request& req, httplib::Response& res) {
    const std::string origin = req.get_header_value("Origin");
    if (!origin.empty() && local_origin(origin)) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Vary", "Origin");
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    }
  });
  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      const auto r = error_response(res.status, res.status == 404 ? "not_found" : "error",
                                    "no such route");
      res.set_content(r.body, "application/json");
    }
  });
}

int serve(const std::string& host, int port, const std::filesystem::path& state_dir) {
  SessionService service(state_dir);
  httplib::Server server;
  service.install_routes(server);
  std::cerr << "feaslab: serving /v1 on " << host << ':' << port << " with "
            << service.session_count() << " stored sessions\n";
  if (!server.listen(host, port)) {
    std::cerr << "feaslab: cannot listen on " << host << ':' << port << '\n';
    return 1;
  }
  return 0;
}

}  // namespace feaslab
