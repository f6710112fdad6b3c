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


#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <memory>
#include <string>
#include <thread>

#include "doctest.h"
#include "feaslab/json_io.hpp"
#include "feaslab/service.hpp"
#include "httplib.h"

using namespace feaslab;
using json_io::Json;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() /
             ("feaslab-test-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  return dir;
}

// A service on an ephemeral localhost port for the lifetime of the object.
class Running {
 public:
  explicit Running(const std::filesystem::path& dir)
      : service_(std::make_unique<SessionService>(dir)) {
    service_->install_routes(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~Running() {
    server_.stop();
    thread_.join();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(120, 0);
    return c;
  }

 private:
  std::unique_ptr<SessionService> service_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

const char* kThreeSystems = R"({
  "spec": {"alpha": 0.05, "theta": [1.5], "expect_more_passes": true},
  "source": {"type": "synthetic", "p": [[0.05], [0.5], [0.95]]},
  "thresholds": [[0.5]],
  "seed": "2026",
  "truth": [[0.05], [0.5], [0.95]]
})";

Json post(httplib::Client& c, const std::string& path, const std::string& body,
          int expected) {
  const auto res = c.Post(path, body, "application/json");
  REQUIRE(res);
  CHECK(res->status == expected);
  return Json::parse(res->body);
}

Json get(httplib::Client& c, const std::string& path, int expected = 200) {
  const auto res = c.Get(path);
  REQUIRE(res);
  CHECK(res->status == expected);
  return Json::parse(res->body);
}

}  // namespace

TEST_SUITE("service") {

TEST_CASE("health and session creation") {
  Running server(fresh_dir("create"));
  auto c = server.client();
  CHECK(get(c, "/v1/healthz")["status"] == "ok");

  const Json a = post(c, "/v1/sessions", kThreeSystems, 201);
  const Json b = post(c, "/v1/sessions", kThreeSystems, 201);
  CHECK(a["id"] != b["id"]);
  CHECK(a["status"] == "Idle");
  CHECK(a["passes"].empty());
  CHECK(a["constraints"][0]["halfwidth"].get<int>() > 0);
  CHECK(a["constraints"][0]["beta_l"].get<double>() > 0.0);
}

TEST_CASE("schema violations are 400 and domain violations 422") {
  Running server(fresh_dir("errors"));
  auto c = server.client();
  Json body = Json::parse(kThreeSystems);

  const Json malformed = post(c, "/v1/sessions", "{not json", 400);
  CHECK(malformed["code"] == "schema_error");

  Json missing = body;
  missing.erase("thresholds");
  CHECK(post(c, "/v1/sessions", missing.dump(), 400)["field"] == "thresholds");

  Json theta = body;
  theta["spec"]["theta"] = {0.9};
  const Json err = post(c, "/v1/sessions", theta.dump(), 422);
  CHECK(err["code"] == "domain_error");
  CHECK(err["field"] == "theta");

  Json outside = body;
  outside["thresholds"] = {{1.5}};
  CHECK(post(c, "/v1/sessions", outside.dump(), 422)["field"] == "thresholds");

  CHECK(get(c, "/v1/sessions/ffff", 404)["code"] == "not_found");
  post(c, "/v1/sessions/ffff/passes", "{}", 404);
}

TEST_CASE("pass 1 decides the small config and snapshots are stable") {
  Running server(fresh_dir("pass1"));
  auto c = server.client();
  const std::string id = post(c, "/v1/sessions", kThreeSystems, 201)["id"];
  const std::string base = "/v1/sessions/" + id;

  // A later-pass request before pass 1 conflicts.
  post(c, base + "/passes", R"({"thresholds": [[0.3]], "heuristic": "BN"})", 409);
  post(c, base + "/passes", R"({"pass": 2})", 409);

  const Json pass = post(c, base + "/passes", "{}", 200);
  CHECK(pass["pass"] == 1);
  CHECK(pass["pending"] == 0);
  CHECK(pass["status"] == "Idle");

  const auto first = c.Get(base);
  const auto second = c.Get(base);
  REQUIRE(first);
  REQUIRE(second);
  CHECK(first->body == second->body);
  const Json view = Json::parse(first->body);
  CHECK(view["passes"].size() == 1);
  CHECK(view["truth_configured"] == true);
  CHECK(view["passes"][0]["classification"][0][0][0] == "desirable");
  CHECK(view["obs"]["total"] == pass["obs_total"]);
  CHECK(get(c, base + "/passes/1") == view["passes"][0]);
  get(c, base + "/passes/2", 404);
}

TEST_CASE("pass 2 with BN decides from recycled envelopes without sampling") {
  Running server(fresh_dir("pass2"));
  auto c = server.client();
  const std::string id = post(c, "/v1/sessions", kThreeSystems, 201)["id"];
  const std::string base = "/v1/sessions/" + id;
  post(c, base + "/passes", "{}", 200);

  // System 0 (p = 0.05) ended pass 1 with an upper envelope at or below 0.5.
  const Json pass = post(c, base + "/passes",
                         R"({"thresholds": [[0.9]], "heuristic": "BN"})", 200);
  CHECK(pass["pass"] == 2);
  CHECK(pass["decisions"][0][0][0] == "feasible");
  CHECK(pass["obs"][0] == 0);
  CHECK(pass["initial_decisions"].get<int>() >= 1);

  CHECK(post(c, base + "/passes", R"({"thresholds": [[0.2]]})", 400)["field"] ==
        "heuristic");
  post(c, base + "/passes", R"({"thresholds": [[0.2]], "heuristic": "X"})", 422);
}

TEST_CASE("a pruning pass skips systems infeasible for all its thresholds") {
  Running server(fresh_dir("prune"));
  auto c = server.client();
  const std::string id = post(c, "/v1/sessions", kThreeSystems, 201)["id"];
  const std::string base = "/v1/sessions/" + id;
  post(c, base + "/passes", R"({"prune": true})", 409);
  const Json first = post(c, base + "/passes", "{}", 200);
  REQUIRE(first["decisions"][2][0][0] == "infeasible");

  const Json pass = post(c, base + "/passes",
                         R"({"thresholds": [[0.1, 0.3]], "heuristic": "BN", "prune": true})",
                         200);
  const auto pruned = pass["pruned"].get<std::vector<std::size_t>>();
  CHECK(std::find(pruned.begin(), pruned.end(), 2u) != pruned.end());
  CHECK(std::find(pruned.begin(), pruned.end(), 0u) == pruned.end());
  CHECK(pass["obs"][2] == 0);
  CHECK(pass["decisions"][2][0][0] == "pending");
  CHECK(pass["pending"] == 0);
  CHECK(get(c, base + "/passes/2")["pruned"] == pass["pruned"]);
  post(c, base + "/passes", R"({"thresholds": [[0.2]], "heuristic": "N", "prune": 1})", 400);
}

TEST_CASE("the final flag completes a session") {
  Running server(fresh_dir("final"));
  auto c = server.client();
  const std::string id = post(c, "/v1/sessions", kThreeSystems, 201)["id"];
  const std::string base = "/v1/sessions/" + id;
  CHECK(post(c, base + "/passes", R"({"final": true})", 200)["status"] == "Complete");
  CHECK(get(c, base)["status"] == "Complete");
  post(c, base + "/passes", R"({"thresholds": [[0.2]], "heuristic": "N"})", 409);
}

TEST_CASE("a restarted service continues sessions bit for bit") {
  const auto dir = fresh_dir("restart");
  const auto other = fresh_dir("restart-ref");
  const std::string pass2 = R"({"thresholds": [[0.2, 0.45, 0.7]], "heuristic": "BN"})";
  std::string id;
  std::string before;
  {
    Running server(dir);
    auto c = server.client();
    id = post(c, "/v1/sessions", kThreeSystems, 201)["id"];
    post(c, "/v1/sessions/" + id + "/passes", "{}", 200);
    before = c.Get("/v1/sessions/" + id)->body;
  }
  Json resumed;
  {
    Running server(dir);
    auto c = server.client();
    CHECK(c.Get("/v1/sessions/" + id)->body == before);
    resumed = post(c, "/v1/sessions/" + id + "/passes", pass2, 200);
  }
  Json reference;
  {
    Running server(other);
    auto c = server.client();
    const std::string ref = post(c, "/v1/sessions", kThreeSystems, 201)["id"];
    post(c, "/v1/sessions/" + ref + "/passes", "{}", 200);
    reference = post(c, "/v1/sessions/" + ref + "/passes", pass2, 200);
  }
  CHECK(resumed == reference);
}

TEST_CASE("a second mutation during a running pass conflicts") {
  Running server(fresh_dir("busy"));
  auto c = server.client();
  // Near-indifferent odds with p == h: long walks keep the pass busy.
  Json body = {{"spec", {{"alpha", 0.05}, {"theta", {1.004}}}},
               {"source", {{"type", "synthetic"}, {"p", Json::array()}}},
               {"thresholds", {{0.5}}},
               {"seed", "5"}};
  for (int i = 0; i < 8; ++i) body["source"]["p"].push_back({0.5});
  const std::string id = post(c, "/v1/sessions", body.dump(), 201)["id"];
  const std::string base = "/v1/sessions/" + id;

  std::thread runner([&] {
    auto c2 = server.client();
    const auto res = c2.Post(base + "/passes", "{}", "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
  });
  bool saw_running = false;
  for (int i = 0; i < 2000 && !saw_running; ++i) {
    saw_running = get(c, base)["status"] == "RunningPass";
    if (!saw_running) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  CHECK(saw_running);
  if (saw_running) {
    CHECK(post(c, base + "/passes", "{}", 409)["code"] == "conflict");
  }
  runner.join();
  CHECK(get(c, base)["status"] == "Idle");
}

TEST_CASE("CORS is granted to localhost origins only") {
  Running server(fresh_dir("cors"));
  auto c = server.client();
  auto local = c.Get("/v1/healthz", {{"Origin", "http://localhost:5173"}});
  REQUIRE(local);
  CHECK(local->get_header_value("Access-Control-Allow-Origin") == "http://localhost:5173");
  auto remote = c.Get("/v1/healthz", {{"Origin", "http://example.com"}});
  REQUIRE(remote);
  CHECK_FALSE(remote->has_header("Access-Control-Allow-Origin"));
  auto tricky = c.Get("/v1/healthz", {{"Origin", "http://localhost.example.com"}});
  REQUIRE(tricky);
  CHECK_FALSE(tricky->has_header("Access-Control-Allow-Origin"));
  auto preflight = c.Options("/v1/sessions", {{"Origin", "http://127.0.0.1:8080"}});
  REQUIRE(preflight);
  CHECK(preflight->status == 204);
}

}  // TEST_SUITE
