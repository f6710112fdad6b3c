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


// Local HTTP/JSON service for interactive multi-pass sessions, versioned
// under /v1. Each session is persisted as one JSON document in the state
// directory and reloaded on start.
//
// Mutations of one session are serialized by a per-session mutex; a request
// that finds it held gets 409. Reads serve an immutable rendered snapshot.

#ifndef FEASLAB_SERVICE_HPP_
#define FEASLAB_SERVICE_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <string_view>

namespace httplib {
class Server;
}

namespace feaslab {

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON
};

class SessionService {
 public:
  explicit SessionService(std::filesystem::path state_dir);
  ~SessionService();
  SessionService(const SessionService&) = delete;
  SessionService& operator=(const SessionService&) = delete;

  HttpResponse create_session(std::string_view body);
  HttpResponse run_pass(const std::string& id, std::string_view body);
  HttpResponse get_session(const std::string& id) const;
  HttpResponse get_pass(const std::string& id, std::size_t pass) const;
  HttpResponse health() const;

  std::size_t session_count() const;

  // Registers the /v1 routes and localhost CORS handling.
  void install_routes(httplib::Server& server);

 private:
  struct Entry;
  std::shared_ptr<Entry> find(const std::string& id) const;
  void persist(const std::string& id, const std::string& document) const;

  std::filesystem::path state_dir_;
  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

// Blocks serving on host:port until the process is stopped.
int serve(const std::string& host, int port, const std::filesystem::path& state_dir);

}  // namespace feaslab

#endif  // FEASLAB_SERVICE_HPP_
