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


// Command-line front end: experiments, closed-form analytics, truth
// estimation and the session service.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "feaslab/config.hpp"
#include "feaslab/error.hpp"
#include "feaslab/harness.hpp"
#include "feaslab/odds.hpp"
#include "feaslab/service.hpp"
#include "feaslab/testbeds.hpp"

namespace {

using namespace feaslab;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path);
}

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> reps;
  std::optional<std::string> seed;
  unsigned threads = 0;
  std::string out;
};

int run_command(const RunArgs& args) {
  ConfigFile file = load_config_file(args.config);
  std::optional<std::uint64_t> seed;
  if (args.seed) seed = json_io::seed_from_json(json_io::Json(*args.seed), "--seed");
  std::ostringstream csv;
  write_csv_header(csv);
  if (auto* experiments = std::get_if<std::vector<ExperimentConfig>>(&file)) {
    for (auto& c : *experiments) {
      if (args.reps) c.macro_reps = *args.reps;
      if (seed) c.master_seed = *seed;
      c.threads = args.threads;
      const auto report = run_macro(c);
      write_csv(csv, report);
      std::cerr << c.id << ' ' << report.procedure << ": pcd " << fmt(report.pcd.mean)
                << ", obs " << fmt(report.obs_total.mean) << " over "
                << report.macro_reps << " reps\n";
    }
  } else {
    auto& grid = std::get<StoptimeGridConfig>(file);
    if (args.reps) grid.macro_reps = *args.reps;
    if (seed) grid.master_seed = *seed;
    grid.threads = args.threads;
    const auto cells = run_stoptime_grid(grid);
    write_csv(csv, grid, cells);
  }
  emit(csv.str(), args.out);
  return 0;
}

int truth_command(const std::string& config, std::uint64_t n, const std::string& seed_text,
                  unsigned threads, const std::string& out) {
  ConfigFile file = load_config_file(config);
  const auto* experiments = std::get_if<std::vector<ExperimentConfig>>(&file);
  if (!experiments) throw DomainError("truth needs an experiment config", "kind");
  const auto seed = json_io::seed_from_json(json_io::Json(seed_text), "--seed");
  const auto source = make_source(experiments->front().source);
  std::ostringstream csv;
  write_truth_csv(csv, estimate_truth(*source, n, seed, threads));
  emit(csv.str(), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"feaslab: feasibility determination for Bernoulli constraints"};
  // --h names the threshold, so help is long-form only.
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment or stopping-time grid config");
  run_cmd->add_option("--config", run.config, "JSON config file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--reps", run.reps, "Override macro-replications")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", run.seed, "Override master seed (decimal)");
  run_cmd->add_option("--threads", run.threads, "Worker threads, 0 for all cores")
      ->envname("FEASLAB_THREADS");
  run_cmd->add_option("--out", run.out, "CSV output path (default stdout)");

  auto* analyze = app.add_subcommand("analyze", "Closed-form analytics");
  analyze->require_subcommand(1);
  double beta = 0.05, theta = 1.5, p = 0.5, h = 0.5;
  int H = 1;
  std::vector<double> thresholds;
  auto* halfwidth = analyze->add_subcommand("halfwidth", "Continuation half-width H");
  halfwidth->add_option("--beta", beta, "Per-constraint error")->required();
  halfwidth->add_option("--theta", theta, "Odds-ratio indifference zone")->required();
  auto* stoptime = analyze->add_subcommand("stoptime", "Expected stopping time");
  auto* absorption = analyze->add_subcommand("absorption", "Probability of the lower exit");
  for (auto* cmd : {stoptime, absorption}) {
    cmd->add_option("--p", p, "Success probability")->required();
    cmd->add_option("--h", h, "Threshold")->required();
    cmd->add_option("--H", H, "Half-width")->required();
  }
  auto* convert = analyze->add_subcommand("convert", "Tolerances for normal-theory procedures");
  convert->add_option("--thresholds", thresholds, "Thresholds in (0,1)")->required()->delimiter(',');
  convert->add_option("--theta", theta, "Odds-ratio indifference zone")->required();

  std::string truth_config, truth_out, truth_seed = "0";
  std::uint64_t truth_n = 100000;
  unsigned truth_threads = 0;
  auto* truth = app.add_subcommand("truth", "Estimate p for every system of a config's source");
  truth->add_option("--config", truth_config, "JSON config file")->required()->check(CLI::ExistingFile);
  truth->add_option("--n", truth_n, "Replications per system")->check(CLI::Range(2ull, 1ull << 40));
  truth->add_option("--seed", truth_seed, "Seed (decimal)");
  truth->add_option("--threads", truth_threads, "Worker threads")->envname("FEASLAB_THREADS");
  truth->add_option("--out", truth_out, "CSV output path (default stdout)");

  std::string host = "127.0.0.1", state_dir = "feaslab-state";
  int port = 8080;
  auto* serve_cmd = app.add_subcommand("serve", "Run the /v1 session service");
  serve_cmd->add_option("--port", port, "TCP port")->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--state-dir", state_dir, "Directory for session documents");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return run_command(run);
    if (*truth) return truth_command(truth_config, truth_n, truth_seed, truth_threads, truth_out);
    if (*serve_cmd) return serve(host, port, state_dir);
    if (*halfwidth) {
      std::cout << continuation_halfwidth(beta, OddsRatio(theta)) << '\n';
    } else if (*stoptime) {
      std::cout << fmt(expected_stopping_time(p, h, H)) << '\n';
    } else if (*absorption) {
      std::cout << fmt(absorption_probability(p, h, H)) << '\n';
    } else if (*convert) {
      const auto conv = tolerance_convert(thresholds, OddsRatio(theta));
      std::cout << "h,lb,ub,epsilon,epsilon_tilde,h_tilde\n";
      for (const auto& e : conv.per_threshold) {
        std::cout << fmt(e.threshold) << ',' << fmt(e.lb) << ',' << fmt(e.ub) << ','
                  << fmt(e.epsilon) << ',' << fmt(e.epsilon_tilde) << ',' << fmt(e.h_tilde)
                  << '\n';
      }
      std::cout << "min,,," << fmt(conv.epsilon) << ',' << fmt(conv.epsilon_tilde) << ",\n";
    }
    return 0;
  } catch (const SchemaError& e) {
    std::cerr << "feaslab: schema error" << (e.field().empty() ? "" : " in '" + e.field() + "'")
              << ": " << e.what() << '\n';
  } catch (const DomainError& e) {
    std::cerr << "feaslab: invalid value" << (e.field().empty() ? "" : " for '" + e.field() + "'")
              << ": " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "feaslab: " << e.what() << '\n';
  }
  return 2;
}
