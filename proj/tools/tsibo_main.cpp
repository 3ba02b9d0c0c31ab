/*
 Copyright 2026 The tsibo authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tsibo/campaign.hpp"
#include "tsibo/config.hpp"
#include "tsibo/report.hpp"
#include "tsibo/verify.hpp"

namespace fs = std::filesystem;

namespace {

tsibo::CampaignConfig build_config(const std::string& config_path, long budget_override) {
  tsibo::CampaignConfig cfg = tsibo::default_config();
  if (!config_path.empty()) cfg = tsibo::load_config_file(cfg, config_path);
  if (budget_override > 0) cfg.budget = budget_override;
  cfg.validate();
  return cfg;
}

void print_summary(const tsibo::RunLog& log) {
  long steps = 0;
  const tsibo::EpisodeRecord* last = nullptr;
  for (const auto& ep : log.episodes) {
    steps = ep.cumulative_steps;
    last = &ep;
  }
  std::cout << tsibo::to_string(log.method) << " seed " << log.seed << ": "
            << log.episodes.size() << " episodes, " << steps << " steps";
  if (last != nullptr && last->incumbent_valid)
    std::cout << ", best objective " << last->incumbent_g;
  std::cout << "\n";
}

int cmd_run(const std::string& method_name, std::uint64_t seed, long budget,
            const std::string& out_dir, const std::string& config_path, bool dump_only) {
  tsibo::CampaignConfig cfg = build_config(config_path, budget);
  cfg.method = tsibo::method_from_string(method_name);
  if (dump_only) {
    std::cout << tsibo::dump_config(cfg);
    return 0;
  }
  fs::create_directories(out_dir);
  const tsibo::RunLog log = tsibo::run_campaign(cfg, seed);
  const std::string path = (fs::path(out_dir) / tsibo::run_log_filename(cfg.method, seed)).string();
  tsibo::write_run_jsonl(log, path);
  print_summary(log);
  std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_ablate(long budget, const std::string& out_dir, const std::string& config_path) {
  tsibo::CampaignConfig cfg = build_config(config_path, budget);
  fs::create_directories(out_dir);
  std::vector<tsibo::RunLog> logs;
  for (tsibo::Method method : tsibo::all_methods()) {
    cfg.method = method;
    for (std::uint64_t seed : cfg.seeds) {
      tsibo::RunLog log = tsibo::run_campaign(cfg, seed);
      tsibo::write_run_jsonl(log,
                             (fs::path(out_dir) / tsibo::run_log_filename(method, seed)).string());
      print_summary(log);
      logs.push_back(std::move(log));
    }
  }
  const long stride = cfg.episode.total_steps / cfg.episode.num_checkpoints;
  tsibo::emit_report(logs, out_dir, stride);
  std::cout << "wrote " << (fs::path(out_dir) / "curves.csv").string() << " and "
            << (fs::path(out_dir) / "envelopes.svg").string() << "\n";
  return 0;
}

int cmd_report(const std::string& in_dir, const std::string& out_dir,
               const std::string& config_path) {
  const tsibo::CampaignConfig cfg = build_config(config_path, 0);
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(in_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
      paths.push_back(entry.path().string());
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw std::runtime_error("no .jsonl logs found in " + in_dir);

  std::vector<tsibo::RunLog> logs;
  logs.reserve(paths.size());
  for (const std::string& p : paths) logs.push_back(tsibo::read_run_jsonl(p));

  fs::create_directories(out_dir);
  const long stride = cfg.episode.total_steps / cfg.episode.num_checkpoints;
  tsibo::emit_report(logs, out_dir, stride);
  std::cout << "aggregated " << logs.size() << " logs into " << out_dir << "\n";
  return 0;
}

int cmd_verify(const std::vector<std::string>& only, bool list_only) {
  if (list_only) {
    for (const tsibo::OracleCheck& c : tsibo::oracle_registry())
      std::cout << c.name << ": " << c.description << "\n";
    return 0;
  }
  const std::vector<tsibo::CheckResult> results = tsibo::run_oracle_checks(only);
  int failures = 0;
  for (const tsibo::CheckResult& r : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << " " << r.name;
    if (!r.detail.empty()) std::cout << " (" << r.detail << ")";
    std::cout << "\n";
    if (!r.pass) ++failures;
  }
  std::cout << results.size() - failures << "/" << results.size() << " checks passed\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"closed-loop controller auto-tuning by multi-fidelity Bayesian optimization"};
  app.require_subcommand(1);

  std::string method_name = "tsi_ei_c";
  std::uint64_t seed = 1;
  long budget = 0;
  std::string out_dir = "out";
  std::string in_dir;
  std::string config_path;
  bool dump_only = false;
  bool list_only = false;
  std::vector<std::string> only;

  CLI::App* run = app.add_subcommand("run", "run one tuning method for one seed");
  run->add_option("--method", method_name,
                  "baseline_bo | tsi_no_stop | tsi_ei | tsi_ei_c | tsi_ucb_c");
  run->add_option("--seed", seed, "campaign seed");
  run->add_option("--budget", budget, "closed-loop step budget override");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--config", config_path, "flat-key JSON config file");
  run->add_flag("--dump-config", dump_only, "print the effective config and exit");

  CLI::App* ablate = app.add_subcommand("ablate", "run all five methods over the config seeds");
  ablate->add_option("--budget", budget, "closed-loop step budget override");
  ablate->add_option("--out", out_dir, "output directory");
  ablate->add_option("--config", config_path, "flat-key JSON config file");

  CLI::App* report = app.add_subcommand("report", "aggregate .jsonl logs into curves and plots");
  report->add_option("--in", in_dir, "directory containing run logs")->required();
  report->add_option("--out", out_dir, "output directory");
  report->add_option("--config", config_path, "flat-key JSON config file");

  CLI::App* verify = app.add_subcommand("verify", "run the independent oracle checks");
  verify->add_option("--only", only, "subset of check names");
  verify->add_flag("--list", list_only, "list available checks and exit");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(method_name, seed, budget, out_dir, config_path, dump_only);
    if (ablate->parsed()) return cmd_ablate(budget, out_dir, config_path);
    if (report->parsed()) return cmd_report(in_dir, out_dir, config_path);
    if (verify->parsed()) return cmd_verify(only, list_only);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
