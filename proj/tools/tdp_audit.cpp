// Copyright 2026 The tdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// tdp_audit: certification and leave-one-out auditing of the Gibbs mechanism.
//
//   tdp_audit certify  --config run.json [--beta B] [--norm-pair P] [--seed S] [--out F]
//   tdp_audit loo      --config run.json ...
//   tdp_audit estimate --config run.json ...
//   tdp_audit fdcheck  --config run.json ...
//
// Exit codes: 0 success, 2 validation failure, 3 a check failed,
// 4 I/O or parse error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tdp/audit.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<double> beta;
  std::optional<std::string> norm_pair;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> emit_csv;
};

void add_common_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON run configuration")->required();
  cmd->add_option("--beta", o.beta, "Override beta (> 0)");
  cmd->add_option("--norm-pair", o.norm_pair, "Override the norm pair")
      ->check(CLI::IsMember({"tv-tv", "tv-linf", "w2-tv", "w2-linf"}));
  cmd->add_option("--seed", o.seed, "Override the RNG seed");
  cmd->add_option("--out", o.out, "Report path (default: config output_path, else stdout)");
  cmd->add_option("--emit-csv", o.emit_csv, "Directory for flat CSV tables");
}

int run(const std::string& verb, const Overrides& o) {
  using namespace tdp::audit;
  AuditConfig config = load_config(o.config_path);
  if (o.beta) config.beta = *o.beta;
  if (o.norm_pair) config.norm_pair = *o.norm_pair;
  if (o.seed) config.seed = *o.seed;
  if (o.out) config.output_path = *o.out;

  static const std::map<std::string, std::function<AuditResult(const AuditConfig&)>> kVerbs = {
      {"certify", run_certify}, {"loo", run_loo}, {"estimate", run_estimate}, {"fdcheck", run_fdcheck}};
  const AuditResult result = kVerbs.at(verb)(config);
  const std::string text = tdp::report::to_string(result.report);

  if (config.output_path) {
    // --out is taken relative to the working directory, a config path relative to the config.
    const std::filesystem::path path = o.out ? std::filesystem::path(*o.out) : config.resolve(*config.output_path);
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw tdp::Error(tdp::ErrorCode::kIoError, "cannot write '" + path.string() + "'");
  } else {
    std::cout << text;
  }
  if (o.emit_csv) emit_csv(result.report, *o.emit_csv);
  if (result.exit_code == kExitCheckFailed) std::cerr << "tdp_audit " << verb << ": check failed\n";
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tangent differential privacy audits for the Gibbs mechanism"};
  app.require_subcommand(1);
  const std::string verbs[] = {"certify", "loo", "estimate", "fdcheck"};
  const std::map<std::string, std::string> help = {
      {"certify", "Certify the 2 beta R bound for the configured norm pair"},
      {"loo", "Leave-one-out audit of the privacy ratio"},
      {"estimate", "Monte Carlo estimate of R_T1 or R_T3"},
      {"fdcheck", "Finite-difference validation of the tangent maps"}};
  std::map<std::string, Overrides> overrides;
  for (const auto& v : verbs) add_common_options(app.add_subcommand(v, help.at(v)), overrides[v]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return tdp::audit::kExitValidation;
  }

  for (const auto& v : verbs) {
    if (!app.got_subcommand(v)) continue;
    try {
      return run(v, overrides[v]);
    } catch (const tdp::Error& e) {
      std::cerr << "tdp_audit " << v << ": " << e.what() << "\n";
      return tdp::audit::exit_code_for(e);
    }
  }
  return tdp::audit::kExitValidation;
}
