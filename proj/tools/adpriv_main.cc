// Copyright 2026 The adpriv Authors
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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "adpriv/distinguishing.h"
#include "adpriv/errors.h"
#include "adpriv/experiments.h"
#include "adpriv/parallel.h"

namespace {

using namespace adpriv;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitInternal = 4;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<int> trials_per_point;
  std::optional<double> level;
  std::optional<double> target_power;
  std::optional<long long> ceiling;
  std::optional<int> rounds_per_user;
  std::string out;
};

void AddCommonFlags(CLI::App* cmd, CommonFlags* flags, bool seed_required) {
  cmd->add_option("--config", flags->config_path, "Experiment config file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  auto* seed = cmd->add_option("--seed", flags->seed, "Master seed (overrides the config)");
  if (seed_required) seed->required();
  cmd->add_option("--threads", flags->threads, "Worker threads (0 = all cores)");
  cmd->add_option("--trials-per-point", flags->trials_per_point,
                  "Monte-Carlo trials per power estimate");
  cmd->add_option("--level", flags->level, "Test level");
  cmd->add_option("--target-power", flags->target_power, "Power target for searches");
  cmd->add_option("--ceiling", flags->ceiling, "Sample-complexity search ceiling");
  cmd->add_option("--rounds-per-user", flags->rounds_per_user, "Browse/target/engage rounds");
  cmd->add_option("--out", flags->out, "Output path (default: config output, else stdout)");
}

ExperimentConfig LoadWithOverrides(const CommonFlags& flags) {
  ExperimentConfig config = LoadExperimentConfigFromFile(flags.config_path);
  if (flags.seed.has_value()) {
    config.master_seed = *flags.seed;
    config.seed_set = true;
  }
  if (flags.threads.has_value()) config.threads = *flags.threads;
  if (flags.trials_per_point.has_value()) config.trials_per_point = *flags.trials_per_point;
  if (flags.level.has_value()) config.level = *flags.level;
  if (flags.target_power.has_value()) config.target_power = *flags.target_power;
  if (flags.ceiling.has_value()) config.sc_ceiling = *flags.ceiling;
  if (flags.rounds_per_user.has_value()) config.rounds_per_user = *flags.rounds_per_user;
  if (!flags.out.empty()) config.output = flags.out;
  config.Validate();
  return config;
}

void EmitText(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  out << text;
}

int RunSweepCommand(const CommonFlags& flags, const std::string& kind) {
  ExperimentConfig config = LoadWithOverrides(flags);
  if (!kind.empty()) {
    config.experiment = kind == "tv" ? "tv_sweep" : kind + "_sweep";
    config.Validate();
  }
  std::vector<CsvRow> rows;
  if (config.experiment == "tv_sweep") {
    rows = RunTvSweep(config);
  } else {
    rows = RunParamSweep(config);
  }
  EmitText(config.output, RowsToCsvText(rows));
  return kExitOk;
}

int RunBoundsCommand(const CommonFlags& flags) {
  const ExperimentConfig config = LoadWithOverrides(flags);
  EmitText(config.output, BoundsCsvText(RunBounds(config)));
  return kExitOk;
}

int RunAuditCommand(const CommonFlags& flags) {
  const ExperimentConfig config = LoadWithOverrides(flags);
  EmitText(config.output, AuditJson(RunAudit(config)));
  return kExitOk;
}

int RunGameCommand(const CommonFlags& flags, const std::string& arm_name, int campaign_size,
                   int trials, double marginal) {
  ExperimentConfig config = LoadWithOverrides(flags);
  if (!config.seed_set) throw ConfigError("game requires a master seed");
  const ArmSpec* arm = nullptr;
  for (const ArmSpec& candidate : config.arms) {
    if (candidate.name == arm_name) arm = &candidate;
  }
  if (arm == nullptr) throw ConfigError("no arm named '" + arm_name + "' in the config");
  if (arm->kind != ArmSpec::Kind::kEcosystem) {
    throw ConfigError("game runs ecosystem arms only");
  }
  const double alt = marginal > 0.0 ? marginal : config.sweep_marginal;
  const AbInstance instance = MakeAbInstance(BuildBaseSpec(config), config.b_test, alt);
  const GameConfig game{instance, arm->params, campaign_size, config.rounds_per_user,
                        config.level, config.master_seed};
  const AdvantageEstimate estimate =
      EstimateAdvantage(game, trials, ResolveThreadCount(config.threads));
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "{\"arm\":\"%s\",\"campaign_size\":%d,\"alt_marginal\":%.12g,"
                "\"tv\":%.12g,\"trials\":%d,\"advantage\":%.12g,"
                "\"half_width_3sigma\":%.12g}\n",
                arm_name.c_str(), campaign_size, alt,
                TotalVariation(instance.d0, instance.d1), estimate.trials, estimate.advantage,
                estimate.half_width_3sigma);
  EmitText(config.output, buf);
  return kExitOk;
}

int RunPlotCommand(const std::string& csv_path, const std::string& out_path) {
  EmitText(out_path, RenderSvgPlot(ParseCsvFile(csv_path)));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adpriv: advertising-ecosystem leakage simulator and analysis toolkit"};
  app.require_subcommand(1);

  CommonFlags sweep_flags;
  std::string sweep_kind;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Sample-complexity sweep over a tv grid or a single parameter");
  AddCommonFlags(sweep, &sweep_flags, /*seed_required=*/true);
  sweep->add_option("--kind", sweep_kind, "Override the experiment kind")
      ->check(CLI::IsMember({"tv", "epsilon", "alpha_e", "alpha_t"}));

  CommonFlags bounds_flags;
  CLI::App* bounds =
      app.add_subcommand("bounds", "Analytic sample-complexity bounds per grid point");
  AddCommonFlags(bounds, &bounds_flags, /*seed_required=*/false);

  CommonFlags audit_flags;
  CLI::App* audit = app.add_subcommand(
      "audit", "Leakage witnesses plus brute-force distributional-privacy verdicts");
  AddCommonFlags(audit, &audit_flags, /*seed_required=*/false);

  CommonFlags game_flags;
  std::string game_arm = "non_private";
  int game_n = 1000;
  int game_trials = 1000;
  double game_marginal = 0.0;
  CLI::App* game = app.add_subcommand("game", "Single distinguishing-game advantage estimate");
  AddCommonFlags(game, &game_flags, /*seed_required=*/false);
  game->add_option("--arm", game_arm, "Ecosystem arm to play");
  game->add_option("--n", game_n, "Campaign size");
  game->add_option("--trials", game_trials, "Distinguishing trials");
  game->add_option("--marginal", game_marginal, "Alternate test-bit marginal (0 = config)");

  std::string plot_csv, plot_out;
  CLI::App* plot = app.add_subcommand("plot", "Render a sweep CSV as an SVG line chart");
  plot->add_option("--csv", plot_csv, "Sweep CSV path")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", plot_out, "Output SVG path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep->parsed()) return RunSweepCommand(sweep_flags, sweep_kind);
    if (bounds->parsed()) return RunBoundsCommand(bounds_flags);
    if (audit->parsed()) return RunAuditCommand(audit_flags);
    if (game->parsed()) {
      return RunGameCommand(game_flags, game_arm, game_n, game_trials, game_marginal);
    }
    if (plot->parsed()) return RunPlotCommand(plot_csv, plot_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DimensionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CeilingError& e) {
    std::cerr << "search ceiling: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const InfeasibleSecretError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const DegenerateError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const CapacityError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
