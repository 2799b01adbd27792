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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "adpriv/experiments.h"

using namespace adpriv;

namespace {

// Small, fast sweep configuration: 4 bits, strong signal, few trials.
ExperimentConfig TinyConfig() {
  ExperimentConfig config = DefaultExperimentConfig();
  config.ell = 4;
  config.correlation.rho = 0.3;
  config.marginal_grid = {0.7, 0.8, 0.9};
  config.trials_per_point = 60;
  config.master_seed = 99;
  config.seed_set = true;
  config.threads = 2;
  for (ArmSpec& arm : config.arms) arm.params.alpha_e = 0.5;
  return config;
}

}  // namespace

TEST_CASE("config loading applies defaults and validates") {
  SUBCASE("minimal document") {
    const ExperimentConfig config =
        LoadExperimentConfigFromJsonText(R"({"experiment": "tv_sweep", "master_seed": 1})");
    CHECK(config.ell == 8);
    CHECK(config.level == doctest::Approx(0.05));
    CHECK(config.target_power == doctest::Approx(0.8));
    CHECK(config.trials_per_point == 400);
    CHECK(config.rounds_per_user == 1);
    CHECK(config.arms.size() == 3);
    CHECK(config.seed_set);
  }
  SUBCASE("bad json") {
    CHECK_THROWS_AS(LoadExperimentConfigFromJsonText("{nope"), ConfigError);
  }
  SUBCASE("unknown keys are rejected") {
    CHECK_THROWS_AS(LoadExperimentConfigFromJsonText(R"({"experiment":"tv_sweep","zap":1})"),
                    ConfigError);
  }
  SUBCASE("invalid values are rejected") {
    CHECK_THROWS_AS(LoadExperimentConfigFromJsonText(R"({"experiment":"bogus"})"), ConfigError);
    CHECK_THROWS_AS(LoadExperimentConfigFromJsonText(R"({"experiment":"tv_sweep","ell":30})"),
                    ConfigError);
    CHECK_THROWS_AS(
        LoadExperimentConfigFromJsonText(
            R"({"experiment":"tv_sweep","arms":[{"name":"x","epsilon":1.5}]})"),
        ConfigError);
  }
  SUBCASE("config hash is stable and sensitive") {
    ExperimentConfig a = TinyConfig();
    ExperimentConfig b = TinyConfig();
    CHECK(ConfigHashHex(a) == ConfigHashHex(b));
    b.level = 0.01;
    CHECK(ConfigHashHex(a) != ConfigHashHex(b));
  }
}

TEST_CASE("tv sweep emits one row per grid point and arm, deterministically") {
  const ExperimentConfig config = TinyConfig();
  const std::vector<CsvRow> rows = RunTvSweep(config);
  CHECK(rows.size() == 9);  // 3 grid points x 3 arms

  // Determinism: byte-identical rerun, also under a different thread count.
  const std::string text = RowsToCsvText(rows);
  ExperimentConfig reconfigured = config;
  reconfigured.threads = 1;
  CHECK(RowsToCsvText(RunTvSweep(reconfigured)) == text);

  // Rows carry the seed and hash, and searches actually ran.
  for (const CsvRow& row : rows) {
    CHECK(row.seed == 99);
    CHECK(row.config_hash == ConfigHashHex(config));
    CHECK(row.minimal_n >= 1);
    CHECK(row.power >= config.target_power);
  }

  SUBCASE("csv round trip") {
    const std::vector<CsvRow> parsed = ParseCsvText(text);
    CHECK(parsed.size() == rows.size());
    CHECK(RowsToCsvText(parsed) == text);
  }

  SUBCASE("missing seed is rejected") {
    ExperimentConfig no_seed = config;
    no_seed.seed_set = false;
    CHECK_THROWS_AS(RunTvSweep(no_seed), ConfigError);
  }

  SUBCASE("fewer than three grid points is rejected") {
    ExperimentConfig short_grid = config;
    short_grid.marginal_grid = {0.8, 0.9};
    CHECK_THROWS_AS(RunTvSweep(short_grid), ConfigError);
  }
}

TEST_CASE("ceiling errors are recorded per row, not fatal") {
  ExperimentConfig config = TinyConfig();
  config.sc_ceiling = 4;  // every arm will hit this
  const std::vector<CsvRow> rows = RunTvSweep(config);
  CHECK(rows.size() == 9);
  for (const CsvRow& row : rows) CHECK(row.minimal_n == -1);
}

TEST_CASE("param sweeps pick the right template arm and emit sorted rows") {
  ExperimentConfig config = TinyConfig();
  config.sweep_marginal = 0.9;

  SUBCASE("epsilon sweep uses the dp arm") {
    config.experiment = "epsilon_sweep";
    config.param_grid = {0.9, 0.1, 0.5};
    const std::vector<CsvRow> rows = RunParamSweep(config);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].param_value == doctest::Approx(0.1));
    CHECK(rows[1].param_value == doctest::Approx(0.5));
    CHECK(rows[2].param_value == doctest::Approx(0.9));
    for (const CsvRow& row : rows) {
      CHECK(row.arm == "private");
      CHECK(row.param_name == "epsilon");
      CHECK(row.minimal_n >= 1);
    }
  }

  SUBCASE("alpha_e sweep uses the identity arm") {
    config.experiment = "alpha_e_sweep";
    config.param_grid = {0.2, 0.5};
    const std::vector<CsvRow> rows = RunParamSweep(config);
    REQUIRE(rows.size() == 2);
    for (const CsvRow& row : rows) {
      CHECK(row.arm == "non_private");
      CHECK(row.param_name == "alpha_e");
    }
  }

  SUBCASE("sweeping an absent arm kind is an error") {
    config.experiment = "epsilon_sweep";
    config.param_grid = {0.5};
    config.arms = {config.arms[0], config.arms[1]};  // drop the dp arm
    CHECK_THROWS_AS(RunParamSweep(config), ConfigError);
  }
}

TEST_CASE("csv parsing is strict about schema and content") {
  CHECK_THROWS_AS(ParseCsvText(""), ConfigError);
  CHECK_THROWS_AS(ParseCsvText("bogus,header\n"), ConfigError);
  CHECK_THROWS_AS(ParseCsvText(CsvHeader() + "\n"), ConfigError);  // no data rows
  CHECK_THROWS_WITH_AS(
      ParseCsvText(CsvHeader() + "\n" + "tv_sweep,arm,0.1,marginal,0.7,12,0.8,0.05,1\n"),
      doctest::Contains("line 2"), ConfigError);
  CHECK_THROWS_WITH_AS(
      ParseCsvText(CsvHeader() + "\n" +
                   "tv_sweep,arm,xxx,marginal,0.7,12,0.8,0.05,1,00ff\n"),
      doctest::Contains("tv_distance"), ConfigError);
}

TEST_CASE("svg plotting") {
  const ExperimentConfig config = TinyConfig();
  const std::vector<CsvRow> rows = RunTvSweep(config);
  const std::string svg = RenderSvgPlot(rows);

  SUBCASE("one polyline per arm") {
    std::size_t count = 0, pos = 0;
    while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
      ++count;
      pos += 1;
    }
    CHECK(count == 3);
    CHECK(svg.find("baseline") != std::string::npos);
    CHECK(svg.find("non_private") != std::string::npos);
    CHECK(svg.find("private") != std::string::npos);
  }

  SUBCASE("re-rendering reproduces identical bytes") {
    CHECK(RenderSvgPlot(rows) == svg);
  }

  SUBCASE("empty input is an error") {
    CHECK_THROWS_AS(RenderSvgPlot({}), ConfigError);
  }
}

TEST_CASE("bounds rows carry the closed forms") {
  ExperimentConfig config = TinyConfig();
  const std::vector<BoundsRow> rows = RunBounds(config);
  REQUIRE(rows.size() == 3);
  for (const BoundsRow& row : rows) {
    CHECK(row.h_squared > 0.0);
    CHECK(row.sc_lower == doctest::Approx(std::log(1.5) / (4.0 * row.h_squared)));
    CHECK(row.sc_upper == doctest::Approx(1.0 / row.h_squared));
    CHECK(row.sc_private_upper == doctest::Approx(10.0 * row.sc_upper / 0.5));
    CHECK(row.gamma == doctest::Approx(4.0 / std::log(1.5)));
    CHECK(row.k == doctest::Approx(row.b / row.a));
    // Arms are alpha_t 1.0 vs 0.5.
    CHECK(row.z ==
          doctest::Approx(row.gamma * (1.0 + row.k) / (1.0 + 0.5 * row.k)));
    CHECK(row.z > 0.0);
  }
  // Larger marginal shift, larger hellinger distance.
  CHECK(rows[0].h_squared < rows[2].h_squared);
}

TEST_CASE("marginal search hits a requested total variation") {
  const auto base = BuildBaseSpec(TinyConfig());
  const double target = 0.25;
  const double m = FindMarginalForTv(base, 0, target);
  const double tv =
      TotalVariation(Materialize(base), Materialize(DeriveAlternate(base, 0, m)));
  CHECK(tv == doctest::Approx(target).epsilon(1e-6));
  CHECK_THROWS_AS(FindMarginalForTv(base, 0, 0.999), DegenerateError);
}
