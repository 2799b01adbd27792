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

#include <benchmark/benchmark.h>

#include "adpriv/analysis.h"
#include "adpriv/distinguishing.h"
#include "adpriv/dp_stats.h"
#include "adpriv/feature_space.h"

namespace {

using namespace adpriv;

const CorrelatedBernoulliSpec& BaseSpec() {
  static const auto spec = CorrelatedBernoulliSpec::Exchangeable(
      {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5}, 0.4);
  return spec;
}

void BM_Closeness(benchmark::State& state) {
  const FeatureVector a = FeatureVector::FromString("10110101");
  const FeatureVector b = FeatureVector::FromString("01110110");
  for (auto _ : state) {
    benchmark::DoNotOptimize(Closeness(a, b));
  }
}
BENCHMARK(BM_Closeness);

void BM_SampleDistribution(benchmark::State& state) {
  const ExplicitDistribution d = Materialize(BaseSpec());
  RngStream rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(d.Sample(rng));
  }
}
BENCHMARK(BM_SampleDistribution);

void BM_MaterializeOneFactor(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(Materialize(BaseSpec()));
  }
}
BENCHMARK(BM_MaterializeOneFactor);

void BM_HellingerSquared(benchmark::State& state) {
  const ExplicitDistribution p = Materialize(BaseSpec());
  const ExplicitDistribution q = Materialize(DeriveAlternate(BaseSpec(), 0, 0.8));
  for (auto _ : state) {
    benchmark::DoNotOptimize(HellingerSquared(p, q));
  }
}
BENCHMARK(BM_HellingerSquared);

void BM_TulapSample(benchmark::State& state) {
  const TulapParams params = TulapParams::FromEpsilon(0.5);
  RngStream rng(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(TulapSample(params, rng));
  }
}
BENCHMARK(BM_TulapSample);

void BM_UmpPValue(benchmark::State& state) {
  const TulapParams params = TulapParams::FromEpsilon(0.5);
  const long long n = state.range(0);
  const double noisy = 0.105 * static_cast<double>(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(UmpDpBinomialTest(noisy, n, 0.1, params, TestSide::kUpper));
  }
}
BENCHMARK(BM_UmpPValue)->Arg(1000)->Arg(100000);

void BM_RunExec(benchmark::State& state) {
  const AbInstance instance = MakeAbInstance(BaseSpec(), 0, 0.8);
  BehaviorParams params;
  params.alpha_t = 1.0;
  params.alpha_e = 0.2;
  const GameConfig config{instance, params, static_cast<int>(state.range(0)), 1, 0.05, 3};
  RngStream rng(4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(RunExec(config, 1, rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunExec)->Arg(256)->Arg(4096)->Arg(65536);

}  // namespace

BENCHMARK_MAIN();
