// Copyright 2026 The qfb Authors
//
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

#include <benchmark/benchmark.h>

#include <vector>

#include "qfb/correlation.hpp"
#include "qfb/sme.hpp"

namespace {

using namespace qfb;

// Damped oscillator truncated at d levels, homodyne feedback of the position.
SystemModel oscillator(Eigen::Index d) {
  const CMatrix a = destroy(d);
  const CMatrix x = a + a.adjoint();
  return homodyne_model(a, 0.2 * x, 0.8, 1.0, a.adjoint() * a);
}

CMatrix ground(Eigen::Index d) {
  CMatrix rho = CMatrix::Zero(d, d);
  rho(0, 0) = 1.0;
  return rho;
}

void BM_BuildFeedbackGenerator(benchmark::State& state) {
  const SystemModel model = oscillator(state.range(0));
  for (auto _ : state) {
    Superoperator g = build_lmfb(model);
    benchmark::DoNotOptimize(g.matrix().data());
  }
}
BENCHMARK(BM_BuildFeedbackGenerator)->RangeMultiplier(2)->Range(2, 16);

void BM_BuildLindbladForm(benchmark::State& state) {
  const SystemModel model = oscillator(state.range(0));
  for (auto _ : state) {
    Superoperator g = build_lindblad_form(model);
    benchmark::DoNotOptimize(g.matrix().data());
  }
}
BENCHMARK(BM_BuildLindbladForm)->RangeMultiplier(2)->Range(2, 16);

void BM_SmeStep(benchmark::State& state) {
  const Eigen::Index d = state.range(0);
  const SmeIntegrator integ(oscillator(d));
  auto ws = integ.make_workspace();
  CMatrix rho = ground(d);
  GaussianStream noise(1, 0, 1e-3);
  std::vector<double> dw(1), ydt(1);
  for (auto _ : state) {
    noise.draw(dw);
    integ.step_in_place(rho, dw, 1e-3, true, ydt, ws);
    benchmark::DoNotOptimize(rho.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SmeStep)->RangeMultiplier(2)->Range(2, 16);

void BM_Trajectories(benchmark::State& state) {
  const SystemModel model = homodyne_model(qubit::sigma_minus(), 0.3 * qubit::sigma_y(), 0.8, 1.0, CMatrix::Zero(2, 2));
  SmeConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_final = 1.0;
  cfg.n_traj = static_cast<std::size_t>(state.range(0));
  cfg.record = RecordMode::Expectations;
  cfg.record_every = 100;
  cfg.record_currents = false;
  cfg.observables = {qubit::sigma_z()};
  cfg.threads = 1;
  for (auto _ : state) {
    auto records = run_trajectories(model, qubit::excited(), cfg);
    benchmark::DoNotOptimize(records.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 1000);
}
BENCHMARK(BM_Trajectories)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_SteadyState(benchmark::State& state) {
  const Superoperator g = build_lmfb(oscillator(state.range(0)));
  for (auto _ : state) {
    CMatrix rho = steady_state(g);
    benchmark::DoNotOptimize(rho.data());
  }
}
BENCHMARK(BM_SteadyState)->RangeMultiplier(2)->Range(2, 16)->Unit(benchmark::kMicrosecond);

void BM_Correlation(benchmark::State& state) {
  const Eigen::Index d = state.range(0);
  const SystemModel model = oscillator(d);
  const CMatrix rho = steady_state(build_lmfb(model));
  std::vector<double> taus;
  for (int k = 0; k < 50; ++k) taus.push_back(0.1 * k);
  for (auto _ : state) {
    auto c = correlation_with_feedback(model, rho, taus);
    benchmark::DoNotOptimize(c.smooth.data());
  }
}
BENCHMARK(BM_Correlation)->RangeMultiplier(2)->Range(2, 8)->Unit(benchmark::kMicrosecond);

void BM_GaussianStream(benchmark::State& state) {
  GaussianStream noise(42, 0, 1e-3);
  std::vector<double> out(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    noise.draw(out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GaussianStream)->Arg(1)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
