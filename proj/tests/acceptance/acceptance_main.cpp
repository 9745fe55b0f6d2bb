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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "qfb/correlation.hpp"
#include "qfb/sme.hpp"
#include "support/generators.hpp"

using namespace qfb;
using qfb::testing::Rng;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

CMatrix comm(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

CMatrix diss(const CMatrix& a, const CMatrix& rho) {
  return a * rho * a.adjoint() - 0.5 * (a.adjoint() * a * rho + rho * a.adjoint() * a);
}

CMatrix innovation(const CMatrix& a, const CMatrix& rho) {
  const CMatrix s = a * rho + rho * a.adjoint();
  return s - s.trace() * rho;
}

// Models with d in {2,3,4}, L in {1,2}, R in {1..2L}, hbar in {1, 0.5}; every
// combination `per_combo` times.
std::vector<SystemModel> model_grid(int per_combo, Rng& rng) {
  std::vector<SystemModel> out;
  for (int rep = 0; rep < per_combo; ++rep)
    for (Eigen::Index d : {2, 3, 4})
      for (Eigen::Index num_l : {1, 2})
        for (Eigen::Index num_r = 1; num_r <= 2 * num_l; ++num_r)
          for (double hbar : {1.0, 0.5}) out.push_back(qfb::testing::random_model(d, num_l, num_r, hbar, rng));
  return out;
}

Outcome lindblad_equivalence() {
  Rng rng(1001);
  const auto models = model_grid(3, rng);
  double worst = 0.0;
  for (const auto& m : models) worst = std::max(worst, max_abs_diff(build_lmfb(m), build_lindblad_form(m)));
  return {models.size() >= 100 && worst < 1e-10,
          std::to_string(models.size()) + " models, max |G_direct - G_lindblad| = " + fmt("%.3g", worst)};
}

Outcome square_root_invariance() {
  Rng rng(1002);
  const auto models = model_grid(1, rng);
  double worst = 0.0;
  int trials = 0;
  for (const auto& m : models) {
    const Superoperator reference = build_lindblad_form(m);
    const CMatrix b = psd_sqrt(m.z());
    for (int k = 0; k < 20; ++k, ++trials) {
      const CMatrix w = qfb::testing::random_unitary(m.num_currents(), rng);
      worst = std::max(worst, max_abs_diff(build_lindblad_form(m, CMatrix(w * b)), reference));
    }
  }
  return {worst < 1e-10, std::to_string(trials) + " (model, W) pairs, max change = " + fmt("%.3g", worst)};
}

Outcome heterodyne_closed_forms() {
  double worst = 0.0;
  const Complex i(0.0, 1.0);
  for (double eta : {0.0, 0.3, 0.75, 1.0}) {
    const double hbar = 1.0;
    const auto model = heterodyne_model(qubit::sigma_minus(), CMatrix::Zero(2, 2), CMatrix::Zero(2, 2), eta, hbar,
                                        CMatrix::Zero(2, 2));
    CMatrix z(2, 2), root(2, 2);
    z << 1.0 - eta / 2, -i * (eta / 2), i * (eta / 2), 1.0 - eta / 2;
    z *= hbar;
    const double s = std::sqrt(1.0 - eta);
    root << 1.0 + s, -i * (1.0 - s), i * (1.0 - s), 1.0 + s;
    root *= std::sqrt(hbar) / 2;
    worst = std::max(worst, max_abs(model.z() - z));
    worst = std::max(worst, max_abs(compute_z(model.mrep()) - z));
    worst = std::max(worst, max_abs(psd_sqrt(model.z()) - root));
  }
  return {worst < 1e-12, "eta in {0, 0.3, 0.75, 1}, max entry error = " + fmt("%.3g", worst)};
}

Outcome homodyne_limit() {
  Rng rng(1004);
  double worst_me = 0.0, worst_sme = 0.0;
  for (double eta : {0.5, 1.0}) {
    for (double hbar : {1.0, 0.5}) {
      for (Eigen::Index d : {2, 3}) {
        const CMatrix c = qfb::testing::random_matrix(d, d, rng);
        const CMatrix f = qfb::testing::random_hermitian(d, rng);
        const CMatrix h = qfb::testing::random_hermitian(d, rng);
        const auto model = homodyne_model(c, f, eta, hbar, h);
        const Superoperator g = build_lmfb(model);
        const Superoperator gl = build_lindblad_form(model);
        const SmeIntegrator integ(model);
        const double m = std::sqrt(hbar * eta);
        for (int k = 0; k < 10; ++k) {
          const CMatrix rho = qfb::testing::random_density(d, rng);
          // Lindblad-form display of the homodyne feedback master equation.
          const CMatrix me = (-kI * comm(h + 0.5 * m * (f * c + c.adjoint() * f), rho) + diss(c - kI * m * f, rho) +
                              hbar * (1.0 - eta) * diss(f, rho)) /
                             hbar;
          worst_me = std::max({worst_me, max_abs(g.apply(rho) - me), max_abs(gl.apply(rho) - me)});
          // Conditioned update as displayed, with the feedback commutator unexpanded.
          const double dt = 1e-3;
          const double dw = std::sqrt(dt) * std::normal_distribution<double>()(rng);
          const CMatrix drift = -kI * comm(h, rho) + diss(c, rho) + hbar * diss(f, rho) -
                                kI * m * comm(f, c * rho + rho * c.adjoint());
          const CMatrix sme = rho + (drift * dt + dw * innovation(m * c - kI * hbar * f, rho)) / hbar;
          RVector dwv(1);
          dwv(0) = dw;
          worst_sme = std::max(worst_sme, max_abs(rho + integ.increment(rho, dwv, dt).drho - sme));
        }
      }
    }
  }
  return {worst_me < 1e-12 && worst_sme < 1e-12,
          "master equation " + fmt("%.3g", worst_me) + ", conditioned update " + fmt("%.3g", worst_sme)};
}

Outcome trace_hermiticity_cp() {
  Rng rng(1005);
  const auto models = model_grid(1, rng);
  double tp = 0.0, hp = 0.0, choi = 1.0;
  int count = 0;
  for (const auto& m : models) {
    for (const Superoperator& g : {build_lm(m), build_lmfb(m), build_lindblad_form(m)}) {
      tp = std::max(tp, trace_preservation_residual(g));
      hp = std::max(hp, hermiticity_preservation_residual(g));
      choi = std::min(choi, cp_check(g, 1e-3).min_eigenvalue);
      ++count;
    }
  }
  return {tp <= 1e-12 && hp <= 1e-12 && choi >= -1e-10,
          std::to_string(count) + " generators, trace " + fmt("%.3g", tp) + ", hermiticity " + fmt("%.3g", hp) +
              ", Choi min eigenvalue " + fmt("%.3g", choi)};
}

Outcome duality() {
  Rng rng(1006);
  const auto models = model_grid(1, rng);
  double worst = 0.0;
  for (const auto& m : models) {
    const Superoperator g = build_lmfb(m);
    const Superoperator gd = adjoint_generator(g);
    for (int k = 0; k < 50; ++k) {
      const CMatrix a = qfb::testing::random_matrix(m.dim(), m.dim(), rng);
      const CMatrix rho = qfb::testing::random_density(m.dim(), rng);
      const Complex lhs = (a * g.apply(rho)).trace();
      const Complex rhs = (gd.apply(a.adjoint()).adjoint() * rho).trace();
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return {worst < 1e-10, std::to_string(models.size()) + " models x 50 pairs, max gap " + fmt("%.3g", worst)};
}

// Averaged conditioned Bloch vector against the master equation at the
// recorded checkpoints; returns the worst |diff| / SE and |diff|.
std::pair<double, double> compare_average(const SystemModel& model, const CMatrix& rho0, const SmeConfig& cfg) {
  const auto records = run_trajectories(model, rho0, cfg);
  const ExpectationSummary sum = summarize(records);
  const auto exact = evolve_unconditional(build_lmfb(model), rho0, sum.times);
  double worst_z = 0.0, worst_abs = 0.0;
  for (std::size_t k = 1; k < sum.times.size(); ++k) {
    for (std::size_t o = 0; o < cfg.observables.size(); ++o) {
      const double ref = (cfg.observables[o] * exact[k]).trace().real();
      const double diff = std::abs(sum.mean(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(k)).real() - ref);
      const double se = sum.se_real(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(k));
      worst_abs = std::max(worst_abs, diff);
      worst_z = std::max(worst_z, diff / std::max(se, 1e-15));
    }
  }
  return {worst_z, worst_abs};
}

SystemModel feedback_qubit() {
  return homodyne_model(qubit::sigma_minus(), 0.3 * qubit::sigma_y(), 0.8, 1.0, CMatrix::Zero(2, 2));
}

Outcome unraveling() {
  SmeConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_final = 2.0;
  cfg.n_traj = 5000;
  cfg.seed = 20240607;
  cfg.record = RecordMode::Expectations;
  cfg.record_every = 200;
  cfg.record_currents = false;
  cfg.observables = {qubit::sigma_x(), qubit::sigma_y(), qubit::sigma_z()};
  const auto [z, abs_diff] = compare_average(feedback_qubit(), qubit::excited(), cfg);
  return {z <= 5.0 && abs_diff <= 0.05,
          "10 checkpoints, worst " + fmt("%.2f", z) + " SE, worst |diff| " + fmt("%.3g", abs_diff)};
}

Outcome zero_m_limit() {
  const double hbar = 0.5;
  const CMatrix c = qubit::sigma_minus();
  const CMatrix f = 0.5 * qubit::sigma_x();
  const CMatrix h = qubit::sigma_z();
  const SystemModel model(h, VOp{c}, VOp{f}, MRep{CMatrix::Zero(1, 1), hbar});
  const Superoperator expected =
      (commutator_generator(h, 2) + dissipator(VOp{c}, 2)) * (1.0 / hbar) + dissipator(VOp{f}, 2);
  const double gen_diff = max_abs_diff(build_lmfb(model), expected);

  // Currents: pooled samples of y dt must look like N(0, dt).
  SmeConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_final = 1.0;
  cfg.n_traj = 2000;
  cfg.seed = 4242;
  cfg.record = RecordMode::Expectations;
  cfg.record_every = 100;
  cfg.observables = {qubit::sigma_x(), qubit::sigma_y(), qubit::sigma_z()};
  const CMatrix plus = 0.5 * (CMatrix::Identity(2, 2) + qubit::sigma_x());
  const auto records = run_trajectories(model, plus, cfg);
  double sum = 0.0, sq = 0.0;
  double n = 0.0;
  bool exact_noise = true;
  for (const auto& rec : records) {
    GaussianStream stream(cfg.seed, rec.stream_id, cfg.dt);
    const RVector dw = stream.draw(rec.currents.cols());
    for (Eigen::Index k = 0; k < rec.currents.cols(); ++k) {
      const double ydt = rec.currents(0, k) * cfg.dt;
      exact_noise = exact_noise && std::abs(ydt - dw(k)) <= 1e-15;
      sum += ydt;
      sq += ydt * ydt;
      n += 1.0;
    }
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  const double mean_z = std::abs(mean) / std::sqrt(cfg.dt / n);
  const double var_z = std::abs(var - cfg.dt) / (cfg.dt * std::sqrt(2.0 / n));

  SmeConfig avg = cfg;
  avg.record_currents = false;
  const auto [z, abs_diff] = compare_average(model, plus, avg);
  return {gen_diff < 1e-12 && exact_noise && mean_z <= 4.0 && var_z <= 4.0 && z <= 5.0,
          "generator " + fmt("%.3g", gen_diff) + ", y dt == dw " + (exact_noise ? "yes" : "no") + ", mean " +
              fmt("%.2f", mean_z) + " sigma, variance " + fmt("%.2f", var_z) + " sigma, average " + fmt("%.2f", z) +
              " SE"};
}

Outcome correlation_cross_check() {
  const SystemModel model = feedback_qubit();
  const CMatrix rho_ss = steady_state(build_lmfb(model));
  const std::vector<double> taus = {0.1, 0.5, 1.0};
  const CorrelationResult reg = correlation_with_feedback(model, rho_ss, taus);

  // Products of currents binned over `bin` steps, with sliding time origins
  // over a window of `origins` steps; each trajectory gives one estimate per lag.
  const double dt = 1e-3;
  const std::size_t bin = 50;
  const std::size_t origins = 1000;
  std::vector<std::size_t> lags;
  for (double tau : taus) lags.push_back(static_cast<std::size_t>(std::llround(tau / dt)));
  const std::size_t steps = origins + lags.back() + bin;

  SmeConfig cfg;
  cfg.dt = dt;
  cfg.t_final = dt * static_cast<double>(steps);
  cfg.seed = 777;
  const std::size_t n_traj = 10000;
  const SmeIntegrator integ(model);
  const double width = dt * static_cast<double>(bin);

  std::vector<double> acc(taus.size(), 0.0), acc_sq(taus.size(), 0.0);
  std::vector<double> prefix(steps + 1);
  for (std::size_t traj = 0; traj < n_traj; ++traj) {
    prefix[0] = 0.0;
    simulate_trajectory(integ, rho_ss, cfg, traj,
                        [&](std::size_t k, double, const CMatrix&, std::span<const double> ydt) {
                          prefix[k] = prefix[k - 1] + ydt[0];
                        });
    for (std::size_t j = 0; j < lags.size(); ++j) {
      double est = 0.0;
      for (std::size_t o = 0; o < origins; ++o) {
        const double a = prefix[o + bin] - prefix[o];
        const double b = prefix[o + lags[j] + bin] - prefix[o + lags[j]];
        est += a * b;
      }
      est /= static_cast<double>(origins) * width * width;
      acc[j] += est;
      acc_sq[j] += est * est;
    }
  }
  bool pass = true;
  std::string detail;
  const double n = static_cast<double>(n_traj);
  for (std::size_t j = 0; j < taus.size(); ++j) {
    const double mean = acc[j] / n;
    const double se = std::sqrt(std::max(acc_sq[j] / n - mean * mean, 0.0) / (n - 1.0));
    const double c = reg.smooth[j](0, 0);
    const double z = std::abs(mean - c) / se;
    pass = pass && z <= 3.0;
    detail += (j ? "; " : "") + fmt("tau=%.1f: ", taus[j]) + fmt("C=%.4f", c) + fmt(" MC=%.4f", mean) +
              fmt(" (%.2f SE)", z);
  }
  return {pass, detail};
}

Outcome feedback_free_reduction() {
  Rng rng(1010);
  const std::vector<double> taus = {0.0, 0.2, 1.0, 3.0};
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Eigen::Index d = 2 + k % 3;
    const Eigen::Index num_l = 1 + k % 2;
    const Eigen::Index num_r = 1 + (k / 2) % (2 * num_l);
    const SystemModel model = qfb::testing::random_model(d, num_l, num_r, (k % 2) ? 1.0 : 0.5, rng).without_feedback();
    const CMatrix rho = qfb::testing::random_density(d, rng);
    const auto a = correlation_with_feedback(model, rho, taus);
    const auto b = correlation_measurement_only(model, rho, taus);
    for (std::size_t j = 0; j < taus.size(); ++j) worst = std::max(worst, (a.smooth[j] - b.smooth[j]).cwiseAbs().maxCoeff());
  }
  return {worst < 1e-12, "20 models, max difference " + fmt("%.3g", worst)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "Lindblad equivalence", lindblad_equivalence},
      {2, "square-root invariance", square_root_invariance},
      {3, "heterodyne closed forms", heterodyne_closed_forms},
      {4, "homodyne limit", homodyne_limit},
      {5, "trace, Hermiticity and complete positivity", trace_hermiticity_cp},
      {6, "Schroedinger/Heisenberg duality", duality},
      {7, "unraveling consistency", unraveling},
      {8, "zero-M limit", zero_m_limit},
      {9, "correlation cross-check", correlation_cross_check},
      {10, "feedback-free reduction", feedback_free_reduction},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!out.pass) ++failures;
    std::printf("%s criterion %2d %s: %s [%.2f s]\n", out.pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
