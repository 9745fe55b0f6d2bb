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

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

using qfb::cli::CommonOptions;
using qfb::cli::StateSource;

struct CommonFlags {
  CommonOptions opts;
  std::string model;
  std::string out = "qfb-out";
  std::uint64_t seed = 0;
  double tol = 0.0;
  double hbar = 0.0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* tol_opt = nullptr;
  CLI::Option* hbar_opt = nullptr;

  void add(CLI::App* app, const std::string& tol_help) {
    app->add_option("--model,-m", model, "Model file")->required();
    app->add_option("--out,-o", out, "Output directory")->capture_default_str();
    seed_opt = app->add_option("--seed", seed, "Random seed (recorded; used by sme)");
    tol_opt = app->add_option("--tol", tol, tol_help)->check(CLI::PositiveNumber);
    hbar_opt = app->add_option("--hbar", hbar, "Override hbar from the model file")->check(CLI::PositiveNumber);
  }

  const CommonOptions& finish() {
    opts.model = model;
    opts.out = out;
    if (seed_opt->count()) opts.seed = seed;
    if (tol_opt->count()) opts.tol = tol;
    if (hbar_opt->count()) opts.hbar = hbar;
    return opts;
  }
};

struct StateFlags {
  std::string rho0;
  long long basis = 0;
  bool steady = false;
  CLI::Option* rho0_opt = nullptr;
  CLI::Option* basis_opt = nullptr;

  void add(CLI::App* app) {
    rho0_opt = app->add_option("--rho0", rho0, "Initial state matrix file");
    basis_opt = app->add_option("--basis-state", basis, "Start in basis state k");
    app->add_flag("--steady", steady, "Start in the steady state of the feedback generator");
  }

  StateSource finish() const {
    StateSource s;
    if (rho0_opt->count()) s.file = rho0;
    if (basis_opt->count()) s.basis_state = basis;
    s.steady = steady;
    return s;
  }
};

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  for (char ch : text) {
    if (ch == ',') {
      out.push_back(item);
      item.clear();
    } else if (ch != ' ') {
      item += ch;
    }
  }
  if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qfb: Markovian quantum feedback with diffusive measurements"};
  app.set_version_flag("--version", std::string("qfb ") + QFB_VERSION_STRING);
  app.require_subcommand(1);

  CommonFlags common;
  StateFlags state;

  auto* validate = app.add_subcommand("validate", "Check a model file and report its structure");
  common.add(validate, "Validation tolerance (default 1e-9)");

  auto* check = app.add_subcommand("lindblad-check", "Compare the feedback generator with its Lindblad form");
  std::string root;
  common.add(check, "Allowed max-norm difference (default 1e-10)");
  auto* root_opt = check->add_option("--root", root, "Matrix file with B, B^dagger B = Z");

  auto* evolve = app.add_subcommand("evolve", "Unconditional evolution under the feedback master equation");
  common.add(evolve, "Tolerance for the initial state (default 1e-9)");
  state.add(evolve);
  qfb::cli::EvolveOptions ev;
  std::string ev_times, ev_obs;
  evolve->add_option("--t-final", ev.t_final, "Final time")->capture_default_str();
  evolve->add_option("--dt-out", ev.dt_out, "Output spacing")->capture_default_str();
  evolve->add_option("--times", ev_times, "Comma-separated output times (overrides --t-final/--dt-out)");
  evolve->add_option("--observables", ev_obs, "Comma list of sx, sy, sz, n, name=file");
  evolve->add_flag("--states", ev.dump_states, "Also write every density-matrix entry");

  auto* sme = app.add_subcommand("sme", "Conditioned trajectories of the stochastic feedback master equation");
  common.add(sme, "Tolerance for the initial state (default 1e-9)");
  qfb::cli::SmeOptions so;
  std::string sme_obs;
  bool no_renorm = false;
  StateFlags sme_state;
  sme_state.add(sme);
  sme->add_option("--dt", so.dt, "Integration step")->capture_default_str();
  sme->add_option("--t-final", so.t_final, "Final time")->capture_default_str();
  sme->add_option("--n-traj", so.n_traj, "Number of trajectories")->capture_default_str();
  sme->add_option("--record-every", so.record_every, "Write every k-th step")->capture_default_str();
  sme->add_option("--threads", so.threads, "Worker threads (0 = all cores)")->capture_default_str();
  sme->add_option("--observables", sme_obs, "Comma list of sx, sy, sz, n, name=file");
  sme->add_flag("--no-renormalize", no_renorm, "Skip trace renormalization after each step");
  bool no_projection = false;
  sme->add_flag("--no-projection", no_projection, "Keep small negative eigenvalues instead of projecting them out");
  sme->add_flag("--per-trajectory", so.per_trajectory, "Write one CSV per trajectory");

  auto* corr = app.add_subcommand("correlate", "Two-time current correlations by quantum regression");
  common.add(corr, "Steady-state nullspace tolerance (default 1e-10)");
  qfb::cli::CorrelateOptions co;
  std::string taus, feedback = "on";
  StateFlags corr_state;
  corr_state.add(corr);
  corr->add_option("--taus", taus, "Comma-separated lags");
  corr->add_option("--tau-max", co.tau_max, "Largest lag for an even grid")->capture_default_str();
  corr->add_option("--n-tau", co.n_tau, "Number of lags for an even grid")->capture_default_str();
  corr->add_option("--feedback", feedback, "on: with feedback; off: measurement only")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(qfb::cli::ExitCode::Io);
  }

  try {
    if (validate->parsed()) return qfb::cli::cmd_validate(common.finish(), std::cout);
    if (check->parsed()) {
      qfb::cli::LindbladCheckOptions opts;
      if (root_opt->count()) opts.root = root;
      return qfb::cli::cmd_lindblad_check(common.finish(), opts, std::cout);
    }
    if (evolve->parsed()) {
      ev.state = state.finish();
      if (!ev_times.empty()) ev.times = qfb::cli::parse_number_list(ev_times);
      ev.observables = split_names(ev_obs);
      return qfb::cli::cmd_evolve(common.finish(), ev, std::cout);
    }
    if (sme->parsed()) {
      so.state = sme_state.finish();
      so.renormalize = !no_renorm;
      so.project_eigenvalues = !no_projection;
      so.observables = split_names(sme_obs);
      return qfb::cli::cmd_sme(common.finish(), so, std::cout);
    }
    if (corr->parsed()) {
      co.state = corr_state.finish();
      if (!taus.empty()) co.taus = qfb::cli::parse_number_list(taus);
      co.feedback = feedback == "on";
      return qfb::cli::cmd_correlate(common.finish(), co, std::cout);
    }
  } catch (const qfb::Error& e) {
    std::cerr << "qfb: error: " << e.what() << "\n";
    return static_cast<int>(qfb::cli::exit_code_for(e.code()));
  }
  return static_cast<int>(qfb::cli::ExitCode::Validation);
}
