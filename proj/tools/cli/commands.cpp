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

#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "qfb/correlation.hpp"
#include "qfb/liouvillian.hpp"
#include "qfb/model_io.hpp"
#include "qfb/sme.hpp"

namespace qfb::cli {

namespace {

using json = nlohmann::json;
using Meta = std::vector<std::pair<std::string, std::string>>;

/// Per-run state shared by the command bodies.
struct Run {
  const std::string command;
  const CommonOptions& common;
  std::string model_hash;
  CommandResult result;

  SystemModel load(double tol) {
    const std::string text = read_text_file(common.model);
    model_hash = content_hash(text);
    return parse_model(text, common.hbar, tol);
  }

  Meta meta(const SystemModel& model) const {
    Meta m = {{"tool", std::string("qfb ") + QFB_VERSION_STRING},
              {"command", command},
              {"model", common.model.string()},
              {"model_hash", model_hash},
              {"hbar", format_double(model.hbar())}};
    if (common.seed) m.emplace_back("seed", std::to_string(*common.seed));
    return m;
  }

  std::filesystem::path output(const std::string& name) {
    result.outputs.push_back(name);
    return common.out / name;
  }
};

// Human-readable number: 12 significant digits, always with a decimal point
// or exponent, round-off below `floor` shown as 0.
std::string pretty(double x, double floor = 0.0) {
  if (std::abs(x) <= floor) x = 0.0;
  std::ostringstream os;
  os << std::setprecision(12) << x;
  std::string s = os.str();
  if (s.find_first_of(".enia") == std::string::npos) s += ".0";
  return s;
}

std::string pretty_list(const RVector& v, double floor = 0.0) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + pretty(v(i), floor);
  return s + "]";
}

json to_json(const RVector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

std::string state_label(const StateSource& s, bool steady_default) {
  if (s.file || s.basis_state || s.steady) return s.describe();
  return steady_default ? "steady state" : "basis state 0";
}

void write_manifest(Run& run, const json& config) {
  json m;
  m["tool"] = "qfb";
  m["version"] = QFB_VERSION_STRING;
  m["command"] = run.command;
  m["model_file"] = run.common.model.string();
  m["model_hash"] = run.model_hash.empty() ? json(nullptr) : json(run.model_hash);
  m["seed"] = run.common.seed ? json(*run.common.seed) : json(nullptr);
  m["tol"] = run.common.tol ? json(*run.common.tol) : json(nullptr);
  m["hbar_override"] = run.common.hbar ? json(*run.common.hbar) : json(nullptr);
  m["out_dir"] = run.common.out.string();
  m["config"] = config;
  m["status"] = run.result.code == ExitCode::Ok ? "ok" : "failed";
  m["exit_code"] = static_cast<int>(run.result.code);
  m["message"] = run.result.message;
  m["outputs"] = run.result.outputs;
  m["results"] = run.result.results;
  const auto path = run.common.out / (run.command + "-manifest.json");
  std::ofstream out(path, std::ios::binary);
  out << m.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

int execute(const std::string& command, const CommonOptions& common, const json& config, std::ostream& report,
            const std::function<void(Run&)>& body) {
  Run run{command, common, {}, {}};
  bool have_dir = false;
  try {
    std::filesystem::create_directories(common.out);
    have_dir = true;
    body(run);
  } catch (const Error& e) {
    run.result.code = exit_code_for(e.code());
    run.result.message = e.what();
  } catch (const std::filesystem::filesystem_error& e) {
    run.result.code = ExitCode::Io;
    run.result.message = std::string("IoError: ") + e.what();
  } catch (const std::exception& e) {
    run.result.code = ExitCode::Validation;
    run.result.message = e.what();
  }
  if (have_dir) {
    try {
      write_manifest(run, config);
    } catch (const std::exception& e) {
      if (run.result.code == ExitCode::Ok) {
        run.result.code = ExitCode::Io;
        run.result.message = e.what();
      }
    }
  }
  if (run.result.code != ExitCode::Ok) {
    std::cerr << "qfb " << command << ": error: " << run.result.message << "\n";
  }
  report.flush();
  return static_cast<int>(run.result.code);
}

std::vector<double> output_grid(const EvolveOptions& opts) {
  if (!opts.times.empty()) return opts.times;
  if (!(opts.t_final >= 0.0) || !(opts.dt_out > 0.0)) {
    throw Error(ErrorCode::InvalidModel, "need t_final >= 0 and dt_out > 0");
  }
  const auto n = static_cast<std::size_t>(std::llround(opts.t_final / opts.dt_out));
  std::vector<double> t;
  for (std::size_t k = 0; k <= n; ++k) t.push_back(static_cast<double>(k) * opts.dt_out);
  if (n > 0) t.back() = opts.t_final;
  return t;
}

std::vector<double> lag_grid(const CorrelateOptions& opts) {
  if (!opts.taus.empty()) return opts.taus;
  if (!(opts.tau_max >= 0.0) || opts.n_tau < 1) throw Error(ErrorCode::InvalidModel, "need tau_max >= 0 and n_tau >= 1");
  std::vector<double> t;
  for (std::size_t k = 0; k < opts.n_tau; ++k) {
    t.push_back(opts.n_tau == 1 ? 0.0 : opts.tau_max * static_cast<double>(k) / static_cast<double>(opts.n_tau - 1));
  }
  return t;
}

}  // namespace

LindbladCheckReport lindblad_check(const SystemModel& model, const SystemModel& lindblad_model,
                                   const std::optional<CMatrix>& root, double tol) {
  const Superoperator direct = build_lmfb(model);
  const Superoperator lindblad = build_lindblad_form(lindblad_model, root);
  LindbladCheckReport r;
  r.max_abs_diff = max_abs_diff(direct, lindblad);
  r.trace_residual = trace_preservation_residual(direct);
  r.hermiticity_residual = hermiticity_preservation_residual(direct);
  r.choi_min_eigenvalue = cp_check(direct).min_eigenvalue;
  r.passed = r.max_abs_diff <= tol;
  return r;
}

int cmd_validate(const CommonOptions& common, std::ostream& report) {
  const json config = json::object();
  return execute("validate", common, config, report, [&](Run& run) {
    const double tol = common.tol.value_or(kModelTol);
    const SystemModel model = run.load(tol);
    const RVector eta = model.efficiencies();
    const RVector z_ev = hermitian_eigenvalues(model.z());
    const double z_floor = 1e-12 * std::max(1.0, z_ev.size() ? z_ev.cwiseAbs().maxCoeff() : 0.0);
    const Superoperator g = build_lmfb(model);

    json residuals;
    residuals["H1"] = hermiticity_residual(model.h1());
    report << "model: " << common.model.string() << "\n";
    report << "dims: d=" << model.dim() << ", L=" << model.num_channels() << ", R=" << model.num_currents() << "\n";
    report << "hbar=" << pretty(model.hbar()) << "\n";
    report << "eta=" << pretty_list(eta) << ", Z eigenvalues=" << pretty_list(z_ev, z_floor) << "\n";
    report << "hermiticity residuals: H1=" << pretty(hermiticity_residual(model.h1()));
    for (std::size_t r = 0; r < model.f().size(); ++r) {
      const double res = hermiticity_residual(model.f()[r]);
      residuals["f[" + std::to_string(r) + "]"] = res;
      report << ", f[" << r << "]=" << pretty(res);
    }
    report << "\n";
    const double tr = trace_preservation_residual(g);
    const double hp = hermiticity_preservation_residual(g);
    report << "generator: trace residual=" << pretty(tr) << ", hermiticity residual=" << pretty(hp) << "\n";
    report << "status: ok\n";

    auto& res = run.result.results;
    res["dim"] = model.dim();
    res["channels"] = model.num_channels();
    res["currents"] = model.num_currents();
    res["hbar"] = model.hbar();
    res["eta"] = to_json(eta);
    RVector z_shown = z_ev;
    for (Eigen::Index i = 0; i < z_shown.size(); ++i) {
      if (std::abs(z_shown(i)) <= z_floor) z_shown(i) = 0.0;
    }
    res["z_eigenvalues"] = to_json(z_shown);
    res["hermiticity_residuals"] = residuals;
    res["trace_residual"] = tr;
    res["hermiticity_preservation_residual"] = hp;
  });
}

int cmd_lindblad_check(const CommonOptions& common, const LindbladCheckOptions& opts, std::ostream& report) {
  json config;
  config["root"] = opts.root ? json(opts.root->string()) : json(nullptr);
  return execute("lindblad-check", common, config, report, [&](Run& run) {
    const double tol = common.tol.value_or(kLindbladCheckTol);
    const SystemModel model = run.load(kModelTol);
    std::optional<CMatrix> root;
    if (opts.root) root = load_matrix(*opts.root);
    const LindbladCheckReport r = lindblad_check(model, model, root, tol);
    report << "max |G_direct - G_lindblad| = " << pretty(r.max_abs_diff) << " (tol " << pretty(tol) << ")\n";
    report << "trace residual = " << pretty(r.trace_residual)
           << ", hermiticity residual = " << pretty(r.hermiticity_residual) << "\n";
    report << "Choi min eigenvalue of exp(G * 1e-3) = " << pretty(r.choi_min_eigenvalue) << "\n";
    report << "status: " << (r.passed ? "pass" : "FAIL") << "\n";
    auto& res = run.result.results;
    res["max_abs_diff"] = r.max_abs_diff;
    res["tol"] = tol;
    res["trace_residual"] = r.trace_residual;
    res["hermiticity_residual"] = r.hermiticity_residual;
    res["choi_min_eigenvalue"] = r.choi_min_eigenvalue;
    res["passed"] = r.passed;
    if (!r.passed) {
      run.result.code = ExitCode::Tolerance;
      run.result.message = "generators differ by " + pretty(r.max_abs_diff) + " > tol " + pretty(tol);
    }
  });
}

int cmd_evolve(const CommonOptions& common, const EvolveOptions& opts, std::ostream& report) {
  json config;
  config["state"] = state_label(opts.state, false);
  config["t_final"] = opts.t_final;
  config["dt_out"] = opts.dt_out;
  config["times"] = opts.times;
  config["observables"] = opts.observables;
  config["dump_states"] = opts.dump_states;
  return execute("evolve", common, config, report, [&](Run& run) {
    const double tol = common.tol.value_or(kModelTol);
    const SystemModel model = run.load(kModelTol);
    const auto obs =
        resolve_observables(opts.observables.empty() ? default_observables(model.dim()) : opts.observables, model.dim());
    const CMatrix rho0 = resolve_state(opts.state, model, false, tol, kSteadyStateTol);
    const std::vector<double> times = output_grid(opts);
    const auto states = evolve_unconditional(build_lmfb(model), rho0, times);

    std::vector<std::string> cols = {"t"};
    for (auto& c : observable_columns(obs)) cols.push_back(c);
    const Eigen::Index d = model.dim();
    if (opts.dump_states) {
      for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
          cols.push_back("rho_" + std::to_string(i) + "_" + std::to_string(j) + "_re");
          cols.push_back("rho_" + std::to_string(i) + "_" + std::to_string(j) + "_im");
        }
      }
    }
    Meta meta = run.meta(model);
    meta.emplace_back("rho0", state_label(opts.state, false));
    meta.emplace_back("generator", "feedback master equation");
    CsvWriter csv(run.output("evolve.csv"), meta, cols);
    for (std::size_t k = 0; k < times.size(); ++k) {
      std::vector<double> row = {times[k]};
      append_expectations(row, obs, states[k]);
      if (opts.dump_states) {
        for (Eigen::Index i = 0; i < d; ++i) {
          for (Eigen::Index j = 0; j < d; ++j) {
            row.push_back(states[k](i, j).real());
            row.push_back(states[k](i, j).imag());
          }
        }
      }
      csv.row(row);
    }
    report << "wrote " << times.size() << " rows to " << csv.path().string() << "\n";
    run.result.results["rows"] = times.size();
    run.result.results["columns"] = cols;
  });
}

int cmd_sme(const CommonOptions& common, const SmeOptions& opts, std::ostream& report) {
  json config;
  config["state"] = state_label(opts.state, false);
  config["dt"] = opts.dt;
  config["t_final"] = opts.t_final;
  config["n_traj"] = opts.n_traj;
  config["record_every"] = opts.record_every;
  config["threads"] = opts.threads;
  config["renormalize"] = opts.renormalize;
  config["project_eigenvalues"] = opts.project_eigenvalues;
  config["per_trajectory"] = opts.per_trajectory;
  config["observables"] = opts.observables;
  return execute("sme", common, config, report, [&](Run& run) {
    const double tol = common.tol.value_or(kModelTol);
    const SystemModel model = run.load(kModelTol);
    const auto obs =
        resolve_observables(opts.observables.empty() ? default_observables(model.dim()) : opts.observables, model.dim());
    const CMatrix rho0 = resolve_state(opts.state, model, false, tol, kSteadyStateTol);

    SmeConfig cfg;
    cfg.dt = opts.dt;
    cfg.t_final = opts.t_final;
    cfg.n_traj = opts.n_traj;
    cfg.seed = common.seed.value_or(0);
    cfg.renormalize = opts.renormalize;
    cfg.project_eigenvalues = opts.project_eigenvalues;
    cfg.record = RecordMode::Expectations;
    cfg.record_every = opts.record_every;
    cfg.threads = opts.threads;
    for (const auto& o : obs) cfg.observables.push_back(o.op);
    const std::size_t steps = cfg.steps();
    if (opts.record_every == 0 || steps % opts.record_every != 0) {
      throw Error(ErrorCode::InvalidModel, "record_every must divide the number of steps (" + std::to_string(steps) + ")");
    }

    const auto records = run_trajectories(model, rho0, cfg);
    const ExpectationSummary sum = summarize(records);
    const auto num_r = model.num_currents();
    const std::size_t block = opts.record_every;

    // Current columns: the mean of y over the block of steps ending at t.
    auto block_current = [&](const Eigen::MatrixXd& y, std::size_t rec, Eigen::Index r) {
      if (rec == 0) return std::nan("");
      double acc = 0.0;
      for (std::size_t k = (rec - 1) * block; k < rec * block; ++k) acc += y(r, static_cast<Eigen::Index>(k));
      return acc / static_cast<double>(block);
    };
    auto add_obs = [&](std::vector<double>& row, const CMatrix& values, Eigen::Index k) {
      for (std::size_t i = 0; i < obs.size(); ++i) {
        const Complex v = values(static_cast<Eigen::Index>(i), k);
        row.push_back(v.real());
        if (!obs[i].hermitian) row.push_back(v.imag());
      }
    };

    Meta meta = run.meta(model);
    meta.emplace_back("rho0", state_label(opts.state, false));
    meta.emplace_back("dt", format_double(cfg.dt));
    meta.emplace_back("n_traj", std::to_string(cfg.n_traj));
    meta.emplace_back("renormalize", cfg.renormalize ? "on" : "off");
    meta.emplace_back("eigenvalue_projection", cfg.project_eigenvalues ? "on" : "off");
    meta.emplace_back("currents", "y_r is the mean of y dt / dt over the steps since the previous row");

    std::vector<std::string> current_cols;
    for (Eigen::Index r = 0; r < num_r; ++r) current_cols.push_back("y" + std::to_string(r + 1));

    std::vector<std::string> mean_cols = {"t"};
    for (auto& c : observable_columns(obs)) mean_cols.push_back(c);
    for (auto& c : observable_columns(obs, "_se")) mean_cols.push_back(c);
    for (auto& c : current_cols) mean_cols.push_back(c);
    CsvWriter mean_csv(run.output("sme_mean.csv"), meta, mean_cols);
    for (std::size_t k = 0; k < sum.times.size(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      std::vector<double> row = {sum.times[k]};
      add_obs(row, sum.mean, kk);
      for (std::size_t i = 0; i < obs.size(); ++i) {
        row.push_back(sum.se_real(static_cast<Eigen::Index>(i), kk));
        if (!obs[i].hermitian) row.push_back(sum.se_imag(static_cast<Eigen::Index>(i), kk));
      }
      for (Eigen::Index r = 0; r < num_r; ++r) row.push_back(block_current(sum.mean_currents, k, r));
      mean_csv.row(row);
    }

    if (opts.per_trajectory) {
      std::vector<std::string> cols = {"t"};
      for (auto& c : observable_columns(obs)) cols.push_back(c);
      for (auto& c : current_cols) cols.push_back(c);
      for (const auto& rec : records) {
        Meta m = meta;
        m.emplace_back("stream_id", std::to_string(rec.stream_id));
        CsvWriter csv(run.output("traj_" + std::to_string(rec.stream_id) + ".csv"), m, cols);
        for (std::size_t k = 0; k < rec.times.size(); ++k) {
          std::vector<double> row = {rec.times[k]};
          add_obs(row, rec.expectations, static_cast<Eigen::Index>(k));
          for (Eigen::Index r = 0; r < num_r; ++r) row.push_back(block_current(rec.currents, k, r));
          csv.row(row);
        }
      }
    }
    report << "ran " << cfg.n_traj << " trajectories of " << steps << " steps; wrote "
           << run.result.outputs.size() << " file(s) to " << common.out.string() << "\n";
    auto& res = run.result.results;
    res["n_traj"] = cfg.n_traj;
    res["steps"] = steps;
    res["records"] = sum.times.size();
    res["seed"] = cfg.seed;
  });
}

int cmd_correlate(const CommonOptions& common, const CorrelateOptions& opts, std::ostream& report) {
  json config;
  config["state"] = state_label(opts.state, true);
  config["taus"] = opts.taus;
  config["tau_max"] = opts.tau_max;
  config["n_tau"] = opts.n_tau;
  config["feedback"] = opts.feedback;
  return execute("correlate", common, config, report, [&](Run& run) {
    const double tol = common.tol.value_or(kSteadyStateTol);
    const SystemModel loaded = run.load(kModelTol);
    const SystemModel model = opts.feedback ? loaded : loaded.without_feedback();
    const CMatrix rho = resolve_state(opts.state, model, true, kModelTol, tol);
    const std::vector<double> taus = lag_grid(opts);
    const CorrelationResult c = opts.feedback ? correlation_with_feedback(model, rho, taus)
                                              : correlation_measurement_only(model, rho, taus);
    const auto num_r = model.num_currents();
    std::vector<std::string> cols = {"tau"};
    for (Eigen::Index r = 0; r < num_r; ++r) {
      for (Eigen::Index s = 0; s < num_r; ++s) cols.push_back("C_" + std::to_string(r + 1) + "_" + std::to_string(s + 1));
    }
    const double h2 = model.hbar() * model.hbar();
    Meta meta = run.meta(model);
    meta.emplace_back("state", state_label(opts.state, true));
    meta.emplace_back("feedback", opts.feedback ? "on" : "off");
    meta.emplace_back("delta_weight", "hbar^2 * I_" + std::to_string(num_r) + " = " + format_double(h2) + " * I_" +
                                          std::to_string(num_r));
    meta.emplace_back("columns", "C_r_s(tau) = <y_r(t) y_s(t + tau)>, smooth part only");
    CsvWriter csv(run.output("correlation.csv"), meta, cols);
    for (std::size_t k = 0; k < taus.size(); ++k) {
      std::vector<double> row = {taus[k]};
      for (Eigen::Index r = 0; r < num_r; ++r)
        for (Eigen::Index s = 0; s < num_r; ++s) row.push_back(c.smooth[k](r, s));
      csv.row(row);
    }
    report << "wrote " << taus.size() << " lags x " << num_r * num_r << " entries to " << csv.path().string()
           << "\ndelta_weight = hbar^2 * I_" << num_r << " = " << pretty(h2) << " * I_" << num_r << "\n";
    auto& res = run.result.results;
    res["lags"] = taus.size();
    res["currents"] = num_r;
    res["delta_weight_scale"] = h2;
    res["max_imag"] = c.max_imag;
  });
}

}  // namespace qfb::cli
