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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qfb/model.hpp"
#include "run_support.hpp"

namespace qfb::cli {

/// Flags shared by every command.
struct CommonOptions {
  std::filesystem::path model;
  std::filesystem::path out = "qfb-out";
  std::optional<std::uint64_t> seed;
  /// Command-specific tolerance; each command documents its default.
  std::optional<double> tol;
  std::optional<double> hbar;
};

struct LindbladCheckOptions {
  /// Optional matrix file holding B with B^dagger B = Z.
  std::optional<std::filesystem::path> root;
};

struct EvolveOptions {
  StateSource state;
  double t_final = 1.0;
  double dt_out = 0.01;
  /// Explicit output times; overrides t_final and dt_out when non-empty.
  std::vector<double> times;
  std::vector<std::string> observables;
  bool dump_states = false;
};

struct SmeOptions {
  StateSource state;
  double dt = 1e-3;
  double t_final = 1.0;
  std::size_t n_traj = 1;
  std::size_t record_every = 10;
  unsigned threads = 0;
  bool renormalize = true;
  bool project_eigenvalues = true;
  bool per_trajectory = false;
  std::vector<std::string> observables;
};

struct CorrelateOptions {
  StateSource state;
  std::vector<double> taus;
  double tau_max = 5.0;
  std::size_t n_tau = 51;
  bool feedback = true;
};

/// Outcome of one command, as recorded in its manifest.
struct CommandResult {
  ExitCode code = ExitCode::Ok;
  std::string message;
  nlohmann::json results = nlohmann::json::object();
  std::vector<std::string> outputs;
};

/// Generator agreement report. `lindblad_model` normally equals `model`;
/// passing a different one lets tests confirm that mismatches are caught.
struct LindbladCheckReport {
  double max_abs_diff = 0.0;
  double trace_residual = 0.0;
  double hermiticity_residual = 0.0;
  double choi_min_eigenvalue = 0.0;
  bool passed = false;
};

LindbladCheckReport lindblad_check(const SystemModel& model, const SystemModel& lindblad_model,
                                   const std::optional<CMatrix>& root, double tol);

/// Each command prints a human-readable report to `report`, writes its
/// outputs and a `<command>-manifest.json` under `common.out`, and returns
/// the process exit code.
int cmd_validate(const CommonOptions& common, std::ostream& report);
int cmd_lindblad_check(const CommonOptions& common, const LindbladCheckOptions& opts, std::ostream& report);
int cmd_evolve(const CommonOptions& common, const EvolveOptions& opts, std::ostream& report);
int cmd_sme(const CommonOptions& common, const SmeOptions& opts, std::ostream& report);
int cmd_correlate(const CommonOptions& common, const CorrelateOptions& opts, std::ostream& report);

inline constexpr double kLindbladCheckTol = 1e-10;
inline constexpr double kSteadyStateTol = 1e-10;

}  // namespace qfb::cli
