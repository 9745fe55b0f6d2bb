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
#include <functional>
#include <span>
#include <vector>

#include "qfb/liouvillian.hpp"

namespace qfb {

enum class RecordMode { FullState, Expectations };

struct SmeConfig {
  double dt = 1e-3;
  double t_final = 1.0;
  std::size_t n_traj = 1;
  std::uint64_t seed = 0;
  bool renormalize = true;
  /// Project eigenvalues below kEigenFloor back to zero after each step.
  /// Keeps recorded states positive at the cost of an O(sqrt(dt)) bias in
  /// the conditioned purity; switch off for unbiased averages. Raw steps on
  /// (nearly) pure states wander out of the positive cone and can diverge.
  bool project_eigenvalues = true;
  RecordMode record = RecordMode::FullState;
  /// Operators whose expectation values are recorded (both modes).
  VOp observables;
  /// Keep every k-th state; currents are always kept per step.
  std::size_t record_every = 1;
  bool record_currents = true;
  /// Worker threads for run_trajectories; 0 picks hardware concurrency.
  unsigned threads = 0;

  /// Number of Euler steps, round(t_final / dt). Throws InvalidModel when
  /// the configuration is malformed.
  std::size_t steps() const;
};

/// One conditioned trajectory. Row k of the record is time times[k].
struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<CMatrix> states;
  /// observables x records
  CMatrix expectations;
  /// R x steps; column k is the current over [k dt, (k + 1) dt], i.e. ydt / dt.
  Eigen::MatrixXd currents;
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

/// alpha = M^dagger c - i hbar f, the operators entering the innovation term.
VOp alpha_vop(const SystemModel& model);

/// H[A] rho = A rho + rho A^dagger - Tr[A rho + rho A^dagger] rho
CMatrix h_superop_apply(const CMatrix& a, const CMatrix& rho);

/// Raw Euler-Maruyama increment: d rho before any post-processing, and the
/// current sample y dt = <X> dt / hbar + dw.
struct SmeIncrement {
  CMatrix drho;
  RVector ydt;
};

struct SmeStep {
  CMatrix rho;
  RVector ydt;
};

/// Per-step work for the stochastic feedback master equation
///   d rho = G_mfb rho dt + H[dw^T alpha / hbar] rho
/// The integrator caches the generator and the operators it needs, so one
/// instance can be shared read-only by every trajectory worker.
class SmeIntegrator {
 public:
  struct Workspace {
    CVector drift;
    CMatrix kick;
    CMatrix kick_rho;
    CMatrix next;
  };

  explicit SmeIntegrator(const SystemModel& model);

  Eigen::Index dim() const noexcept { return dim_; }
  Eigen::Index num_currents() const noexcept { return static_cast<Eigen::Index>(alpha_.size()); }
  double hbar() const noexcept { return hbar_; }
  const Superoperator& generator() const noexcept { return generator_; }
  const VOp& alpha() const noexcept { return alpha_; }
  const VOp& quadratures() const noexcept { return quadratures_; }

  SmeIncrement increment(const CMatrix& rho, const RVector& dw, double dt) const;

  /// increment followed by Hermitian symmetrization, optional trace
  /// renormalization and optional projection of eigenvalues below -1e-8 back
  /// to zero. Throws StateDiverged when the state is non-finite or has an
  /// eigenvalue below -kDivergenceThreshold.
  SmeStep step(const CMatrix& rho, const RVector& dw, double dt, bool renormalize = true,
               bool project = true) const;

  /// Allocation-free form of step: updates rho and writes R current samples.
  void step_in_place(CMatrix& rho, std::span<const double> dw, double dt, bool renormalize,
                     std::span<double> ydt, Workspace& ws, bool project = true) const;

  Workspace make_workspace() const;

  static constexpr double kEigenFloor = -1e-8;
  static constexpr double kDivergenceThreshold = 1e-1;

 private:
  void post_process(CMatrix& rho, bool renormalize, bool project) const;

  Eigen::Index dim_;
  double hbar_;
  Superoperator generator_;
  VOp alpha_;
  VOp alpha_scaled_;  // alpha / hbar
  VOp quadratures_;
};

/// One step from scratch. Builds the integrator, so prefer SmeIntegrator in loops.
SmeStep sme_step(const SystemModel& model, const CMatrix& rho, const RVector& dw, double dt,
                 bool renormalize = true, bool project = true);

/// Called after every step k = 1..steps with the state at t_k and the current
/// sample y dt collected over [t_{k-1}, t_k].
using StepObserver =
    std::function<void(std::size_t step, double t, const CMatrix& rho, std::span<const double> ydt)>;

/// Runs one trajectory driven by GaussianStream(config.seed, stream_id).
void simulate_trajectory(const SmeIntegrator& integrator, const CMatrix& rho0, const SmeConfig& config,
                         std::uint64_t stream_id, const StepObserver& observer);

/// n_traj independent trajectories with stream ids 0..n_traj-1. Output order
/// and content do not depend on the number of worker threads.
std::vector<TrajectoryRecord> run_trajectories(const SystemModel& model, const CMatrix& rho0,
                                               const SmeConfig& config);

/// Pointwise mean of the recorded conditioned states.
std::vector<CMatrix> average_states(const std::vector<TrajectoryRecord>& records);

struct ExpectationSummary {
  std::vector<double> times;
  CMatrix mean;              // observables x records
  Eigen::MatrixXd se_real;   // standard error of the real part
  Eigen::MatrixXd se_imag;
  Eigen::MatrixXd mean_currents;  // R x steps
};

ExpectationSummary summarize(const std::vector<TrajectoryRecord>& records);

}  // namespace qfb
