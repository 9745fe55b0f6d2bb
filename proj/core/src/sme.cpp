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

#include "qfb/sme.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include <Eigen/Eigenvalues>

namespace qfb {

std::size_t SmeConfig::steps() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidModel, "dt must be positive");
  if (!(t_final >= dt) || !std::isfinite(t_final)) {
    throw Error(ErrorCode::InvalidModel, "t_final must be >= dt");
  }
  if (n_traj < 1) throw Error(ErrorCode::InvalidModel, "n_traj must be >= 1");
  if (record_every < 1) throw Error(ErrorCode::InvalidModel, "record_every must be >= 1");
  return static_cast<std::size_t>(std::llround(t_final / dt));
}

VOp alpha_vop(const SystemModel& model) {
  VOp alpha = mdag_c(model);
  for (std::size_t r = 0; r < alpha.size(); ++r) alpha[r] -= kI * model.hbar() * model.f()[r];
  return alpha;
}

CMatrix h_superop_apply(const CMatrix& a, const CMatrix& rho) {
  if (a.rows() != rho.rows() || a.cols() != rho.cols() || a.rows() != a.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "H[A] rho needs square operators of equal size");
  }
  const CMatrix sym = a * rho + rho * a.adjoint();
  return sym - sym.trace() * rho;
}

SmeIntegrator::SmeIntegrator(const SystemModel& model)
    : dim_(model.dim()),
      hbar_(model.hbar()),
      generator_(build_lmfb(model)),
      alpha_(alpha_vop(model)),
      quadratures_(measured_quadratures(model)) {
  alpha_scaled_ = alpha_;
  for (auto& a : alpha_scaled_) a /= hbar_;
}

SmeIntegrator::Workspace SmeIntegrator::make_workspace() const {
  Workspace ws;
  ws.drift.resize(dim_ * dim_);
  ws.kick.resize(dim_, dim_);
  ws.kick_rho.resize(dim_, dim_);
  ws.next.resize(dim_, dim_);
  return ws;
}

SmeIncrement SmeIntegrator::increment(const CMatrix& rho, const RVector& dw, double dt) const {
  if (rho.rows() != dim_ || rho.cols() != dim_ || dw.size() != num_currents()) {
    throw Error(ErrorCode::DimensionMismatch, "sme increment: state or noise has the wrong size");
  }
  SmeIncrement inc;
  inc.ydt.resize(dw.size());
  CMatrix kick = CMatrix::Zero(dim_, dim_);
  for (Eigen::Index r = 0; r < dw.size(); ++r) {
    inc.ydt(r) = (quadratures_[r] * rho).trace().real() * dt / hbar_ + dw(r);
    kick += dw(r) * alpha_scaled_[r];
  }
  inc.drho = generator_.apply(rho) * dt + h_superop_apply(kick, rho);
  return inc;
}

void SmeIntegrator::post_process(CMatrix& rho, bool renormalize, bool project) const {
  rho = 0.5 * (rho + rho.adjoint()).eval();
  if (!rho.allFinite()) throw Error(ErrorCode::StateDiverged, "state became non-finite");
  if (renormalize) {
    const double tr = rho.trace().real();
    if (!(tr > 0.0)) throw Error(ErrorCode::StateDiverged, "state trace fell to " + format_value(tr));
    rho /= tr;
  }
  const double min_ev = min_hermitian_eigenvalue(rho);
  if (min_ev >= kEigenFloor) return;
  if (min_ev < -kDivergenceThreshold) {
    throw Error(ErrorCode::StateDiverged, "state eigenvalue " + format_value(min_ev) +
                                              " is beyond recovery; reduce dt");
  }
  if (!project) return;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(rho);
  const double tr_before = rho.trace().real();
  RVector ev = solver.eigenvalues().cwiseMax(0.0);
  const CMatrix& v = solver.eigenvectors();
  rho = v * ev.cast<Complex>().asDiagonal() * v.adjoint();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho *= tr_before / rho.trace().real();
}

SmeStep SmeIntegrator::step(const CMatrix& rho, const RVector& dw, double dt, bool renormalize,
                            bool project) const {
  SmeIncrement inc = increment(rho, dw, dt);
  SmeStep out{rho + inc.drho, std::move(inc.ydt)};
  post_process(out.rho, renormalize, project);
  return out;
}

void SmeIntegrator::step_in_place(CMatrix& rho, std::span<const double> dw, double dt, bool renormalize,
                                  std::span<double> ydt, Workspace& ws, bool project) const {
  const Eigen::Index num_r = num_currents();
  ws.kick.setZero();
  for (Eigen::Index r = 0; r < num_r; ++r) {
    // Tr[X rho] without forming the product.
    ydt[r] = quadratures_[r].cwiseProduct(rho.transpose()).sum().real() * dt / hbar_ + dw[r];
    ws.kick += dw[r] * alpha_scaled_[r];
  }
  ws.drift.noalias() = generator_.matrix() * Eigen::Map<const CVector>(rho.data(), rho.size());
  ws.kick_rho.noalias() = ws.kick * rho;
  const Complex tr = 2.0 * ws.kick_rho.trace().real();
  ws.next = rho + dt * Eigen::Map<const CMatrix>(ws.drift.data(), dim_, dim_) + ws.kick_rho +
            ws.kick_rho.adjoint() - tr * rho;
  rho.swap(ws.next);
  post_process(rho, renormalize, project);
}

SmeStep sme_step(const SystemModel& model, const CMatrix& rho, const RVector& dw, double dt, bool renormalize,
                 bool project) {
  return SmeIntegrator(model).step(rho, dw, dt, renormalize, project);
}

void simulate_trajectory(const SmeIntegrator& integrator, const CMatrix& rho0, const SmeConfig& config,
                         std::uint64_t stream_id, const StepObserver& observer) {
  require_density_matrix(rho0, integrator.dim());
  const std::size_t steps = config.steps();
  const auto num_r = static_cast<std::size_t>(integrator.num_currents());
  GaussianStream noise(config.seed, stream_id, config.dt);
  SmeIntegrator::Workspace ws = integrator.make_workspace();
  std::vector<double> dw(num_r);
  std::vector<double> ydt(num_r);
  CMatrix rho = rho0;
  for (std::size_t k = 1; k <= steps; ++k) {
    noise.draw(dw);
    integrator.step_in_place(rho, dw, config.dt, config.renormalize, ydt, ws, config.project_eigenvalues);
    if (observer) observer(k, static_cast<double>(k) * config.dt, rho, ydt);
  }
}

namespace {

TrajectoryRecord record_one(const SmeIntegrator& integrator, const CMatrix& rho0, const SmeConfig& config,
                            std::uint64_t stream_id) {
  const std::size_t steps = config.steps();
  const std::size_t n_records = steps / config.record_every + 1;
  const auto num_obs = static_cast<Eigen::Index>(config.observables.size());

  TrajectoryRecord rec;
  rec.dt = config.dt;
  rec.seed = config.seed;
  rec.stream_id = stream_id;
  rec.times.reserve(n_records);
  if (config.record == RecordMode::FullState) rec.states.reserve(n_records);
  rec.expectations.resize(num_obs, static_cast<Eigen::Index>(n_records));
  if (config.record_currents) rec.currents.resize(integrator.num_currents(), static_cast<Eigen::Index>(steps));

  auto store = [&](double t, const CMatrix& rho) {
    const auto col = static_cast<Eigen::Index>(rec.times.size());
    rec.times.push_back(t);
    if (config.record == RecordMode::FullState) rec.states.push_back(rho);
    for (Eigen::Index o = 0; o < num_obs; ++o) {
      rec.expectations(o, col) = config.observables[o].cwiseProduct(rho.transpose()).sum();
    }
  };

  store(0.0, rho0);
  simulate_trajectory(integrator, rho0, config, stream_id,
                      [&](std::size_t k, double t, const CMatrix& rho, std::span<const double> ydt) {
                        if (config.record_currents) {
                          for (std::size_t r = 0; r < ydt.size(); ++r) {
                            rec.currents(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k - 1)) =
                                ydt[r] / config.dt;
                          }
                        }
                        if (k % config.record_every == 0) store(t, rho);
                      });
  return rec;
}

}  // namespace

std::vector<TrajectoryRecord> run_trajectories(const SystemModel& model, const CMatrix& rho0,
                                               const SmeConfig& config) {
  config.steps();
  for (std::size_t o = 0; o < config.observables.size(); ++o) {
    if (config.observables[o].rows() != model.dim() || config.observables[o].cols() != model.dim()) {
      throw Error(ErrorCode::DimensionMismatch, "observable " + std::to_string(o) + " has the wrong size");
    }
  }
  require_density_matrix(rho0, model.dim());
  const SmeIntegrator integrator(model);

  std::vector<TrajectoryRecord> records(config.n_traj);
  unsigned workers = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, config.n_traj));

  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::size_t failed_index = config.n_traj;
  std::string failure;

  auto work = [&] {
    for (std::size_t i = next++; i < config.n_traj; i = next++) {
      try {
        records[i] = record_one(integrator, rho0, config, i);
      } catch (const Error& e) {
        std::lock_guard lock(failure_mutex);
        if (i < failed_index) {
          failed_index = i;
          failure = e.detail();
        }
      }
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failed_index < config.n_traj) {
    throw Error(ErrorCode::StateDiverged, "trajectory " + std::to_string(failed_index) + ": " + failure);
  }
  return records;
}

namespace {

void check_grid(const std::vector<TrajectoryRecord>& records) {
  if (records.empty()) throw Error(ErrorCode::GridMismatch, "no trajectories to average");
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].times != records[0].times) {
      throw Error(ErrorCode::GridMismatch, "trajectory " + std::to_string(i) + " has a different time grid");
    }
  }
}

}  // namespace

std::vector<CMatrix> average_states(const std::vector<TrajectoryRecord>& records) {
  check_grid(records);
  const std::size_t n = records[0].times.size();
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].states.size() != n) {
      throw Error(ErrorCode::GridMismatch, "trajectory " + std::to_string(i) + " did not record full states");
    }
  }
  std::vector<CMatrix> mean(n);
  const double scale = 1.0 / static_cast<double>(records.size());
  for (std::size_t k = 0; k < n; ++k) {
    mean[k] = CMatrix::Zero(records[0].states[k].rows(), records[0].states[k].cols());
    for (const auto& rec : records) mean[k] += rec.states[k];
    mean[k] *= scale;
  }
  return mean;
}

ExpectationSummary summarize(const std::vector<TrajectoryRecord>& records) {
  check_grid(records);
  const auto n_obs = records[0].expectations.rows();
  const auto n_rec = records[0].expectations.cols();
  const auto n = static_cast<double>(records.size());
  ExpectationSummary out;
  out.times = records[0].times;
  out.mean = CMatrix::Zero(n_obs, n_rec);
  Eigen::MatrixXd sq_re = Eigen::MatrixXd::Zero(n_obs, n_rec);
  Eigen::MatrixXd sq_im = Eigen::MatrixXd::Zero(n_obs, n_rec);
  out.mean_currents = Eigen::MatrixXd::Zero(records[0].currents.rows(), records[0].currents.cols());
  for (const auto& rec : records) {
    if (rec.expectations.rows() != n_obs || rec.currents.cols() != out.mean_currents.cols()) {
      throw Error(ErrorCode::GridMismatch, "trajectories recorded different quantities");
    }
    out.mean += rec.expectations;
    sq_re += rec.expectations.real().cwiseAbs2();
    sq_im += rec.expectations.imag().cwiseAbs2();
    out.mean_currents += rec.currents;
  }
  out.mean /= n;
  out.mean_currents /= n;
  auto standard_error = [&](const Eigen::MatrixXd& sq, const Eigen::MatrixXd& mean) {
    if (records.size() < 2) return Eigen::MatrixXd::Zero(mean.rows(), mean.cols()).eval();
    Eigen::MatrixXd var = ((sq / n - mean.cwiseAbs2()) * (n / (n - 1.0))).cwiseMax(0.0);
    return (var / n).cwiseSqrt().eval();
  };
  out.se_real = standard_error(sq_re, out.mean.real());
  out.se_imag = standard_error(sq_im, out.mean.imag());
  return out;
}

}  // namespace qfb
