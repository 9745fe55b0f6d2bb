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

#include "qfb/liouvillian.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace qfb {

Superoperator::Superoperator(Eigen::Index dim, CMatrix generator) : dim_(dim), g_(std::move(generator)) {
  if (g_.rows() != dim_ * dim_ || g_.cols() != dim_ * dim_) {
    throw Error(ErrorCode::DimensionMismatch,
                "generator is " + std::to_string(g_.rows()) + "x" + std::to_string(g_.cols()) +
                    ", expected " + std::to_string(dim_ * dim_) + " square");
  }
}

Superoperator Superoperator::zero(Eigen::Index dim) {
  return Superoperator(dim, CMatrix::Zero(dim * dim, dim * dim));
}

CMatrix Superoperator::apply(const CMatrix& rho) const {
  if (rho.rows() != dim_ || rho.cols() != dim_) {
    throw Error(ErrorCode::DimensionMismatch, "state dimension does not match generator");
  }
  CVector out = g_ * vectorize(rho);
  return devectorize(out);
}

Superoperator Superoperator::operator+(const Superoperator& other) const {
  if (other.dim_ != dim_) throw Error(ErrorCode::DimensionMismatch, "adding generators of different dims");
  return Superoperator(dim_, g_ + other.g_);
}

Superoperator Superoperator::operator-(const Superoperator& other) const {
  if (other.dim_ != dim_) throw Error(ErrorCode::DimensionMismatch, "subtracting generators of different dims");
  return Superoperator(dim_, g_ - other.g_);
}

Superoperator Superoperator::operator*(double scale) const { return Superoperator(dim_, g_ * scale); }

double max_abs_diff(const Superoperator& a, const Superoperator& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimensionMismatch, "comparing generators of different dims");
  return max_abs(a.matrix() - b.matrix());
}

namespace {

void check_vop(const VOp& a, Eigen::Index dim) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].rows() != dim || a[k].cols() != dim) {
      throw Error(ErrorCode::DimensionMismatch,
                  "operator " + std::to_string(k) + " is " + std::to_string(a[k].rows()) + "x" +
                      std::to_string(a[k].cols()) + ", expected " + std::to_string(dim));
    }
  }
}

}  // namespace

Superoperator commutator_generator(const CMatrix& h, Eigen::Index dim) {
  check_vop(VOp{h}, dim);
  const CMatrix id = CMatrix::Identity(dim, dim);
  return Superoperator(dim, -kI * (sandwich(h, id) - sandwich(id, h)));
}

Superoperator dissipator(const VOp& a, Eigen::Index dim) {
  check_vop(a, dim);
  const CMatrix id = CMatrix::Identity(dim, dim);
  CMatrix g = CMatrix::Zero(dim * dim, dim * dim);
  for (const CMatrix& op : a) {
    const CMatrix n = op.adjoint() * op;
    g += sandwich(op, op.adjoint()) - 0.5 * sandwich(n, id) - 0.5 * sandwich(id, n);
  }
  return Superoperator(dim, std::move(g));
}

Superoperator build_lm(const SystemModel& model) {
  const Eigen::Index d = model.dim();
  return (commutator_generator(model.h1(), d) + dissipator(model.c(), d)) * (1.0 / model.hbar());
}

Superoperator build_lfb(const SystemModel& model) {
  const Eigen::Index d = model.dim();
  const CMatrix id = CMatrix::Identity(d, d);
  const VOp g = mdag_c(model);
  // The sop-bracket reduces to sum_r [f_r, g_r rho + rho g_r^dagger].
  CMatrix bracket = CMatrix::Zero(d * d, d * d);
  for (std::size_t r = 0; r < g.size(); ++r) {
    const CMatrix& f = model.f()[r];
    const CMatrix gd = g[r].adjoint();
    bracket += sandwich(f * g[r], id) + sandwich(f, gd) - sandwich(g[r], f) - sandwich(id, gd * f);
  }
  return dissipator(model.f(), d) + Superoperator(d, (-kI / model.hbar()) * bracket);
}

Superoperator build_lmfb(const SystemModel& model) { return build_lm(model) + build_lfb(model); }

Superoperator build_lindblad_form(const SystemModel& model, const std::optional<CMatrix>& root, double tol) {
  const Eigen::Index d = model.dim();
  const Eigen::Index num_l = model.num_channels();
  const Eigen::Index num_r = model.num_currents();
  const CMatrix& m = model.m();

  CMatrix b;
  if (root) {
    b = *root;
    if (b.cols() != num_r) {
      throw Error(ErrorCode::InvalidSquareRoot, "square root has " + std::to_string(b.cols()) +
                                                    " columns, expected R=" + std::to_string(num_r));
    }
    const double miss = max_abs(b.adjoint() * b - model.z());
    if (miss > tol) {
      throw Error(ErrorCode::InvalidSquareRoot, "|B^dagger B - Z|_max = " + format_value(miss));
    }
  } else {
    b = psd_sqrt(model.z(), tol);
  }

  const VOp g = mdag_c(model);
  CMatrix h = model.h1();
  for (Eigen::Index r = 0; r < num_r; ++r) {
    h += 0.5 * (model.f()[r] * g[r] + g[r].adjoint() * model.f()[r]);
  }

  VOp jumps(static_cast<std::size_t>(num_l));
  for (Eigen::Index l = 0; l < num_l; ++l) {
    jumps[l] = model.c()[l];
    for (Eigen::Index r = 0; r < num_r; ++r) jumps[l] -= kI * m(l, r) * model.f()[r];
  }
  VOp noise(static_cast<std::size_t>(b.rows()), CMatrix::Zero(d, d));
  for (Eigen::Index k = 0; k < b.rows(); ++k) {
    for (Eigen::Index s = 0; s < num_r; ++s) noise[k] += b(k, s) * model.f()[s];
  }

  return (commutator_generator(h, d) + dissipator(jumps, d) + dissipator(noise, d)) * (1.0 / model.hbar());
}

Superoperator adjoint_generator(const Superoperator& s) {
  return Superoperator(s.dim(), s.matrix().adjoint());
}

double trace_preservation_residual(const Superoperator& s) {
  const Eigen::Index d = s.dim();
  const CVector id = vectorize(CMatrix::Identity(d, d));
  return (id.adjoint() * s.matrix()).cwiseAbs().maxCoeff();
}

double hermiticity_preservation_residual(const Superoperator& s) {
  const Eigen::Index d = s.dim();
  double worst = 0.0;
  auto probe = [&](const CMatrix& h) { worst = std::max(worst, hermiticity_residual(s.apply(h))); };
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      CMatrix e = CMatrix::Zero(d, d);
      e(i, j) = 1.0;
      e(j, i) = 1.0;
      probe(e);
      if (i != j) {
        e(i, j) = kI;
        e(j, i) = -kI;
        probe(e);
      }
    }
  }
  return worst;
}

CMatrix choi_matrix(const Superoperator& s, double t) {
  const Eigen::Index d = s.dim();
  const CMatrix channel = expm(s.matrix(), t);
  CMatrix choi(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      // Column j*d + i of the channel is vec(Phi(E_ij)).
      const CMatrix image = devectorize(channel.col(j * d + i));
      choi.block(i * d, j * d, d, d) = image;
    }
  }
  return choi;
}

CpReport cp_check(const Superoperator& s, double t, double tol) {
  const CMatrix choi = choi_matrix(s, t);
  CpReport report;
  report.min_eigenvalue = hermitian_eigenvalues(choi).minCoeff();
  report.passed = report.min_eigenvalue >= -tol;
  return report;
}

void require_density_matrix(const CMatrix& rho, Eigen::Index dim, double tol) {
  if (rho.rows() != dim || rho.cols() != dim) {
    throw Error(ErrorCode::InvalidState, "state is " + std::to_string(rho.rows()) + "x" +
                                             std::to_string(rho.cols()) + ", model dimension is " +
                                             std::to_string(dim));
  }
  if (!rho.allFinite()) throw Error(ErrorCode::InvalidState, "state has non-finite entries");
  const double herm = hermiticity_residual(rho);
  if (herm > tol) throw Error(ErrorCode::InvalidState, "state is not Hermitian (residual " + format_value(herm) + ")");
  const double tr = rho.trace().real();
  if (std::abs(tr - 1.0) > tol) throw Error(ErrorCode::InvalidState, "state trace is " + format_value(tr));
  const double min_ev = min_hermitian_eigenvalue(rho);
  if (min_ev < -tol) {
    throw Error(ErrorCode::InvalidState, "state has negative eigenvalue " + format_value(min_ev));
  }
}

std::vector<CMatrix> evolve_unconditional(const Superoperator& s, const CMatrix& rho0,
                                          std::span<const double> times) {
  require_density_matrix(rho0, s.dim());
  std::vector<CMatrix> out;
  out.reserve(times.size());
  const CVector v0 = vectorize(rho0);
  // Uniform grids reuse a single step propagator.
  double cached_step = -1.0;
  CMatrix step_propagator;
  double t_prev = 0.0;
  CVector v_prev = v0;
  for (const double t : times) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
      throw Error(ErrorCode::InvalidState, "evolution times must be finite and >= 0");
    }
    CVector v;
    const double dt = t - t_prev;
    if (dt >= 0.0) {
      if (cached_step < 0.0 || std::abs(dt - cached_step) > 1e-12 * std::max(1.0, dt)) {
        cached_step = dt;
        step_propagator = expm(s.matrix(), dt);
      }
      v = step_propagator * v_prev;
    } else {
      v = expm_action(s.matrix(), v0, t);
    }
    CMatrix rho = devectorize(v);
    out.push_back(0.5 * (rho + rho.adjoint()));
    t_prev = t;
    v_prev = std::move(v);
  }
  return out;
}

}  // namespace qfb
