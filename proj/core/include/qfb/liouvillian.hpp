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

#include <optional>
#include <span>
#include <vector>

#include "qfb/model.hpp"

namespace qfb {

/// Generator G on column-stacked density matrices, d rho / dt = G rho.
/// hbar is already folded in (G = L / hbar).
class Superoperator {
 public:
  Superoperator(Eigen::Index dim, CMatrix generator);

  static Superoperator zero(Eigen::Index dim);

  Eigen::Index dim() const noexcept { return dim_; }
  const CMatrix& matrix() const noexcept { return g_; }

  CMatrix apply(const CMatrix& rho) const;

  Superoperator operator+(const Superoperator& other) const;
  Superoperator operator-(const Superoperator& other) const;
  Superoperator operator*(double scale) const;

 private:
  Eigen::Index dim_;
  CMatrix g_;
};

/// max |G_a - G_b|.
double max_abs_diff(const Superoperator& a, const Superoperator& b);

/// rho -> -i [H, rho]
Superoperator commutator_generator(const CMatrix& h, Eigen::Index dim);

/// rho -> sum_k a_k rho a_k^dagger - 1/2 {a_k^dagger a_k, rho}
Superoperator dissipator(const VOp& a, Eigen::Index dim);

/// Measurement-only generator (-i[H1, .] + D[c]) / hbar.
Superoperator build_lm(const SystemModel& model);

/// Feedback generator D[f] - (i / hbar) sum_r [f_r, g_r rho + rho g_r^dagger],
/// g = M^dagger c.
Superoperator build_lfb(const SystemModel& model);

/// build_lm + build_lfb.
Superoperator build_lmfb(const SystemModel& model);

/// The same dynamics assembled from Lindblad form:
///   (-i[H1 + (f^T M^dagger c + c^dagger M f) / 2, .] + D[c - i M f] + D[B f]) / hbar
/// where B is any matrix with B^dagger B = Z (default: the positive root).
/// Throws InvalidSquareRoot when a supplied B misses Z by more than tol.
Superoperator build_lindblad_form(const SystemModel& model,
                                  const std::optional<CMatrix>& root = std::nullopt,
                                  double tol = kDefaultTol);

/// Hilbert-Schmidt adjoint G^dagger: Tr[A^dagger G(rho)] = Tr[(G^dagger A)^dagger rho].
/// Applied to an observable this is the vacuum-averaged Heisenberg drift.
Superoperator adjoint_generator(const Superoperator& s);

/// max |vec(I)^dagger G|; zero for a trace-preserving generator.
double trace_preservation_residual(const Superoperator& s);

/// Largest anti-Hermitian part of G(h) over a basis of Hermitian h.
double hermiticity_preservation_residual(const Superoperator& s);

struct CpReport {
  double min_eigenvalue = 0.0;
  bool passed = false;
};

/// Choi matrix sum_ij E_ij (x) exp(G t)(E_ij), passes iff its smallest
/// eigenvalue is >= -tol.
CpReport cp_check(const Superoperator& s, double t = 1e-3, double tol = kDefaultTol);

/// Choi matrix of exp(G t).
CMatrix choi_matrix(const Superoperator& s, double t);

/// Throws InvalidState unless rho is Hermitian, PSD and unit-trace within tol.
void require_density_matrix(const CMatrix& rho, Eigen::Index dim, double tol = 1e-9);

/// rho(t) = exp(G t) rho0 for every requested time (t >= 0).
std::vector<CMatrix> evolve_unconditional(const Superoperator& s, const CMatrix& rho0,
                                          std::span<const double> times);

}  // namespace qfb
