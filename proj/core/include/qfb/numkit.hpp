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

#include <array>
#include <complex>
#include <cstdint>
#include <span>

#include <Eigen/Core>

#include "qfb/error.hpp"

namespace qfb {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

/// Default numerical tolerance for operator algebra on d^2 x d^2 objects.
inline constexpr double kDefaultTol = 1e-10;

/// Largest |entry|; zero for empty matrices.
double max_abs(const CMatrix& a);

/// max |A - A^dagger|.
double hermiticity_residual(const CMatrix& a);

bool is_hermitian(const CMatrix& a, double tol = kDefaultTol);

/// Eigenvalues of the Hermitian part (A + A^dagger)/2, ascending.
RVector hermitian_eigenvalues(const CMatrix& a);

/// Smallest eigenvalue of the Hermitian part of A. Closed form for 2x2.
double min_hermitian_eigenvalue(const CMatrix& a);

/// Positive square root of a Hermitian positive-semidefinite matrix.
///
/// Eigenvalues in [-tol, 0) are clamped to zero, as are eigenvalues at the
/// round-off level of the spectrum, so singular inputs produce an exactly
/// singular root. Throws NotHermitian when |A - A^dagger|_max > tol and NotPSD
/// when an eigenvalue is below -tol.
CMatrix psd_sqrt(const CMatrix& a, double tol = kDefaultTol);

/// Column-stacking: entry (i, j) of rho goes to index j * d + i.
CVector vectorize(const CMatrix& rho);

/// Inverse of vectorize. The vector length must be a perfect square.
CMatrix devectorize(const CVector& v);

CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Matrix of the map rho -> A rho B under column stacking, i.e. B^T (x) A.
CMatrix sandwich(const CMatrix& a, const CMatrix& b);

/// exp(G t) as a dense matrix.
CMatrix expm(const CMatrix& g, double t);

/// exp(G t) v. Dense Pade exponential up to dim 4096, otherwise a
/// scaled truncated Taylor series applied to the vector.
CVector expm_action(const CMatrix& g, const CVector& v, double t);

/// Counter-based stream of N(0, dt) vectors.
///
/// Each (seed, stream_id) pair addresses an independent Philox4x32-10
/// sequence; normals are produced by Box-Muller, so the output is bit-identical
/// across platforms and independent of how trajectories are scheduled.
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint64_t stream_id, double dt);

  /// Fills `out` with independent N(0, dt) samples.
  void draw(std::span<double> out);

  RVector draw(Eigen::Index width);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  double dt() const noexcept { return dt_; }

 private:
  double next_standard_normal();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  double dt_;
  double sqrt_dt_;
  std::uint64_t counter_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

namespace detail {

using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxBlock philox4x32_10(PhiloxBlock counter, PhiloxKey key);

/// Scaled truncated Taylor series for exp(G t) v; the large-dimension path of
/// expm_action.
CVector taylor_expm_action(const CMatrix& g, const CVector& v, double t);

}  // namespace detail

}  // namespace qfb
