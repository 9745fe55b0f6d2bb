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

#include <span>
#include <vector>

#include "qfb/liouvillian.hpp"

namespace qfb {

/// Two-time current correlations <y(t) y^T(t + tau)>.
///
/// `smooth[k](r, s)` is the regular part of <y_r(t) y_s(t + tau_k)>; the
/// singular white-noise part is never sampled, it is reported as the weight
/// of delta(tau) in hbar^2 <y y^T>, which is always hbar^2 I_R.
struct CorrelationResult {
  std::vector<double> taus;
  std::vector<Eigen::MatrixXd> smooth;
  Eigen::MatrixXd delta_weight;
  /// Largest imaginary part discarded from the smooth entries.
  double max_imag = 0.0;
};

/// Quantum-regression evaluation with feedback:
///   C_rs(tau) = Tr[X_s exp(G_mfb tau)(alpha_r rho + rho alpha_r^dagger)] / hbar^2
/// with X = M^dagger c + M^T c^dagger and alpha = M^dagger c - i hbar f.
CorrelationResult correlation_with_feedback(const SystemModel& model, const CMatrix& rho,
                                            std::span<const double> taus);

/// Same expression for the measurement alone: f is ignored, alpha = M^dagger c
/// and the propagator is exp(G_m tau).
CorrelationResult correlation_measurement_only(const SystemModel& model, const CMatrix& rho,
                                               std::span<const double> taus);

/// The regression formula for an arbitrary generator and operator lists.
CorrelationResult regression_correlation(const Superoperator& generator, const VOp& alpha,
                                         const VOp& quadratures, double hbar, const CMatrix& rho,
                                         std::span<const double> taus);

/// Unique stationary state of G: its null vector, normalized to unit trace.
/// Throws NoSteadyState if the numerical nullspace is not one-dimensional.
CMatrix steady_state(const Superoperator& s, double tol = kDefaultTol);

}  // namespace qfb
