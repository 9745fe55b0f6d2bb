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

#include <vector>

#include "qfb/numkit.hpp"

namespace qfb {

/// Validation tolerance for user-supplied model data.
inline constexpr double kModelTol = 1e-9;

/// Vector-operator: an ordered list of d x d operators.
using VOp = std::vector<CMatrix>;

/// L x R measurement matrix M (units of sqrt(hbar)). A diffusive measurement
/// of L output channels into R real currents requires M M^dagger / hbar to be
/// diagonal with entries (the detection efficiencies) in [0, 1].
struct MRep {
  CMatrix m;
  double hbar = 1.0;

  Eigen::Index channels() const noexcept { return m.rows(); }
  Eigen::Index currents() const noexcept { return m.cols(); }
};

/// Returns the efficiencies diag(M M^dagger) / hbar, clamped into [0, 1].
/// Throws NotDiagonal or EfficiencyOutOfRange.
RVector validate_mrep(const MRep& mrep, double tol = kModelTol);

/// Z = hbar I_R - M^dagger M. Validates first.
CMatrix compute_z(const MRep& mrep, double tol = kModelTol);

/// Immutable description of a feedback loop: system Hamiltonian H1, channel
/// operators c (L of them), Hermitian feedback operators f (R of them) and the
/// measurement matrix. Construction validates everything; afterwards a model
/// can be shared read-only across threads.
class SystemModel {
 public:
  SystemModel(CMatrix h1, VOp c, VOp f, MRep mrep, double tol = kModelTol);

  Eigen::Index dim() const noexcept { return dim_; }
  double hbar() const noexcept { return mrep_.hbar; }
  const CMatrix& h1() const noexcept { return h1_; }
  const VOp& c() const noexcept { return c_; }
  const VOp& f() const noexcept { return f_; }
  const MRep& mrep() const noexcept { return mrep_; }
  const CMatrix& m() const noexcept { return mrep_.m; }
  Eigen::Index num_channels() const noexcept { return mrep_.m.rows(); }
  Eigen::Index num_currents() const noexcept { return mrep_.m.cols(); }
  const RVector& efficiencies() const noexcept { return eta_; }
  const CMatrix& z() const noexcept { return z_; }

  /// Same model with every feedback operator replaced by zero.
  SystemModel without_feedback() const;

 private:
  Eigen::Index dim_;
  CMatrix h1_;
  VOp c_;
  VOp f_;
  MRep mrep_;
  RVector eta_;
  CMatrix z_;
};

/// L = R = 1 with M = sqrt(hbar eta).
SystemModel homodyne_model(const CMatrix& c, const CMatrix& f, double eta, double hbar,
                           const CMatrix& h1);

/// L = 1, R = 2 with M = sqrt(hbar eta / 2) (1, i) and feedback (f1, f2).
SystemModel heterodyne_model(const CMatrix& c, const CMatrix& f1, const CMatrix& f2, double eta,
                             double hbar, const CMatrix& h1);

/// g_r = sum_l conj(M_lr) c_l, the components of M^dagger c.
VOp mdag_c(const SystemModel& model);

/// X_r = g_r + g_r^dagger, the measured quadratures (M^dagger c + M^T c^dagger)_r.
VOp measured_quadratures(const SystemModel& model);

/// Standard operators on a two-level system, basis {|e>, |g>}.
namespace qubit {
CMatrix sigma_x();
CMatrix sigma_y();
CMatrix sigma_z();
/// |g><e|
CMatrix sigma_minus();
CMatrix excited();
CMatrix ground();
}  // namespace qubit

/// Truncated annihilation operator on Fock states |0>..|d-1>.
CMatrix destroy(Eigen::Index d);

}  // namespace qfb
