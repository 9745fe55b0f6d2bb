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

#include "qfb/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qfb {

namespace {

void require_square(const CMatrix& a, Eigen::Index d, const std::string& what) {
  if (a.rows() != d || a.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, what + " is " + std::to_string(a.rows()) + "x" +
                                                  std::to_string(a.cols()) + ", expected " +
                                                  std::to_string(d) + "x" + std::to_string(d));
  }
}

void require_finite(const CMatrix& a, const std::string& what) {
  if (!a.allFinite()) throw Error(ErrorCode::InvalidModel, what + " has non-finite entries");
}

}  // namespace

RVector validate_mrep(const MRep& mrep, double tol) {
  if (!(mrep.hbar > 0.0) || !std::isfinite(mrep.hbar)) {
    throw Error(ErrorCode::InvalidModel, "hbar must be positive, got " + format_value(mrep.hbar));
  }
  require_finite(mrep.m, "M");
  const CMatrix h = mrep.m * mrep.m.adjoint() / mrep.hbar;
  const Eigen::Index n = h.rows();
  RVector eta(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && std::abs(h(i, j)) > tol) {
        throw Error(ErrorCode::NotDiagonal, "M M^dagger / hbar has off-diagonal entry (" +
                                                std::to_string(i) + "," + std::to_string(j) +
                                                ") of magnitude " + format_value(std::abs(h(i, j))));
      }
    }
    const double e = h(i, i).real();
    if (e < -tol || e > 1.0 + tol) {
      throw Error(ErrorCode::EfficiencyOutOfRange,
                  "efficiency eta_" + std::to_string(i) + " = " + std::to_string(e) + " outside [0, 1]");
    }
    eta(i) = std::clamp(e, 0.0, 1.0);
  }
  return eta;
}

CMatrix compute_z(const MRep& mrep, double tol) {
  validate_mrep(mrep, tol);
  const Eigen::Index r = mrep.m.cols();
  CMatrix z = mrep.hbar * CMatrix::Identity(r, r) - mrep.m.adjoint() * mrep.m;
  return 0.5 * (z + z.adjoint());
}

SystemModel::SystemModel(CMatrix h1, VOp c, VOp f, MRep mrep, double tol)
    : dim_(h1.rows()), h1_(std::move(h1)), c_(std::move(c)), f_(std::move(f)), mrep_(std::move(mrep)) {
  if (dim_ < 1) throw Error(ErrorCode::InvalidModel, "system dimension must be at least 1");
  require_square(h1_, dim_, "H1");
  require_finite(h1_, "H1");
  const double h1_res = hermiticity_residual(h1_);
  if (h1_res > tol) {
    throw Error(ErrorCode::NotHermitian, "H1 is not Hermitian (residual " + format_value(h1_res) + ")");
  }
  for (std::size_t k = 0; k < c_.size(); ++k) {
    require_square(c_[k], dim_, "c[" + std::to_string(k) + "]");
    require_finite(c_[k], "c[" + std::to_string(k) + "]");
  }
  for (std::size_t k = 0; k < f_.size(); ++k) {
    const std::string name = "f[" + std::to_string(k) + "]";
    require_square(f_[k], dim_, name);
    require_finite(f_[k], name);
    const double res = hermiticity_residual(f_[k]);
    if (res > tol) {
      throw Error(ErrorCode::NotHermitian, name + " is not Hermitian (residual " + format_value(res) + ")");
    }
  }
  const auto num_l = static_cast<Eigen::Index>(c_.size());
  const auto num_r = static_cast<Eigen::Index>(f_.size());
  if (mrep_.m.rows() != num_l || mrep_.m.cols() != num_r) {
    throw Error(ErrorCode::DimensionMismatch,
                "M is " + std::to_string(mrep_.m.rows()) + "x" + std::to_string(mrep_.m.cols()) +
                    " but the model has L=" + std::to_string(num_l) + " channels and R=" +
                    std::to_string(num_r) + " feedback operators");
  }
  if (num_r > 2 * num_l) {
    throw Error(ErrorCode::InvalidModel, "R=" + std::to_string(num_r) + " currents exceed 2L=" +
                                             std::to_string(2 * num_l));
  }
  eta_ = validate_mrep(mrep_, tol);
  z_ = compute_z(mrep_, tol);
}

SystemModel SystemModel::without_feedback() const {
  VOp zero_f(f_.size(), CMatrix::Zero(dim_, dim_));
  return SystemModel(h1_, c_, std::move(zero_f), mrep_);
}

SystemModel homodyne_model(const CMatrix& c, const CMatrix& f, double eta, double hbar,
                           const CMatrix& h1) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw Error(ErrorCode::EfficiencyOutOfRange, "homodyne efficiency " + format_value(eta));
  }
  CMatrix m(1, 1);
  m(0, 0) = std::sqrt(hbar * eta);
  return SystemModel(h1, VOp{c}, VOp{f}, MRep{m, hbar});
}

SystemModel heterodyne_model(const CMatrix& c, const CMatrix& f1, const CMatrix& f2, double eta,
                             double hbar, const CMatrix& h1) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw Error(ErrorCode::EfficiencyOutOfRange, "heterodyne efficiency " + format_value(eta));
  }
  const double amp = std::sqrt(hbar * eta / 2.0);
  CMatrix m(1, 2);
  m(0, 0) = amp;
  m(0, 1) = kI * amp;
  return SystemModel(h1, VOp{c}, VOp{f1, f2}, MRep{m, hbar});
}

VOp mdag_c(const SystemModel& model) {
  const Eigen::Index d = model.dim();
  VOp g(static_cast<std::size_t>(model.num_currents()), CMatrix::Zero(d, d));
  for (Eigen::Index r = 0; r < model.num_currents(); ++r) {
    for (Eigen::Index l = 0; l < model.num_channels(); ++l) {
      g[r] += std::conj(model.m()(l, r)) * model.c()[l];
    }
  }
  return g;
}

VOp measured_quadratures(const SystemModel& model) {
  VOp x = mdag_c(model);
  for (auto& op : x) op = op + op.adjoint().eval();
  return x;
}

namespace qubit {

CMatrix sigma_x() {
  CMatrix s(2, 2);
  s << 0.0, 1.0, 1.0, 0.0;
  return s;
}

CMatrix sigma_y() {
  CMatrix s(2, 2);
  s << 0.0, -kI, kI, 0.0;
  return s;
}

CMatrix sigma_z() {
  CMatrix s(2, 2);
  s << 1.0, 0.0, 0.0, -1.0;
  return s;
}

CMatrix sigma_minus() {
  CMatrix s = CMatrix::Zero(2, 2);
  s(1, 0) = 1.0;
  return s;
}

CMatrix excited() {
  CMatrix s = CMatrix::Zero(2, 2);
  s(0, 0) = 1.0;
  return s;
}

CMatrix ground() {
  CMatrix s = CMatrix::Zero(2, 2);
  s(1, 1) = 1.0;
  return s;
}

}  // namespace qubit

CMatrix destroy(Eigen::Index d) {
  CMatrix a = CMatrix::Zero(d, d);
  for (Eigen::Index n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

}  // namespace qfb
