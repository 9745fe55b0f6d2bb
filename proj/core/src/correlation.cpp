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

#include "qfb/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "qfb/sme.hpp"

namespace qfb {

CorrelationResult regression_correlation(const Superoperator& generator, const VOp& alpha,
                                         const VOp& quadratures, double hbar, const CMatrix& rho,
                                         std::span<const double> taus) {
  require_density_matrix(rho, generator.dim());
  if (alpha.size() != quadratures.size()) {
    throw Error(ErrorCode::DimensionMismatch, "alpha and quadrature lists differ in length");
  }
  for (const double tau : taus) {
    if (!(tau >= 0.0) || !std::isfinite(tau)) {
      throw Error(ErrorCode::NegativeLag, "lag " + format_value(tau) + " is not a finite value >= 0");
    }
  }
  const auto num_r = static_cast<Eigen::Index>(alpha.size());
  const double scale = 1.0 / (hbar * hbar);

  // Deformed states alpha_r rho + rho alpha_r^dagger, vectorized as columns.
  CMatrix sources(rho.size(), num_r);
  for (Eigen::Index r = 0; r < num_r; ++r) {
    const CMatrix src = alpha[r] * rho + rho * alpha[r].adjoint();
    sources.col(r) = vectorize(src);
  }
  // Rows of `probes` pair with vec(.) to give Tr[X_s .].
  CMatrix probes(num_r, rho.size());
  for (Eigen::Index s = 0; s < num_r; ++s) probes.row(s) = vectorize(quadratures[s].transpose()).transpose();

  CorrelationResult out;
  out.taus.assign(taus.begin(), taus.end());
  out.delta_weight = hbar * hbar * Eigen::MatrixXd::Identity(num_r, num_r);
  out.smooth.reserve(taus.size());
  for (const double tau : taus) {
    const CMatrix propagated = expm(generator.matrix(), tau) * sources;
    // (probes * propagated)(s, r) = Tr[X_s exp(G tau)(source_r)]
    const CMatrix c = (probes * propagated).transpose() * scale;
    out.max_imag = std::max(out.max_imag, c.size() ? c.imag().cwiseAbs().maxCoeff() : 0.0);
    out.smooth.push_back(c.real());
  }
  return out;
}

CorrelationResult correlation_with_feedback(const SystemModel& model, const CMatrix& rho,
                                            std::span<const double> taus) {
  return regression_correlation(build_lmfb(model), alpha_vop(model), measured_quadratures(model),
                                model.hbar(), rho, taus);
}

CorrelationResult correlation_measurement_only(const SystemModel& model, const CMatrix& rho,
                                               std::span<const double> taus) {
  return regression_correlation(build_lm(model), mdag_c(model), measured_quadratures(model), model.hbar(),
                                rho, taus);
}

CMatrix steady_state(const Superoperator& s, double tol) {
  const CMatrix& g = s.matrix();
  Eigen::BDCSVD<CMatrix> svd(g, Eigen::ComputeFullV);
  const RVector& sv = svd.singularValues();
  const double threshold = tol * std::max(1.0, sv(0));
  const Eigen::Index null_dim = (sv.array() <= threshold).count();
  if (null_dim != 1) {
    throw Error(ErrorCode::NoSteadyState, "generator nullspace has dimension " + std::to_string(null_dim) +
                                              " (tolerance " + format_value(threshold) + ")");
  }
  const CVector v = svd.matrixV().col(g.cols() - 1);
  CMatrix rho = devectorize(v);
  const Complex tr = rho.trace();
  if (std::abs(tr) < tol) throw Error(ErrorCode::NoSteadyState, "null vector has zero trace");
  rho /= tr;
  return 0.5 * (rho + rho.adjoint());
}

}  // namespace qfb
