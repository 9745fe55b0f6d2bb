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

#include "qfb/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace qfb {

std::string format_value(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::NotDiagonal: return "NotDiagonal";
    case ErrorCode::EfficiencyOutOfRange: return "EfficiencyOutOfRange";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::InvalidSquareRoot: return "InvalidSquareRoot";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::StateDiverged: return "StateDiverged";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NegativeLag: return "NegativeLag";
    case ErrorCode::NoSteadyState: return "NoSteadyState";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

double max_abs(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().maxCoeff();
}

double hermiticity_residual(const CMatrix& a) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::NonSquare, "hermiticity check on a " + std::to_string(a.rows()) +
                                          "x" + std::to_string(a.cols()) + " matrix");
  }
  return max_abs(a - a.adjoint());
}

bool is_hermitian(const CMatrix& a, double tol) {
  return a.rows() == a.cols() && hermiticity_residual(a) <= tol;
}

RVector hermitian_eigenvalues(const CMatrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::NonSquare, "eigenvalues of a non-square matrix");
  if (a.size() == 0) return RVector{};
  const CMatrix h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

double min_hermitian_eigenvalue(const CMatrix& a) {
  if (a.rows() == 2 && a.cols() == 2) {
    const double p = a(0, 0).real();
    const double q = a(1, 1).real();
    const Complex off = 0.5 * (a(0, 1) + std::conj(a(1, 0)));
    const double half_gap = 0.5 * (p - q);
    return 0.5 * (p + q) - std::sqrt(half_gap * half_gap + std::norm(off));
  }
  const RVector ev = hermitian_eigenvalues(a);
  return ev.size() == 0 ? 0.0 : ev.minCoeff();
}

CMatrix psd_sqrt(const CMatrix& a, double tol) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::NonSquare, "psd_sqrt of a non-square matrix");
  if (a.size() == 0) return CMatrix(0, 0);
  const double herm = hermiticity_residual(a);
  if (herm > tol) {
    throw Error(ErrorCode::NotHermitian,
                "psd_sqrt input has |A - A^dagger|_max = " + format_value(herm));
  }
  const CMatrix h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
  RVector ev = solver.eigenvalues();
  if (ev.minCoeff() < -tol) {
    throw Error(ErrorCode::NotPSD, "psd_sqrt input has eigenvalue " + format_value(ev.minCoeff()));
  }
  // Round-off level of the spectrum: anything below it is a zero eigenvalue.
  const double noise = 100.0 * std::numeric_limits<double>::epsilon() *
                       static_cast<double>(ev.size()) * ev.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    ev(k) = ev(k) <= noise ? 0.0 : std::sqrt(ev(k));
  }
  const CMatrix& v = solver.eigenvectors();
  CMatrix s = v * ev.cast<Complex>().asDiagonal() * v.adjoint();
  return 0.5 * (s + s.adjoint());
}

CVector vectorize(const CMatrix& rho) {
  if (rho.rows() != rho.cols()) throw Error(ErrorCode::NonSquare, "vectorize expects a square matrix");
  // Eigen is column-major, so the raw storage is already column-stacked.
  return Eigen::Map<const CVector>(rho.data(), rho.size());
}

CMatrix devectorize(const CVector& v) {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  if (d * d != v.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "devectorize: length " + std::to_string(v.size()) + " is not a perfect square");
  }
  return Eigen::Map<const CMatrix>(v.data(), d, d);
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

CMatrix sandwich(const CMatrix& a, const CMatrix& b) {
  return kron(b.transpose(), a);
}

CMatrix expm(const CMatrix& g, double t) {
  if (g.rows() != g.cols()) throw Error(ErrorCode::NonSquare, "expm of a non-square matrix");
  if (t == 0.0 || g.size() == 0) return CMatrix::Identity(g.rows(), g.cols());
  const CMatrix scaled = g * t;
  return scaled.exp();
}

namespace {

constexpr Eigen::Index kDenseExpmLimit = 4096;

}  // namespace

namespace detail {

CVector taylor_expm_action(const CMatrix& g, const CVector& v, double t) {
  const double norm1 = (g * t).cwiseAbs().colwise().sum().maxCoeff();
  const int substeps = std::max(1, static_cast<int>(std::ceil(norm1)));
  const double h = t / substeps;
  CVector w = v;
  for (int s = 0; s < substeps; ++s) {
    CVector term = w;
    CVector acc = w;
    for (int k = 1; k <= 200; ++k) {
      term = (g * term) * (h / k);
      acc += term;
      if (term.norm() <= 1e-17 * acc.norm()) break;
    }
    w = std::move(acc);
  }
  return w;
}

}  // namespace detail

CVector expm_action(const CMatrix& g, const CVector& v, double t) {
  if (g.rows() != g.cols()) throw Error(ErrorCode::NonSquare, "expm_action: generator is not square");
  if (g.cols() != v.size()) {
    throw Error(ErrorCode::DimensionMismatch, "expm_action: generator is " + std::to_string(g.rows()) +
                                                  "x" + std::to_string(g.cols()) + ", vector has " +
                                                  std::to_string(v.size()) + " entries");
  }
  if (t == 0.0 || v.size() == 0) return v;
  if (g.rows() <= kDenseExpmLimit) return expm(g, t) * v;
  return detail::taylor_expm_action(g, v, t);
}

}  // namespace qfb
