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

#include <cmath>

#include "doctest.h"
#include "qfb/model.hpp"
#include "support/generators.hpp"

using namespace qfb;
using qfb::testing::Rng;

namespace {

CMatrix scalar(Complex x) {
  CMatrix m(1, 1);
  m(0, 0) = x;
  return m;
}

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("validate_mrep: homodyne, heterodyne and identity") {
  auto eta = validate_mrep(MRep{scalar(1.0), 1.0});
  REQUIRE(eta.size() == 1);
  CHECK(eta(0) == doctest::Approx(1.0).epsilon(1e-15));

  CMatrix het(1, 2);
  het << std::sqrt(0.4), kI * std::sqrt(0.4);  // sqrt(hbar eta / 2) with eta = 0.8
  eta = validate_mrep(MRep{het, 1.0});
  CHECK(eta(0) == doctest::Approx(0.8).epsilon(1e-14));

  eta = validate_mrep(MRep{CMatrix::Identity(2, 2), 1.0});
  CHECK(eta(0) == 1.0);
  CHECK(eta(1) == 1.0);
}

TEST_CASE("validate_mrep: errors and clamping") {
  CMatrix tilted(2, 2);
  tilted << 0.5, 0.5, 0.5, 0.0;
  CHECK(code_of([&] { validate_mrep(MRep{tilted, 1.0}); }) == ErrorCode::NotDiagonal);
  CHECK(code_of([&] { validate_mrep(MRep{scalar(1.1), 1.0}); }) == ErrorCode::EfficiencyOutOfRange);
  CHECK(code_of([&] { validate_mrep(MRep{scalar(0.5), 0.0}); }) == ErrorCode::InvalidModel);
  // eta slightly above 1 within tolerance is clamped.
  const auto eta = validate_mrep(MRep{scalar(std::sqrt(1.0 + 1e-12)), 1.0});
  CHECK(eta(0) == 1.0);
}

TEST_CASE("compute_z: homodyne, heterodyne, no measurement") {
  CMatrix z = compute_z(MRep{scalar(std::sqrt(0.5)), 1.0});
  CHECK(std::abs(z(0, 0) - 0.5) < 1e-15);

  const double eta = 0.75;
  CMatrix het(1, 2);
  het << std::sqrt(eta / 2), kI * std::sqrt(eta / 2);
  z = compute_z(MRep{het, 1.0});
  CMatrix expected(2, 2);
  expected << 0.625, -0.375 * kI, 0.375 * kI, 0.625;
  CHECK(max_abs(z - expected) < 1e-15);

  z = compute_z(MRep{CMatrix::Zero(2, 3), 2.0});
  CHECK(max_abs(z - 2.0 * CMatrix::Identity(3, 3)) == 0.0);
}

TEST_CASE("homodyne_model presets") {
  const CMatrix c = qubit::sigma_minus();
  const CMatrix f = qubit::sigma_y();
  const CMatrix h = CMatrix::Zero(2, 2);

  auto m = homodyne_model(c, f, 1.0, 1.0, h);
  CHECK(std::abs(m.m()(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(m.z()(0, 0)) < 1e-15);

  m = homodyne_model(c, f, 0.0, 1.0, h);
  CHECK(std::abs(m.m()(0, 0)) == 0.0);
  CHECK(std::abs(m.z()(0, 0) - 1.0) < 1e-15);

  m = homodyne_model(c, f, 0.36, 1.0, h);
  CHECK(std::abs(m.m()(0, 0) - 0.6) < 1e-15);

  CHECK(code_of([&] { homodyne_model(c, f, 1.5, 1.0, h); }) == ErrorCode::EfficiencyOutOfRange);
  CHECK(code_of([&] { homodyne_model(c, f, -0.1, 1.0, h); }) == ErrorCode::EfficiencyOutOfRange);
}

TEST_CASE("heterodyne_model presets") {
  const CMatrix c = qubit::sigma_minus();
  const CMatrix h = CMatrix::Zero(2, 2);
  auto m = heterodyne_model(c, qubit::sigma_x(), qubit::sigma_y(), 1.0, 1.0, h);
  CHECK(std::abs(m.m()(0, 0) - std::sqrt(0.5)) < 1e-15);
  CHECK(std::abs(m.m()(0, 1) - kI * std::sqrt(0.5)) < 1e-15);

  m = heterodyne_model(c, qubit::sigma_x(), qubit::sigma_y(), 0.0, 1.0, h);
  CHECK(max_abs(m.m()) == 0.0);

  m = heterodyne_model(c, qubit::sigma_x(), qubit::sigma_y(), 0.4, 1.0, h);
  CHECK(std::abs(m.efficiencies()(0) - 0.4) < 1e-15);
  CHECK(code_of([&] { heterodyne_model(c, qubit::sigma_x(), qubit::sigma_y(), 2.0, 1.0, h); }) ==
        ErrorCode::EfficiencyOutOfRange);
}

TEST_CASE("presets validate to their efficiency") {
  for (double eta : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    for (double hbar : {1.0, 0.5, 3.0}) {
      const auto hom = homodyne_model(qubit::sigma_minus(), qubit::sigma_x(), eta, hbar, qubit::sigma_z());
      CHECK(std::abs(validate_mrep(hom.mrep())(0) - eta) < 1e-14);
      const auto het = heterodyne_model(qubit::sigma_minus(), qubit::sigma_x(), qubit::sigma_y(), eta, hbar,
                                        qubit::sigma_z());
      CHECK(std::abs(validate_mrep(het.mrep())(0) - eta) < 1e-14);
    }
  }
}

TEST_CASE("compute_z is Hermitian PSD on random valid M") {
  Rng rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index num_l = 1 + trial % 3;
    const Eigen::Index num_r = 1 + (trial / 3) % (2 * num_l);
    const double hbar = (trial % 2) ? 1.0 : 0.5;
    const MRep mrep = qfb::testing::random_mrep(num_l, num_r, hbar, rng);
    const RVector eta = validate_mrep(mrep);
    CHECK(eta.minCoeff() >= 0.0);
    CHECK(eta.maxCoeff() <= 1.0);
    const CMatrix z = compute_z(mrep);
    CHECK(hermiticity_residual(z) < 1e-14);
    CHECK(hermitian_eigenvalues(z).minCoeff() > -1e-12);
  }
}

TEST_CASE("SystemModel construction checks") {
  const CMatrix id = CMatrix::Identity(2, 2);
  CMatrix non_herm = CMatrix::Zero(2, 2);
  non_herm(0, 1) = 1.0;

  CHECK(code_of([&] { SystemModel(non_herm, VOp{}, VOp{}, MRep{CMatrix(0, 0), 1.0}); }) ==
        ErrorCode::NotHermitian);
  CHECK(code_of([&] {
          SystemModel(id, VOp{qubit::sigma_minus()}, VOp{non_herm}, MRep{CMatrix::Zero(1, 1), 1.0});
        }) == ErrorCode::NotHermitian);
  // R > 2L
  CHECK(code_of([&] {
          SystemModel(id, VOp{qubit::sigma_minus()}, VOp{id, id, id}, MRep{CMatrix::Zero(1, 3), 1.0});
        }) == ErrorCode::InvalidModel);
  // M shape does not match (L, R)
  CHECK(code_of([&] {
          SystemModel(id, VOp{qubit::sigma_minus()}, VOp{id}, MRep{CMatrix::Zero(1, 2), 1.0});
        }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([&] {
          SystemModel(id, VOp{CMatrix::Zero(3, 3)}, VOp{}, MRep{CMatrix::Zero(1, 0), 1.0});
        }) == ErrorCode::DimensionMismatch);

  // L = 0 and R = 0 are legal.
  const SystemModel bare(qubit::sigma_z(), VOp{}, VOp{}, MRep{CMatrix(0, 0), 1.0});
  CHECK(bare.num_channels() == 0);
  CHECK(bare.num_currents() == 0);
  const SystemModel no_fb(qubit::sigma_z(), VOp{qubit::sigma_minus()}, VOp{}, MRep{CMatrix::Zero(1, 0), 1.0});
  CHECK(no_fb.z().size() == 0);
}

TEST_CASE("mdag_c and measured quadratures") {
  const auto het = heterodyne_model(qubit::sigma_minus(), qubit::sigma_x(), qubit::sigma_y(), 1.0, 1.0,
                                    CMatrix::Zero(2, 2));
  const VOp x = measured_quadratures(het);
  const CMatrix c = qubit::sigma_minus();
  const double a = std::sqrt(0.5);
  CHECK(max_abs(x[0] - a * (c + c.adjoint())) < 1e-15);
  CHECK(max_abs(x[1] - a * (-kI) * (c - c.adjoint())) < 1e-15);
}
