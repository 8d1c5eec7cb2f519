#include "oracles.hpp"

#include "phstab/error.hpp"
#include "phstab/matrix_core.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace phstab;

namespace {

Matrix diag(std::initializer_list<double> v) {
  Vector d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d(i++) = x;
  return d.asDiagonal();
}

double rel(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

}  // namespace

TEST_SUITE("matrix_core") {
  TEST_CASE("split of diag(1, -1)") {
    const SpectralSplit s = spectral_split(diag({1.0, -1.0}));
    CHECK(s.dim_plus == 1);
    CHECK(s.dim_minus == 1);
    CHECK(rel(s.q_plus, diag({1.0, 0.0})) < 1e-15);
    CHECK(rel(s.q_minus, diag({0.0, 1.0})) < 1e-15);
    CHECK(std::abs(std::abs(s.iota_plus(0, 0)) - 1.0) < 1e-15);
  }

  TEST_CASE("split of a definite P1 has an empty negative part") {
    const SpectralSplit s = spectral_split(Matrix::Identity(3, 3));
    CHECK(s.dim_plus == 3);
    CHECK(s.dim_minus == 0);
    CHECK(rel(s.q_plus, Matrix::Identity(3, 3)) < 1e-15);
    CHECK(s.q_minus.norm() == 0.0);
    CHECK(s.iota_minus.cols() == 0);
  }

  TEST_CASE("split invariants on seeded random P1") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
      const int d = 1 + trial % 8;
      const Matrix p1 = oracle::random_p1(rng, d, 0.1, 10.0);
      const SpectralSplit s = spectral_split(p1);
      CAPTURE(trial);
      CHECK(s.dim_plus + s.dim_minus == d);
      CHECK(rel(s.iota_plus.transpose() * s.iota_plus, Matrix::Identity(s.dim_plus, s.dim_plus)) < 1e-12);
      CHECK(rel(s.iota_minus.transpose() * s.iota_minus, Matrix::Identity(s.dim_minus, s.dim_minus)) < 1e-12);
      CHECK((s.iota_plus.transpose() * s.iota_minus).norm() < 1e-12);
      CHECK(rel(s.p_plus + s.p_minus, Matrix::Identity(d, d)) < 1e-12);
      CHECK((s.q_plus * s.q_minus).norm() < 1e-12 * p1.norm());
      CHECK(rel(s.q_plus * s.q_plus - s.q_minus * s.q_minus, p1) < 1e-12);

      // Oracle: eigenvalues of P1 from an independent dense solve.
      Eigen::EigenSolver<Matrix> es(p1);
      int positive = 0;
      for (Eigen::Index k = 0; k < d; ++k) positive += es.eigenvalues()(k).real() > 0.0;
      CHECK(positive == s.dim_plus);
      CHECK(rel(s.iota_plus.transpose() * p1 * s.iota_plus, s.p1_plus) < 1e-12);
      CHECK(rel(-(s.iota_minus.transpose() * p1 * s.iota_minus), s.p1_minus) < 1e-12);
    }
  }

  TEST_CASE("split rejects singular and non-symmetric P1") {
    CHECK_THROWS_AS(spectral_split(diag({1.0, 1e-12})), Error);
    try {
      spectral_split(diag({1.0, 0.0}));
      FAIL("expected NearSingular");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NearSingular);
    }
    Matrix p(2, 2);
    p << 1.0, 0.5, 0.4, -1.0;
    try {
      spectral_split(p);
      FAIL("expected NotSymmetric");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NotSymmetric);
    }
  }

  TEST_CASE("e_norm") {
    const SpectralSplit s = spectral_split(diag({4.0, -1.0}));
    CHECK(e_norm(s, Sign::Plus, Vector::Ones(1)) == doctest::Approx(0.5).epsilon(1e-15));
    const SpectralSplit id = spectral_split(Matrix::Identity(3, 3));
    Vector x(3);
    x << 1.0, -2.0, 2.0;
    CHECK(e_norm(id, Sign::Plus, x) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK_THROWS_AS(e_norm(id, Sign::Plus, Vector::Ones(2)), Error);

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      const Matrix p1 = oracle::random_p1(rng, 5);
      const SpectralSplit sp = spectral_split(p1);
      for (Sign sign : {Sign::Plus, Sign::Minus}) {
        const bool plus = sign == Sign::Plus;
        const int n = plus ? sp.dim_plus : sp.dim_minus;
        if (n == 0) continue;
        const Vector v = oracle::random_matrix(rng, n, 1);
        // Ambient assembly of iota (P1^+-)^{-1/2} x, with the root from an independent eigensolve.
        const Matrix& iota = plus ? sp.iota_plus : sp.iota_minus;
        const Matrix block = plus ? Matrix(iota.transpose() * p1 * iota) : Matrix(-(iota.transpose() * p1 * iota));
        Eigen::SelfAdjointEigenSolver<Matrix> es(block);
        const Matrix root = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                            es.eigenvectors().transpose();
        CHECK(e_norm(sp, sign, v) == doctest::Approx((iota * root * v).norm()).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("expm closed forms") {
    CHECK((expm(CMatrix::Zero(3, 3)) - CMatrix::Identity(3, 3)).norm() == 0.0);
    CMatrix a = CMatrix::Zero(2, 2);
    a(0, 0) = Complex(0.0, std::numbers::pi);
    const CMatrix e = expm(a);
    CHECK(std::abs(e(0, 0) - Complex(-1.0, 0.0)) < 1e-15);
    CHECK(std::abs(e(1, 1) - Complex(1.0, 0.0)) < 1e-15);
    CHECK(std::abs(e(0, 1)) < 1e-15);
  }

  TEST_CASE("expm matches the Taylor oracle") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 60; ++trial) {
      const int d = 1 + trial % 6;
      CMatrix a = oracle::random_matrix(rng, d, d).cast<Complex>() +
                  Complex(0.0, 1.0) * oracle::random_matrix(rng, d, d).cast<Complex>();
      const double target = trial < 30 ? 2.0 : 8.0;
      a *= target / oracle::spectral_norm(a);
      const CMatrix ref = oracle::taylor_expm(a);
      CAPTURE(trial);
      CHECK((expm(a) - ref).norm() <= 1e-12 * std::exp(oracle::spectral_norm(a)));
    }
  }

  TEST_CASE("expm(A) expm(-A) = I and skew-Hermitian inputs give unitaries") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
      const int d = 1 + trial % 8;
      CMatrix a = oracle::random_matrix(rng, d, d).cast<Complex>() +
                  Complex(0.0, 1.0) * oracle::random_matrix(rng, d, d).cast<Complex>();
      a *= (0.5 + 9.5 * (trial / 50.0)) / oracle::spectral_norm(a);
      const CMatrix id = CMatrix::Identity(d, d);
      CHECK((expm(a) * expm(-a) - id).norm() < 1e-10);
      const CMatrix skew = 0.5 * (a - a.adjoint());
      const CMatrix u = expm(skew);
      CHECK((u * u.adjoint() - id).norm() < 1e-10);
    }
  }

  TEST_CASE("expm rejects non-finite input") {
    CMatrix a = CMatrix::Zero(2, 2);
    a(0, 1) = Complex(std::numeric_limits<double>::infinity(), 0.0);
    try {
      expm(a);
      FAIL("expected Overflow");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Overflow);
    }
    CMatrix big = CMatrix::Identity(2, 2) * 1e6;
    CHECK_THROWS_AS(expm(big), Error);
  }

  TEST_CASE("norms and singular values") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      const Matrix a = oracle::random_matrix(rng, 4, 4);
      Eigen::BDCSVD<Matrix> svd(a);
      CHECK(norm2(a) == doctest::Approx(svd.singularValues()(0)).epsilon(1e-12));
      CHECK(sigma_min(a.cast<Complex>()) == doctest::Approx(svd.singularValues()(3)).epsilon(1e-10));
      const Matrix spd = oracle::random_spd(rng, 4);
      const Vector ev = sym_eigenvalues(spd);
      CHECK(condition_number(spd) == doctest::Approx(ev(3) / ev(0)).epsilon(1e-12));
      CHECK(lambda_min(spd) == doctest::Approx(ev(0)).epsilon(1e-12));
      CHECK(lambda_max(spd) == doctest::Approx(ev(3)).epsilon(1e-12));
    }
  }

  TEST_CASE("row space angle") {
    std::mt19937_64 rng(9);
    const Matrix w = oracle::random_matrix(rng, 3, 6);
    const Matrix k = oracle::random_matrix(rng, 3, 3) + 3.0 * Matrix::Identity(3, 3);
    CHECK(row_space_angle(w, k * w) < 1e-10);
    Matrix e1 = Matrix::Zero(1, 2);
    e1(0, 0) = 1.0;
    Matrix e2 = Matrix::Zero(1, 2);
    e2(0, 1) = 1.0;
    CHECK(row_space_angle(e1, e2) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-12));
  }
}
