#include "oracles.hpp"

#include "phstab/error.hpp"
#include "phstab/hamiltonian.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace phstab;

namespace {

Matrix diag2(double x, double y) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = x;
  m(1, 1) = y;
  return m;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_SUITE("hamiltonian") {
  TEST_CASE("bounds of constant and piecewise densities") {
    const auto id = bounds(HamiltonianDensity::constant(0.0, 1.0, Matrix::Identity(2, 2)));
    CHECK(id.m == doctest::Approx(1.0));
    CHECK(id.mbound == doctest::Approx(1.0));

    const auto delay = bounds(HamiltonianDensity::constant(0.0, 1.0, diag2(1.0, 1.0 / std::sqrt(2.0))));
    CHECK(delay.m == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(delay.mbound == doctest::Approx(1.0).epsilon(1e-15));

    const auto pw = bounds(HamiltonianDensity::piecewise({0.0, 0.5, 1.0}, {diag2(2.0, 1.0), diag2(3.0, 1.0)}));
    CHECK(pw.m == doctest::Approx(1.0));
    CHECK(pw.mbound == doctest::Approx(3.0));
  }

  TEST_CASE("bounds agree with an independent eigensolve") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 30; ++trial) {
      const int d = 1 + trial % 5;
      std::vector<Matrix> pieces;
      std::vector<double> bp{0.0};
      double lo = 1e300, hi = 0.0;
      for (int j = 0; j < 1 + trial % 4; ++j) {
        pieces.push_back(oracle::random_spd(rng, d));
        bp.push_back(0.25 * (j + 1));
        Eigen::SelfAdjointEigenSolver<Matrix> es(pieces.back());
        lo = std::min(lo, es.eigenvalues().minCoeff());
        hi = std::max(hi, es.eigenvalues().maxCoeff());
      }
      const auto h = HamiltonianDensity::piecewise(bp, pieces);
      CHECK(h.lower_bound() == doctest::Approx(lo).epsilon(1e-12));
      CHECK(h.upper_bound() == doctest::Approx(hi).epsilon(1e-12));
      CHECK(h.lower_bound() > 0.0);
      CHECK(h.lower_bound() <= h.upper_bound());
      for (std::size_t j = 0; j < h.num_pieces(); ++j) {
        CHECK((h.piece(j) * h.piece_inverse(j) - Matrix::Identity(d, d)).norm() < 1e-12);
      }
    }
  }

  TEST_CASE("total variation") {
    const auto steps = HamiltonianDensity::piecewise({0.0, 0.5, 1.0}, {Matrix::Identity(2, 2), 2.0 * Matrix::Identity(2, 2)});
    CHECK(total_variation(steps) == doctest::Approx(2.0));
    const auto sc = HamiltonianDensity::scalar({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 2.0}, 2);
    CHECK(total_variation(sc) == doctest::Approx(6.0));
    CHECK(total_variation(HamiltonianDensity::constant(0.0, 1.0, diag2(1.0, 5.0))) == 0.0);
    CHECK(inverse_total_variation(steps) == doctest::Approx(1.0));
  }

  TEST_CASE("total variation is unchanged by refinement") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Matrix> pieces;
      std::vector<double> bp{0.0};
      for (int j = 0; j < 4; ++j) {
        pieces.push_back(oracle::random_spd(rng, 3));
        bp.push_back(0.25 * (j + 1));
      }
      const auto h = HamiltonianDensity::piecewise(bp, pieces);
      const double x = u(rng);
      const auto r = h.refined(x);
      CHECK(r.num_pieces() >= h.num_pieces());
      CHECK(total_variation(r) == doctest::Approx(total_variation(h)).epsilon(1e-14));
      CHECK(inverse_total_variation(r) == doctest::Approx(inverse_total_variation(h)).epsilon(1e-14));
      CHECK(r.at(x).isApprox(h.at(x)));
      CHECK(r.at(0.5 * x).isApprox(h.at(0.5 * x)));
    }
  }

  TEST_CASE("invariance of the positive eigenspace") {
    Matrix p1 = diag2(1.0, -1.0);
    const SpectralSplit split = spectral_split(p1);
    Matrix coupled(2, 2);
    coupled << 2.0, 1.0, 1.0, 2.0;
    const auto bad = invariance_check(HamiltonianDensity::constant(0.0, 1.0, coupled), split);
    CHECK_FALSE(bad.invariant);
    CHECK(bad.max_residual == doctest::Approx(1.0));
    CHECK(invariance_check(HamiltonianDensity::constant(0.0, 1.0, diag2(2.0, 3.0)), split).invariant);

    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
      const Matrix p = oracle::random_p1(rng, 4);
      const auto sc = HamiltonianDensity::scalar({0.0, 0.3, 1.0}, {1.5, 0.7}, 4);
      CHECK(invariance_check(sc, spectral_split(p)).invariant);
    }
    CHECK(code_of([&] { invariance_check(HamiltonianDensity(), split); }) == ErrorCode::DimensionMismatch);
  }

  TEST_CASE("inverse_at and lookup") {
    const auto h = HamiltonianDensity::piecewise({0.0, 0.5, 1.0}, {diag2(2.0, 1.0), diag2(4.0, 1.0)});
    CHECK(inverse_at(h, 0.25)(0, 0) == doctest::Approx(0.5));
    CHECK(inverse_at(h, 0.5)(0, 0) == doctest::Approx(0.25));
    CHECK(inverse_at(h, 1.0)(0, 0) == doctest::Approx(0.25));
    CHECK(inverse_at(h, 0.0)(0, 0) == doctest::Approx(0.5));
    CHECK(code_of([&] { inverse_at(h, 1.5); }) == ErrorCode::OutOfInterval);
    CHECK(code_of([&] { inverse_at(h, -0.1); }) == ErrorCode::OutOfInterval);
  }

  TEST_CASE("restriction") {
    const auto h = HamiltonianDensity::scalar({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 2.0}, 1);
    const auto r = h.restricted(0.5, 2.5);
    CHECK(r.a() == 0.5);
    CHECK(r.b() == 2.5);
    CHECK(r.num_pieces() == 3);
    CHECK(total_variation(r) == doctest::Approx(3.0));
    CHECK(code_of([&] { h.restricted(2.0, 4.0); }) == ErrorCode::OutOfInterval);
  }

  TEST_CASE("construction errors") {
    Matrix indefinite = diag2(1.0, -1.0);
    CHECK(code_of([&] { HamiltonianDensity::constant(0.0, 1.0, indefinite); }) == ErrorCode::NotPositiveDefinite);
    Matrix skewed(2, 2);
    skewed << 2.0, 1.0, 0.0, 2.0;
    CHECK(code_of([&] { HamiltonianDensity::constant(0.0, 1.0, skewed); }) == ErrorCode::NotSymmetric);
    CHECK(code_of([&] { HamiltonianDensity::scalar({0.0, 1.0}, {0.0}, 2); }) == ErrorCode::NotPositiveDefinite);
    CHECK(code_of([&] { HamiltonianDensity::scalar({0.0, 1.0, 1.0}, {1.0, 2.0}, 1); }) ==
          ErrorCode::InvalidArgument);
    CHECK(code_of([&] { HamiltonianDensity::scalar({0.0, 1.0}, {1.0, 2.0}, 1); }) == ErrorCode::DimensionMismatch);
  }

  TEST_CASE("CSV density") {
    const auto path = temp_file("phstab_density.csv", "x,h11,h12,h22\n0.125,2,0,1\n0.375,2,0.5,1\n0.625,3,0,1\n0.875,3,0,1\n");
    const auto h = load_density_csv(path);
    CHECK(h.kind() == DensityKind::Sampled);
    CHECK(h.a() == doctest::Approx(0.0));
    CHECK(h.b() == doctest::Approx(1.0));
    CHECK(h.dim() == 2);
    CHECK(h.num_pieces() == 4);
    CHECK(h.at(0.4)(0, 1) == doctest::Approx(0.5));
    CHECK(h.at(0.4)(1, 0) == doctest::Approx(0.5));

    const auto ragged = temp_file("phstab_ragged.csv", "0.5,1,0\n1.5,1\n");
    CHECK(code_of([&] { load_density_csv(ragged); }) == ErrorCode::ParseError);
    const auto bad_grid = temp_file("phstab_grid.csv", "0.5,1\n1.5,1\n4.0,1\n");
    CHECK(code_of([&] { load_density_csv(bad_grid); }) == ErrorCode::ParseError);
    CHECK(code_of([&] { load_density_csv("/nonexistent/density.csv"); }) == ErrorCode::NotFound);
  }
}
