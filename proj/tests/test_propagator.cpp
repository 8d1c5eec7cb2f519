#include "oracles.hpp"

#include "phstab/error.hpp"
#include "phstab/propagator.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace phstab;

namespace {

Matrix diag2(double x, double y) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = x;
  m(1, 1) = y;
  return m;
}

Matrix rotation_p0() {
  Matrix p0(2, 2);
  p0 << 0.0, 1.0, -1.0, 0.0;
  return p0;
}

const Matrix kZero2 = Matrix::Zero(2, 2);

HamiltonianDensity delay_density() { return HamiltonianDensity::constant(0.0, 1.0, diag2(1.0, 1.0 / std::sqrt(2.0))); }

HamiltonianDensity random_density(std::mt19937_64& rng, int d, int pieces, double a = 0.0, double b = 1.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> cuts;
  for (int j = 1; j < pieces; ++j) cuts.push_back(a + (b - a) * u(rng));
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> bp{a};
  bp.insert(bp.end(), cuts.begin(), cuts.end());
  bp.push_back(b);
  std::vector<Matrix> mats;
  for (int j = 0; j < pieces; ++j) mats.push_back(oracle::random_spd(rng, d));
  return HamiltonianDensity::piecewise(bp, mats);
}

Matrix random_skew(std::mt19937_64& rng, int d, double scale) {
  const Matrix g = oracle::random_matrix(rng, d, d);
  return scale * (g - g.transpose());
}

double cnorm(const CMatrix& a) { return oracle::spectral_norm(a); }

SweepParams small_sweep(double t_max, int samples = 256) {
  SweepParams s;
  s.t_max = t_max;
  s.n_samples = samples;
  return s;
}

}  // namespace

TEST_SUITE("propagator") {
  TEST_CASE("t = 0 without P0 gives the identity everywhere") {
    std::mt19937_64 rng(1);
    const auto h = random_density(rng, 3, 4);
    const Matrix p1 = oracle::random_p1(rng, 3);
    const auto r = fundamental_matrix(h, p1, Matrix::Zero(3, 3), 0.0);
    CHECK((r.phi_b - CMatrix::Identity(3, 3)).norm() == 0.0);
    CHECK(r.sup_norm == 1.0);
    CHECK(r.inverse_residual == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  }

  TEST_CASE("constant density matches the closed form") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 30; ++trial) {
      const int d = 1 + trial % 4;
      const Matrix p1 = oracle::random_p1(rng, d);
      const Matrix h0 = oracle::random_spd(rng, d);
      const double a = -0.5, b = 1.5;
      const double t = 0.37 * trial;
      const auto r = fundamental_matrix(HamiltonianDensity::constant(a, b, h0), p1, Matrix::Zero(d, d), t);
      CAPTURE(trial);
      CHECK(cnorm(r.phi_b - oracle::constant_phi_b(p1, h0, b - a, t)) < 1e-10 * std::max(1.0, cnorm(r.phi_b)));
    }
  }

  TEST_CASE("delay data at t = 1 is the diagonal phase matrix") {
    const auto r = fundamental_matrix(delay_density(), Matrix::Identity(2, 2), kZero2, 1.0);
    CHECK(std::abs(r.phi_b(0, 0) - std::exp(Complex(0.0, -1.0))) < 1e-14);
    CHECK(std::abs(r.phi_b(1, 1) - std::exp(Complex(0.0, -std::sqrt(2.0)))) < 1e-14);
    CHECK(std::abs(r.phi_b(0, 1)) < 1e-15);
    CHECK(r.inverse_residual <= 1e-10);
  }

  TEST_CASE("scalar density depends only on the integral of 1/h") {
    const auto h = HamiltonianDensity::scalar({0.0, 0.2, 0.7, 1.0}, {1.0, 4.0, 0.5}, 2);
    const double integral = 0.2 / 1.0 + 0.5 / 4.0 + 0.3 / 0.5;
    const Matrix p1 = diag2(2.0, -0.5);
    for (double t : {0.3, 5.0, 41.0}) {
      const auto r = fundamental_matrix(h, p1, kZero2, t);
      CMatrix expected = CMatrix::Zero(2, 2);
      expected(0, 0) = std::exp(Complex(0.0, -t * integral / 2.0));
      expected(1, 1) = std::exp(Complex(0.0, t * integral / 0.5));
      CHECK(cnorm(r.phi_b - expected) < 1e-12);
    }
  }

  TEST_CASE("piecewise density matches RK4") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 12; ++trial) {
      const int d = 2 + trial % 3;
      const auto h = random_density(rng, d, 3);
      const Matrix p1 = oracle::random_p1(rng, d);
      const Matrix p0 = trial % 2 ? random_skew(rng, d, 0.5) : Matrix::Zero(d, d);
      const double t = 1.0 + 2.0 * trial;
      const auto r = fundamental_matrix(h, p1, p0, t);
      const CMatrix ref = oracle::rk4_phi_b(h, p1, p0, t, 2000);
      CAPTURE(trial);
      CHECK(cnorm(r.phi_b - ref) < 1e-8 * std::max(1.0, cnorm(ref)));
    }
  }

  TEST_CASE("inverse identity, unit determinant and conjugate symmetry") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
      const int d = 1 + trial % 5;
      const auto h = random_density(rng, d, 1 + trial % 4);
      const Matrix p1 = oracle::random_p1(rng, d);
      const Matrix p0 = trial % 3 == 0 ? random_skew(rng, d, 0.4) : Matrix::Zero(d, d);
      const double t = trial % 7 == 0 ? 7.3 : 0.5 * trial;
      const auto r = fundamental_matrix(h, p1, p0, t);
      CAPTURE(trial);
      CHECK(r.inverse_residual <= 1e-8 * std::max(1.0, cnorm(r.phi_b)));
      const CMatrix direct_inverse = r.phi_b.inverse();
      CHECK(cnorm(direct_inverse - p1.inverse().cast<Complex>() * r.phi_b.adjoint() * p1.cast<Complex>()) <=
            1e-8 * std::max(1.0, cnorm(r.phi_b)));
      CHECK(std::abs(std::abs(r.phi_b.determinant()) - 1.0) < 1e-10);
      const CMatrix back = Propagator(h, p1, p0).phi_b(-t);
      CHECK(cnorm(back - r.phi_b.conjugate()) < 1e-10 * std::max(1.0, cnorm(back)));
      CHECK(cnorm(direct_inverse) <= norm2(Matrix(p1.inverse())) * norm2(p1) * cnorm(r.phi_b) * (1.0 + 1e-10));
    }
  }

  TEST_CASE("cocycle over a split interval") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      const auto h = random_density(rng, 3, 4);
      const Matrix p1 = oracle::random_p1(rng, 3);
      const Matrix p0 = random_skew(rng, 3, 0.3);
      const double c = 0.2 + 0.6 * (trial / 20.0);
      const double t = 3.0 + trial;
      const CMatrix left = fundamental_matrix(h.restricted(0.0, c), p1, p0, t).phi_b;
      const CMatrix right = fundamental_matrix(h.restricted(c, 1.0), p1, p0, t).phi_b;
      const CMatrix whole = fundamental_matrix(h, p1, p0, t).phi_b;
      CHECK(cnorm(right * left - whole) < 1e-10 * std::max(1.0, cnorm(whole)));
    }
  }

  TEST_CASE("refinement of a smooth density converges at first order") {
    const Matrix p1 = diag2(1.0, -2.0);
    const auto sampled = [](int n) {
      std::vector<Matrix> cells;
      for (int j = 0; j < n; ++j) {
        const double x = (j + 0.5) / n;
        Matrix m(2, 2);
        m << 2.0 + std::sin(3.0 * x), 0.3 * x, 0.3 * x, 1.0 + x * x;
        cells.push_back(m);
      }
      return HamiltonianDensity::sampled(0.0, 1.0, cells);
    };
    const double t = 5.0;
    const CMatrix fine = fundamental_matrix(sampled(1600), p1, kZero2, t).phi_b;
    double previous = 1e300;
    for (int n : {25, 50, 100, 200}) {
      const double err = cnorm(fundamental_matrix(sampled(n), p1, kZero2, t).phi_b - fine);
      CAPTURE(n);
      CHECK(err < previous);
      previous = err;
    }
    CHECK(previous < 1e-2);
  }

  TEST_CASE("invalid P0 and mismatched dimensions") {
    Matrix not_skew(2, 2);
    not_skew << 0.0, 1.0, 1.0, 0.0;
    try {
      fundamental_matrix(delay_density(), Matrix::Identity(2, 2), not_skew, 1.0);
      FAIL("expected InvalidP0");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidP0);
    }
    CHECK_THROWS_AS(fundamental_matrix(delay_density(), Matrix::Identity(3, 3), Matrix::Zero(3, 3), 1.0), Error);
  }

  TEST_CASE("default t_max and sweep grids") {
    CHECK(default_t_max(delay_density(), Matrix::Identity(2, 2)) ==
          doctest::Approx(444.2882938158366).epsilon(1e-14));
    const auto ts = sweep_grid(100.0, 2048);
    CHECK(ts.front() == 0.0);
    CHECK(ts.back() == doctest::Approx(100.0));
    CHECK(std::is_sorted(ts.begin(), ts.end()));
    CHECK(std::adjacent_find(ts.begin(), ts.end()) == ts.end());
    CHECK(ts.size() >= 2000);
    CHECK(std::count_if(ts.begin(), ts.end(), [](double t) { return t > 0.0 && t < 0.2; }) > 100);
    const auto ext = extension_grid(100.0, 200.0, 100.0, 2048);
    CHECK(ext.front() > 100.0);
    CHECK(ext.back() == doctest::Approx(200.0));
    CHECK(ext.size() >= 1023);
    CHECK_THROWS_AS(sweep_grid(0.0, 10), Error);
  }

  TEST_CASE("scalar certificate for the isometric flow") {
    const auto h = HamiltonianDensity::scalar({0.0, 1.0}, {1.0}, 2);
    const auto r = condition_b_estimate(h, diag2(1.0, -1.0), kZero2, small_sweep(50.0));
    CHECK(r.certified == BCertificate::Scalar);
    REQUIRE(r.certified_bound);
    CHECK(*r.certified_bound == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.swept_sup == doctest::Approx(1.0).epsilon(1e-10));
    CHECK_FALSE(r.growth_flag);
  }

  TEST_CASE("constant diagonal density certifies through invariance and bounded variation") {
    const auto r = condition_b_estimate(delay_density(), Matrix::Identity(2, 2), kZero2, small_sweep(100.0));
    CHECK(r.certified == BCertificate::InvariantSubspace);
    CHECK(std::find(r.also_satisfied.begin(), r.also_satisfied.end(), BCertificate::BoundedVariation) !=
          r.also_satisfied.end());
    CHECK(r.total_variation == 0.0);
    CHECK(r.swept_sup <= *r.certified_bound * (1.0 + 1e-6));
  }

  TEST_CASE("non-commuting pieces certify through bounded variation") {
    Matrix h1(2, 2), h2(2, 2);
    h1 << 2.0, 0.7, 0.7, 1.0;
    h2 << 1.0, -0.4, -0.4, 3.0;
    const auto h = HamiltonianDensity::piecewise({0.0, 0.4, 1.0}, {h1, h2});
    const Matrix p1 = diag2(1.0, -1.0);
    CHECK_FALSE(invariance_check(h, spectral_split(p1)).invariant);
    const auto r = condition_b_estimate(h, p1, kZero2, small_sweep(200.0, 512));
    CHECK(r.certified == BCertificate::BoundedVariation);
    REQUIRE(r.certified_bound);
    CHECK(std::isfinite(*r.certified_bound));
    CHECK(r.swept_sup <= *r.certified_bound * (1.0 + 1e-6));
    CHECK(r.swept_sup_doubled <= *r.certified_bound * (1.0 + 1e-6));
  }

  TEST_CASE("certified bounds dominate the sweep on random problems") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
      const int d = 2 + trial % 2;
      const auto h = random_density(rng, d, 2 + trial % 3);
      const Matrix p1 = oracle::random_p1(rng, d);
      const auto r = condition_b_estimate(h, p1, Matrix::Zero(d, d), small_sweep(60.0, 128));
      CAPTURE(trial);
      CHECK(r.certified != BCertificate::None);
      CHECK(r.swept_sup <= *r.certified_bound * (1.0 + 1e-6));
      CHECK(r.swept_sup <= bv_bound(h) * (1.0 + 1e-6));
    }
  }

  TEST_CASE("P0 probe agrees on boundedness within the Gronwall factor") {
    const auto scalar = HamiltonianDensity::scalar({0.0, 1.0}, {1.0}, 2);
    const Matrix p1 = diag2(1.0, -1.0);
    const auto same = p0_invariance_probe(scalar, p1, kZero2, small_sweep(40.0, 128));
    CHECK(same.sup_with_p0 == same.sup_without_p0);

    const auto probe = p0_invariance_probe(scalar, p1, rotation_p0(), small_sweep(40.0, 128));
    CHECK(std::isfinite(probe.sup_with_p0));
    CHECK(std::isfinite(probe.sup_without_p0));
    const double factor = gronwall_factor(1.0, 1.0, p1, rotation_p0());
    CHECK(factor == doctest::Approx(std::exp(1.0)));
    CHECK(probe.sup_with_p0 <= probe.sup_without_p0 * factor);
    CHECK(probe.sup_without_p0 <= probe.sup_with_p0 * factor);

    const auto r = condition_b_estimate(scalar, p1, rotation_p0(), small_sweep(40.0, 128));
    CHECK(r.certified != BCertificate::None);
    CHECK(r.gronwall_factor == doctest::Approx(factor));

    const auto delay = p0_invariance_probe(delay_density(), Matrix::Identity(2, 2), 0.3 * rotation_p0(),
                                           small_sweep(100.0, 256));
    const auto no_p0 = condition_b_estimate(delay_density(), Matrix::Identity(2, 2), kZero2, small_sweep(100.0, 256));
    const auto with_p0 =
        condition_b_estimate(delay_density(), Matrix::Identity(2, 2), 0.3 * rotation_p0(), small_sweep(100.0, 256));
    CHECK(std::isfinite(delay.sup_with_p0));
    CHECK(no_p0.growth_flag == with_p0.growth_flag);
  }

  TEST_CASE("threads do not change the swept supremum") {
    std::mt19937_64 rng(8);
    const auto h = random_density(rng, 3, 3);
    const Propagator prop(h, oracle::random_p1(rng, 3), Matrix::Zero(3, 3));
    const auto ts = sweep_grid(30.0, 200);
    CHECK(swept_sup(prop, ts, 1) == swept_sup(prop, ts, 4));
  }
}
