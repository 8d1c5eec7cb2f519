#include "phstab/fixtures.hpp"

#include "phstab/error.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace phstab {

namespace {

using std::numbers::pi;
using std::numbers::sqrt2;

constexpr Complex kI{0.0, 1.0};

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Matrix hstack(const Matrix& l, const Matrix& r) {
  Matrix w(l.rows(), l.cols() + r.cols());
  w << l, r;
  return w;
}

/// Piecewise h for the rough two-way transport variant, on 40 equal pieces of [0, 1].
std::vector<double> rough_profile() {
  std::vector<double> h;
  for (int j = 0; j < 40; ++j) {
    const double x = (j + 0.5) / 40.0;
    h.push_back(1.0 + 0.5 * std::sin(6.0 * pi * x) + 0.3 * static_cast<double>((7 * j) % 5) / 4.0);
  }
  return h;
}

double inverse_integral(const HamiltonianDensity& h) {
  double s = 0.0;
  for (std::size_t j = 0; j < h.num_pieces(); ++j) s += h.piece_width(j) / h.piece(j)(0, 0);
  return s;
}

Matrix gaussian(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix g(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) g(i, j) = n(rng);
  return g;
}

Matrix random_orthogonal(std::mt19937_64& rng, int d) {
  Eigen::HouseholderQR<Matrix> qr(gaussian(rng, d, d));
  return qr.householderQ();
}

Matrix random_spd(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(0.5, 2.0);
  const Matrix q = random_orthogonal(rng, d);
  Vector ev(d);
  for (int k = 0; k < d; ++k) ev(k) = u(rng);
  const Matrix s = q * ev.asDiagonal() * q.transpose();
  return 0.5 * (s + s.transpose());
}

Fixture make(std::string name, std::string description, ProblemSpec problem,
             std::function<Complex(double)> oracle = {}) {
  problem.name = name;
  return Fixture{std::move(name), std::move(description), std::move(problem), std::move(oracle)};
}

}  // namespace

ProblemSpec incommensurate_delays() {
  ProblemSpec p;
  p.name = "example_4_3";
  p.p1 = Matrix::Identity(2, 2);
  p.p0 = Matrix::Zero(2, 2);
  p.hamiltonian = HamiltonianDensity::constant(0.0, 1.0, mat2(1.0, 0.0, 0.0, 1.0 / sqrt2));
  const Matrix m = mat2(-0.5, -0.5, -0.5, -0.5);
  p.boundary = WForm{hstack(m, -Matrix::Identity(2, 2))};
  // Minima of the running sigma_min keep falling until t of a few thousand.
  p.sweep.doubling_rounds = 5;
  return p;
}

ProblemSpec mixed_delays(double theta) {
  if (!(theta > -1.0)) throw Error(ErrorCode::InvalidArgument, "theta must exceed -1");
  ProblemSpec p;
  p.name = "example_4_4";
  p.p1 = -Matrix::Identity(2, 2);
  p.p0 = Matrix::Zero(2, 2);
  p.hamiltonian = HamiltonianDensity::constant(0.0, 1.0, mat2(1.0 + theta, 0.0, 0.0, 1.0));
  const Matrix m = mat2(0.5, 0.5, 0.5, -0.5);
  p.boundary = WForm{hstack(-Matrix::Identity(2, 2), m)};
  p.sim = SimParams{1000, 10.0, 0.01};
  return p;
}

ProblemSpec two_way_transport(bool rough) {
  ProblemSpec p;
  p.name = rough ? "example_6_5_rough" : "example_6_5";
  p.p1 = mat2(1.0, 0.0, 0.0, -1.0);
  p.p0 = Matrix::Zero(2, 2);
  if (rough) {
    std::vector<double> xs;
    for (int j = 0; j <= 40; ++j) xs.push_back(j / 40.0);
    p.hamiltonian = HamiltonianDensity::scalar(xs, rough_profile(), 2);
  } else {
    p.hamiltonian = HamiltonianDensity::constant(0.0, 1.0, Matrix::Identity(2, 2));
  }
  p.boundary = WForm{hstack(mat2(0.5, 0.0, 0.5, -1.0), mat2(-1.0, -0.5, 0.0, 0.5))};
  p.sim = SimParams{1000, 10.0, 0.01};
  return p;
}

ProblemSpec scalar_transport() {
  ProblemSpec p;
  p.name = "scalar_transport_d1";
  p.p1 = Matrix::Identity(1, 1);
  p.p0 = Matrix::Zero(1, 1);
  p.hamiltonian = HamiltonianDensity::constant(0.0, 1.0, Matrix::Identity(1, 1));
  Matrix w(1, 2);
  w << 0.0, 1.0;
  p.boundary = WForm{w};
  p.sim = SimParams{200, 1.0, 0.01};
  return p;
}

ProblemSpec lossless_reflection() {
  ProblemSpec p;
  p.name = "lossless_reflection";
  p.p1 = mat2(1.0, 0.0, 0.0, -1.0);
  p.p0 = Matrix::Zero(2, 2);
  p.hamiltonian = HamiltonianDensity::constant(0.0, 1.0, Matrix::Identity(2, 2));
  p.boundary = MKForm{mat2(0.0, 1.0, -1.0, 0.0), std::nullopt};
  p.sim = SimParams{400, 8.0, 0.01};
  return p;
}

ProblemSpec random_problem(std::uint64_t seed, const RandomProblemOptions& options) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim_dist(1, std::max(1, options.max_dim));
  std::uniform_int_distribution<int> piece_dist(1, std::max(1, options.max_pieces));
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  std::bernoulli_distribution sign(0.5);

  const int d = dim_dist(rng);
  ProblemSpec p;
  p.name = "random_" + std::to_string(seed);

  const Matrix q = random_orthogonal(rng, d);
  Vector ev(d);
  for (int k = 0; k < d; ++k) ev(k) = (sign(rng) ? 1.0 : -1.0) * mag(rng);
  const Matrix p1 = q * ev.asDiagonal() * q.transpose();
  p.p1 = 0.5 * (p1 + p1.transpose());

  p.p0 = Matrix::Zero(d, d);
  if (options.p0_scale > 0.0 && d > 1) {
    const Matrix g = gaussian(rng, d, d);
    const Matrix s = g - g.transpose();
    p.p0 = options.p0_scale * s / norm2(s);
  }

  // Breakpoints on multiples of 1/40 so that grids with N divisible by 40 align.
  const int pieces = std::min(piece_dist(rng), 40);
  std::vector<int> cuts;
  std::uniform_int_distribution<int> cut_dist(1, 39);
  while (static_cast<int>(cuts.size()) < pieces - 1) {
    const int c = cut_dist(rng);
    if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> xs{0.0};
  for (int c : cuts) xs.push_back(c / 40.0);
  xs.push_back(1.0);
  std::vector<Matrix> hs;
  for (int j = 0; j < pieces; ++j) hs.push_back(random_spd(rng, d));
  p.hamiltonian = HamiltonianDensity::piecewise(xs, hs);

  const Matrix gm = gaussian(rng, d, d);
  const Matrix m = options.m_norm * gm / norm2(gm);
  const Matrix gk = gaussian(rng, d, d);
  const Matrix k = Matrix::Identity(d, d) + 0.3 * gk / norm2(gk);
  p.boundary = WForm{mk_to_w(m, k, spectral_split(p.p1))};
  p.sim = SimParams{200, 5.0, 0.01};
  return p;
}

std::vector<std::string> list_fixtures() {
  return {"example_4_3",         "example_4_4_theta0",  "example_4_4_theta_half", "example_6_5",
          "example_6_5_rough",   "scalar_transport_d1", "lossless_reflection",    "random_<seed>"};
}

Fixture fixture(const std::string& name) {
  if (name == "example_4_3") {
    return make(name, "constant diagonal H with delays 1 and sqrt 2; sup of the resolvent is infinite",
                incommensurate_delays(), [](double t) {
                  const double tp = -t;
                  return 1.0 + 0.5 * (std::exp(kI * tp) + std::exp(kI * sqrt2 * tp));
                });
  }
  const std::string theta_prefix = "example_4_4_theta";
  if (name.rfind(theta_prefix, 0) == 0) {
    const std::string tail = name.substr(theta_prefix.size());
    double theta = 0.0;
    try {
      std::size_t used = 0;
      theta = tail == "_half" ? 0.5 : std::stod(tail, &used);
      if (tail != "_half" && used != tail.size()) throw std::invalid_argument(tail);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::NotFound, "unknown fixture: " + name);
    }
    ProblemSpec p = mixed_delays(theta);
    return make(name, "P1 = -I with H = diag(1 + theta, 1) and a symmetric orthogonal coupling scaled by 1/sqrt 2",
                std::move(p), [theta](double t) {
                  const double tp = -t;
                  const Complex a = std::exp(kI * tp / (1.0 + theta));
                  const Complex b = std::exp(kI * tp);
                  const Complex det_s = 1.0 - 0.5 * (a - b) - 0.5 * a * b;
                  return det_s / (a * b);
                });
  }
  if (name == "example_6_5" || name == "example_6_5_rough") {
    const bool rough = name == "example_6_5_rough";
    ProblemSpec p = two_way_transport(rough);
    const double scale = inverse_integral(p.hamiltonian);
    return make(name, rough ? "two-way transport with a rough scalar density" : "two-way transport with h = 1",
                std::move(p), [scale](double t) {
                  const double tp = -t * scale;
                  return 0.5 * std::exp(kI * tp) - 1.0 + std::exp(-kI * tp);
                });
  }
  if (name == "scalar_transport_d1") {
    return make(name, "scalar transport with zero inflow", scalar_transport(),
                [](double) { return Complex{1.0, 0.0}; });
  }
  if (name == "lossless_reflection") {
    return make(name, "two-way transport with a lossless orthogonal coupling", lossless_reflection(),
                [](double t) { return Complex{2.0 * std::cos(t), 0.0}; });
  }
  const std::string random_prefix = "random_";
  if (name.rfind(random_prefix, 0) == 0) {
    const std::string tail = name.substr(random_prefix.size());
    if (tail.empty() || tail.find_first_not_of("0123456789") != std::string::npos) {
      throw Error(ErrorCode::NotFound, "unknown fixture: " + name);
    }
    return make(name, "seeded random problem", random_problem(std::stoull(tail)));
  }
  throw Error(ErrorCode::NotFound, "unknown fixture: " + name);
}

DiophantineFixture incommensurate_delays_probe() {
  DiophantineFixture f;
  f.t_of_k = [](long k) { return 4.0 * static_cast<double>(k) * pi / (1.0 + sqrt2); };
  f.closed_form_at_k = [](long k) {
    return 1.0 + std::cos((1.0 - sqrt2) / (1.0 + sqrt2) * 2.0 * static_cast<double>(k) * pi);
  };
  f.closed_form_det = [](double tp) { return 1.0 + 0.5 * (std::exp(kI * tp) + std::exp(kI * sqrt2 * tp)); };
  f.internal_t = [](double tp) { return -tp; };
  f.problem = incommensurate_delays();
  return f;
}

}  // namespace phstab
