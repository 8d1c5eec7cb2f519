#include "phstab/semigroup_sim.hpp"

#include "phstab/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace phstab {

namespace {

/// Columns r with H P1 r = lambda r, split by the sign of lambda.
struct Characteristics {
  Matrix plus;
  Matrix minus;
};

Characteristics characteristics(const Matrix& h, const Matrix& p1) {
  const Matrix h_half = sym_function(h, [](double x) { return std::sqrt(x); });
  const Matrix s = h_half * p1 * h_half;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (s + s.transpose()));
  const Matrix r = h_half * eig.eigenvectors();
  const auto& lambda = eig.eigenvalues();
  const Eigen::Index d = h.rows();
  Eigen::Index n_minus = 0;
  while (n_minus < d && lambda(n_minus) < 0.0) ++n_minus;
  return {r.rightCols(d - n_minus), r.leftCols(n_minus)};
}

void add_block(std::vector<Eigen::Triplet<double>>& trips, Eigen::Index row, Eigen::Index col,
               const Matrix& block) {
  for (Eigen::Index j = 0; j < block.cols(); ++j) {
    for (Eigen::Index i = 0; i < block.rows(); ++i) {
      if (block(i, j) != 0.0) trips.emplace_back(row + i, col + j, block(i, j));
    }
  }
}

Vector cell(const Vector& u, int i, int d) { return u.segment(static_cast<Eigen::Index>(i) * d, d); }

}  // namespace

DiscreteGenerator discretize(const ProblemSpec& problem, int n_cells) {
  if (n_cells < 1) throw Error(ErrorCode::InvalidArgument, "n_cells must be positive");
  const auto& h = problem.hamiltonian;
  const int d = problem.dim();
  const double a = h.a();
  const double b = h.b();
  const double dx = (b - a) / n_cells;

  for (std::size_t j = 1; j + 1 < h.breakpoints().size(); ++j) {
    const double r = (h.breakpoints()[j] - a) / dx;
    if (std::abs(r - std::round(r)) * dx > 1e-9 * (b - a)) {
      std::ostringstream os;
      os << "breakpoint " << h.breakpoints()[j] << " is not on a cell edge for N = " << n_cells;
      throw Error(ErrorCode::GridMisaligned, os.str());
    }
  }

  DiscreteGenerator gen;
  gen.n_cells = n_cells;
  gen.dim = d;
  gen.a = a;
  gen.dx = dx;
  gen.p1 = problem.p1;
  gen.split = spectral_split(problem.p1);
  const Matrix w = boundary_matrix(problem);

  gen.h_cells.reserve(n_cells);
  std::vector<Characteristics> chars;
  chars.reserve(n_cells);
  for (int i = 0; i < n_cells; ++i) {
    gen.h_cells.push_back(h.at(gen.cell_center(i)));
    chars.push_back(characteristics(gen.h_cells.back(), problem.p1));
  }

  const Matrix id = Matrix::Identity(d, d);
  const Matrix p1_dx = problem.p1 / dx;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(n_cells) * d * d * 5);

  // Interfaces: [R^L_-, R^R_+] (alpha; beta) = w_R - w_L, w* = w_L + R^L_- alpha.
  gen.interface.reserve(n_cells > 0 ? n_cells - 1 : 0);
  for (int i = 0; i + 1 < n_cells; ++i) {
    const Matrix& rl = chars[i].minus;
    const Matrix& rr = chars[i + 1].plus;
    Matrix x(d, d);
    x << rl, rr;
    const Matrix x_inv = x.partialPivLu().inverse();
    const Matrix y = rl * x_inv.topRows(rl.cols());
    gen.interface.push_back(y);
    const Matrix left = p1_dx * (id - y) * gen.h_cells[i];
    const Matrix right = p1_dx * y * gen.h_cells[i + 1];
    const Eigen::Index li = static_cast<Eigen::Index>(i) * d;
    const Eigen::Index ri = li + d;
    add_block(trips, li, li, left);
    add_block(trips, li, ri, right);
    add_block(trips, ri, li, -left);
    add_block(trips, ri, ri, -right);
  }

  // Boundary: w(b) = w_N + R^N_- alpha, w(a) = w_1 + R^1_+ beta, W1 w(b) + W2 w(a) = 0.
  const Matrix& rn = chars.back().minus;
  const Matrix& r1 = chars.front().plus;
  const Matrix w1 = w.leftCols(d);
  const Matrix w2 = w.rightCols(d);
  Matrix bmat(d, d);
  bmat << w1 * rn, w2 * r1;
  Eigen::JacobiSVD<Matrix> svd(bmat);
  const auto& sv = svd.singularValues();
  if (sv.size() > 0 && !(sv(sv.size() - 1) > 1e-12 * std::max(1.0, sv(0)))) {
    throw Error(ErrorCode::BoundaryRowSingular,
                "boundary relation does not determine the incoming characteristics");
  }
  gen.m = w_to_mk(w, gen.split).m;
  const Matrix z = bmat.partialPivLu().inverse();
  const Matrix za = z.topRows(rn.cols());
  const Matrix zb = z.bottomRows(r1.cols());
  gen.b_from_last = id - rn * za * w1;
  gen.b_from_first = -rn * za * w2;
  gen.a_from_last = -r1 * zb * w1;
  gen.a_from_first = id - r1 * zb * w2;

  const Eigen::Index last = static_cast<Eigen::Index>(n_cells - 1) * d;
  add_block(trips, last, last, p1_dx * gen.b_from_last * gen.h_cells.back());
  add_block(trips, last, 0, p1_dx * gen.b_from_first * gen.h_cells.front());
  add_block(trips, 0, last, -p1_dx * gen.a_from_last * gen.h_cells.back());
  add_block(trips, 0, 0, -p1_dx * gen.a_from_first * gen.h_cells.front());

  if (problem.p0.size() > 0 && problem.p0.norm() > 0.0) {
    for (int i = 0; i < n_cells; ++i) {
      const Eigen::Index k = static_cast<Eigen::Index>(i) * d;
      add_block(trips, k, k, problem.p0 * gen.h_cells[i]);
    }
  }

  gen.matrix.resize(gen.size(), gen.size());
  gen.matrix.setFromTriplets(trips.begin(), trips.end());
  gen.matrix.makeCompressed();
  return gen;
}

double energy(const DiscreteGenerator& gen, const Vector& u) {
  if (u.size() != gen.size()) throw Error(ErrorCode::DimensionMismatch, "state size mismatch");
  double e = 0.0;
  for (int i = 0; i < gen.n_cells; ++i) {
    const Vector ui = cell(u, i, gen.dim);
    e += ui.dot(gen.h_cells[i] * ui);
  }
  return gen.dx * e;
}

EnergyBalance energy_balance(const DiscreteGenerator& gen, const Vector& u) {
  if (u.size() != gen.size()) throw Error(ErrorCode::DimensionMismatch, "state size mismatch");
  const int n = gen.n_cells;
  const int d = gen.dim;
  const Matrix& p1 = gen.p1;
  auto quad = [&p1](const Vector& v) { return v.dot(p1 * v); };

  std::vector<Vector> w(n);
  for (int i = 0; i < n; ++i) w[i] = gen.h_cells[i] * cell(u, i, d);

  double dissipation = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    const Matrix& y = gen.interface[i];
    const Vector star = w[i] + y * (w[i + 1] - w[i]);
    dissipation += quad(w[i + 1] - star) - quad(w[i] - star);
  }
  EnergyBalance out;
  out.trace_b = gen.b_from_last * w.back() + gen.b_from_first * w.front();
  out.trace_a = gen.a_from_last * w.back() + gen.a_from_first * w.front();
  dissipation += quad(w.front() - out.trace_a) - quad(w.back() - out.trace_b);

  out.boundary_flux = quad(out.trace_b) - quad(out.trace_a);
  out.numerical_dissipation = dissipation;
  out.rate = -out.boundary_flux - dissipation;
  return out;
}

EnergyTrajectory evolve(const DiscreteGenerator& gen, const Vector& u0, double t_final, double dt) {
  if (u0.size() != gen.size()) throw Error(ErrorCode::DimensionMismatch, "initial state size mismatch");
  if (!(t_final > 0.0) || !(dt > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "t_final and dt must be positive");
  }
  const auto steps = static_cast<long>(std::max(1.0, std::ceil(t_final / dt - 1e-9)));
  const double h = t_final / static_cast<double>(steps);

  SparseMatrix id(gen.size(), gen.size());
  id.setIdentity();
  const SparseMatrix lhs = id + (0.5 * h) * gen.matrix;
  const SparseMatrix rhs = id - (0.5 * h) * gen.matrix;
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(lhs);
  if (lu.info() != Eigen::Success) {
    throw Error(ErrorCode::SolveFailure, "implicit midpoint system is singular: " + lu.lastErrorMessage());
  }

  EnergyTrajectory traj;
  traj.times.reserve(steps + 1);
  traj.energy.reserve(steps + 1);
  Vector u = u0;
  traj.times.push_back(0.0);
  traj.energy.push_back(energy(gen, u));
  for (long k = 1; k <= steps; ++k) {
    u = lu.solve(rhs * u);
    if (lu.info() != Eigen::Success || !u.allFinite()) {
      throw Error(ErrorCode::SolveFailure, "implicit midpoint solve failed at step " + std::to_string(k));
    }
    traj.times.push_back(h * static_cast<double>(k));
    traj.energy.push_back(energy(gen, u));
  }
  traj.final_state = u;

  if (!(traj.energy.front() > 0.0)) {
    traj.fitted_rate = 0.0;
    traj.fit_r2 = 1.0;
    return traj;
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t k = traj.times.size() / 2; k < traj.times.size(); ++k) {
    if (traj.energy[k] > 0.0 && std::isfinite(traj.energy[k])) {
      xs.push_back(traj.times[k]);
      ys.push_back(std::log(traj.energy[k]));
    }
  }
  if (xs.size() < 2) {
    traj.fitted_rate = 0.0;
    traj.fit_r2 = 0.0;
    return traj;
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  traj.fitted_rate = sxy / sxx;
  traj.fit_r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return traj;
}

std::vector<std::complex<double>> generator_spectrum(const DiscreteGenerator& gen) {
  if (gen.size() > kDenseEigenBudget) {
    throw Error(ErrorCode::BudgetExceeded, "dense eigensolve limited to " +
                                               std::to_string(kDenseEigenBudget) + " unknowns, got " +
                                               std::to_string(gen.size()));
  }
  const Matrix dense = -Matrix(gen.matrix);
  Eigen::EigenSolver<Matrix> eig(dense, false);
  if (eig.info() != Eigen::Success) throw Error(ErrorCode::SolveFailure, "dense eigensolve did not converge");
  const auto& ev = eig.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

double eigen_abscissa(const DiscreteGenerator& gen) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& l : generator_spectrum(gen)) best = std::max(best, l.real());
  return best;
}

Eigenmode nearest_eigenmode(const DiscreteGenerator& gen, std::complex<double> shift, int iterations) {
  using CSparse = Eigen::SparseMatrix<std::complex<double>>;
  const CSparse neg_a = -gen.matrix.cast<std::complex<double>>();
  CSparse id(gen.size(), gen.size());
  id.setIdentity();
  Eigen::SparseLU<CSparse> lu;
  lu.compute(neg_a - shift * id);
  if (lu.info() != Eigen::Success) {
    // The shift sits on an eigenvalue; nudge it off.
    shift += std::complex<double>(1e-8, 1e-8) * std::max(1.0, std::abs(shift));
    lu.compute(neg_a - shift * id);
    if (lu.info() != Eigen::Success) throw Error(ErrorCode::SolveFailure, "shifted generator is singular");
  }
  Eigen::VectorXcd v(gen.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    v(k) = std::complex<double>(1.0 + 0.01 * static_cast<double>(k % 7), 0.001 * static_cast<double>(k % 5));
  }
  v.normalize();
  for (int it = 0; it < iterations; ++it) {
    v = lu.solve(v);
    if (lu.info() != Eigen::Success || !v.allFinite()) throw Error(ErrorCode::SolveFailure, "inverse iteration failed");
    v.normalize();
  }
  const Eigen::VectorXcd av = neg_a * v;
  Eigenmode mode;
  mode.lambda = v.dot(av);  // conjugates v, v has unit norm
  mode.residual = (av - mode.lambda * v).norm();
  mode.vector = std::move(v);
  return mode;
}

Vector bump_initial_state(const DiscreteGenerator& gen, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  Vector c(gen.dim);
  for (int k = 0; k < gen.dim; ++k) c(k) = weight(rng);
  const double length = gen.dx * gen.n_cells;
  const double centre = gen.a + 0.5 * length;
  const double width = 0.1 * length;
  Vector u(gen.size());
  for (int i = 0; i < gen.n_cells; ++i) {
    const double s = (gen.cell_center(i) - centre) / width;
    u.segment(static_cast<Eigen::Index>(i) * gen.dim, gen.dim) = std::exp(-s * s) * c;
  }
  return u;
}

void write_triplets(const DiscreteGenerator& gen, std::ostream& out) {
  out << gen.matrix.rows() << ' ' << gen.matrix.cols() << ' ' << gen.matrix.nonZeros() << '\n';
  out.precision(17);
  for (int k = 0; k < gen.matrix.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(gen.matrix, k); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
}

}  // namespace phstab
