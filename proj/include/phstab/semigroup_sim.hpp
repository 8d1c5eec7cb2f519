#pragma once

#include "phstab/problem.hpp"

#include <Eigen/Sparse>

#include <complex>
#include <cstdint>
#include <ostream>
#include <vector>

namespace phstab {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Upwind finite-volume discretisation of A = P1 d/dx (H .) + P0 H with the W boundary rows.
///
/// The semi-discrete evolution is du/dt = -A_h u on cell averages u_i in R^d.
struct DiscreteGenerator {
  int n_cells = 0;
  int dim = 0;
  double a = 0.0;
  double dx = 0.0;
  SparseMatrix matrix;            // A_h, (d N) x (d N)
  std::vector<Matrix> h_cells;    // H on each cell
  Matrix p1;
  Matrix m;                       // contraction form of the boundary condition
  SpectralSplit split;
  std::vector<Matrix> interface;  // w* = (I - Y) w_L + Y w_R
  Matrix b_from_last, b_from_first;  // w(b) = b_from_last w_N + b_from_first w_1
  Matrix a_from_last, a_from_first;  // w(a) = a_from_last w_N + a_from_first w_1

  Eigen::Index size() const { return static_cast<Eigen::Index>(n_cells) * dim; }
  double cell_center(int i) const { return a + (i + 0.5) * dx; }
};

DiscreteGenerator discretize(const ProblemSpec& problem, int n_cells);

/// E(u) = sum_i dx u_i^T H_i u_i.
double energy(const DiscreteGenerator& gen, const Vector& u);

/// Exact split of dE/dt = -2 <M A_h u, u> into boundary flux and upwind dissipation.
struct EnergyBalance {
  double boundary_flux = 0.0;         // ||tau||^2 - ||M tau||^2 from the discrete traces
  double numerical_dissipation = 0.0;  // nonnegative jump terms
  double rate = 0.0;                  // dE/dt
  Vector trace_b;
  Vector trace_a;
};

EnergyBalance energy_balance(const DiscreteGenerator& gen, const Vector& u);

struct EnergyTrajectory {
  std::vector<double> times;
  std::vector<double> energy;
  double fitted_rate = 0.0;  // slope of log E over the last half
  double fit_r2 = 0.0;
  Vector final_state;
};

/// Implicit midpoint stepping (I + dt/2 A_h) u_{n+1} = (I - dt/2 A_h) u_n.
EnergyTrajectory evolve(const DiscreteGenerator& gen, const Vector& u0, double t_final, double dt);

/// Largest real part over the eigenvalues of -A_h (dense; requires d N <= 4000).
double eigen_abscissa(const DiscreteGenerator& gen);

std::vector<std::complex<double>> generator_spectrum(const DiscreteGenerator& gen);

struct Eigenmode {
  std::complex<double> lambda;  // eigenvalue of -A_h
  Eigen::VectorXcd vector;
  double residual = 0.0;        // ||(-A_h - lambda) v|| / ||v||
};

/// Eigenpair of -A_h closest to shift, by shift-invert inverse iteration.
Eigenmode nearest_eigenmode(const DiscreteGenerator& gen, std::complex<double> shift,
                            int iterations = 50);

/// Smooth bump in every component, centred mid-interval; seed perturbs the component weights.
Vector bump_initial_state(const DiscreteGenerator& gen, std::uint64_t seed);

/// Writes "rows cols nnz" then one "i j value" line per stored entry.
void write_triplets(const DiscreteGenerator& gen, std::ostream& out);

inline constexpr Eigen::Index kDenseEigenBudget = 4000;

}  // namespace phstab
