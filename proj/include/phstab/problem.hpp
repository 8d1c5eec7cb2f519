#pragma once

#include "phstab/boundary.hpp"
#include "phstab/hamiltonian.hpp"
#include "phstab/propagator.hpp"

#include <optional>
#include <string>

namespace phstab {

struct SimParams {
  int n_cells = 200;
  double t_final = 10.0;
  double dt = 0.01;
};

/// One port-Hamiltonian system: operator data, boundary condition and run parameters.
struct ProblemSpec {
  std::string name;
  Matrix p1;
  Matrix p0;
  HamiltonianDensity hamiltonian;
  BoundarySpec boundary;
  SweepParams sweep;
  std::optional<SimParams> sim;

  int dim() const { return static_cast<int>(p1.rows()); }
  double a() const { return hamiltonian.a(); }
  double b() const { return hamiltonian.b(); }
};

/// Checks dimensional consistency, symmetry of P1 and skew-symmetry of P0.
/// Returns every problem found rather than the first one.
std::vector<std::string> validate(const ProblemSpec& spec);

/// W matrix of the problem's boundary condition.
Matrix boundary_matrix(const ProblemSpec& spec);

}  // namespace phstab
