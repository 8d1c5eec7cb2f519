#pragma once

#include "phstab/matrix_core.hpp"

#include <optional>
#include <variant>

namespace phstab {

/// Boundary condition W ((Hu)(b); (Hu)(a)) = 0 given directly.
struct WForm {
  Matrix w;  // d x 2d
};

/// Boundary condition given through a contraction M and an invertible K (default identity).
struct MKForm {
  Matrix m;
  std::optional<Matrix> k;
};

using BoundarySpec = std::variant<WForm, MKForm>;

enum class Definiteness { StrictlyPositive, PositiveSemidefinite, Indefinite };

struct DissipativityReport {
  Matrix gram;
  Definiteness classification = Definiteness::Indefinite;
  double min_eigenvalue = 0.0;
  std::optional<double> m_norm;  // absent when the gram matrix is indefinite
};

struct ContractionForm {
  Matrix k;
  Matrix m;
};

enum class Endpoint { A, B };

/// Largest admissible c in the endpoint matrix inequality, or unbounded.
struct DissipationRate {
  bool unbounded = false;
  double value = 0.0;

  bool positive(double tol = 1e-10) const { return unbounded || value > tol; }
};

inline constexpr double kRankTolerance = 1e-10;

bool has_full_row_rank(const Matrix& w);

DissipativityReport dissipativity_check(const Matrix& w, const Matrix& p1);

ContractionForm w_to_mk(const Matrix& w, const SpectralSplit& split);

Matrix mk_to_w(const Matrix& m, const Matrix& k, const SpectralSplit& split);

DissipationRate dissipation_rate(const Matrix& m, const SpectralSplit& split, Endpoint endpoint);

/// Half the boundary energy flux 1/2 (||tau||^2 - ||M tau||^2) for admissible traces.
double boundary_energy_rate(const Vector& trace_b, const Vector& trace_a, const Matrix& m,
                            const SpectralSplit& split);

/// W for either boundary form.
Matrix resolve_w(const BoundarySpec& spec, const SpectralSplit& split);

}  // namespace phstab
