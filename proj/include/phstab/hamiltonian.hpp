#pragma once

#include "phstab/matrix_core.hpp"

#include <filesystem>
#include <vector>

namespace phstab {

enum class DensityKind { Constant, Scalar, PiecewiseConstant, Sampled };

/// Piecewise-constant Hamiltonian density on [a, b].
///
/// Piece j covers [x_j, x_{j+1}); the last piece is closed on the right.
class HamiltonianDensity {
 public:
  /// H = 1 on [0, 1] in one dimension.
  HamiltonianDensity();

  static HamiltonianDensity constant(double a, double b, const Matrix& h0);
  static HamiltonianDensity scalar(std::vector<double> breakpoints, std::vector<double> values, int dim);
  static HamiltonianDensity piecewise(std::vector<double> breakpoints, std::vector<Matrix> pieces);
  /// Uniform cells on [a, b] with one value per cell.
  static HamiltonianDensity sampled(double a, double b, std::vector<Matrix> cells);

  DensityKind kind() const noexcept { return kind_; }
  double a() const noexcept { return breakpoints_.front(); }
  double b() const noexcept { return breakpoints_.back(); }
  int dim() const noexcept { return static_cast<int>(pieces_.front().rows()); }
  std::size_t num_pieces() const noexcept { return pieces_.size(); }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const Matrix& piece(std::size_t j) const { return pieces_.at(j); }
  const Matrix& piece_inverse(std::size_t j) const { return inverses_.at(j); }
  double piece_width(std::size_t j) const { return breakpoints_.at(j + 1) - breakpoints_.at(j); }
  double lower_bound() const noexcept { return m_; }
  double upper_bound() const noexcept { return mbound_; }

  std::size_t piece_index(double x) const;
  const Matrix& at(double x) const { return pieces_[piece_index(x)]; }

  /// True when every piece is a positive multiple of the identity.
  bool is_scalar() const;

  /// Same function with an additional breakpoint at x (no-op if x is already one).
  HamiltonianDensity refined(double x) const;
  /// Restriction to [lo, hi] within [a, b].
  HamiltonianDensity restricted(double lo, double hi) const;

 private:
  HamiltonianDensity(DensityKind kind, std::vector<double> breakpoints, std::vector<Matrix> pieces);

  DensityKind kind_;
  std::vector<double> breakpoints_;
  std::vector<Matrix> pieces_;
  std::vector<Matrix> inverses_;
  double m_ = 0.0;
  double mbound_ = 0.0;
};

struct DensityBounds {
  double m;
  double mbound;
};

DensityBounds bounds(const HamiltonianDensity& h);

/// Entrywise total variation of the represented piecewise-constant function.
double total_variation(const HamiltonianDensity& h);
/// Entrywise total variation of x -> H(x)^{-1}.
double inverse_total_variation(const HamiltonianDensity& h);

struct InvarianceResult {
  bool invariant;
  double max_residual;
};

/// Checks H_j[E+] within E+ via the off-diagonal block P- H_j P+.
InvarianceResult invariance_check(const HamiltonianDensity& h, const SpectralSplit& split);

Matrix inverse_at(const HamiltonianDensity& h, double x);

/// Reads a CSV grid with columns x, then the row-major upper triangle of H.
/// The x values are midpoints of uniform cells, which fixes a and b.
HamiltonianDensity load_density_csv(const std::filesystem::path& path);

}  // namespace phstab
