#pragma once

#include "phstab/hamiltonian.hpp"
#include "phstab/matrix_core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace phstab {

struct PropagatorResult {
  double t = 0.0;
  CMatrix phi_b;
  double sup_norm = 0.0;
  double inverse_residual = 0.0;
};

/// Fundamental matrix of u' = -P1^{-1}(i t H^{-1} + P0) u, u(a) = I, for a fixed density.
///
/// Per-piece generators are precomputed so repeated evaluation over a t sweep stays cheap.
class Propagator {
 public:
  Propagator(HamiltonianDensity h, const Matrix& p1, const Matrix& p0);

  /// Phi_t(b) together with the sup norm over breakpoints and interior_points per piece.
  PropagatorResult evaluate(double t, int interior_points = 8) const;
  /// Phi_t(b) only.
  CMatrix phi_b(double t) const;

  const HamiltonianDensity& density() const noexcept { return h_; }
  const Matrix& p1() const noexcept { return p1_; }
  const Matrix& p0() const noexcept { return p0_; }

 private:
  HamiltonianDensity h_;
  Matrix p1_;
  Matrix p0_;
  Matrix p1_inv_;
  std::vector<Matrix> phase_;  // P1^{-1} H_j^{-1}
  Matrix drift_;               // P1^{-1} P0
};

PropagatorResult fundamental_matrix(const HamiltonianDensity& h, const Matrix& p1, const Matrix& p0,
                                    double t);

/// ||Phi^{-1} - P1^{-1} Phi^* P1|| at x = b.
double inverse_identity_residual(const PropagatorResult& result, const Matrix& p1);

/// Throws InvalidP0 unless P0 is skew-symmetric within 1e-12 relative.
void require_skew(const Matrix& p0);

struct SweepParams {
  std::optional<double> t_max;
  int n_samples = 2048;
  int doubling_rounds = 2;
  double evidence_drop = 0.2;
  unsigned threads = 0;  // 0 selects the hardware concurrency
};

/// t_max such that the fastest phase (b - a) t ||P1^{-1}|| / m completes 100 rotations.
double default_t_max(const HamiltonianDensity& h, const Matrix& p1);

/// Sorted mix of n/2 linear samples on [0, t_max] and n/2 log samples on [1e-3 t_max, t_max].
std::vector<double> sweep_grid(double t_max, int n_samples);

/// Linear samples on (lo, hi] at the density of the base grid's linear half.
std::vector<double> extension_grid(double lo, double hi, double t_max, int n_samples);

enum class BCertificate { Scalar, InvariantSubspace, BoundedVariation, None };

std::string to_string(BCertificate c);

struct ConditionBReport {
  BCertificate certified = BCertificate::None;
  std::optional<double> certified_bound;
  std::vector<BCertificate> also_satisfied;
  double swept_sup = 0.0;
  double swept_sup_doubled = 0.0;
  bool growth_flag = false;
  double t_max = 0.0;
  double total_variation = 0.0;
  double inverse_total_variation = 0.0;
  double gronwall_factor = 1.0;
  std::string note;
};

ConditionBReport condition_b_estimate(const HamiltonianDensity& h, const Matrix& p1,
                                      const Matrix& p0, const SweepParams& sweep);

/// Bound on sup_t ||Phi_t||_inf from a squared BV bound, before any P0 correction.
double bv_bound(const HamiltonianDensity& h);

/// exp((b - a) B^2 ||P1|| ||P1^{-1}||^2 ||P0||).
double gronwall_factor(double interval_length, double bound, const Matrix& p1, const Matrix& p0);

struct P0Probe {
  double sup_with_p0 = 0.0;
  double sup_without_p0 = 0.0;
};

P0Probe p0_invariance_probe(const HamiltonianDensity& h, const Matrix& p1, const Matrix& p0,
                            const SweepParams& sweep);

/// max over the grid of sup_x ||Phi_t(x)||.
double swept_sup(const Propagator& prop, const std::vector<double>& ts, unsigned threads);

}  // namespace phstab
