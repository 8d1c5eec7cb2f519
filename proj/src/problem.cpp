#include "phstab/problem.hpp"

#include "phstab/error.hpp"

#include <sstream>

namespace phstab {

namespace {

std::string shape(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

}  // namespace

std::vector<std::string> validate(const ProblemSpec& spec) {
  std::vector<std::string> errors;
  const auto d = spec.p1.rows();
  if (d == 0 || spec.p1.cols() != d) {
    errors.push_back("p1 must be a non-empty square matrix, got " + shape(spec.p1));
    return errors;
  }
  const double sym = symmetry_residual(spec.p1);
  if (sym > kSymmetryTolerance * std::max(1.0, spec.p1.norm())) {
    std::ostringstream os;
    os << "p1 is not symmetric: ||P1 - P1^T|| = " << sym;
    errors.push_back(os.str());
  } else {
    try {
      spectral_split(spec.p1);
    } catch (const Error& e) {
      errors.push_back(std::string("p1: ") + e.what());
    }
  }
  if (spec.p0.rows() != d || spec.p0.cols() != d) {
    errors.push_back("p0 must be " + shape(spec.p1) + ", got " + shape(spec.p0));
  } else {
    const double skew = (spec.p0 + spec.p0.transpose()).norm();
    if (skew > 1e-12 * std::max(1.0, spec.p0.norm())) {
      std::ostringstream os;
      os << "p0 is not skew-symmetric: ||P0 + P0^T|| = " << skew;
      errors.push_back(os.str());
    }
  }
  if (spec.hamiltonian.dim() != d) {
    errors.push_back("hamiltonian dimension " + std::to_string(spec.hamiltonian.dim()) +
                     " differs from p1 dimension " + std::to_string(d));
  }
  if (const auto* wf = std::get_if<WForm>(&spec.boundary)) {
    if (wf->w.rows() != d || wf->w.cols() != 2 * d) {
      errors.push_back("boundary W must be " + std::to_string(d) + "x" + std::to_string(2 * d) +
                       ", got " + shape(wf->w));
    }
  } else {
    const auto& mk = std::get<MKForm>(spec.boundary);
    if (mk.m.rows() != d || mk.m.cols() != d) {
      errors.push_back("boundary M must be " + shape(spec.p1) + ", got " + shape(mk.m));
    } else if (norm2(mk.m) > 1.0 + 1e-10) {
      errors.push_back("boundary M is not a contraction: ||M|| = " + std::to_string(norm2(mk.m)));
    }
    if (mk.k && (mk.k->rows() != d || mk.k->cols() != d)) {
      errors.push_back("boundary K must be " + shape(spec.p1) + ", got " + shape(*mk.k));
    }
  }
  if (spec.sweep.t_max && !(*spec.sweep.t_max > 0.0)) errors.push_back("sweep.t_max must be positive");
  if (spec.sweep.n_samples < 2) errors.push_back("sweep.n_samples must be at least 2");
  if (spec.sweep.doubling_rounds < 0) errors.push_back("sweep.doubling_rounds must be >= 0");
  if (!(spec.sweep.evidence_drop > 0.0 && spec.sweep.evidence_drop < 1.0)) {
    errors.push_back("sweep.evidence_drop must lie in (0, 1)");
  }
  if (spec.sim) {
    if (spec.sim->n_cells < 1) errors.push_back("sim.n_cells must be positive");
    if (!(spec.sim->t_final > 0.0)) errors.push_back("sim.t_final must be positive");
    if (!(spec.sim->dt > 0.0)) errors.push_back("sim.dt must be positive");
  }
  return errors;
}

Matrix boundary_matrix(const ProblemSpec& spec) {
  return resolve_w(spec.boundary, spectral_split(spec.p1));
}

}  // namespace phstab
