#pragma once

#include "phstab/problem.hpp"
#include "phstab/stability.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace phstab {

/// A named problem with its closed-form oracles where known.
struct Fixture {
  std::string name;
  std::string description;
  ProblemSpec problem;
  /// det T_t at internal time t, when a closed form is known.
  std::function<Complex(double)> det_oracle;
};

std::vector<std::string> list_fixtures();

/// Registered fixture by name; "random_<seed>" builds a seeded random problem.
Fixture fixture(const std::string& name);

/// P1 = I, H = diag(1, 1/sqrt 2), M = -1/2 [[1, 1], [1, 1]] on [0, 1].
ProblemSpec incommensurate_delays();
/// P1 = -I, H = diag(1 + theta, 1), M = 1/2 [[1, 1], [1, -1]] on [0, 1].
ProblemSpec mixed_delays(double theta);
/// P1 = diag(1, -1) with scalar h; rough selects a piecewise h with 40 pieces.
ProblemSpec two_way_transport(bool rough = false);
/// d = 1 transport u_t + u_x = 0 with u(a) = 0.
ProblemSpec scalar_transport();
/// P1 = diag(1, -1), H = I with an orthogonal boundary coupling: no energy leaves.
ProblemSpec lossless_reflection();

struct RandomProblemOptions {
  int max_dim = 4;
  int max_pieces = 6;
  double m_norm = 0.6;    // ||M|| of the generated boundary contraction
  double p0_scale = 0.0;  // ||P0|| of an added random skew part
};

ProblemSpec random_problem(std::uint64_t seed, const RandomProblemOptions& options = {});

/// Diophantine family of the two-frequency example: t_k = 4 k pi / (1 + sqrt 2).
DiophantineFixture incommensurate_delays_probe();

}  // namespace phstab
