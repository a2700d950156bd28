#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "promptctl/metrics.hpp"

namespace promptctl {

/**
 * @brief Discrete linear-quadratic regulator model and gain.
 *
 * x[k+1] = A x[k] + B u[k], u[k] = -K x[k], minimising sum(x'Qx + u'Ru).
 * The model has to be supplied by the caller; nothing here identifies it.
 */
struct LqrParams {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  Eigen::MatrixXd q;
  Eigen::MatrixXd r;
  std::optional<Eigen::MatrixXd> k;

  /// Throws Error(Schema) on non-conformable shapes, Error(Parameter) if Q is
  /// not symmetric positive semi-definite or R is not symmetric positive definite.
  void validate() const;
};

struct RiccatiSolution {
  Eigen::MatrixXd p;
  Eigen::MatrixXd k;
  int iterations = 0;
};

/// Fixed-point iteration on the discrete algebraic Riccati equation,
/// P <- Q + A'PA - A'PB (R + B'PB)^-1 B'PA, starting from P = Q and stopping
/// once the max-abs change drops below `tol` relative to max(1, max|P|).
///
/// Throws Error(NonStabilizable) if it does not settle within `max_iter`
/// iterations (or the closed loop is not Schur stable), Error(Conditioning) if
/// R + B'PB becomes singular.
[[nodiscard]] RiccatiSolution solve_riccati(const LqrParams& params, double tol, int max_iter);

/// K = (R + B'PB)^-1 B'PA at the Riccati fixed point.
[[nodiscard]] Eigen::MatrixXd lqr_gain(const LqrParams& params, double tol = 1e-12,
                                       int max_iter = 10000);

/// u = -K x. Throws Error(Configuration) if K has not been computed.
[[nodiscard]] Eigen::VectorXd lqr_step(const LqrParams& params, const Eigen::VectorXd& x);

using LqrTrajectory = std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>;

/// Finite-horizon sum of x'Qx + u'Ru over the trajectory.
[[nodiscard]] double lqr_cost(const LqrTrajectory& trajectory, const Eigen::MatrixXd& q,
                              const Eigen::MatrixXd& r);

/// Rolls out x[k+1] = A x + B u with u = -K x for `steps` steps from x0.
[[nodiscard]] LqrTrajectory simulate_lqr(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                         const Eigen::MatrixXd& k, const Eigen::VectorXd& x0,
                                         int steps);

[[nodiscard]] double spectral_radius(const Eigen::MatrixXd& m);

}  // namespace promptctl
