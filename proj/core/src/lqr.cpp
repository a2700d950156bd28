#include "promptctl/lqr.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "promptctl/error.hpp"

namespace promptctl {

namespace {

std::string shape(const Eigen::MatrixXd& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

bool finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

bool symmetric(const Eigen::MatrixXd& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

}  // namespace

void LqrParams::validate() const {
  const auto n = a.rows();
  if (n == 0 || a.cols() != n) throw Error(ErrorKind::Schema, "LQR: A must be square, got " + shape(a));
  if (b.rows() != n || b.cols() == 0)
    throw Error(ErrorKind::Schema, "LQR: B must have " + std::to_string(n) + " rows, got " + shape(b));
  const auto m = b.cols();
  if (q.rows() != n || q.cols() != n)
    throw Error(ErrorKind::Schema, "LQR: Q must be " + shape(a) + ", got " + shape(q));
  if (r.rows() != m || r.cols() != m)
    throw Error(ErrorKind::Schema, "LQR: R must be " + std::to_string(m) + "x" + std::to_string(m) +
                                       ", got " + shape(r));
  if (!finite(a) || !finite(b) || !finite(q) || !finite(r))
    throw Error(ErrorKind::InvalidInput, "LQR: matrices must be finite");
  if (!symmetric(q) || !symmetric(r)) throw Error(ErrorKind::Parameter, "LQR: Q and R must be symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qe(q, Eigen::EigenvaluesOnly);
  if (qe.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, q.cwiseAbs().maxCoeff()))
    throw Error(ErrorKind::Parameter, "LQR: Q must be positive semi-definite");
  Eigen::LLT<Eigen::MatrixXd> rl(r);
  if (rl.info() != Eigen::Success) throw Error(ErrorKind::Parameter, "LQR: R must be positive definite");

  if (k && (k->rows() != m || k->cols() != n))
    throw Error(ErrorKind::Schema, "LQR: K must be " + std::to_string(m) + "x" + std::to_string(n));
}

RiccatiSolution solve_riccati(const LqrParams& params, double tol, int max_iter) {
  params.validate();
  if (!(tol > 0.0) || max_iter <= 0)
    throw Error(ErrorKind::Parameter, "LQR: tolerance and iteration budget must be positive");

  const Eigen::MatrixXd& a = params.a;
  const Eigen::MatrixXd& b = params.b;
  const Eigen::MatrixXd at = a.transpose();
  const Eigen::MatrixXd bt = b.transpose();

  auto gain_for = [&](const Eigen::MatrixXd& p) {
    const Eigen::MatrixXd s = params.r + bt * p * b;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(s);
    if (!lu.isInvertible()) throw Error(ErrorKind::Conditioning, "LQR: R + B'PB is singular");
    return Eigen::MatrixXd(lu.solve(bt * p * a));
  };

  RiccatiSolution sol;
  Eigen::MatrixXd p = params.q;
  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::MatrixXd k = gain_for(p);
    Eigen::MatrixXd next = params.q + at * p * a - at * p * b * k;
    next = 0.5 * (next + next.transpose());
    if (!next.allFinite()) break;
    const double delta = (next - p).cwiseAbs().maxCoeff() / std::max(1.0, next.cwiseAbs().maxCoeff());
    p = std::move(next);
    if (delta < tol) {
      sol.p = p;
      sol.k = gain_for(p);
      sol.iterations = it;
      if (spectral_radius(a - b * sol.k) >= 1.0)
        throw Error(ErrorKind::NonStabilizable, "LQR: closed loop A - BK is not Schur stable");
      return sol;
    }
  }
  throw Error(ErrorKind::NonStabilizable,
              "LQR: Riccati iteration did not converge within " + std::to_string(max_iter) +
                  " iterations; (A, B) is likely not stabilizable");
}

Eigen::MatrixXd lqr_gain(const LqrParams& params, double tol, int max_iter) {
  return solve_riccati(params, tol, max_iter).k;
}

Eigen::VectorXd lqr_step(const LqrParams& params, const Eigen::VectorXd& x) {
  if (!params.k) throw Error(ErrorKind::Configuration, "LQR: gain has not been computed");
  const auto& k = *params.k;
  if (x.size() != k.cols())
    throw Error(ErrorKind::Schema, "LQR: state has " + std::to_string(x.size()) +
                                       " entries, gain expects " + std::to_string(k.cols()));
  return -(k * x);
}

double lqr_cost(const LqrTrajectory& trajectory, const Eigen::MatrixXd& q, const Eigen::MatrixXd& r) {
  if (trajectory.empty()) throw Error(ErrorKind::InvalidInput, "LQR cost: empty trajectory");
  double cost = 0.0;
  for (const auto& [x, u] : trajectory) {
    if (x.size() != q.rows() || q.rows() != q.cols() || u.size() != r.rows() || r.rows() != r.cols())
      throw Error(ErrorKind::Schema, "LQR cost: trajectory is not conformable with Q and R");
    cost += x.dot(q * x) + u.dot(r * u);
  }
  return cost;
}

LqrTrajectory simulate_lqr(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& k,
                           const Eigen::VectorXd& x0, int steps) {
  LqrTrajectory out;
  out.reserve(static_cast<std::size_t>(std::max(steps, 0)));
  Eigen::VectorXd x = x0;
  for (int i = 0; i < steps; ++i) {
    Eigen::VectorXd u = -(k * x);
    out.emplace_back(x, u);
    x = a * x + b * u;
  }
  return out;
}

double spectral_radius(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::Schema, "spectral radius needs a square matrix");
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::Conditioning, "eigenvalue solve failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace promptctl
