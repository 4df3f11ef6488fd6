#pragma once

// Closed-form Jacobian of the projection residual.
//
// With Pi = Ktilde Ktilde^+ and P = ((Ktilde^+)^H Ktilde^H - I) dKtilde Ktilde^+,
//   dQ(f)/dtheta = (P + P^H) X(f) = -dPi/dtheta X(f)
//                = -[(I - Pi) dKtilde s_hat + (Ktilde^+)^H dKtilde^H Q(f)].
// The second line is what the assembly evaluates; the explicit P + P^H form
// is kept for verification.

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "wavelock/cost.hpp"
#include "wavelock/steering.hpp"

namespace wavelock {

struct JacobianBlock {
  CMatrix complex;       // (bins * M) x D, bin-major rows
  Eigen::MatrixXd real;  // [Re; Im], 2 (bins * M) x D

  Eigen::Index cols() const { return complex.cols(); }
};

inline CMatrix dK_dbeta(const SteeringModel& model, int f, int l) { return model.dK_dbeta(f, l); }
inline CMatrix dK_dx(const SteeringModel& model, int f, int n) { return model.dK_dx(f, n); }
inline CMatrix dK_dy(const SteeringModel& model, int f, int n) { return model.dK_dy(f, n); }
inline CMatrix dH_dgamma(const SteeringModel& model, int f, int c, int n, int p) {
  return model.dH_dgamma(f, c, n, p);
}
inline CMatrix dH_dtau(const SteeringModel& model, int f, int c, int n, int p) {
  return model.dH_dtau(f, c, n, p);
}

/// P(f) for one parameter: ((K^+)^H K^H - I) dK K^+.
inline CMatrix projector_sensitivity(const CMatrix& K, const CMatrix& dK) {
  const CMatrix Kp = K.completeOrthogonalDecomposition().pseudoInverse();
  const CMatrix I = CMatrix::Identity(K.rows(), K.rows());
  return (Kp.adjoint() * K.adjoint() - I) * dK * Kp;
}

/// Stacks a complex vector as [Re; Im].
inline Eigen::VectorXd real_embedding(const CMatrix& Q) {
  const Eigen::Index n = Q.size();
  Eigen::VectorXd r(2 * n);
  const auto flat = Q.reshaped();
  r.head(n) = flat.real();
  r.tail(n) = flat.imag();
  return r;
}

/// Jacobian of the stacked residual, reusing the factors of `eval` (which
/// must have been computed with keep_factors at the same theta).
inline JacobianBlock dQ_dtheta(const Problem& problem, const Eigen::VectorXd& theta, const ResidualEval& eval) {
  if (eval.factors.size() != problem.bins().size())
    throw std::invalid_argument("dQ_dtheta: residual evaluation lacks per-bin factors");
  const SteeringModel model(problem.scenario(), problem.layout(), theta);
  const int M = problem.sensors();
  const int D = problem.layout().size();
  const auto B = static_cast<Eigen::Index>(eval.factors.size());
  JacobianBlock J;
  J.complex.resize(B * M, D);
  for (Eigen::Index k = 0; k < B; ++k) {
    const BinFactor& bf = eval.factors[static_cast<std::size_t>(k)];
    const CVector q = eval.Q.col(k);
    for (int i = 0; i < D; ++i) {
      const CMatrix dK = model.dKtilde(bf.bin, i);
      const CVector col = -(bf.proj.reject(dK * bf.s_hat) + bf.proj.pinv_adjoint_apply(dK.adjoint() * q));
      J.complex.block(k * M, i, M, 1) = col;
    }
  }
  J.real.resize(2 * B * M, D);
  J.real.topRows(B * M) = J.complex.real();
  J.real.bottomRows(B * M) = J.complex.imag();
  return J;
}

inline JacobianBlock dQ_dtheta(const Problem& problem, const Eigen::VectorXd& theta) {
  return dQ_dtheta(problem, theta, residual(problem, theta, true));
}

/// Central-difference Jacobian of the stacked complex residual, relative step
/// h_i = rel_step * (1 + |theta_i|).
inline CMatrix finite_difference_jacobian(const std::function<CMatrix(const Eigen::VectorXd&)>& fn,
                                          const Eigen::VectorXd& theta, double rel_step = 1e-6) {
  const CMatrix base = fn(theta);
  CMatrix J(base.size(), theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double h = rel_step * (1.0 + std::abs(theta(i)));
    Eigen::VectorXd tp = theta, tm = theta;
    tp(i) += h;
    tm(i) -= h;
    const CMatrix d = (fn(tp) - fn(tm)) / (2.0 * h);
    J.col(i) = d.reshaped();
  }
  return J;
}

}  // namespace wavelock
