#pragma once

// Fisher information for X = G(theta; S) + xi with G = Ktilde S per bin and
// xi complex Gaussian, independent across sensors and bins, with variance
// v_m = n_t sigma_m^2 on sensor m. Rows are whitened by 1/sqrt(v_m) first.
//
// Unknowns are the joint vector [S; theta] on its real embedding. The S block
// is block diagonal over bins, so the position bounds are normally read from
// the per-bin Schur complement
//   F_theta|S = c * sum_f Re( A(f)^H (I - Pi(f)) A(f) ),  A(f)_i = W dKtilde_i S(f),
// with Pi the projector onto W Ktilde and W = diag(1/sqrt(v_m)). Its inverse
// equals the theta block of the inverse of the full matrix.

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "wavelock/cost.hpp"
#include "wavelock/errors.hpp"
#include "wavelock/steering.hpp"

namespace wavelock {

/// Scale applied to Re(A^H R^-1 A).
///   literal:  1, the covariance used as written, R = n_t sigma^2 I.
///   circular: 2, real and imaginary parts each carry half the variance of a
///             circular complex Gaussian.
enum class FisherConvention { literal, circular };

inline double fisher_scale(FisherConvention conv) { return conv == FisherConvention::circular ? 2.0 : 1.0; }

/// 1/sqrt(v_m) per sensor.
inline Eigen::VectorXd whitening_weights(const Eigen::VectorXd& sensor_noise_variance, int sensors) {
  if (sensor_noise_variance.size() != sensors) throw ConfigError("fisher: need one noise variance per sensor");
  if (!(sensor_noise_variance.array() > 0.0).all() || !sensor_noise_variance.allFinite())
    throw ConfigError("fisher: noise variance must be positive");
  return sensor_noise_variance.cwiseSqrt().cwiseInverse();
}

struct FisherMatrix {
  Eigen::MatrixXd F;
  std::vector<std::string> names;
  int theta_offset = 0;  // row of theta_0; 0 for the reduced (S eliminated) form
  ParamLayout layout;
};

/// Full Fisher matrix over [Re/Im S_n(f) for every bin in use; theta].
/// Dense; intended for small instances and cross-checks.
inline FisherMatrix fisher_full(const Problem& problem, const Eigen::VectorXd& theta, const CMatrix& S,
                                const Eigen::VectorXd& sensor_noise_variance,
                                FisherConvention conv = FisherConvention::literal) {
  const SteeringModel model(problem.scenario(), problem.layout(), theta);
  const auto& bins = problem.bins();
  const int M = problem.sensors();
  const Eigen::VectorXd w = whitening_weights(sensor_noise_variance, M);
  const int N = problem.layout().sources;
  const int D = problem.layout().size();
  const auto B = static_cast<Eigen::Index>(bins.size());
  if (S.rows() != N || S.cols() != B) throw ConfigError("fisher: S must be N x (bins in use)");

  const Eigen::Index P = 2 * N * B + D;
  CMatrix A = CMatrix::Zero(M * B, P);
  for (Eigen::Index k = 0; k < B; ++k) {
    const int f = bins[static_cast<std::size_t>(k)];
    const CMatrix K = w.asDiagonal() * model.Ktilde(f);
    for (int n = 0; n < N; ++n) {
      A.block(k * M, 2 * (k * N + n), M, 1) = K.col(n);
      A.block(k * M, 2 * (k * N + n) + 1, M, 1) = cplx(0.0, 1.0) * K.col(n);
    }
    const CVector s = S.col(k);
    for (int i = 0; i < D; ++i) A.block(k * M, 2 * N * B + i, M, 1) = w.asDiagonal() * (model.dKtilde(f, i) * s);
  }
  FisherMatrix out;
  out.F = fisher_scale(conv) * (A.adjoint() * A).real();
  out.theta_offset = static_cast<int>(2 * N * B);
  out.layout = problem.layout();
  for (Eigen::Index k = 0; k < B; ++k)
    for (int n = 0; n < N; ++n) {
      const std::string tag = "S" + std::to_string(n) + "(" + std::to_string(bins[static_cast<std::size_t>(k)]) + ")";
      out.names.push_back("re_" + tag);
      out.names.push_back("im_" + tag);
    }
  for (int i = 0; i < D; ++i) out.names.push_back(problem.layout().name(i));
  return out;
}

/// Fisher matrix for theta with the source spectra eliminated bin by bin.
inline FisherMatrix fisher(const Problem& problem, const Eigen::VectorXd& theta, const CMatrix& S,
                           const Eigen::VectorXd& sensor_noise_variance,
                           FisherConvention conv = FisherConvention::literal) {
  const SteeringModel model(problem.scenario(), problem.layout(), theta);
  const auto& bins = problem.bins();
  const int M = problem.sensors();
  const Eigen::VectorXd w = whitening_weights(sensor_noise_variance, M);
  const int N = problem.layout().sources;
  const int D = problem.layout().size();
  const auto B = static_cast<Eigen::Index>(bins.size());
  if (S.rows() != N || S.cols() != B) throw ConfigError("fisher: S must be N x (bins in use)");

  std::vector<Eigen::MatrixXd> terms(static_cast<std::size_t>(B));
  CMatrix A(M, D);
  for (Eigen::Index k = 0; k < B; ++k) {
    const int f = bins[static_cast<std::size_t>(k)];
    const Projector proj = Projector::factor(w.asDiagonal() * model.Ktilde(f), f);
    const CVector s = S.col(k);
    for (int i = 0; i < D; ++i) A.col(i) = proj.reject(w.asDiagonal() * (model.dKtilde(f, i) * s));
    terms[static_cast<std::size_t>(k)] = (A.adjoint() * A).real();
  }
  // Pairwise reduction over bins keeps the sum order fixed.
  while (terms.size() > 1) {
    std::vector<Eigen::MatrixXd> next;
    next.reserve((terms.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < terms.size(); i += 2) next.push_back(terms[i] + terms[i + 1]);
    if (terms.size() % 2 == 1) next.push_back(terms.back());
    terms = std::move(next);
  }
  FisherMatrix out;
  out.F = terms.empty() ? Eigen::MatrixXd::Zero(D, D) : terms.front();
  out.F *= fisher_scale(conv);
  out.F = 0.5 * (out.F + out.F.transpose()).eval();
  out.layout = problem.layout();
  for (int i = 0; i < D; ++i) out.names.push_back(problem.layout().name(i));
  return out;
}

/// Same noise variance on every sensor.
inline FisherMatrix fisher(const Problem& problem, const Eigen::VectorXd& theta, const CMatrix& S,
                           double noise_variance_freq, FisherConvention conv = FisherConvention::literal) {
  return fisher(problem, theta, S, Eigen::VectorXd::Constant(problem.sensors(), noise_variance_freq), conv);
}

inline FisherMatrix fisher_full(const Problem& problem, const Eigen::VectorXd& theta, const CMatrix& S,
                                double noise_variance_freq, FisherConvention conv = FisherConvention::literal) {
  return fisher_full(problem, theta, S, Eigen::VectorXd::Constant(problem.sensors(), noise_variance_freq), conv);
}

struct PositionBound {
  double var_x = 0.0;
  double var_y = 0.0;
};

struct CrlbResult {
  std::vector<PositionBound> positions;
  bool singular = false;
  std::vector<Eigen::VectorXd> null_directions;  // eigenvectors of unidentifiable directions
};

/// Diagonal of F^-1 at the position indices. A singular F is pseudo-inverted
/// and its null directions are reported.
inline CrlbResult crlb_positions(const FisherMatrix& fm, double rel_tol = 1e-12) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(fm.F);
  if (eig.info() != Eigen::Success) throw NumericalError("crlb: eigendecomposition failed");
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const double top = std::max(ev.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  CrlbResult out;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > rel_tol * top) {
      inv(i) = 1.0 / ev(i);
    } else {
      out.singular = true;
      out.null_directions.push_back(eig.eigenvectors().col(i));
    }
  }
  const Eigen::MatrixXd& V = eig.eigenvectors();
  auto diag_at = [&](int idx) { return (V.row(idx).array().square() * inv.transpose().array()).sum(); };
  for (int n = 0; n < fm.layout.sources; ++n)
    out.positions.push_back({diag_at(fm.theta_offset + fm.layout.x(n)), diag_at(fm.theta_offset + fm.layout.y(n))});
  return out;
}

}  // namespace wavelock
