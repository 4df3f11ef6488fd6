#pragma once

// Concentrated negative log-likelihood. For every bin the source spectra are
// eliminated by least squares, S(f) = Ktilde^+(f) X(f), leaving the projection
// residual Q(f) = (I - Ktilde Ktilde^+) X(f). The objective is sum_f |Q(f)|^2
// over bins 0..n_f/2, unweighted.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "wavelock/errors.hpp"
#include "wavelock/layout.hpp"
#include "wavelock/scene.hpp"
#include "wavelock/steering.hpp"
#include "wavelock/synth.hpp"

namespace wavelock {

/// Pairwise summation; the result depends only on the input order.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/// Thin SVD of a tall M x N steering matrix, with rank check
/// sigma_min > max(M, N) * eps * sigma_max.
struct Projector {
  CMatrix U;              // M x N, orthonormal columns
  Eigen::VectorXd sigma;  // N singular values, descending
  CMatrix V;              // N x N

  static Projector factor(const CMatrix& K, int bin) {
    Projector p;
    const Eigen::Index M = K.rows();
    const Eigen::Index N = K.cols();
    if (N == 1) {
      const double nrm = K.col(0).norm();
      if (!(nrm > 0.0) || !std::isfinite(nrm)) throw SingularModelError(bin);
      p.U = K / nrm;
      p.sigma = Eigen::VectorXd::Constant(1, nrm);
      p.V = CMatrix::Identity(1, 1);
      return p;
    }
    Eigen::JacobiSVD<CMatrix> svd(K, Eigen::ComputeThinU | Eigen::ComputeThinV);
    p.sigma = svd.singularValues();
    const double tol = static_cast<double>(std::max(M, N)) * std::numeric_limits<double>::epsilon() *
                       p.sigma(0);
    if (!std::isfinite(p.sigma(0)) || !(p.sigma(0) > 0.0) || !(p.sigma(N - 1) > tol))
      throw SingularModelError(bin);
    p.U = svd.matrixU();
    p.V = svd.matrixV();
    return p;
  }

  /// Ktilde^+ x = V diag(1/sigma) U^H x
  CVector solve(const CVector& x) const {
    CVector t = U.adjoint() * x;
    for (Eigen::Index i = 0; i < t.size(); ++i) t(i) /= sigma(i);
    return V * t;
  }

  /// (Ktilde^+)^H w = U diag(1/sigma) V^H w
  CVector pinv_adjoint_apply(const CVector& w) const {
    CVector t = V.adjoint() * w;
    for (Eigen::Index i = 0; i < t.size(); ++i) t(i) /= sigma(i);
    return U * t;
  }

  /// (I - P) x
  CVector reject(const CVector& x) const { return x - U * (U.adjoint() * x); }

  CMatrix pinv() const {
    CMatrix out = V * sigma.cwiseInverse().asDiagonal() * U.adjoint();
    return out;
  }
};

/// Inverse problem: scenario geometry and signal settings, observed spectra,
/// and the chosen model (layout and bin subset).
class Problem {
 public:
  Problem(Scenario scenario, SpectrumData data, ModelConfig model)
      : scenario_(std::move(scenario)), data_(std::move(data)), model_(model) {
    if (data_.sensors() != static_cast<int>(scenario_.array.size()))
      throw ConfigError("spectrum data sensor count does not match the scenario");
    if (data_.n_f != scenario_.signal.n_f || data_.bins() != scenario_.signal.bin_count())
      throw ConfigError("spectrum data bin count does not match the scenario");
    layout_ = ParamLayout::from(scenario_, model_);
    for (int f = 0; f < scenario_.signal.bin_count(); ++f) {
      const double hz = scenario_.signal.bin_frequency(f);
      if (!model_.band_only || (hz >= scenario_.signal.band_low() && hz <= scenario_.signal.band_high()))
        bins_.push_back(f);
    }
    data_energy_ = 0.0;
    for (int f : bins_) data_energy_ += data_.X.col(f).squaredNorm();
  }

  const Scenario& scenario() const { return scenario_; }
  const SpectrumData& data() const { return data_; }
  const ModelConfig& model() const { return model_; }
  const ParamLayout& layout() const { return layout_; }
  const std::vector<int>& bins() const { return bins_; }
  int sensors() const { return data_.sensors(); }
  /// |X|^2 over the bins in use.
  double data_energy() const { return data_energy_; }

 private:
  Scenario scenario_;
  SpectrumData data_;
  ModelConfig model_;
  ParamLayout layout_;
  std::vector<int> bins_;
  double data_energy_ = 0.0;
};

struct BinFactor {
  int bin = 0;
  CMatrix K;       // Ktilde(f)
  Projector proj;
  CVector s_hat;   // Ktilde^+ X
};

struct ResidualEval {
  CMatrix Q;       // M x (bins in use)
  CMatrix S_hat;   // N x (bins in use)
  double cost = 0.0;
  std::vector<BinFactor> factors;  // filled on request
};

/// Q(f) and the cost for every bin in use; optionally keeps per-bin factors
/// so the Jacobian can reuse them.
inline ResidualEval residual(const Problem& problem, const Eigen::VectorXd& theta, bool keep_factors = false) {
  const SteeringModel model(problem.scenario(), problem.layout(), theta);
  const auto& bins = problem.bins();
  const int M = problem.sensors();
  const int N = problem.layout().sources;
  ResidualEval out;
  out.Q.resize(M, static_cast<Eigen::Index>(bins.size()));
  out.S_hat.resize(N, static_cast<Eigen::Index>(bins.size()));
  if (keep_factors) out.factors.reserve(bins.size());
  std::vector<double> per_bin(bins.size());
  CMatrix K(M, N);
  for (std::size_t k = 0; k < bins.size(); ++k) {
    const int f = bins[k];
    model.Ktilde_into(f, K);
    Projector proj = Projector::factor(K, f);
    const CVector x = problem.data().X.col(f);
    const CVector s = proj.solve(x);
    const CVector q = proj.reject(x);
    out.Q.col(static_cast<Eigen::Index>(k)) = q;
    out.S_hat.col(static_cast<Eigen::Index>(k)) = s;
    per_bin[k] = q.squaredNorm();
    if (keep_factors) out.factors.push_back({f, K, std::move(proj), s});
  }
  out.cost = pairwise_sum(per_bin);
  return out;
}

/// Cost only; does not store residual columns.
inline double cost(const Problem& problem, const Eigen::VectorXd& theta) {
  const SteeringModel model(problem.scenario(), problem.layout(), theta);
  const auto& bins = problem.bins();
  const int M = problem.sensors();
  const int N = problem.layout().sources;
  std::vector<double> per_bin(bins.size());
  CMatrix K(M, N);
  CVector x(M);
  for (std::size_t k = 0; k < bins.size(); ++k) {
    const int f = bins[k];
    model.Ktilde_into(f, K);
    x = problem.data().X.col(f);
    if (N == 1) {
      // |x|^2 - |k^H x|^2 / |k|^2, evaluated as the rejection norm for accuracy
      const double kk = K.col(0).squaredNorm();
      if (!(kk > 0.0) || !std::isfinite(kk)) throw SingularModelError(f);
      const cplx c = K.col(0).dot(x) / kk;
      per_bin[k] = (x - c * K.col(0)).squaredNorm();
    } else {
      const Projector proj = Projector::factor(K, f);
      per_bin[k] = proj.reject(x).squaredNorm();
    }
  }
  return pairwise_sum(per_bin);
}

/// Recovered source spectra S_hat(f) = Ktilde^+(f) X(f), N x (bins in use).
inline CMatrix recover_spectrum(const Problem& problem, const Eigen::VectorXd& theta) {
  return residual(problem, theta).S_hat;
}

}  // namespace wavelock
