#pragma once

// Per-bin steering matrices for a fixed parameter vector:
//   R_l(f)_{m,n} = rho^-l e^{-j kappa f rho},  kappa = 2 pi N_s / (n_f v)
//   K(f)         = R_1(f) + sum_l beta_l R_{l+1}(f)
//   H(f)_{m,n}   = sum_p gamma_{c(m),n,p} e^{-j 2 pi f delay_{c(m),n,p} / n_f}
//   Ktilde(f)    = K(f) + H(f)
// and their derivatives with respect to each component of theta.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "wavelock/errors.hpp"
#include "wavelock/layout.hpp"
#include "wavelock/scene.hpp"

namespace wavelock {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

class SteeringModel {
 public:
  SteeringModel(const Scenario& scenario, const ParamLayout& layout, const Eigen::VectorXd& theta)
      : scenario_(&scenario), layout_(layout), params_(decode(layout, theta)) {
    const auto& sensors = scenario.array.positions;
    const int M = static_cast<int>(sensors.size());
    const int N = layout.sources;
    const auto& sig = scenario.signal;
    kappa_ = 2.0 * std::numbers::pi * sig.sample_rate / (sig.n_f * sig.propagation_speed);
    rho_.resize(M, N);
    dx_.resize(M, N);
    dy_.resize(M, N);
    amp_.resize(M, N);
    slope_.resize(M, N);
    for (int m = 0; m < M; ++m) {
      for (int n = 0; n < N; ++n) {
        const Point2& s = params_.positions[static_cast<std::size_t>(n)];
        const Point2 d = sensors[static_cast<std::size_t>(m)] - s;
        const double rho = d.norm();
        if (!(rho > 0.0) || !std::isfinite(rho)) throw DegenerateGeometryError(m, n);
        rho_(m, n) = rho;
        dx_(m, n) = d.x();
        dy_(m, n) = d.y();
        if (layout.delay_only) {
          amp_(m, n) = 1.0;
          slope_(m, n) = 0.0;
        } else {
          // a = sum_l w_l rho^-l, slope = -da/drho = sum_l w_l l rho^-(l+1)
          const double inv = 1.0 / rho;
          double p = inv;
          double a = inv;
          double b = inv * inv;
          for (int l = 0; l < layout.order; ++l) {
            p *= inv;
            const double w = params_.beta[static_cast<std::size_t>(l)];
            a += w * p;
            b += w * (l + 2) * p * inv;
          }
          amp_(m, n) = a;
          slope_(m, n) = b;
        }
      }
    }
  }

  int sensors() const { return static_cast<int>(rho_.rows()); }
  int sources() const { return static_cast<int>(rho_.cols()); }
  const ParamLayout& layout() const { return layout_; }
  const DecodedParams& params() const { return params_; }
  const Eigen::MatrixXd& rho() const { return rho_; }
  const Eigen::MatrixXd& amplitude() const { return amp_; }
  double kappa() const { return kappa_; }
  int n_f() const { return scenario_->signal.n_f; }
  int cluster_of(int m) const { return scenario_->array.cluster_ids[static_cast<std::size_t>(m)]; }

  cplx phase(int m, int n, int f) const { return std::polar(1.0, -kappa_ * f * rho_(m, n)); }

  /// R_l(f) for 1 <= l (normalized indexing runs up to L+1).
  CMatrix R(int l, int f) const {
    if (l < 1) throw std::out_of_range("R: power index must be >= 1");
    CMatrix out(sensors(), sources());
    for (int n = 0; n < sources(); ++n)
      for (int m = 0; m < sensors(); ++m) out(m, n) = std::pow(rho_(m, n), -l) * phase(m, n, f);
    return out;
  }

  CMatrix K(int f) const {
    CMatrix out(sensors(), sources());
    for (int n = 0; n < sources(); ++n)
      for (int m = 0; m < sensors(); ++m) out(m, n) = amp_(m, n) * phase(m, n, f);
    return out;
  }

  CMatrix H(int f) const {
    CMatrix out = CMatrix::Zero(sensors(), sources());
    add_H(f, out);
    return out;
  }

  CMatrix Ktilde(int f) const {
    CMatrix out(sensors(), sources());
    Ktilde_into(f, out);
    return out;
  }

  /// Writes Ktilde(f) into a preallocated M x N matrix.
  void Ktilde_into(int f, CMatrix& out) const {
    for (int n = 0; n < sources(); ++n)
      for (int m = 0; m < sensors(); ++m) out(m, n) = amp_(m, n) * phase(m, n, f);
    add_H(f, out);
  }

  // -- derivatives of Ktilde(f) ------------------------------------------------

  /// d K / d beta_l (1-based l) = R_{l+1}(f).
  CMatrix dK_dbeta(int f, int l) const {
    if (l < 1 || l > layout_.order) throw std::out_of_range("dK_dbeta: coefficient index out of range");
    return R(l + 1, f);
  }

  CMatrix dK_dx(int f, int n) const { return dK_dcoord(f, n, dx_); }
  CMatrix dK_dy(int f, int n) const { return dK_dcoord(f, n, dy_); }

  CMatrix dH_dgamma(int f, int c, int n, int p) const {
    check_path(c, n, p);
    CMatrix out = CMatrix::Zero(sensors(), sources());
    const cplx e = path_phase(f, c, n, p);
    for (int m = 0; m < sensors(); ++m)
      if (cluster_of(m) == c) out(m, n) = e;
    return out;
  }

  CMatrix dH_dtau(int f, int c, int n, int p) const {
    check_path(c, n, p);
    CMatrix out = CMatrix::Zero(sensors(), sources());
    const double g = params_.gamma[static_cast<std::size_t>(layout_.path(c, n, p))];
    const cplx e = cplx(0.0, -2.0 * std::numbers::pi * f / n_f()) * g * path_phase(f, c, n, p);
    for (int m = 0; m < sensors(); ++m)
      if (cluster_of(m) == c) out(m, n) = e;
    return out;
  }

  /// d Ktilde(f) / d theta_i for any layout index.
  CMatrix dKtilde(int f, int i) const {
    const auto s = layout_.slot(i);
    switch (s.kind) {
      case ParamKind::x: return dK_dx(f, s.a);
      case ParamKind::y: return dK_dy(f, s.a);
      case ParamKind::beta: return dK_dbeta(f, s.a + 1);
      case ParamKind::gamma: return dH_dgamma(f, s.a, s.b, s.c);
      case ParamKind::delay: return dH_dtau(f, s.a, s.b, s.c);
    }
    return {};
  }

 private:
  cplx path_phase(int f, int c, int n, int p) const {
    const double tau = params_.delay[static_cast<std::size_t>(layout_.path(c, n, p))];
    return std::polar(1.0, -2.0 * std::numbers::pi * f * tau / n_f());
  }

  void check_path(int c, int n, int p) const {
    if (c < 0 || c >= layout_.clusters || n < 0 || n >= layout_.sources || p < 0 || p >= layout_.paths)
      throw std::out_of_range("multipath key out of range");
  }

  void add_H(int f, CMatrix& out) const {
    if (layout_.paths == 0) return;
    for (int c = 0; c < layout_.clusters; ++c) {
      for (int n = 0; n < sources(); ++n) {
        cplx h{0.0, 0.0};
        for (int p = 0; p < layout_.paths; ++p)
          h += params_.gamma[static_cast<std::size_t>(layout_.path(c, n, p))] * path_phase(f, c, n, p);
        for (int m = 0; m < sensors(); ++m)
          if (cluster_of(m) == c) out(m, n) += h;
      }
    }
  }

  // d/dx_S of a(rho) e^{-j kappa f rho} = (d/rho) (slope + j kappa f a) e^{...}, d = x_M - x_S
  CMatrix dK_dcoord(int f, int n, const Eigen::MatrixXd& delta) const {
    if (n < 0 || n >= sources()) throw std::out_of_range("source index out of range");
    CMatrix out = CMatrix::Zero(sensors(), sources());
    for (int m = 0; m < sensors(); ++m) {
      const double r = rho_(m, n);
      out(m, n) = (delta(m, n) / r) * cplx(slope_(m, n), kappa_ * f * amp_(m, n)) * phase(m, n, f);
    }
    return out;
  }

  const Scenario* scenario_;
  ParamLayout layout_;
  DecodedParams params_;
  double kappa_ = 0.0;
  Eigen::MatrixXd rho_, dx_, dy_, amp_, slope_;
};

// Free-function views matching the module operations.

inline std::vector<CMatrix> build_R(const Scenario& sc, const ParamLayout& layout,
                                    const Eigen::VectorXd& theta, int f) {
  const SteeringModel model(sc, layout, theta);
  std::vector<CMatrix> out;
  for (int l = 1; l <= layout.order + 1; ++l) out.push_back(model.R(l, f));
  return out;
}

inline CMatrix build_K(const Scenario& sc, const ParamLayout& layout, const Eigen::VectorXd& theta, int f) {
  return SteeringModel(sc, layout, theta).K(f);
}

inline CMatrix build_H(const Scenario& sc, const ParamLayout& layout, const Eigen::VectorXd& theta, int f) {
  return SteeringModel(sc, layout, theta).H(f);
}

inline CMatrix build_Ktilde(const Scenario& sc, const ParamLayout& layout, const Eigen::VectorXd& theta,
                            int f) {
  return SteeringModel(sc, layout, theta).Ktilde(f);
}

}  // namespace wavelock
