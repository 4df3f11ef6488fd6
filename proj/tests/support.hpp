#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "wavelock/harness.hpp"

namespace wavelock::testing {

/// Small random inverse problem with arbitrary (non-physical) data: M sensors
/// in two clusters, N sources, order L, P paths per (cluster, source), and
/// n_f chosen so that there are `bins` half-spectrum bins.
struct SmallInstance {
  Scenario scenario;
  SpectrumData data;
  Eigen::VectorXd theta;
};

inline SmallInstance random_instance(unsigned seed, int M = 5, int N = 2, int L = 2, int P = 1, int bins = 8) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> pos(0.0, 10.0), unit(-1.0, 1.0), gain(0.1, 0.5), del(0.0, 10.0);
  SmallInstance s;
  auto& sc = s.scenario;
  for (int m = 0; m < M; ++m) {
    sc.array.positions.emplace_back(pos(gen), pos(gen));
    sc.array.cluster_ids.push_back(m < (M + 1) / 2 ? 0 : 1);
  }
  for (int n = 0; n < N; ++n) {
    Point2 p;
    bool ok = false;
    while (!ok) {
      p = {pos(gen), pos(gen)};
      ok = true;
      for (const auto& q : sc.array.positions) ok = ok && (q - p).norm() > 0.5;
    }
    sc.sources.push_back({p, static_cast<std::uint64_t>(n + 1)});
  }
  sc.signal.n_f = 2 * (bins - 1);
  sc.signal.n_t = sc.signal.n_f - 2;
  sc.model.attenuation_order = L;
  sc.model.paths = P;
  sc.validate();

  s.data.n_f = sc.signal.n_f;
  s.data.X.resize(M, bins);
  for (int m = 0; m < M; ++m)
    for (int f = 0; f < bins; ++f) s.data.X(m, f) = {unit(gen), unit(gen)};

  const ParamLayout layout = ParamLayout::from(sc, sc.model);
  s.theta.resize(layout.size());
  for (int n = 0; n < N; ++n) {
    s.theta(layout.x(n)) = sc.sources[static_cast<std::size_t>(n)].position.x();
    s.theta(layout.y(n)) = sc.sources[static_cast<std::size_t>(n)].position.y();
  }
  for (int l = 0; l < L; ++l) s.theta(layout.beta(l)) = unit(gen);
  for (int c = 0; c < layout.clusters; ++c)
    for (int n = 0; n < N; ++n)
      for (int p = 0; p < P; ++p) {
        s.theta(layout.gamma(c, n, p)) = gain(gen);
        s.theta(layout.delay(c, n, p)) = del(gen);
      }
  return s;
}

/// Column-wise relative error max_i |a_i - b_i| / max(|b_i|, floor).
inline double max_column_rel_error(const CMatrix& a, const CMatrix& b, double floor = 1e-300) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.cols(); ++i)
    worst = std::max(worst, (a.col(i) - b.col(i)).norm() / std::max(b.col(i).norm(), floor));
  return worst;
}

/// Scenario with the noise switched off.
inline Scenario noiseless(Scenario sc) {
  sc.signal.snr_db.reset();
  return sc;
}

/// Projection residual of an explicit matrix, via a generic least-squares solve.
inline CVector oracle_residual(const CMatrix& K, const CVector& x) {
  const CVector s = K.completeOrthogonalDecomposition().solve(x);
  return x - K * s;
}

}  // namespace wavelock::testing
