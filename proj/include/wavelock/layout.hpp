#pragma once

// Layout of the flattened unknown vector theta:
//   [x_1..x_N, y_1..y_N, beta_1..beta_L,
//    gamma_(c,n,p) in lexicographic (cluster, source, path) order,
//    delay_(c,n,p) in the same order]

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wavelock/errors.hpp"
#include "wavelock/scene.hpp"

namespace wavelock {

enum class ParamKind { x, y, beta, gamma, delay };

struct ParamLayout {
  int sources = 1;
  int order = 0;     // L
  int clusters = 1;  // C
  int paths = 0;     // P per (cluster, source)
  bool delay_only = false;

  static ParamLayout from(const Scenario& scenario, const ModelConfig& model) {
    ParamLayout l;
    l.sources = static_cast<int>(scenario.sources.size());
    l.clusters = scenario.array.cluster_count();
    l.delay_only = model.delay_only;
    l.order = model.delay_only ? 0 : model.attenuation_order;
    l.paths = model.delay_only ? 0 : model.paths;
    return l;
  }

  int path_count() const { return clusters * sources * paths; }
  int size() const { return 2 * sources + order + 2 * path_count(); }

  int x(int n) const { return n; }
  int y(int n) const { return sources + n; }
  int beta(int l) const { return 2 * sources + l; }  // 0-based: beta_{l+1}
  int path(int c, int n, int p) const { return (c * sources + n) * paths + p; }
  int gamma(int c, int n, int p) const { return 2 * sources + order + path(c, n, p); }
  int delay(int c, int n, int p) const { return 2 * sources + order + path_count() + path(c, n, p); }

  struct Slot {
    ParamKind kind;
    int a = 0;  // source (x, y), coefficient (beta), cluster (gamma, delay)
    int b = 0;  // source (gamma, delay)
    int c = 0;  // path (gamma, delay)
  };

  Slot slot(int i) const {
    if (i < 0 || i >= size()) throw std::out_of_range("parameter index out of range");
    if (i < sources) return {ParamKind::x, i};
    if (i < 2 * sources) return {ParamKind::y, i - sources};
    i -= 2 * sources;
    if (i < order) return {ParamKind::beta, i};
    i -= order;
    const ParamKind kind = i < path_count() ? ParamKind::gamma : ParamKind::delay;
    if (i >= path_count()) i -= path_count();
    const int p = i % paths;
    const int n = (i / paths) % sources;
    const int c = i / (paths * sources);
    return {kind, c, n, p};
  }

  std::string name(int i) const {
    const Slot s = slot(i);
    switch (s.kind) {
      case ParamKind::x: return "x" + std::to_string(s.a);
      case ParamKind::y: return "y" + std::to_string(s.a);
      case ParamKind::beta: return "beta" + std::to_string(s.a + 1);
      case ParamKind::gamma:
        return "gamma_c" + std::to_string(s.a) + "_s" + std::to_string(s.b) + "_p" + std::to_string(s.c);
      case ParamKind::delay:
        return "delay_c" + std::to_string(s.a) + "_s" + std::to_string(s.b) + "_p" + std::to_string(s.c);
    }
    return {};
  }

  bool operator==(const ParamLayout&) const = default;
};

/// Structured view of theta.
struct DecodedParams {
  std::vector<Point2> positions;
  std::vector<double> beta;
  std::vector<double> gamma;  // indexed by ParamLayout::path
  std::vector<double> delay;
};

inline DecodedParams decode(const ParamLayout& layout, const Eigen::VectorXd& theta) {
  if (theta.size() != layout.size())
    throw ConfigError("parameter vector length " + std::to_string(theta.size()) +
                      " does not match layout size " + std::to_string(layout.size()));
  DecodedParams d;
  for (int n = 0; n < layout.sources; ++n) d.positions.emplace_back(theta(layout.x(n)), theta(layout.y(n)));
  for (int l = 0; l < layout.order; ++l) d.beta.push_back(theta(layout.beta(l)));
  d.gamma.resize(static_cast<std::size_t>(layout.path_count()));
  d.delay.resize(static_cast<std::size_t>(layout.path_count()));
  for (int k = 0; k < layout.path_count(); ++k) {
    d.gamma[static_cast<std::size_t>(k)] = theta(2 * layout.sources + layout.order + k);
    d.delay[static_cast<std::size_t>(k)] = theta(2 * layout.sources + layout.order + layout.path_count() + k);
  }
  return d;
}

inline Eigen::VectorXd encode(const ParamLayout& layout, const DecodedParams& d) {
  if (static_cast<int>(d.positions.size()) != layout.sources ||
      static_cast<int>(d.beta.size()) != layout.order ||
      static_cast<int>(d.gamma.size()) != layout.path_count() ||
      static_cast<int>(d.delay.size()) != layout.path_count())
    throw ConfigError("decoded parameters do not match the layout");
  Eigen::VectorXd theta(layout.size());
  for (int n = 0; n < layout.sources; ++n) {
    theta(layout.x(n)) = d.positions[static_cast<std::size_t>(n)].x();
    theta(layout.y(n)) = d.positions[static_cast<std::size_t>(n)].y();
  }
  for (int l = 0; l < layout.order; ++l) theta(layout.beta(l)) = d.beta[static_cast<std::size_t>(l)];
  for (int k = 0; k < layout.path_count(); ++k) {
    theta(2 * layout.sources + layout.order + k) = d.gamma[static_cast<std::size_t>(k)];
    theta(2 * layout.sources + layout.order + layout.path_count() + k) = d.delay[static_cast<std::size_t>(k)];
  }
  return theta;
}

}  // namespace wavelock
