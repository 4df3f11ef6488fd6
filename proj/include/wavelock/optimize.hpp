#pragma once

// DE/rand/1/bin global search, trust-region Levenberg-Marquardt refinement,
// and the sequential DE -> LMA driver.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "wavelock/cost.hpp"
#include "wavelock/errors.hpp"
#include "wavelock/parallel.hpp"
#include "wavelock/rng.hpp"
#include "wavelock/scene.hpp"
#include "wavelock/sensitivity.hpp"

namespace wavelock {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Phase { de, lma };

inline const char* phase_name(Phase p) { return p == Phase::de ? "DE" : "LMA"; }

struct TraceEntry {
  Phase phase = Phase::de;
  int iteration = 0;
  VectorXd theta;
  double cost = 0.0;
  double aux = 0.0;  // generation (DE) or damping lambda (LMA)
};

using OptimizerTrace = std::vector<TraceEntry>;

struct Bounds {
  VectorXd lower;
  VectorXd upper;

  Eigen::Index size() const { return lower.size(); }

  bool contains(const VectorXd& v) const {
    return v.size() == lower.size() && (v.array() >= lower.array()).all() && (v.array() <= upper.array()).all();
  }
};

/// Per-parameter box from the class ranges of a DE config.
inline Bounds default_bounds(const ParamLayout& layout, const DEConfig& cfg) {
  Bounds b{VectorXd(layout.size()), VectorXd(layout.size())};
  for (int i = 0; i < layout.size(); ++i) {
    Interval r{};
    switch (layout.slot(i).kind) {
      case ParamKind::x: r = cfg.x_range; break;
      case ParamKind::y: r = cfg.y_range; break;
      case ParamKind::beta: r = cfg.beta_range; break;
      case ParamKind::gamma: r = cfg.gamma_range; break;
      case ParamKind::delay: r = cfg.delay_range; break;
    }
    b.lower(i) = r.lo;
    b.upper(i) = r.hi;
  }
  return b;
}

/// Folds each component back into [lo, hi] by mirror reflection at the walls.
inline VectorXd reflect_into(VectorXd v, const Bounds& box) {
  for (Eigen::Index d = 0; d < v.size(); ++d) {
    const double lo = box.lower(d);
    const double hi = box.upper(d);
    const double w = hi - lo;
    if (!std::isfinite(v(d))) {
      v(d) = lo + 0.5 * w;
    } else if (w <= 0.0) {
      v(d) = lo;
    } else if (v(d) < lo || v(d) > hi) {
      double t = std::fmod(v(d) - lo, 2.0 * w);
      if (t < 0.0) t += 2.0 * w;
      v(d) = t <= w ? lo + t : hi - (t - w);
      v(d) = std::clamp(v(d), lo, hi);
    }
  }
  return v;
}

// -- Differential evolution -----------------------------------------------------

/// mu = theta_r1 + F (theta_r2 - theta_r3)
inline VectorXd de_mutate(const VectorXd& base, const VectorXd& a, const VectorXd& b, double F) {
  return base + F * (a - b);
}

/// Draws r1, r2, r3 mutually distinct and distinct from i.
inline std::array<int, 3> de_pick_indices(int population, int i, Rng& rng) {
  if (population < 4) throw ConfigError("de: population must be at least 4");
  std::array<int, 3> r{};
  for (int k = 0; k < 3; ++k) {
    int cand = 0;
    do {
      cand = static_cast<int>(rng() % static_cast<std::uint64_t>(population));
    } while (cand == i || std::find(r.begin(), r.begin() + k, cand) != r.begin() + k);
    r[static_cast<std::size_t>(k)] = cand;
  }
  return r;
}

/// Mutant for member i with reflection into the box.
inline VectorXd de_mutate(const std::vector<VectorXd>& pop, int i, double F, Rng& rng, const Bounds& box) {
  const auto r = de_pick_indices(static_cast<int>(pop.size()), i, rng);
  return reflect_into(de_mutate(pop[static_cast<std::size_t>(r[0])], pop[static_cast<std::size_t>(r[1])],
                                pop[static_cast<std::size_t>(r[2])], F),
                      box);
}

/// Binomial crossover; component k(i) always comes from the mutant.
inline VectorXd de_crossover(const VectorXd& target, const VectorXd& mutant, double CR, Rng& rng) {
  if (target.size() != mutant.size()) throw std::invalid_argument("de_crossover: size mismatch");
  const Eigen::Index D = target.size();
  const auto forced = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(std::max<Eigen::Index>(D, 1)));
  VectorXd trial = target;
  for (Eigen::Index d = 0; d < D; ++d)
    if (uniform01(rng) <= CR || d == forced) trial(d) = mutant(d);
  return trial;
}

struct Member {
  VectorXd theta;
  double cost = std::numeric_limits<double>::infinity();
};

/// Cost with failures mapped to +inf.
template <class CostFn>
double safe_cost(CostFn& fn, const VectorXd& theta) {
  try {
    const double c = fn(theta);
    return std::isfinite(c) ? c : std::numeric_limits<double>::infinity();
  } catch (const NumericalError&) {
    return std::numeric_limits<double>::infinity();
  } catch (const DomainError&) {
    return std::numeric_limits<double>::infinity();
  }
}

/// Lower cost survives; ties go to the trial.
inline Member de_select(Member target, Member trial) {
  return trial.cost <= target.cost ? std::move(trial) : std::move(target);
}

template <class CostFn>
Member de_select(const Member& target, const VectorXd& trial, CostFn&& fn) {
  return de_select(target, Member{trial, safe_cost(fn, trial)});
}

struct DEResult {
  Member best;
  int generations = 0;
  std::vector<Member> population;
  std::vector<double> best_per_generation;  // index 0 = initial population
  OptimizerTrace trace;
};

template <class CostFn>
DEResult de_minimize(CostFn&& fn, const Bounds& box, const DEConfig& cfg, int threads = 1) {
  cfg.validate();
  if (box.lower.size() != box.upper.size()) throw ConfigError("de: malformed bounds");
  const int NP = cfg.population;
  const Eigen::Index D = box.size();
  Rng rng(cfg.seed);

  std::vector<VectorXd> pop(static_cast<std::size_t>(NP), VectorXd(D));
  for (auto& v : pop)
    for (Eigen::Index d = 0; d < D; ++d) v(d) = box.lower(d) + uniform01(rng) * (box.upper(d) - box.lower(d));

  std::vector<double> costs(static_cast<std::size_t>(NP));
  parallel_for(NP, threads, [&](int i) { costs[static_cast<std::size_t>(i)] = safe_cost(fn, pop[static_cast<std::size_t>(i)]); });

  DEResult out;
  auto best_index = [&] {
    return static_cast<int>(std::min_element(costs.begin(), costs.end()) - costs.begin());
  };
  auto record = [&](int gen) {
    const int b = best_index();
    out.best_per_generation.push_back(costs[static_cast<std::size_t>(b)]);
    out.trace.push_back({Phase::de, gen, pop[static_cast<std::size_t>(b)], costs[static_cast<std::size_t>(b)],
                         static_cast<double>(gen)});
  };
  record(0);

  int stagnant = 0;
  std::vector<VectorXd> trials(static_cast<std::size_t>(NP));
  std::vector<double> trial_costs(static_cast<std::size_t>(NP));
  int gen = 0;
  while (gen < cfg.max_generations) {
    ++gen;
    for (int i = 0; i < NP; ++i) {
      const VectorXd mutant = de_mutate(pop, i, cfg.amplification, rng, box);
      trials[static_cast<std::size_t>(i)] = de_crossover(pop[static_cast<std::size_t>(i)], mutant, cfg.crossover, rng);
    }
    parallel_for(NP, threads, [&](int i) {
      trial_costs[static_cast<std::size_t>(i)] = safe_cost(fn, trials[static_cast<std::size_t>(i)]);
    });
    for (int i = 0; i < NP; ++i) {
      const auto k = static_cast<std::size_t>(i);
      Member m = de_select(Member{pop[k], costs[k]}, Member{trials[k], trial_costs[k]});
      pop[k] = std::move(m.theta);
      costs[k] = m.cost;
    }
    const double prev = out.best_per_generation.back();
    record(gen);
    const double now = out.best_per_generation.back();
    const double scale = std::max(std::abs(prev), std::numeric_limits<double>::min());
    if (std::isfinite(prev) && (prev - now) / scale < cfg.stagnation_rtol) {
      if (++stagnant >= cfg.stagnation_generations) break;
    } else {
      stagnant = 0;
    }
  }
  out.generations = gen;
  const int b = best_index();
  out.best = Member{pop[static_cast<std::size_t>(b)], costs[static_cast<std::size_t>(b)]};
  out.population.reserve(static_cast<std::size_t>(NP));
  for (int i = 0; i < NP; ++i) out.population.push_back({pop[static_cast<std::size_t>(i)], costs[static_cast<std::size_t>(i)]});
  return out;
}

// -- Levenberg-Marquardt --------------------------------------------------------

struct LmaResult {
  VectorXd theta;
  double cost = 0.0;
  int iterations = 0;
  int accepted = 0;
  double lambda = 0.0;
  std::string status;  // "gradient", "step", "max_iterations", "solve_failure"
  OptimizerTrace trace;
};

/// Minimizes |r(theta)|^2 with (J^T J + lambda I) h = -J^T r and the gain-ratio
/// damping update. Rejected steps leave theta unchanged and raise lambda.
template <class ResidualFn, class JacobianFn>
LmaResult lma_minimize(VectorXd theta, ResidualFn&& residual_fn, JacobianFn&& jacobian_fn, const LMAConfig& cfg) {
  cfg.validate();
  auto eval_cost = [&](const VectorXd& t, VectorXd& r) {
    try {
      r = residual_fn(t);
      const double c = r.squaredNorm();
      return std::isfinite(c) ? c : std::numeric_limits<double>::infinity();
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    } catch (const DomainError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  LmaResult out;
  VectorXd r;
  double c = eval_cost(theta, r);
  if (!std::isfinite(c)) throw NumericalError("lma: residual is not finite at the starting point");
  MatrixXd J = jacobian_fn(theta);
  MatrixXd A = J.transpose() * J;
  VectorXd g = J.transpose() * r;
  double lambda = cfg.tau * std::max(A.diagonal().maxCoeff(), std::numeric_limits<double>::min());
  double nu = 2.0;
  out.trace.push_back({Phase::lma, 0, theta, c, lambda});
  out.status = "max_iterations";

  bool done = g.lpNorm<Eigen::Infinity>() <= cfg.gradient_tol;
  if (done) out.status = "gradient";
  int k = 0;
  while (!done && k < cfg.max_iterations) {
    ++k;
    MatrixXd Ad = A;
    if (cfg.scaled_damping)
      Ad.diagonal() += lambda * A.diagonal().cwiseMax(std::numeric_limits<double>::min());
    else
      Ad.diagonal().array() += lambda;
    const Eigen::LDLT<MatrixXd> ldlt(Ad);
    VectorXd h;
    if (ldlt.info() == Eigen::Success) h = ldlt.solve(-g);
    if (ldlt.info() != Eigen::Success || !h.allFinite()) {
      lambda *= nu;
      nu *= 2.0;
      if (!std::isfinite(lambda) || lambda > 1e300) {
        out.status = "solve_failure";
        break;
      }
      continue;
    }
    if (h.norm() <= cfg.step_tol * (theta.norm() + cfg.step_tol)) {
      out.status = "step";
      break;
    }
    const VectorXd cand = theta + h;
    VectorXd rn;
    const double cn = eval_cost(cand, rn);
    const double predicted = h.dot(lambda * h - g);
    const double gain = (c - cn) / predicted;
    if (std::isfinite(cn) && predicted > 0.0 && gain > 0.0 && cn < c) {
      theta = cand;
      r = std::move(rn);
      c = cn;
      J = jacobian_fn(theta);
      A = J.transpose() * J;
      g = J.transpose() * r;
      lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * gain - 1.0, 3));
      nu = 2.0;
      ++out.accepted;
      out.trace.push_back({Phase::lma, k, theta, c, lambda});
      if (g.lpNorm<Eigen::Infinity>() <= cfg.gradient_tol) {
        out.status = "gradient";
        done = true;
      }
    } else {
      lambda *= nu;
      nu *= 2.0;
      if (!std::isfinite(lambda) || lambda > 1e300) {
        out.status = "solve_failure";
        break;
      }
    }
  }
  out.theta = std::move(theta);
  out.cost = c;
  out.iterations = k;
  out.lambda = lambda;
  return out;
}

// -- Localization objective and the hybrid driver -------------------------------

/// Residual of a Problem scaled by 1/sqrt(|X|^2) so costs lie in [0, 1];
/// caches the last factored evaluation so the Jacobian at an accepted point
/// reuses it.
class LocalizationObjective {
 public:
  explicit LocalizationObjective(const Problem& problem)
      : problem_(&problem), scale_(1.0 / std::sqrt(std::max(problem.data_energy(), std::numeric_limits<double>::min()))) {}

  double cost(const VectorXd& theta) const { return wavelock::cost(*problem_, theta) * scale_ * scale_; }

  VectorXd residual(const VectorXd& theta) {
    cached_theta_ = theta;
    cached_ = residual_eval(theta);
    return real_embedding(cached_->Q) * scale_;
  }

  MatrixXd jacobian(const VectorXd& theta) {
    if (!cached_ || cached_theta_.size() != theta.size() || cached_theta_ != theta) {
      cached_theta_ = theta;
      cached_ = residual_eval(theta);
    }
    return dQ_dtheta(*problem_, theta, *cached_).real * scale_;
  }

  double scale() const { return scale_; }

 private:
  ResidualEval residual_eval(const VectorXd& theta) const { return wavelock::residual(*problem_, theta, true); }

  const Problem* problem_;
  double scale_;
  VectorXd cached_theta_;
  std::optional<ResidualEval> cached_;
};

struct HybridResult {
  VectorXd theta;
  double cost = 0.0;  // normalized
  int de_generations = 0;
  int lma_iterations = 0;
  std::string lma_status;
  OptimizerTrace trace;
};

inline HybridResult hybrid_minimize(const Problem& problem, const DEConfig& de_cfg, const LMAConfig& lma_cfg,
                                    int threads = 1, std::optional<Bounds> box = std::nullopt) {
  const Bounds bounds = box ? *box : default_bounds(problem.layout(), de_cfg);
  if (bounds.size() != problem.layout().size()) throw ConfigError("hybrid: bounds do not match the layout");
  LocalizationObjective objective(problem);
  DEResult de = de_minimize([&](const VectorXd& t) { return objective.cost(t); }, bounds, de_cfg, threads);
  if (!std::isfinite(de.best.cost)) throw NumericalError("hybrid: no finite-cost member in the DE population");

  LmaResult lma = lma_minimize(
      de.best.theta, [&](const VectorXd& t) { return objective.residual(t); },
      [&](const VectorXd& t) { return objective.jacobian(t); }, lma_cfg);

  HybridResult out;
  out.theta = lma.theta;
  out.cost = lma.cost;
  out.de_generations = de.generations;
  out.lma_iterations = lma.iterations;
  out.lma_status = lma.status;
  out.trace = std::move(de.trace);
  out.trace.insert(out.trace.end(), lma.trace.begin(), lma.trace.end());
  return out;
}

}  // namespace wavelock
