#ifndef CFGADV_ATTACKS_HPP
#define CFGADV_ATTACKS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfgadv/error.hpp"
#include "cfgadv/model.hpp"
#include "cfgadv/parallel.hpp"

namespace cfgadv {

enum class AttackMethod { CW, DeepFool, ElasticNet, JSMA, MIM, PGD };

inline constexpr AttackMethod kAllAttacks[] = {AttackMethod::CW,   AttackMethod::DeepFool, AttackMethod::ElasticNet,
                                               AttackMethod::JSMA, AttackMethod::MIM,      AttackMethod::PGD};

inline std::string_view to_string(AttackMethod m) {
  switch (m) {
    case AttackMethod::CW: return "CW";
    case AttackMethod::DeepFool: return "DeepFool";
    case AttackMethod::ElasticNet: return "ElasticNet";
    case AttackMethod::JSMA: return "JSMA";
    case AttackMethod::MIM: return "MIM";
    case AttackMethod::PGD: return "PGD";
  }
  return "?";
}

inline std::optional<AttackMethod> parse_attack(std::string_view s) {
  for (auto m : kAllAttacks)
    if (to_string(m) == s) return m;
  return std::nullopt;
}

/// Knobs for all six methods; each method reads the subset it needs.
struct AttackConfig {
  AttackMethod method = AttackMethod::PGD;
  double epsilon = 1.0;  // L-inf budget (PGD, MIM, JSMA)
  double step_size = 0.01;
  int max_iterations = 100;
  bool early_stop = true;  // PGD/MIM: stop at the first label flip

  // C&W and ElasticNet
  double initial_const = 1.0;
  int binary_search_steps = 9;
  double kappa = 0.0;
  double beta = 1e-2;  // ElasticNet L1 weight

  double momentum = 1.0;    // MIM decay
  double overshoot = 0.02;  // DeepFool
  double theta = 0.1;       // JSMA per-step delta
  double gamma = 1.0;       // JSMA max fraction of features touched

  static AttackConfig defaults(AttackMethod m) {
    AttackConfig c;
    c.method = m;
    switch (m) {
      case AttackMethod::PGD:
      case AttackMethod::MIM: break;
      case AttackMethod::CW:
      case AttackMethod::ElasticNet: c.max_iterations = 200; break;
      case AttackMethod::DeepFool: c.max_iterations = 50; break;
      case AttackMethod::JSMA: c.max_iterations = 500; break;
    }
    return c;
  }

  void check() const {
    if (!(epsilon >= 0)) throw UsageError("attack epsilon must be >= 0");
    if (!(step_size > 0)) throw UsageError("attack step size must be > 0");
    if (max_iterations < 1) throw UsageError("attack iterations must be >= 1");
    if (binary_search_steps < 1) throw UsageError("binary search steps must be >= 1");
    for (double k : {epsilon, step_size, initial_const, kappa, beta, momentum, overshoot, theta, gamma})
      if (!std::isfinite(k)) throw UsageError("attack knobs must be finite");
    if (gamma < 0 || gamma > 1) throw UsageError("JSMA gamma must lie in [0,1]");
    if (beta < 0 || initial_const <= 0 || theta <= 0) throw UsageError("attack knobs out of range");
  }
};

inline constexpr double kChangeTolerance = 1e-6;

inline int count_changed(const Vec& a, const Vec& b) {
  return static_cast<int>(((a - b).array().abs() > kChangeTolerance).count());
}

struct AttackOutcome {
  AttackMethod method = AttackMethod::PGD;
  std::string sample_id;
  Vec original;
  Vec adversarial;
  Label source = Label::Malicious;
  Label predicted = Label::Malicious;
  bool success = false;
  int features_changed = 0;
  int iterations = 0;
  double wall_ms = 0;
  // Feature-space perturbations are not realizable as programs.
  bool functionality_preserving = false;

  nlohmann::json to_json() const {
    auto vec = [](const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    return {{"method", to_string(method)},
            {"sample_id", sample_id},
            {"source", to_string(source)},
            {"predicted", to_string(predicted)},
            {"success", success},
            {"features_changed", features_changed},
            {"iterations", iterations},
            {"ct_ms", wall_ms},
            {"functionality_preserving", functionality_preserving},
            {"x", vec(original)},
            {"x_adv", vec(adversarial)}};
  }
};

/// Optional per-iteration record of the iterate, for inspection in tests.
using Trajectory = std::vector<Vec>;

namespace detail {

inline AttackOutcome finish(const Model& m, AttackMethod method, const Vec& x, Vec x_adv, Label source,
                            int iterations) {
  AttackOutcome o;
  o.method = method;
  o.original = x;
  o.adversarial = std::move(x_adv);
  o.source = source;
  o.predicted = m.predict(o.adversarial);
  o.success = o.predicted != source;
  o.features_changed = count_changed(o.adversarial, x);
  o.iterations = iterations;
  return o;
}

/// Projection onto [0,1]^n intersected with the L-inf ball of radius eps.
inline Vec project(const Vec& v, const Vec& x, double eps) {
  Vec lo = (x.array() - eps).max(0.0);
  Vec hi = (x.array() + eps).min(1.0);
  return v.cwiseMax(lo).cwiseMin(hi);
}

inline Vec sign(const Vec& v) {
  return v.unaryExpr([](double a) { return a > 0 ? 1.0 : (a < 0 ? -1.0 : 0.0); });
}

/// Logit-space gradient selecting Z_a - Z_b.
inline Vec logit_difference(const Model& m, Label a, Label b) {
  Vec d = Vec::Zero(m.output_dim());
  d(class_index(a)) += 1.0;
  d(class_index(b)) -= 1.0;
  return d;
}

}  // namespace detail

/// Sign-gradient ascent on the cross-entropy of the source label, projected
/// onto the box and the epsilon ball after every step.
inline AttackOutcome pgd(const Model& m, const Vec& x, Label source, const AttackConfig& cfg,
                         Trajectory* trace = nullptr) {
  cfg.check();
  Vec adv = x;
  int it = 0;
  for (; it < cfg.max_iterations; ++it) {
    if (cfg.early_stop && m.predict(adv) != source) break;
    adv = detail::project(adv + cfg.step_size * detail::sign(m.loss_gradient(adv, source)), x, cfg.epsilon);
    if (trace) trace->push_back(adv);
  }
  return detail::finish(m, AttackMethod::PGD, x, std::move(adv), source, it);
}

/// Momentum iterative method: velocity accumulates L1-normalized gradients,
/// steps follow its sign.
inline AttackOutcome mim(const Model& m, const Vec& x, Label source, const AttackConfig& cfg,
                         Trajectory* trace = nullptr) {
  cfg.check();
  Vec adv = x;
  Vec velocity = Vec::Zero(x.size());
  int it = 0;
  for (; it < cfg.max_iterations; ++it) {
    if (cfg.early_stop && m.predict(adv) != source) break;
    Vec g = m.loss_gradient(adv, source);
    const double l1 = g.lpNorm<1>();
    velocity = cfg.momentum * velocity;
    if (l1 > 0) velocity += g / l1;
    adv = detail::project(adv + cfg.step_size * detail::sign(velocity), x, cfg.epsilon);
    if (trace) trace->push_back(adv);
  }
  return detail::finish(m, AttackMethod::MIM, x, std::move(adv), source, it);
}

/// Binary DeepFool on f = Z_other - Z_source. Each iteration adds the
/// linearized step |f|/||w||^2 * w to the running perturbation; candidates
/// are x + (1 + overshoot) * r clipped to the box.
inline AttackOutcome deepfool(const Model& m, const Vec& x, Label source, const AttackConfig& cfg,
                              Trajectory* trace = nullptr) {
  cfg.check();
  const Label other = opposite(source);
  const Vec sel = detail::logit_difference(m, other, source);
  Vec r_total = Vec::Zero(x.size());
  Vec adv = x;
  Vec probe = x;  // unclipped linearization point
  int it = 0;
  while (it < cfg.max_iterations && m.predict(adv) == source) {
    const double f = sel.dot(m.logits(probe));
    const Vec w = m.backprop_to_input(probe, sel);
    const double wn2 = w.squaredNorm();
    if (std::sqrt(wn2) < 1e-12) return detail::finish(m, AttackMethod::DeepFool, x, x, source, it);
    r_total += (std::abs(f) / wn2) * w;
    ++it;
    probe = x + (1.0 + cfg.overshoot) * r_total;
    adv = probe.cwiseMax(0.0).cwiseMin(1.0);
    if (trace) trace->push_back(adv);
  }
  return detail::finish(m, AttackMethod::DeepFool, x, std::move(adv), source, it);
}

/// Greedy single-feature saliency attack. Saliency is the gradient of
/// Z_target - Z_source; each step moves the most salient unsaturated feature
/// by theta toward the target class. At most floor(gamma * n) distinct
/// features are ever touched.
inline AttackOutcome jsma(const Model& m, const Vec& x, Label source, const AttackConfig& cfg,
                          Trajectory* trace = nullptr) {
  cfg.check();
  const Label target = opposite(source);
  const Vec sel = detail::logit_difference(m, target, source);
  const auto n = x.size();
  const auto max_touched = static_cast<Eigen::Index>(std::floor(cfg.gamma * static_cast<double>(n) + 1e-9));
  const Vec lo = (x.array() - cfg.epsilon).max(0.0);
  const Vec hi = (x.array() + cfg.epsilon).min(1.0);

  Vec adv = x;
  std::vector<bool> touched(static_cast<std::size_t>(n), false);
  Eigen::Index n_touched = 0;
  int it = 0;
  while (it < cfg.max_iterations && m.predict(adv) == source) {
    const Vec s = m.backprop_to_input(adv, sel);
    Eigen::Index best = -1;
    double best_abs = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool fresh = !touched[static_cast<std::size_t>(i)];
      if (fresh && n_touched >= max_touched) continue;
      if (s(i) > 0 && adv(i) >= hi(i)) continue;
      if (s(i) < 0 && adv(i) <= lo(i)) continue;
      if (std::abs(s(i)) > best_abs) {
        best_abs = std::abs(s(i));
        best = i;
      }
    }
    if (best < 0) break;
    if (!touched[static_cast<std::size_t>(best)]) {
      touched[static_cast<std::size_t>(best)] = true;
      ++n_touched;
    }
    adv(best) = std::clamp(adv(best) + (s(best) > 0 ? cfg.theta : -cfg.theta), lo(best), hi(best));
    ++it;
    if (trace) trace->push_back(adv);
  }
  return detail::finish(m, AttackMethod::JSMA, x, std::move(adv), source, it);
}

/// Margin term max(Z_source - Z_other, -kappa) of the C&W objective.
inline double cw_margin(const Model& m, const Vec& x_adv, Label source, double kappa) {
  const Vec z = m.logits(x_adv);
  return std::max(z(class_index(source)) - z(class_index(opposite(source))), -kappa);
}

/// ||x_adv - x||_2^2 + c * margin.
inline double cw_objective(const Model& m, const Vec& x, const Vec& x_adv, Label source, double c, double kappa) {
  return (x_adv - x).squaredNorm() + c * cw_margin(m, x_adv, source, kappa);
}

/// Gradient of cw_objective with respect to x_adv.
inline Vec cw_objective_gradient(const Model& m, const Vec& x, const Vec& x_adv, Label source, double c,
                                 double kappa) {
  Vec g = 2.0 * (x_adv - x);
  const Vec z = m.logits(x_adv);
  const double diff = z(class_index(source)) - z(class_index(opposite(source)));
  if (diff > -kappa) g += c * m.backprop_to_input(x_adv, detail::logit_difference(m, source, opposite(source)));
  return g;
}

namespace detail {

/// Binary search over the trade-off constant. `inner(c, best)` runs one
/// optimization and returns true if it produced a successful example;
/// it updates `best` when it finds a better one.
template <class Inner>
int search_constant(const AttackConfig& cfg, Inner&& inner) {
  double lo = 0, hi = 1e10, c = cfg.initial_const;
  int total = 0;
  for (int step = 0; step < cfg.binary_search_steps; ++step) {
    const bool found = inner(c, total);
    if (found) {
      hi = std::min(hi, c);
      c = 0.5 * (lo + hi);
    } else {
      lo = std::max(lo, c);
      c = hi < 1e9 ? 0.5 * (lo + hi) : c * 10;
    }
  }
  return total;
}

}  // namespace detail

/// Carlini-Wagner L2 in tanh space, Adam inner loop with learning rate
/// step_size. Returns the successful candidate of smallest L2 distance, or
/// the unperturbed input on failure.
inline AttackOutcome carlini_wagner_l2(const Model& m, const Vec& x, Label source, const AttackConfig& cfg) {
  cfg.check();
  if (m.predict(x) != source) return detail::finish(m, AttackMethod::CW, x, x, source, 0);

  const auto n = x.size();
  const Vec w0 = ((2.0 * x.array() - 1.0) * 0.999999).atanh().matrix();
  auto to_box = [](const Vec& w) -> Vec { return ((w.array().tanh() + 1.0) * 0.5).matrix(); };

  Vec best = x;
  double best_l2 = std::numeric_limits<double>::infinity();
  const int iterations = detail::search_constant(cfg, [&](double c, int& total) {
    bool found = false;
    Vec w = w0, mom = Vec::Zero(n), vel = Vec::Zero(n);
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= cfg.max_iterations; ++it, ++total) {
      const Vec adv = to_box(w);
      const double obj = cw_objective(m, x, adv, source, c, cfg.kappa);
      if (!std::isfinite(obj)) throw InvariantError("C&W: non-finite objective at iteration " + std::to_string(it));
      if (m.predict(adv) != source) {
        found = true;
        const double l2 = (adv - x).squaredNorm();
        if (l2 < best_l2) {
          best_l2 = l2;
          best = adv;
        }
      }
      if (it % std::max(1, cfg.max_iterations / 10) == 0) {
        if (obj > prev * 0.9999) break;
        prev = obj;
      }
      const Vec g = cw_objective_gradient(m, x, adv, source, c, cfg.kappa).cwiseProduct(
          ((1.0 - w.array().tanh().square()) * 0.5).matrix());
      mom = 0.9 * mom + 0.1 * g;
      vel = 0.999 * vel + 0.001 * g.cwiseAbs2();
      const double c1 = 1 - std::pow(0.9, it), c2 = 1 - std::pow(0.999, it);
      w.array() -= cfg.step_size * (mom.array() / c1) / ((vel.array() / c2).sqrt() + 1e-8);
    }
    if (!found) {
      const Vec adv = to_box(w);
      if (m.predict(adv) != source && (adv - x).squaredNorm() < best_l2) {
        best_l2 = (adv - x).squaredNorm();
        best = adv;
        found = true;
      }
    }
    return found;
  });
  return detail::finish(m, AttackMethod::CW, x, best, source, iterations);
}

/// Elastic-net attack: minimizes c * margin + ||d||_2^2 + beta * ||d||_1
/// (d = x_adv - x) by iterative shrinkage-thresholding. Each iteration takes
/// a gradient step of size step_size on the smooth part, soft-thresholds the
/// perturbation by beta * step_size and projects onto the box. Returns the
/// successful iterate of smallest elastic-net distance.
inline AttackOutcome elastic_net(const Model& m, const Vec& x, Label source, const AttackConfig& cfg,
                                 Trajectory* trace = nullptr) {
  cfg.check();
  if (m.predict(x) != source) return detail::finish(m, AttackMethod::ElasticNet, x, x, source, 0);

  const double thr = cfg.beta * cfg.step_size;
  Vec best = x;
  double best_dist = std::numeric_limits<double>::infinity();
  const int iterations = detail::search_constant(cfg, [&](double c, int& total) {
    bool found = false;
    Vec adv = x;
    for (int it = 1; it <= cfg.max_iterations; ++it, ++total) {
      const Vec z = adv - cfg.step_size * cw_objective_gradient(m, x, adv, source, c, cfg.kappa);
      const Vec d = z - x;
      const Vec shrunk = d.unaryExpr([thr](double v) { return v > thr ? v - thr : (v < -thr ? v + thr : 0.0); });
      adv = (x + shrunk).cwiseMax(0.0).cwiseMin(1.0);
      if (trace) trace->push_back(adv);
      const double obj = cw_objective(m, x, adv, source, c, cfg.kappa) + cfg.beta * (adv - x).lpNorm<1>();
      if (!std::isfinite(obj))
        throw InvariantError("ElasticNet: non-finite objective at iteration " + std::to_string(it));
      if (m.predict(adv) != source) {
        found = true;
        const double dist = (adv - x).squaredNorm() + cfg.beta * (adv - x).lpNorm<1>();
        if (dist < best_dist) {
          best_dist = dist;
          best = adv;
        }
      }
    }
    return found;
  });
  return detail::finish(m, AttackMethod::ElasticNet, x, best, source, iterations);
}

inline AttackOutcome run_attack(const Model& m, const Vec& x, Label source, const AttackConfig& cfg) {
  switch (cfg.method) {
    case AttackMethod::CW: return carlini_wagner_l2(m, x, source, cfg);
    case AttackMethod::DeepFool: return deepfool(m, x, source, cfg);
    case AttackMethod::ElasticNet: return elastic_net(m, x, source, cfg);
    case AttackMethod::JSMA: return jsma(m, x, source, cfg);
    case AttackMethod::MIM: return mim(m, x, source, cfg);
    case AttackMethod::PGD: return pgd(m, x, source, cfg);
  }
  throw UsageError("unknown attack method");
}

/// One row of the OSAA table.
struct SuiteRow {
  AttackMethod method = AttackMethod::PGD;
  std::size_t samples = 0;  // correctly classified inputs that were attacked
  std::size_t successes = 0;
  double mr_percent = 0;
  double avg_fg = 0;
  bool avg_fg_defined = false;  // false when no attack succeeded
  double mean_ct_ms = 0;
};

struct SuiteResult {
  std::vector<SuiteRow> rows;
  std::vector<AttackOutcome> outcomes;  // grouped by method, then input order
  std::size_t skipped = 0;              // misclassified inputs, per method
};

inline SuiteRow summarize_outcomes(AttackMethod method, std::span<const AttackOutcome> outcomes) {
  SuiteRow row;
  row.method = method;
  row.samples = outcomes.size();
  double fg = 0, ct = 0;
  for (const auto& o : outcomes) {
    ct += o.wall_ms;
    if (o.success) {
      ++row.successes;
      fg += o.features_changed;
    }
  }
  if (row.samples) {
    row.mr_percent = 100.0 * static_cast<double>(row.successes) / static_cast<double>(row.samples);
    row.mean_ct_ms = ct / static_cast<double>(row.samples);
  }
  row.avg_fg_defined = row.successes > 0;
  row.avg_fg = row.avg_fg_defined ? fg / static_cast<double>(row.successes) : 0.0;
  return row;
}

/// Attacks every correctly classified input with each config. MR counts
/// label flips among attacked inputs; Avg.FG averages over successes only.
inline SuiteResult run_attack_suite(const Model& m, std::span<const LabeledVector> inputs,
                                    std::span<const AttackConfig> configs,
                                    std::span<const std::string> ids = {}, unsigned threads = 1) {
  if (inputs.empty()) throw DataError("attack suite needs a nonempty test set");
  std::vector<std::size_t> attacked;
  for (std::size_t i = 0; i < inputs.size(); ++i)
    if (m.predict(inputs[i].x) == inputs[i].y) attacked.push_back(i);

  SuiteResult result;
  result.skipped = inputs.size() - attacked.size();
  for (const auto& cfg : configs) {
    cfg.check();
    std::vector<AttackOutcome> outs(attacked.size());
    parallel_for(attacked.size(), threads, [&](std::size_t k) {
      const auto& in = inputs[attacked[k]];
      Stopwatch sw;
      outs[k] = run_attack(m, in.x, in.y, cfg);
      outs[k].wall_ms = sw.elapsed_ms();
      if (attacked[k] < ids.size()) outs[k].sample_id = ids[attacked[k]];
    });
    result.rows.push_back(summarize_outcomes(cfg.method, outs));
    result.outcomes.insert(result.outcomes.end(), std::make_move_iterator(outs.begin()),
                           std::make_move_iterator(outs.end()));
  }
  return result;
}

}  // namespace cfgadv

#endif  // CFGADV_ATTACKS_HPP
