// Copyright 2026 The confpool Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "confpool/detail/summation.hpp"
#include "confpool/dual_vector.hpp"
#include "confpool/errors.hpp"
#include "confpool/loss.hpp"
#include "confpool/opinion_pool.hpp"
#include "confpool/rng.hpp"

namespace confpool {

/// Orientation of the multiplicative dual update. `Ascent` grows the
/// multipliers of violated rows, so the dual player maximizes the Lagrangian.
/// `Descent` applies exp(-eta * z), which shrinks them instead.
enum class EgSign : int { Ascent = 1, Descent = -1 };

/// Where the upper gap estimate reads the loss and constraint values.
enum class GapEstimateMode {
  /// Evaluate loss and constraints at the averaged iterate.
  AveragedPoint,
  /// Use running averages of the per-round loss and constraint values.
  RunningAverage,
};

struct LearnConfig {
  ConstraintSpec spec = ConstraintSpec::eiop(3);
  ConfidenceVector w_init = ConfidenceVector::ones(3);
  double eps_gap = 0.5;
  std::size_t batch_required = 32;
  double eg_rate = 0.1;
  double sgd_rate = 0.1;
  double b_bound = 30.0;
  std::size_t max_rounds = 1000;
  std::size_t inner_max_iters = 500;
  double inner_tol = 1e-6;
  std::uint64_t seed = 0;
  EgSign eg_sign = EgSign::Ascent;
  /// Records per inner gradient step; 0 means the full batch.
  std::size_t minibatch_size = 0;
  GapEstimateMode gap_mode = GapEstimateMode::AveragedPoint;

  /// Default hyperparameters: eps 0.5, |B| 32, eta 0.1, B 30; rho 0.1 and
  /// w_init = 1 for EIOP, rho 0.01 and w_init = 1/K for LogOP.
  static LearnConfig defaults(PoolKind kind, std::size_t k, double lower_bound = 0.1) {
    LearnConfig cfg;
    cfg.spec = ConstraintSpec::for_kind(kind, k, lower_bound);
    if (kind == PoolKind::LogOP) {
      cfg.sgd_rate = 0.01;
      cfg.w_init = ConfidenceVector::filled(k, 1.0 / static_cast<double>(k));
    } else {
      cfg.sgd_rate = 0.1;
      cfg.w_init = ConfidenceVector::ones(k);
    }
    return cfg;
  }

  /// Same hyperparameters for a different modality count.
  LearnConfig with_modalities(std::size_t k) const {
    LearnConfig cfg = *this;
    cfg.spec.modalities = k;
    if (spec.kind != PoolKind::LogOP) cfg.spec.sum_target = static_cast<double>(k);
    cfg.w_init = spec.kind == PoolKind::LogOP
                     ? ConfidenceVector::filled(k, 1.0 / static_cast<double>(k))
                     : ConfidenceVector::ones(k);
    return cfg;
  }

  void validate() const {
    spec.validate();
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(eps_gap)) throw InvalidConfig("gap threshold must be > 0");
    if (!positive(eg_rate)) throw InvalidConfig("EG rate must be > 0");
    if (!positive(sgd_rate)) throw InvalidConfig("gradient step must be > 0");
    if (!positive(b_bound)) throw InvalidConfig("dual bound must be > 0");
    if (!positive(inner_tol)) throw InvalidConfig("inner tolerance must be > 0");
    if (max_rounds < 1) throw InvalidConfig("max_rounds must be >= 1");
    if (inner_max_iters < 1) throw InvalidConfig("inner_max_iters must be >= 1");
    if (batch_required < 1) throw InvalidConfig("batch_required must be >= 1");
    if (w_init.size() != spec.modalities) {
      throw InvalidConfig("initial confidence length does not match the constraint spec");
    }
  }
};

struct GapRecord {
  std::size_t round = 0;
  double l_max = 0.0;
  double l_min = 0.0;
  double gap = 0.0;
};

struct LearnResult {
  /// Averaged iterate after the lower-bound clamp.
  ConfidenceVector w_hat;
  std::size_t rounds = 0;
  bool converged = false;
  std::vector<GapRecord> gap_trace;
  /// Averaged confidence after each round (before the final clamp).
  std::vector<ConfidenceVector> w_trace;
  /// Per-round best responses w_t.
  std::vector<ConfidenceVector> iterate_trace;
  /// Multipliers lambda_t used in each round.
  std::vector<DualVector> lambda_trace;
};

namespace detail {

inline void check_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericalFailure(std::string("non-finite ") + what);
  }
}

inline ConfidenceVector inner_solve_prepared(const PreparedBatch& pb, const DualVector& lam,
                                             const LearnConfig& cfg, const ConfidenceVector& w0,
                                             std::uint64_t stream) {
  const auto& spec = cfg.spec;
  if (lam.size() != spec.inequality_rows() + 1) {
    throw DimensionMismatch("dual vector must have s + 1 entries");
  }
  ConfidenceVector w = project(w0.weights(), spec);
  if (spec.is_singleton()) return w;

  const bool minibatch = cfg.minibatch_size > 0 && cfg.minibatch_size < pb.size();
  std::optional<Rng> rng;
  std::vector<std::size_t> order;
  if (minibatch) {
    rng.emplace(cfg.seed, stream);
    order.resize(pb.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
  }

  std::vector<double> grad;
  std::vector<double> step(w.size());
  for (std::size_t iter = 0; iter < cfg.inner_max_iters; ++iter) {
    std::span<const std::size_t> records;
    if (minibatch) {
      // Partial Fisher-Yates: the first minibatch_size slots form the sample.
      for (std::size_t i = 0; i < cfg.minibatch_size; ++i) {
        std::swap(order[i], order[i + rng->index(order.size() - i)]);
      }
      records = std::span<const std::size_t>(order).first(cfg.minibatch_size);
    }
    pb.evaluate(w.weights(), records, &grad);
    for (std::size_t i = 0; i < step.size(); ++i) {
      step[i] = w[i] - cfg.sgd_rate * (grad[i] - lam[i]);
    }
    check_finite(step, "gradient in inner solve");
    ConfidenceVector next = project(step, spec);
    double delta = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) delta = std::max(delta, std::abs(next[i] - w[i]));
    w = std::move(next);
    if (delta < cfg.inner_tol) break;
  }
  return w;
}

}  // namespace detail

/// Projected gradient descent on w -> L(w, lam) from w0. Stops when the
/// sup-norm step falls below inner_tol or after inner_max_iters steps.
inline ConfidenceVector inner_solve(const Batch& b, const DualVector& lam, const LearnConfig& cfg,
                                    const ConfidenceVector& w0, std::uint64_t stream = 0) {
  if (b.modalities() != cfg.spec.modalities) {
    throw DimensionMismatch("batch modality count does not match the constraint spec");
  }
  return detail::inner_solve_prepared(PreparedBatch(b), lam, cfg, w0, stream);
}

/// Exponentiated-gradient step keeping lam on the simplex of mass B:
///   lam'[i] = B * lam[i] exp(sign * eta * z[i]) / sum_j lam[j] exp(sign * eta * z[j]).
/// Computed from log-weights so large eta * z cannot overflow.
inline DualVector eg_update(const DualVector& lam, std::span<const double> z, double eta,
                            EgSign sign = EgSign::Ascent) {
  if (z.size() != lam.size()) {
    throw DimensionMismatch("EG payoff has " + std::to_string(z.size()) + " entries, dual has " +
                            std::to_string(lam.size()));
  }
  detail::check_finite(z, "EG payoff");
  if (!std::isfinite(eta)) throw NumericalFailure("non-finite EG rate");
  const double bound = lam.bound();
  if (bound == 0.0) return lam;

  const double s = static_cast<double>(static_cast<int>(sign));
  std::vector<double> logits(lam.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < lam.size(); ++i) {
    if (lam[i] > 0.0) logits[i] = std::log(lam[i]) + s * eta * z[i];
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(lam.size());
  detail::CompensatedSum total;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    total.add(out[i]);
  }
  const double z_norm = total.value();
  for (double& x : out) x = bound * (x / z_norm);
  return DualVector(std::move(out));
}

/// Running averages of per-round loss and constraint values.
struct RunningEstimates {
  double loss = 0.0;
  std::vector<double> constraints;
};

struct GapEstimate {
  double l_max = 0.0;
  double l_min = 0.0;
  /// The best response to the averaged multipliers.
  ConfidenceVector best_response = ConfidenceVector::ones(1);

  double gap() const noexcept { return l_max - l_min; }
};

namespace detail {

inline GapEstimate estimate_gap_prepared(const PreparedBatch& pb, const ConfidenceVector& w_avg,
                                         const DualVector& lam_avg, const LearnConfig& cfg,
                                         const ConfidenceVector& w0,
                                         const RunningEstimates* running, std::uint64_t stream) {
  const auto& spec = cfg.spec;
  double loss_at_avg = 0.0;
  std::vector<double> g_at_avg;
  if (running != nullptr) {
    loss_at_avg = running->loss;
    g_at_avg = running->constraints;
  } else {
    loss_at_avg = pb.loss(w_avg.weights());
    g_at_avg = constraint_values(w_avg, spec);
  }
  // The maximizing lambda with ||lambda||_1 = B puts all mass on the worst
  // row, or on the zero slot when no row is violated.
  double worst = 0.0;
  for (double g : g_at_avg) worst = std::max(worst, g);

  GapEstimate est;
  est.l_max = loss_at_avg + cfg.b_bound * worst;
  est.best_response = inner_solve_prepared(pb, lam_avg, cfg, w0, stream);
  const auto g_tilde = constraint_values(est.best_response, spec);
  detail::CompensatedSum l_min;
  l_min.add(pb.loss(est.best_response.weights()));
  for (std::size_t i = 0; i < g_tilde.size(); ++i) l_min.add(lam_avg[i] * g_tilde[i]);
  est.l_min = l_min.value();
  return est;
}

}  // namespace detail

/// Upper and lower estimates of the Lagrangian game value around the averaged
/// iterates. L_max maximizes over ||lambda||_1 = B at w_avg; L_min evaluates
/// the best response to lam_avg. Pass `running` to read the upper estimate
/// from running averages instead of the averaged point.
inline GapEstimate estimate_gap(const Batch& b, const ConfidenceVector& w_avg,
                                const DualVector& lam_avg, const LearnConfig& cfg,
                                const ConfidenceVector& w0,
                                const RunningEstimates* running = nullptr) {
  if (b.modalities() != cfg.spec.modalities) {
    throw DimensionMismatch("batch modality count does not match the constraint spec");
  }
  return detail::estimate_gap_prepared(PreparedBatch(b), w_avg, lam_avg, cfg, w0, running, 1);
}

/// Primal-dual batch confidence learning.
///
/// Each round the confidence player best-responds to the current multipliers
/// by projected gradient descent from w_init; the averaged iterates are then
/// scored by the estimated primal-dual gap. Learning stops once the gap is at
/// most eps_gap or after max_rounds. Otherwise the multipliers take one EG step
/// on the payoff [G(w_t), 0]. The averaged confidence is returned after a
/// final lower-bound clamp.
inline LearnResult learn(const Batch& b, const LearnConfig& cfg) {
  cfg.validate();
  const auto& spec = cfg.spec;
  if (b.modalities() != spec.modalities) {
    throw DimensionMismatch("batch has " + std::to_string(b.modalities()) +
                            " modalities, constraint spec has " + std::to_string(spec.modalities));
  }
  if (b.size() < cfg.batch_required) {
    throw InsufficientData("batch has " + std::to_string(b.size()) + " records, " +
                           std::to_string(cfg.batch_required) + " required");
  }

  LearnResult result{project(cfg.w_init, spec), 0, false, {}, {}, {}, {}};
  if (spec.is_singleton()) {
    result.converged = true;
    return result;
  }

  const PreparedBatch pb(b);
  const std::size_t k = spec.modalities;
  const std::size_t s = spec.inequality_rows();
  DualVector lam = DualVector::uniform(s, cfg.b_bound);

  std::vector<detail::CompensatedSum> w_sum(k);
  std::vector<detail::CompensatedSum> lam_sum(s + 1);
  std::vector<detail::CompensatedSum> g_sum(s);
  detail::CompensatedSum loss_sum;
  std::optional<ConfidenceVector> w_avg;

  for (std::size_t t = 1; t <= cfg.max_rounds; ++t) {
    const auto w_t = detail::inner_solve_prepared(pb, lam, cfg, cfg.w_init, 2 * t);
    const double loss_t = pb.loss(w_t.weights());
    const auto g_t = constraint_values(w_t, spec);

    loss_sum.add(loss_t);
    for (std::size_t i = 0; i < k; ++i) w_sum[i].add(w_t[i]);
    for (std::size_t i = 0; i < s; ++i) g_sum[i].add(g_t[i]);
    for (std::size_t i = 0; i <= s; ++i) lam_sum[i].add(lam[i]);

    const auto td = static_cast<double>(t);
    std::vector<double> w_mean(k);
    for (std::size_t i = 0; i < k; ++i) w_mean[i] = std::max(0.0, w_sum[i].value() / td);
    std::vector<double> lam_mean(s + 1);
    for (std::size_t i = 0; i <= s; ++i) lam_mean[i] = std::max(0.0, lam_sum[i].value() / td);
    w_avg.emplace(std::move(w_mean));
    const DualVector lam_avg(std::move(lam_mean));

    std::optional<RunningEstimates> running;
    if (cfg.gap_mode == GapEstimateMode::RunningAverage) {
      running.emplace();
      running->loss = loss_sum.value() / td;
      running->constraints.resize(s);
      for (std::size_t i = 0; i < s; ++i) running->constraints[i] = g_sum[i].value() / td;
    }
    const auto est = detail::estimate_gap_prepared(pb, *w_avg, lam_avg, cfg, cfg.w_init,
                                                   running ? &*running : nullptr, 2 * t + 1);

    result.rounds = t;
    result.gap_trace.push_back({t, est.l_max, est.l_min, est.gap()});
    result.w_trace.push_back(*w_avg);
    result.iterate_trace.push_back(w_t);
    result.lambda_trace.push_back(lam);

    if (est.gap() <= cfg.eps_gap) {
      result.converged = true;
      break;
    }
    std::vector<double> z(g_t);
    z.push_back(0.0);
    lam = eg_update(lam, z, cfg.eg_rate, cfg.eg_sign);
  }

  result.w_hat = clamp_to_lower_bound(*w_avg, spec);
  return result;
}

}  // namespace confpool
