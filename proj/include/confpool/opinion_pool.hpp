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
#include <functional>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "confpool/categorical.hpp"
#include "confpool/detail/summation.hpp"
#include "confpool/errors.hpp"

namespace confpool {

/// Nonnegative per-modality exponents of the opinion pool.
class ConfidenceVector {
 public:
  explicit ConfidenceVector(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) throw InvalidConfig("confidence vector needs at least one modality");
    for (double w : weights_) {
      if (!std::isfinite(w) || w < 0.0) {
        throw InvalidConfig("confidence weights must be finite and nonnegative");
      }
    }
  }
  ConfidenceVector(std::initializer_list<double> weights)
      : ConfidenceVector(std::vector<double>(weights)) {}

  static ConfidenceVector ones(std::size_t k) { return ConfidenceVector(std::vector<double>(k, 1.0)); }
  static ConfidenceVector filled(std::size_t k, double value) {
    return ConfidenceVector(std::vector<double>(k, value));
  }

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t i) const noexcept { return weights_[i]; }
  std::span<const double> weights() const noexcept { return weights_; }
  auto begin() const noexcept { return weights_.begin(); }
  auto end() const noexcept { return weights_.end(); }
  double sum() const noexcept { return detail::compensated_sum(weights_); }

  friend bool operator==(const ConfidenceVector&, const ConfidenceVector&) = default;

 private:
  std::vector<double> weights_;
};

enum class PoolKind { IOP, LogOP, EIOP };

inline std::string_view to_string(PoolKind kind) noexcept {
  switch (kind) {
    case PoolKind::IOP: return "IOP";
    case PoolKind::LogOP: return "LogOP";
    case PoolKind::EIOP: return "EIOP";
  }
  return "?";
}

inline PoolKind parse_pool_kind(std::string_view name) {
  if (name == "IOP" || name == "iop") return PoolKind::IOP;
  if (name == "LogOP" || name == "logop" || name == "LOGOP") return PoolKind::LogOP;
  if (name == "EIOP" || name == "eiop") return PoolKind::EIOP;
  throw InvalidConfig("unknown pool kind '" + std::string(name) + "'");
}

/// Feasible confidence set of one pool family.
///
/// Equality row: sum(w) == sum_target (1 for LogOP, K for EIOP and IOP).
/// Inequality rows: g_i(w) = lower_bound - w_i <= 0, one per modality.
///
/// By default `project` only enforces the equality row and nonnegativity and
/// leaves the lower bounds to the dual player. With `bound_in_projection` the
/// projection targets {sum == sum_target, w_i >= lower_bound} directly and the
/// inequality rows can never be violated.
struct ConstraintSpec {
  PoolKind kind = PoolKind::EIOP;
  std::size_t modalities = 1;
  double sum_target = 1.0;
  double lower_bound = 0.1;
  bool bound_in_projection = false;

  static ConstraintSpec iop(std::size_t k) {
    return ConstraintSpec{PoolKind::IOP, k, static_cast<double>(k), 0.0, false};
  }
  static ConstraintSpec logop(std::size_t k, double lower_bound = 0.1) {
    return ConstraintSpec{PoolKind::LogOP, k, 1.0, lower_bound, false};
  }
  static ConstraintSpec eiop(std::size_t k, double lower_bound = 0.1) {
    return ConstraintSpec{PoolKind::EIOP, k, static_cast<double>(k), lower_bound, false};
  }
  static ConstraintSpec for_kind(PoolKind kind, std::size_t k, double lower_bound = 0.1) {
    switch (kind) {
      case PoolKind::IOP: return iop(k);
      case PoolKind::LogOP: return logop(k, lower_bound);
      case PoolKind::EIOP: return eiop(k, lower_bound);
    }
    throw InvalidConfig("unknown pool kind");
  }

  /// Number of inequality rows s.
  std::size_t inequality_rows() const noexcept { return modalities; }

  /// The set contains exactly one point (IOP, or a single modality).
  bool is_singleton() const noexcept {
    return kind == PoolKind::IOP || modalities == 1 ||
           (bound_in_projection && sum_target == static_cast<double>(modalities) * lower_bound);
  }

  void validate() const {
    if (modalities == 0) throw InvalidConfig("constraint spec needs at least one modality");
    if (!std::isfinite(lower_bound) || lower_bound < 0.0) {
      throw InvalidConfig("lower bound must be finite and nonnegative");
    }
    if (!std::isfinite(sum_target) || sum_target <= 0.0) {
      throw InvalidConfig("sum target must be positive");
    }
    if (kind == PoolKind::IOP) return;
    if (sum_target + 1e-12 < static_cast<double>(modalities) * lower_bound) {
      throw InvalidConfig("infeasible constraint spec: sum target " + std::to_string(sum_target) +
                          " below K * lower_bound");
    }
  }
};

/// The fixed IOP exponents.
inline ConfidenceVector iop_weights(std::size_t k) {
  if (k == 0) throw InvalidConfig("need at least one modality");
  return ConfidenceVector::ones(k);
}

namespace detail {

inline void check_bases(std::span<const Categorical> bases, std::size_t weight_count) {
  if (bases.empty()) throw DimensionMismatch("fusion needs at least one base distribution");
  if (bases.size() != weight_count) {
    throw DimensionMismatch("got " + std::to_string(bases.size()) + " bases but " +
                            std::to_string(weight_count) + " confidence weights");
  }
  const std::size_t n = bases.front().size();
  for (const auto& b : bases) {
    if (b.size() != n) throw DimensionMismatch("base distributions differ in length");
  }
}

// Unnormalized fused log-scores s_a = sum_i w_i log P(a|m_i).
inline std::vector<double> fused_scores(std::span<const Categorical> bases,
                                        std::span<const double> w) {
  const std::size_t n = bases.front().size();
  std::vector<double> scores(n);
  for (std::size_t a = 0; a < n; ++a) {
    CompensatedSum acc;
    for (std::size_t i = 0; i < bases.size(); ++i) {
      if (w[i] != 0.0) acc.add(w[i] * std::log(bases[i][a]));
    }
    scores[a] = acc.value();
  }
  return scores;
}

// Threshold theta of the Euclidean projection onto {v >= 0, sum v == target}
// by sort-and-threshold: the projection is max(w_i - theta, 0).
inline double simplex_threshold(std::span<const double> w, double target) {
  std::vector<double> sorted(w.begin(), w.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double prefix = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    prefix += sorted[j];
    const double candidate = (prefix - target) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) theta = candidate;
  }
  return theta;
}

inline std::vector<double> project_scaled_simplex(std::span<const double> w, double target) {
  std::vector<double> out(w.size(), 0.0);
  if (target <= 0.0) return out;
  const double theta = simplex_threshold(w, target);
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = std::max(w[i] - theta, 0.0);
  return out;
}

// True when w already lies in the target set up to rounding of its sum.
inline bool on_set(std::span<const double> w, double target, double floor) {
  for (double x : w) {
    if (x < floor) return false;
  }
  return std::abs(compensated_sum(w) - target) <= 1e-12 * std::max(1.0, target);
}

}  // namespace detail

/// Normalized fused log-probabilities log P(a | m_1..m_K).
inline std::vector<double> fuse_log(std::span<const Categorical> bases, const ConfidenceVector& w) {
  detail::check_bases(bases, w.size());
  auto scores = detail::fused_scores(bases, w.weights());
  const double log_z = detail::log_sum_exp(scores);
  for (double& s : scores) s -= log_z;
  return scores;
}

/// Weighted opinion pool: P(a | m_1..m_K) proportional to prod_i P(a|m_i)^w_i.
/// Evaluated in log space with a max shift. Entries that would underflow are
/// held at exp(-700) relative to the mode so the result stays strictly positive.
inline Categorical fuse(std::span<const Categorical> bases, const ConfidenceVector& w) {
  detail::check_bases(bases, w.size());
  auto scores = detail::fused_scores(bases, w.weights());
  const double top = *std::max_element(scores.begin(), scores.end());
  detail::CompensatedSum total;
  for (double& s : scores) {
    s = std::exp(std::max(s - top, -700.0));
    total.add(s);
  }
  const double z = total.value();
  for (double& s : scores) s /= z;
  return Categorical(std::move(scores));
}

/// Euclidean projection of `w` onto the confidence set of `spec`.
inline ConfidenceVector project(std::span<const double> w, const ConstraintSpec& spec) {
  spec.validate();
  if (w.size() != spec.modalities) {
    throw DimensionMismatch("projection input has " + std::to_string(w.size()) +
                            " entries, spec has " + std::to_string(spec.modalities));
  }
  for (double x : w) {
    if (!std::isfinite(x)) throw NumericalFailure("non-finite confidence before projection");
  }
  if (spec.kind == PoolKind::IOP) return iop_weights(spec.modalities);
  const double floor = spec.bound_in_projection ? spec.lower_bound : 0.0;
  if (detail::on_set(w, spec.sum_target, floor)) {
    return ConfidenceVector(std::vector<double>(w.begin(), w.end()));
  }
  if (!spec.bound_in_projection) {
    return ConfidenceVector(detail::project_scaled_simplex(w, spec.sum_target));
  }
  // Shift by the bound, project onto the smaller simplex, shift back; the
  // shift-back is folded into max(w_i - theta, lb).
  const double k = static_cast<double>(spec.modalities);
  std::vector<double> out(w.begin(), w.end());
  for (double& x : out) x -= floor;
  const double free_mass = spec.sum_target - k * floor;
  const double theta = free_mass > 0.0 ? detail::simplex_threshold(out, free_mass)
                                       : std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(w[i] - theta, floor);
  return ConfidenceVector(std::move(out));
}

inline ConfidenceVector project(const ConfidenceVector& w, const ConstraintSpec& spec) {
  return project(w.weights(), spec);
}

/// Inequality rows g_i(w) = lower_bound - w_i. Nonpositive iff every bound holds.
inline std::vector<double> constraint_values(const ConfidenceVector& w, const ConstraintSpec& spec) {
  if (w.size() != spec.modalities) {
    throw DimensionMismatch("confidence length does not match constraint spec");
  }
  std::vector<double> g(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) g[i] = spec.lower_bound - w[i];
  return g;
}

/// Raises entries below the lower bound to it and takes the added mass from
/// the remaining entries in proportion to their excess over the bound. The
/// sum is preserved, so the result lies in the full feasible set.
inline ConfidenceVector clamp_to_lower_bound(const ConfidenceVector& w, const ConstraintSpec& spec) {
  if (w.size() != spec.modalities) {
    throw DimensionMismatch("confidence length does not match constraint spec");
  }
  if (spec.kind == PoolKind::IOP) return iop_weights(spec.modalities);
  const double lb = spec.lower_bound;
  double deficit = 0.0;
  double excess = 0.0;
  for (double x : w) {
    if (x < lb) {
      deficit += lb - x;
    } else {
      excess += x - lb;
    }
  }
  if (deficit == 0.0) return w;
  const double keep = excess > 0.0 ? std::max(0.0, 1.0 - deficit / excess) : 0.0;
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    out[i] = w[i] < lb ? lb : lb + (w[i] - lb) * keep;
  }
  return ConfidenceVector(std::move(out));
}

}  // namespace confpool
