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
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "confpool/detail/summation.hpp"
#include "confpool/errors.hpp"

namespace confpool {

/// Default probability floor applied when raw vectors become distributions.
inline constexpr double kDefaultFloor = 1e-6;

/// Tolerance on the unit-sum invariant of a Categorical.
inline constexpr double kSumTolerance = 1e-9;

/// A strictly positive, normalized probability vector over a finite set of
/// intentions. Every entry is > 0, so no single source can veto an outcome in
/// a multiplicative pool.
class Categorical {
 public:
  /// Validates an already normalized vector. Use `normalize` or
  /// `floor_and_renormalize` to build one from raw scores.
  explicit Categorical(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.size() < 2) {
      throw InvalidDistribution("categorical needs at least 2 entries");
    }
    for (double p : probs_) {
      if (!std::isfinite(p) || p <= 0.0) {
        throw InvalidDistribution("categorical entries must be finite and > 0");
      }
    }
    const double total = detail::compensated_sum(probs_);
    if (std::abs(total - 1.0) > kSumTolerance) {
      throw InvalidDistribution("categorical entries sum to " + std::to_string(total));
    }
  }

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const noexcept { return probs_[i]; }
  double at(std::size_t i) const {
    if (i >= probs_.size()) throw IndexError("intention index out of range");
    return probs_[i];
  }
  std::span<const double> probs() const noexcept { return probs_; }
  auto begin() const noexcept { return probs_.begin(); }
  auto end() const noexcept { return probs_.end(); }

  friend bool operator==(const Categorical&, const Categorical&) = default;

 private:
  std::vector<double> probs_;
};

namespace detail {

inline void check_raw(std::span<const double> raw) {
  if (raw.size() < 2) throw InvalidDistribution("distribution needs at least 2 entries");
  for (double v : raw) {
    if (!std::isfinite(v)) throw InvalidDistribution("non-finite entry");
    if (v < 0.0) throw InvalidDistribution("negative entry");
  }
}

}  // namespace detail

/// Scales `raw` to unit mass, raises every entry to at least `epsilon` and
/// renormalizes. Entries already at or above the floor only move by the final
/// renormalization, so each output entry is >= epsilon / (1 + N * epsilon).
inline Categorical floor_and_renormalize(std::span<const double> raw,
                                         double epsilon = kDefaultFloor) {
  detail::check_raw(raw);
  const auto n = static_cast<double>(raw.size());
  if (!(epsilon > 0.0) || !(epsilon < 1.0 / n)) {
    throw InvalidConfig("probability floor must lie in (0, 1/N)");
  }
  const double total = detail::compensated_sum(raw);
  if (!(total > 0.0)) throw InvalidDistribution("distribution has zero mass");

  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out[i] = std::max(raw[i] / total, epsilon);
  }
  const double floored = detail::compensated_sum(out);
  for (double& p : out) p /= floored;
  return Categorical(std::move(out));
}

/// Normalizes nonnegative weights into a Categorical, applying the floor.
inline Categorical normalize(std::span<const double> weights, double epsilon = kDefaultFloor) {
  return floor_and_renormalize(weights, epsilon);
}

inline Categorical normalize(std::initializer_list<double> weights,
                             double epsilon = kDefaultFloor) {
  return floor_and_renormalize(std::span<const double>(weights.begin(), weights.size()), epsilon);
}

inline Categorical uniform_categorical(std::size_t n) {
  if (n < 2) throw InvalidDistribution("distribution needs at least 2 entries");
  return Categorical(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

/// Deterministic choice of `index` as a floored one-hot distribution.
inline Categorical one_hot(std::size_t n, std::size_t index, double epsilon = kDefaultFloor) {
  if (index >= n) throw IndexError("one-hot index out of range");
  std::vector<double> raw(n, 0.0);
  raw[index] = 1.0;
  return floor_and_renormalize(raw, epsilon);
}

/// Shannon entropy in nats.
inline double entropy(const Categorical& d) {
  detail::CompensatedSum acc;
  for (double p : d) acc.add(-p * std::log(p));
  return acc.value();
}

inline void check_same_support(const Categorical& p, const Categorical& q) {
  if (p.size() != q.size()) {
    throw DimensionMismatch("distributions have " + std::to_string(p.size()) + " and " +
                            std::to_string(q.size()) + " entries");
  }
}

/// D_KL(p || q) in nats.
inline double kl_divergence(const Categorical& p, const Categorical& q) {
  check_same_support(p, q);
  detail::CompensatedSum acc;
  for (std::size_t i = 0; i < p.size(); ++i) acc.add(p[i] * (std::log(p[i]) - std::log(q[i])));
  return acc.value();
}

/// H(p, q) = -sum p log q, in nats.
inline double cross_entropy(const Categorical& p, const Categorical& q) {
  check_same_support(p, q);
  detail::CompensatedSum acc;
  for (std::size_t i = 0; i < p.size(); ++i) acc.add(-p[i] * std::log(q[i]));
  return acc.value();
}

/// Probability of the true intention minus the largest probability among the
/// other intentions. Positive iff the true intention is the unique argmax.
inline double score_difference(const Categorical& d, std::size_t true_index) {
  if (true_index >= d.size()) throw IndexError("true intention index out of range");
  double best_other = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    if (j != true_index) best_other = std::max(best_other, d[j]);
  }
  return d[true_index] - best_other;
}

/// Smallest index attaining the maximum probability.
inline std::size_t argmax_tiebreak(const Categorical& d) noexcept {
  std::size_t best = 0;
  for (std::size_t j = 1; j < d.size(); ++j) {
    if (d[j] > d[best]) best = j;
  }
  return best;
}

}  // namespace confpool
