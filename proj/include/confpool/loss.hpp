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
#include <optional>
#include <ranges>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "confpool/categorical.hpp"
#include "confpool/detail/summation.hpp"
#include "confpool/dual_vector.hpp"
#include "confpool/errors.hpp"
#include "confpool/opinion_pool.hpp"

namespace confpool {

struct ExperienceMeta {
  std::optional<std::size_t> true_index;
  std::string scenario;

  friend bool operator==(const ExperienceMeta&, const ExperienceMeta&) = default;
};

/// One recorded interaction: K base distributions plus the advice
/// distribution (a floored one-hot when the advice is deterministic).
struct Experience {
  std::vector<Categorical> bases;
  Categorical advice;
  ExperienceMeta meta;

  Experience(std::vector<Categorical> bases_in, Categorical advice_in, ExperienceMeta meta_in = {})
      : bases(std::move(bases_in)), advice(std::move(advice_in)), meta(std::move(meta_in)) {
    if (bases.empty()) throw DimensionMismatch("experience needs at least one base distribution");
    for (const auto& b : bases) {
      if (b.size() != advice.size()) {
        throw DimensionMismatch("base and advice distributions differ in length");
      }
    }
    if (meta.true_index && *meta.true_index >= advice.size()) {
      throw IndexError("true index out of range");
    }
  }

  std::size_t modalities() const noexcept { return bases.size(); }
  std::size_t intentions() const noexcept { return advice.size(); }

  /// Ground-truth intention: the recorded index, else the advice argmax.
  std::size_t true_index() const noexcept {
    return meta.true_index.value_or(argmax_tiebreak(advice));
  }

  friend bool operator==(const Experience&, const Experience&) = default;
};

/// A nonempty, homogeneous (same K and N) collection of experiences.
class Batch {
 public:
  explicit Batch(std::vector<Experience> experiences) : experiences_(std::move(experiences)) {
    if (experiences_.empty()) throw InvalidBatch("batch is empty");
    const auto k = experiences_.front().modalities();
    const auto n = experiences_.front().intentions();
    for (const auto& x : experiences_) {
      if (x.modalities() != k || x.intentions() != n) {
        throw InvalidBatch("batch mixes modality or intention counts");
      }
    }
  }

  std::size_t size() const noexcept { return experiences_.size(); }
  std::size_t modalities() const noexcept { return experiences_.front().modalities(); }
  std::size_t intentions() const noexcept { return experiences_.front().intentions(); }
  const Experience& operator[](std::size_t i) const noexcept { return experiences_[i]; }
  std::span<const Experience> experiences() const noexcept { return experiences_; }
  auto begin() const noexcept { return experiences_.begin(); }
  auto end() const noexcept { return experiences_.end(); }

  /// Records [first, last) as a new batch.
  Batch slice(std::size_t first, std::size_t last) const {
    if (first >= last || last > experiences_.size()) throw InvalidBatch("empty or invalid slice");
    return Batch(std::vector<Experience>(experiences_.begin() + static_cast<std::ptrdiff_t>(first),
                                         experiences_.begin() + static_cast<std::ptrdiff_t>(last)));
  }

  /// Same records restricted to the listed modalities, in the listed order.
  Batch select_modalities(std::span<const std::size_t> subset) const {
    if (subset.empty()) throw DimensionMismatch("modality subset is empty");
    std::vector<Experience> out;
    out.reserve(experiences_.size());
    for (const auto& x : experiences_) {
      std::vector<Categorical> bases;
      for (std::size_t m : subset) {
        if (m >= x.modalities()) throw IndexError("modality index out of range");
        bases.push_back(x.bases[m]);
      }
      out.emplace_back(std::move(bases), x.advice, x.meta);
    }
    return Batch(std::move(out));
  }

  friend bool operator==(const Batch&, const Batch&) = default;

 private:
  std::vector<Experience> experiences_;
};

namespace detail {

inline void check_weights(const Experience& x, const ConfidenceVector& w) {
  if (x.modalities() != w.size()) {
    throw DimensionMismatch("experience has " + std::to_string(x.modalities()) +
                            " modalities, confidence has " + std::to_string(w.size()));
  }
}

inline void check_dual(const DualVector& lam, const ConstraintSpec& spec) {
  if (lam.size() != spec.inequality_rows() + 1) {
    throw DimensionMismatch("dual vector must have s + 1 entries");
  }
}

// Adds this record's gradient contribution
//   E_fused[log P(a|m_i)] - E_advice[log P(a|m_i)]
// into `out` and returns its loss.
inline double accumulate_sample(const Experience& x, const ConfidenceVector& w,
                                std::vector<CompensatedSum>* grad) {
  check_weights(x, w);
  const auto log_fused = fuse_log(x.bases, w);
  CompensatedSum loss;
  for (std::size_t a = 0; a < x.intentions(); ++a) loss.add(-x.advice[a] * log_fused[a]);
  if (grad != nullptr) {
    for (std::size_t i = 0; i < x.modalities(); ++i) {
      CompensatedSum g;
      for (std::size_t a = 0; a < x.intentions(); ++a) {
        g.add((std::exp(log_fused[a]) - x.advice[a]) * std::log(x.bases[i][a]));
      }
      (*grad)[i].add(g.value());
    }
  }
  return loss.value();
}

}  // namespace detail

/// Cross entropy of the advice against the fused distribution.
inline double sample_loss(const Experience& x, const ConfidenceVector& w) {
  return detail::accumulate_sample(x, w, nullptr);
}

/// Mean sample loss over any range of experiences.
template <std::ranges::input_range R>
double mean_loss(R&& experiences, const ConfidenceVector& w) {
  detail::CompensatedSum acc;
  std::size_t count = 0;
  for (const Experience& x : experiences) {
    acc.add(sample_loss(x, w));
    ++count;
  }
  if (count == 0) throw InvalidBatch("batch is empty");
  return acc.value() / static_cast<double>(count);
}

/// Mean closed-form gradient of the sample loss in w over a range.
template <std::ranges::input_range R>
std::vector<double> mean_loss_gradient(R&& experiences, const ConfidenceVector& w) {
  std::vector<detail::CompensatedSum> acc(w.size());
  std::size_t count = 0;
  for (const Experience& x : experiences) {
    detail::accumulate_sample(x, w, &acc);
    ++count;
  }
  if (count == 0) throw InvalidBatch("batch is empty");
  std::vector<double> g(w.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = acc[i].value() / static_cast<double>(count);
  return g;
}

/// Expected cross entropy over the batch. The advice entropy is left out: it
/// does not depend on w.
inline double batch_loss(const Batch& b, const ConfidenceVector& w) {
  return mean_loss(b.experiences(), w);
}

inline std::vector<double> loss_gradient(const Batch& b, const ConfidenceVector& w) {
  return mean_loss_gradient(b.experiences(), w);
}

/// Mean D_KL(advice || fused). Diagnostic only; differs from batch_loss by the
/// mean advice entropy.
inline double batch_kl(const Batch& b, const ConfidenceVector& w) {
  detail::CompensatedSum acc;
  for (const auto& x : b) {
    detail::check_weights(x, w);
    acc.add(kl_divergence(x.advice, fuse(x.bases, w)));
  }
  return acc.value() / static_cast<double>(b.size());
}

inline double batch_advice_entropy(const Batch& b) {
  detail::CompensatedSum acc;
  for (const auto& x : b) acc.add(entropy(x.advice));
  return acc.value() / static_cast<double>(b.size());
}

/// L(w, lambda) = loss(w) + lambda^T G(w); the trailing slot multiplies zero.
inline double lagrangian(const Batch& b, const ConfidenceVector& w, const DualVector& lam,
                         const ConstraintSpec& spec) {
  detail::check_dual(lam, spec);
  const auto g = constraint_values(w, spec);
  detail::CompensatedSum acc;
  acc.add(batch_loss(b, w));
  for (std::size_t i = 0; i < g.size(); ++i) acc.add(lam[i] * g[i]);
  return acc.value();
}

/// Gradient of the Lagrangian in w. Since dg_i/dw_j = -delta_ij this is the
/// loss gradient minus the row multipliers.
inline std::vector<double> lagrangian_gradient(const Batch& b, const ConfidenceVector& w,
                                               const DualVector& lam, const ConstraintSpec& spec) {
  detail::check_dual(lam, spec);
  if (w.size() != spec.modalities) throw DimensionMismatch("confidence length does not match spec");
  auto g = loss_gradient(b, w);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] -= lam[i];
  return g;
}

/// Batch with per-record log-probabilities cached for repeated loss and
/// gradient evaluation. Record i, modality m, intention a lives at
/// log_bases[(i * K + m) * N + a].
class PreparedBatch {
 public:
  explicit PreparedBatch(const Batch& b)
      : records_(b.size()), modalities_(b.modalities()), intentions_(b.intentions()) {
    log_bases_.resize(records_ * modalities_ * intentions_);
    advice_mass_.resize(records_);
    advice_log_mean_.resize(records_ * modalities_);
    for (std::size_t r = 0; r < records_; ++r) {
      const auto& x = b[r];
      advice_mass_[r] = detail::compensated_sum(x.advice.probs());
      for (std::size_t m = 0; m < modalities_; ++m) {
        detail::CompensatedSum e;
        for (std::size_t a = 0; a < intentions_; ++a) {
          const double lp = std::log(x.bases[m][a]);
          log_bases_[(r * modalities_ + m) * intentions_ + a] = lp;
          e.add(x.advice[a] * lp);
        }
        advice_log_mean_[r * modalities_ + m] = e.value();
      }
    }
  }

  std::size_t size() const noexcept { return records_; }
  std::size_t modalities() const noexcept { return modalities_; }
  std::size_t intentions() const noexcept { return intentions_; }

  /// Loss of the listed records (all when `records` is empty); if `grad` is
  /// non-null it receives the mean gradient.
  double evaluate(std::span<const double> w, std::span<const std::size_t> records,
                  std::vector<double>* grad) const {
    if (w.size() != modalities_) throw DimensionMismatch("confidence length does not match batch");
    std::vector<double> scores(intentions_);
    std::vector<detail::CompensatedSum> gacc(grad != nullptr ? modalities_ : 0);
    detail::CompensatedSum lacc;
    const std::size_t count = records.empty() ? records_ : records.size();
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t r = records.empty() ? k : records[k];
      const double* lb = &log_bases_[r * modalities_ * intentions_];
      std::fill(scores.begin(), scores.end(), 0.0);
      for (std::size_t m = 0; m < modalities_; ++m) {
        if (w[m] == 0.0) continue;
        for (std::size_t a = 0; a < intentions_; ++a) scores[a] += w[m] * lb[m * intentions_ + a];
      }
      const double top = *std::max_element(scores.begin(), scores.end());
      double z = 0.0;
      for (double& s : scores) {
        s = std::exp(s - top);
        z += s;
      }
      const double log_z = top + std::log(z);
      double linear = 0.0;
      for (std::size_t m = 0; m < modalities_; ++m) linear += w[m] * advice_log_mean_[r * modalities_ + m];
      lacc.add(advice_mass_[r] * log_z - linear);
      if (grad != nullptr) {
        for (std::size_t m = 0; m < modalities_; ++m) {
          double e = 0.0;
          for (std::size_t a = 0; a < intentions_; ++a) e += scores[a] * lb[m * intentions_ + a];
          gacc[m].add(e / z - advice_log_mean_[r * modalities_ + m]);
        }
      }
    }
    const auto denom = static_cast<double>(count);
    if (grad != nullptr) {
      grad->resize(modalities_);
      for (std::size_t m = 0; m < modalities_; ++m) (*grad)[m] = gacc[m].value() / denom;
    }
    return lacc.value() / denom;
  }

  double loss(std::span<const double> w) const { return evaluate(w, {}, nullptr); }

  std::vector<double> gradient(std::span<const double> w) const {
    std::vector<double> g;
    evaluate(w, {}, &g);
    return g;
  }

 private:
  std::size_t records_;
  std::size_t modalities_;
  std::size_t intentions_;
  std::vector<double> log_bases_;
  std::vector<double> advice_mass_;
  std::vector<double> advice_log_mean_;
};

}  // namespace confpool
