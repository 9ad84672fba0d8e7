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

#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "confpool/categorical.hpp"
#include "confpool/detail/summation.hpp"
#include "confpool/errors.hpp"
#include "confpool/io.hpp"
#include "confpool/learner.hpp"
#include "confpool/loss.hpp"
#include "confpool/opinion_pool.hpp"

namespace confpool {

/// Mean and population standard deviation.
struct Summary {
  double mean = 0.0;
  double std = 0.0;
};

inline Summary summarize(std::span<const double> xs) {
  if (xs.empty()) return {};
  const auto n = static_cast<double>(xs.size());
  const double mean = detail::compensated_sum(xs) / n;
  detail::CompensatedSum sq;
  for (double x : xs) sq.add((x - mean) * (x - mean));
  return {mean, std::sqrt(sq.value() / n)};
}

/// Quality of one fused configuration over a dataset.
///
/// accuracy: mean probability on the true intention (not a hit rate).
/// score_difference: true-intention probability minus the best other one.
/// success_rate: percentage of records whose argmax (lowest index on ties)
/// is the true intention.
struct MetricsRow {
  std::vector<std::size_t> subset;
  std::string subset_label;
  std::string method;
  Summary accuracy;
  Summary entropy;
  Summary score_difference;
  double success_rate = 0.0;
  std::optional<ConfidenceVector> confidence;
  std::size_t records = 0;
};

struct MetricsReport {
  std::vector<MetricsRow> rows;

  const MetricsRow* find(std::string_view subset_label, std::string_view method) const {
    for (const auto& r : rows) {
      if (r.subset_label == subset_label && r.method == method) return &r;
    }
    return nullptr;
  }
};

/// Default modality names: speech/gesture/gaze for three modalities, else m1..mK.
inline std::vector<std::string> default_modality_names(std::size_t k) {
  if (k == 3) return {"speech", "gesture", "gaze"};
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= k; ++i) names.push_back("m" + std::to_string(i));
  return names;
}

inline std::string subset_label(std::span<const std::size_t> subset,
                                std::span<const std::string> names) {
  std::string label;
  for (std::size_t m : subset) {
    if (!label.empty()) label += '+';
    label += m < names.size() ? names[m] : "m" + std::to_string(m + 1);
  }
  return label;
}

/// Fuses the chosen modalities of every record with `w` and aggregates the
/// metrics.
inline MetricsRow evaluate(const Batch& data, std::span<const std::size_t> subset,
                           const ConfidenceVector& w, std::string method = "custom",
                           std::span<const std::string> names = {}) {
  if (subset.empty()) throw DimensionMismatch("modality subset is empty");
  if (w.size() != subset.size()) {
    throw DimensionMismatch("confidence has " + std::to_string(w.size()) + " entries for " +
                            std::to_string(subset.size()) + " modalities");
  }
  for (std::size_t m : subset) {
    if (m >= data.modalities()) throw DimensionMismatch("modality index out of range");
  }
  std::vector<double> acc, ent, sd;
  acc.reserve(data.size());
  ent.reserve(data.size());
  sd.reserve(data.size());
  std::size_t hits = 0;
  std::vector<Categorical> chosen;
  for (const auto& x : data) {
    chosen.clear();
    for (std::size_t m : subset) chosen.push_back(x.bases[m]);
    const auto fused = fuse(chosen, w);
    const std::size_t truth = x.true_index();
    acc.push_back(fused[truth]);
    ent.push_back(entropy(fused));
    sd.push_back(score_difference(fused, truth));
    if (argmax_tiebreak(fused) == truth) ++hits;
  }
  const auto label_names =
      names.empty() ? default_modality_names(data.modalities()) : std::vector<std::string>(names.begin(), names.end());
  MetricsRow row;
  row.subset.assign(subset.begin(), subset.end());
  row.subset_label = subset_label(subset, label_names);
  row.method = std::move(method);
  row.accuracy = summarize(acc);
  row.entropy = summarize(ent);
  row.score_difference = summarize(sd);
  row.success_rate = 100.0 * static_cast<double>(hits) / static_cast<double>(data.size());
  row.records = data.size();
  return row;
}

/// Evaluates with the untrained weights of a pool family: all ones for IOP and
/// EIOP, 1/K for LogOP.
inline MetricsRow evaluate(const Batch& data, std::span<const std::size_t> subset, PoolKind kind,
                           std::span<const std::string> names = {}) {
  const std::size_t k = subset.size();
  const auto w = kind == PoolKind::LogOP ? ConfidenceVector::filled(k, 1.0 / static_cast<double>(k))
                                         : iop_weights(k);
  return evaluate(data, subset, w, std::string(to_string(kind)), names);
}

/// Learning configuration for `kind` on k modalities that keeps the shared
/// hyperparameters of `base`. The gradient step is taken from `base` only when
/// it was configured for the same family.
inline LearnConfig config_for(PoolKind kind, std::size_t k, const LearnConfig& base) {
  LearnConfig cfg = LearnConfig::defaults(kind, k, base.spec.lower_bound);
  cfg.spec.bound_in_projection = base.spec.bound_in_projection;
  cfg.eps_gap = base.eps_gap;
  cfg.batch_required = base.batch_required;
  cfg.eg_rate = base.eg_rate;
  cfg.b_bound = base.b_bound;
  cfg.max_rounds = base.max_rounds;
  cfg.inner_max_iters = base.inner_max_iters;
  cfg.inner_tol = base.inner_tol;
  cfg.seed = base.seed;
  cfg.eg_sign = base.eg_sign;
  cfg.minibatch_size = base.minibatch_size;
  cfg.gap_mode = base.gap_mode;
  if (base.spec.kind == kind) cfg.sgd_rate = base.sgd_rate;
  return cfg;
}

/// All nonempty subsets of {0..k-1}, ordered by size then lexicographically.
inline std::vector<std::vector<std::size_t>> modality_subsets(std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t size = 1; size <= k; ++size) {
    std::vector<std::size_t> pick(size);
    for (std::size_t i = 0; i < size; ++i) pick[i] = i;
    while (true) {
      out.push_back(pick);
      std::size_t i = size;
      while (i > 0 && pick[i - 1] == k - size + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < size; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return out;
}

/// Modality-subset ablation. The first `cfg.batch_required` records train the
/// learned pools; every row is evaluated on the remaining records. Each subset
/// gets an IOP row; subsets of two or more modalities also get one row per
/// learned family listed in `methods`.
inline MetricsReport ablation(const Batch& data, std::span<const PoolKind> methods,
                              const LearnConfig& cfg, std::span<const std::string> names = {}) {
  const std::size_t train = cfg.batch_required;
  if (data.size() <= train) {
    throw InsufficientData("ablation needs more than " + std::to_string(train) +
                           " records (training split plus evaluation records), got " +
                           std::to_string(data.size()));
  }
  const Batch training = data.slice(0, train);
  const Batch held_out = data.slice(train, data.size());

  MetricsReport report;
  for (const auto& subset : modality_subsets(data.modalities())) {
    report.rows.push_back(evaluate(held_out, subset, PoolKind::IOP, names));
    if (subset.size() < 2) continue;
    for (PoolKind kind : methods) {
      if (kind == PoolKind::IOP) continue;
      const auto sub_cfg = config_for(kind, subset.size(), cfg);
      const auto result = learn(training.select_modalities(subset), sub_cfg);
      auto row = evaluate(held_out, subset, result.w_hat, std::string(to_string(kind)), names);
      row.confidence = result.w_hat;
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

inline constexpr std::string_view kReportHeader =
    "subset,method,accuracy_mean,accuracy_std,entropy_mean,entropy_std,scorediff_mean,"
    "scorediff_std,success_rate,confidence";

/// CSV report; the confidence column holds space-separated weights.
inline void write_report_csv(std::ostream& out, const MetricsReport& report) {
  using io::format_double;
  out << kReportHeader << '\n';
  for (const auto& r : report.rows) {
    out << r.subset_label << ',' << r.method << ',' << format_double(r.accuracy.mean) << ','
        << format_double(r.accuracy.std) << ',' << format_double(r.entropy.mean) << ','
        << format_double(r.entropy.std) << ',' << format_double(r.score_difference.mean) << ','
        << format_double(r.score_difference.std) << ',' << format_double(r.success_rate) << ',';
    if (r.confidence) {
      bool first = true;
      for (double w : *r.confidence) {
        if (!first) out << ' ';
        out << format_double(w);
        first = false;
      }
    }
    out << '\n';
  }
}

}  // namespace confpool
