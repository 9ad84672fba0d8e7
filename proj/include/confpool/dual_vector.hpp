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
#include <span>
#include <utility>
#include <vector>

#include "confpool/detail/summation.hpp"
#include "confpool/errors.hpp"

namespace confpool {

/// Multipliers of the inequality rows, augmented with one trailing slot that
/// multiplies a constant zero row. Entries are nonnegative and carry a fixed
/// l1 mass (the bound B); the trailing slot is where mass parks while every
/// constraint holds.
class DualVector {
 public:
  /// Takes the multipliers as given; the bound is their l1 mass.
  explicit DualVector(std::vector<double> lambdas) : lambdas_(std::move(lambdas)) {
    if (lambdas_.empty()) throw InvalidConfig("dual vector needs at least one entry");
    for (double l : lambdas_) {
      if (!std::isfinite(l) || l < 0.0) throw InvalidConfig("multipliers must be finite and >= 0");
    }
    bound_ = detail::compensated_sum(lambdas_);
  }

  /// B / (s + 1) in every slot.
  static DualVector uniform(std::size_t inequality_rows, double bound) {
    if (!(bound > 0.0) || !std::isfinite(bound)) throw InvalidConfig("dual bound must be > 0");
    const std::size_t slots = inequality_rows + 1;
    return DualVector(std::vector<double>(slots, bound / static_cast<double>(slots)));
  }

  static DualVector zeros(std::size_t inequality_rows) {
    return DualVector(std::vector<double>(inequality_rows + 1, 0.0));
  }

  std::size_t size() const noexcept { return lambdas_.size(); }
  /// s, the number of rows that multiply constraints.
  std::size_t inequality_rows() const noexcept { return lambdas_.size() - 1; }
  double operator[](std::size_t i) const noexcept { return lambdas_[i]; }
  std::span<const double> lambdas() const noexcept { return lambdas_; }
  /// The multipliers that act on constraint rows (the slot is excluded).
  std::span<const double> row_multipliers() const noexcept {
    return std::span<const double>(lambdas_).first(lambdas_.size() - 1);
  }
  double bound() const noexcept { return bound_; }
  double mass() const noexcept { return detail::compensated_sum(lambdas_); }

  friend bool operator==(const DualVector& a, const DualVector& b) {
    return a.lambdas_ == b.lambdas_;
  }

 private:
  std::vector<double> lambdas_;
  double bound_ = 0.0;
};

}  // namespace confpool
