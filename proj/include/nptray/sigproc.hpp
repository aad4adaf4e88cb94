// Copyright 2026 The nptray Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <array>
#include <string_view>

#include "nptray/geom.hpp"

namespace nptray {

/// H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2).
struct BiquadCoeffs {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  /// Both poles strictly inside the unit circle.
  bool is_stable() const;
  double dc_gain() const;

  static BiquadCoeffs passthrough() { return {}; }
  /// Batch-simulation operator filter.
  static BiquadCoeffs sim();
  /// Hardware F-mode filter.
  static BiquadCoeffs f_mode();
  /// Hardware FSC-mode filter.
  static BiquadCoeffs fsc();
  /// "sim", "F", "FSC" or "none"; throws ConfigError otherwise.
  static BiquadCoeffs preset(std::string_view name);
};

/// Per-axis transposed direct-form II memory.
struct FilterState {
  Vec3 z1 = Vec3::Zero();
  Vec3 z2 = Vec3::Zero();
  bool primed = false;
};

/// One sample through the filter. An unprimed state is first loaded with the
/// steady state of a constant input, so the first output is dc_gain * input.
Vec3 filter_step(FilterState& state, const BiquadCoeffs& c, const Vec3& input);

/// Raw recurrence without step-matched start, zero initial memory.
Vec3 filter_step_zero_init(FilterState& state, const BiquadCoeffs& c,
                           const Vec3& input);

/// Causal backward differences of a uniformly sampled signal up to fourth
/// order. The history is prefilled with the first sample, so every
/// derivative starts at zero.
class BackwardDifferentiator {
 public:
  static constexpr int kOrders = 5;

  explicit BackwardDifferentiator(double dt);

  /// Pushes a sample and returns (x, x', x'', x''', x'''').
  std::array<Vec3, kOrders> push(const Vec3& x);

  void reset();
  double dt() const { return dt_; }

 private:
  double dt_;
  std::array<Vec3, kOrders> hist_{};  // hist_[0] newest
  bool primed_ = false;
};

/// Filtered operator reference and its first two derivatives.
struct ReferenceState {
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();
};

}  // namespace nptray
