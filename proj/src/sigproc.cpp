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

#include "nptray/sigproc.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "nptray/error.hpp"

namespace nptray {

bool BiquadCoeffs::is_stable() const {
  // Roots of z^2 + a1 z + a2.
  const std::complex<double> disc = std::sqrt(std::complex<double>(a1 * a1 - 4.0 * a2));
  const std::complex<double> r1 = (-a1 + disc) / 2.0;
  const std::complex<double> r2 = (-a1 - disc) / 2.0;
  return std::abs(r1) < 1.0 && std::abs(r2) < 1.0;
}

double BiquadCoeffs::dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }

BiquadCoeffs BiquadCoeffs::sim() { return {3.6e-3, 7.2e-3, 3.6e-3, -1.8228, 0.8372}; }

BiquadCoeffs BiquadCoeffs::f_mode() { return {2.01e-2, 4.02e-2, 2.01e-2, -1.561, 0.6414}; }

BiquadCoeffs BiquadCoeffs::fsc() { return {0.0976, 0.1953, 0.0976, -0.9428, 0.3333}; }

BiquadCoeffs BiquadCoeffs::preset(std::string_view name) {
  if (name == "sim") return sim();
  if (name == "F") return f_mode();
  if (name == "FSC") return fsc();
  if (name == "none") return passthrough();
  throw ConfigError("filter", "unknown filter preset '" + std::string(name) + "'");
}

Vec3 filter_step_zero_init(FilterState& s, const BiquadCoeffs& c, const Vec3& x) {
  s.primed = true;
  const Vec3 y = c.b0 * x + s.z1;
  s.z1 = c.b1 * x - c.a1 * y + s.z2;
  s.z2 = c.b2 * x - c.a2 * y;
  return y;
}

Vec3 filter_step(FilterState& s, const BiquadCoeffs& c, const Vec3& x) {
  if (!s.primed) {
    const Vec3 y = c.dc_gain() * x;
    s.z2 = c.b2 * x - c.a2 * y;
    s.z1 = c.b1 * x - c.a1 * y + s.z2;
    s.primed = true;
  }
  return filter_step_zero_init(s, c, x);
}

BackwardDifferentiator::BackwardDifferentiator(double dt) : dt_(dt) {
  if (!(dt > 0)) throw ValidationError("differentiator: dt must be positive");
}

void BackwardDifferentiator::reset() { primed_ = false; }

std::array<Vec3, BackwardDifferentiator::kOrders> BackwardDifferentiator::push(
    const Vec3& x) {
  if (!primed_) {
    hist_.fill(x);
    primed_ = true;
  } else {
    for (int i = kOrders - 1; i > 0; --i) hist_[i] = hist_[i - 1];
    hist_[0] = x;
  }
  // Cascaded differences: exactly zero on a constant history.
  std::array<Vec3, kOrders> diff = hist_;
  std::array<Vec3, kOrders> out;
  out[0] = hist_[0];
  double scale = 1.0;
  for (int k = 1; k < kOrders; ++k) {
    for (int i = 0; i < kOrders - k; ++i) diff[i] = diff[i] - diff[i + 1];
    scale /= dt_;
    out[k] = diff[0] * scale;
  }
  return out;
}

}  // namespace nptray
