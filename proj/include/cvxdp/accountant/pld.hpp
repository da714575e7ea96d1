// Copyright 2026 The cvxdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>
#include <vector>

#include "cvxdp/core/error.hpp"

namespace cvxdp::accountant {

// Privacy loss distribution of a dominating pair on the uniform grid
// loss_i = (origin_index + i) * loss_step, plus an atom at +infinity.
struct DiscretePLD {
  std::int64_t origin_index = 0;
  double loss_step = 1e-3;
  std::vector<double> masses;
  double infinity_mass = 0.0;

  // Diagnostics accumulated by composition. Both only ever make the
  // distribution more pessimistic or are below the FFT noise floor.
  double clamped_negative_mass = 0.0;
  double trimmed_mass = 0.0;
  int renormalizations = 0;

  double origin() const { return static_cast<double>(origin_index) * loss_step; }
  double Loss(std::size_t i) const {
    return static_cast<double>(origin_index + static_cast<std::int64_t>(i)) *
           loss_step;
  }
  double FiniteMass() const {
    return std::accumulate(masses.begin(), masses.end(), 0.0);
  }
  double TotalMass() const { return FiniteMass() + infinity_mass; }

  void Validate() const {
    Require(loss_step > 0.0 && std::isfinite(loss_step), ErrorKind::kDomain,
            "PLD loss step must be positive");
    Require(infinity_mass >= 0.0 && infinity_mass <= 1.0, ErrorKind::kDomain,
            "PLD infinity mass outside [0, 1]");
    for (double m : masses) {
      Require(m >= 0.0 && std::isfinite(m), ErrorKind::kDomain,
              "PLD masses must be finite and non-negative");
    }
    const double total = TotalMass();
    Require(std::abs(total - 1.0) <= 1e-12, ErrorKind::kDomain,
            "PLD total mass " + std::to_string(total) + " differs from 1");
  }
};

// delta(eps) = m_inf + sum_{loss_i > eps} (1 - e^{eps - loss_i}) p_i.
inline double PldDelta(const DiscretePLD& pld, double eps) {
  double delta = 0.0;
  for (std::size_t i = pld.masses.size(); i-- > 0;) {
    const double loss = pld.Loss(i);
    if (loss <= eps) break;
    delta += -std::expm1(eps - loss) * pld.masses[i];
  }
  return std::min(1.0, delta + pld.infinity_mass);
}

struct ComposeOptions {
  // Largest linear-convolution support allowed for a single FFT product.
  std::size_t max_length = std::size_t{1} << 24;
  // Tail mass below this on either side is folded pessimistically after each
  // product (upper tail to +infinity, lower tail onto the lowest kept point).
  double trim_tolerance = 1e-15;
  // FFT outputs more negative than this indicate a broken convolution.
  double negative_tolerance = 1e-12;
};

namespace internal {

// FFTW planning is not thread-safe; execution on separate plans is.
inline std::mutex& FftwPlannerMutex() {
  static std::mutex mu;
  return mu;
}

inline std::size_t NextPowerOfTwo(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

// Linear convolution of two non-negative sequences by zero-padded real FFTs.
inline std::vector<double> FftConvolve(const std::vector<double>& a,
                                       const std::vector<double>& b) {
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = NextPowerOfTwo(out_len);
  const std::size_t nc = n / 2 + 1;

  std::unique_ptr<double, FftwFree> ra(fftw_alloc_real(n));
  std::unique_ptr<double, FftwFree> rb(fftw_alloc_real(n));
  std::unique_ptr<fftw_complex, FftwFree> ca(fftw_alloc_complex(nc));
  std::unique_ptr<fftw_complex, FftwFree> cb(fftw_alloc_complex(nc));
  Require(ra && rb && ca && cb, ErrorKind::kResource,
          "FFT buffer allocation failed for length " + std::to_string(n));

  fftw_plan fa, fb, inv;
  {
    std::lock_guard<std::mutex> lock(FftwPlannerMutex());
    // FFTW_ESTIMATE keeps the algorithm choice, and therefore the bits,
    // independent of timing.
    fa = fftw_plan_dft_r2c_1d(static_cast<int>(n), ra.get(), ca.get(),
                              FFTW_ESTIMATE);
    fb = fftw_plan_dft_r2c_1d(static_cast<int>(n), rb.get(), cb.get(),
                              FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(static_cast<int>(n), ca.get(), ra.get(),
                               FFTW_ESTIMATE);
  }
  std::fill(ra.get(), ra.get() + n, 0.0);
  std::fill(rb.get(), rb.get() + n, 0.0);
  std::copy(a.begin(), a.end(), ra.get());
  std::copy(b.begin(), b.end(), rb.get());
  fftw_execute(fa);
  fftw_execute(fb);
  for (std::size_t k = 0; k < nc; ++k) {
    const double re = ca.get()[k][0] * cb.get()[k][0] - ca.get()[k][1] * cb.get()[k][1];
    const double im = ca.get()[k][0] * cb.get()[k][1] + ca.get()[k][1] * cb.get()[k][0];
    ca.get()[k][0] = re;
    ca.get()[k][1] = im;
  }
  fftw_execute(inv);
  std::vector<double> out(ra.get(), ra.get() + out_len);
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= scale;
  {
    std::lock_guard<std::mutex> lock(FftwPlannerMutex());
    fftw_destroy_plan(fa);
    fftw_destroy_plan(fb);
    fftw_destroy_plan(inv);
  }
  return out;
}

// Folds negligible tails: the upper tail into the infinity atom and the lower
// tail onto the lowest retained grid point. Both moves can only increase
// delta(eps) for every eps.
inline void TrimTails(DiscretePLD& pld, double tolerance) {
  auto& m = pld.masses;
  if (m.size() <= 1) return;
  std::size_t hi = m.size();
  double upper = 0.0;
  while (hi > 1 && upper + m[hi - 1] <= tolerance) {
    upper += m[hi - 1];
    --hi;
  }
  std::size_t lo = 0;
  double lower = 0.0;
  while (lo + 1 < hi && lower + m[lo] <= tolerance) {
    lower += m[lo];
    ++lo;
  }
  if (hi == m.size() && lo == 0) return;
  pld.infinity_mass += upper;
  pld.trimmed_mass += upper + lower;
  m[lo] += lower;
  m.erase(m.begin() + static_cast<std::ptrdiff_t>(hi), m.end());
  m.erase(m.begin(), m.begin() + static_cast<std::ptrdiff_t>(lo));
  pld.origin_index += static_cast<std::int64_t>(lo);
}

}  // namespace internal

// Distribution of the sum of two independent privacy losses (composition of
// the two dominating pairs).
inline DiscretePLD ConvolvePld(const DiscretePLD& a, const DiscretePLD& b,
                               const ComposeOptions& options = {}) {
  Require(a.loss_step == b.loss_step, ErrorKind::kDomain,
          "PLD composition requires a shared loss grid step");
  Require(!a.masses.empty() && !b.masses.empty(), ErrorKind::kDomain,
          "PLD composition of an empty distribution");
  const std::size_t out_len = a.masses.size() + b.masses.size() - 1;
  if (out_len > options.max_length) {
    Fail(ErrorKind::kResource,
         "composed PLD needs " + std::to_string(out_len) +
             " grid points, above the limit of " +
             std::to_string(options.max_length) +
             "; use a coarser loss grid step");
  }

  DiscretePLD out;
  out.loss_step = a.loss_step;
  out.origin_index = a.origin_index + b.origin_index;
  out.infinity_mass = 1.0 - (1.0 - a.infinity_mass) * (1.0 - b.infinity_mass);
  out.clamped_negative_mass = a.clamped_negative_mass + b.clamped_negative_mass;
  out.trimmed_mass = a.trimmed_mass + b.trimmed_mass;
  out.renormalizations = a.renormalizations + b.renormalizations;
  out.masses = internal::FftConvolve(a.masses, b.masses);

  double clamped = 0.0;
  for (double& v : out.masses) {
    if (v < 0.0) {
      if (v < -options.negative_tolerance) {
        Fail(ErrorKind::kNumeric,
             "FFT convolution produced mass " + std::to_string(v) +
                 " below the negative tolerance");
      }
      clamped -= v;
      v = 0.0;
    }
  }
  const double target = a.FiniteMass() * b.FiniteMass();
  const double sum = out.FiniteMass();
  if (clamped > 0.0 || std::abs(sum - target) > 1e-13) {
    if (sum > 0.0) {
      const double scale = target / sum;
      for (double& v : out.masses) v *= scale;
    }
    out.clamped_negative_mass += clamped;
    ++out.renormalizations;
  }
  internal::TrimTails(out, options.trim_tolerance);
  return out;
}

// T-fold self-composition by binary exponentiation over FFT products.
inline DiscretePLD ComposePld(const DiscretePLD& pld, std::int64_t times,
                              const ComposeOptions& options = {}) {
  Require(times >= 1, ErrorKind::kDomain,
          "composition count must be a positive integer");
  if (times == 1) return pld;
  DiscretePLD base = pld;
  std::unique_ptr<DiscretePLD> acc;
  std::int64_t remaining = times;
  while (true) {
    if (remaining & 1) {
      acc = acc ? std::make_unique<DiscretePLD>(ConvolvePld(*acc, base, options))
                : std::make_unique<DiscretePLD>(base);
    }
    remaining >>= 1;
    if (remaining == 0) break;
    base = ConvolvePld(base, base, options);
  }
  return *acc;
}

}  // namespace cvxdp::accountant
