// Copyright 2026 The Taches Authors.
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

// Whole-signal linear convolution.
//
// Two forms compute the same sum s[n] = sum_m e[m] h[n - m]:
//
//   gather  (direct_form)       each output sums the past inputs it depends on;
//   scatter (scatter_convolve)  each input adds a scaled, delayed copy of h
//                               (a "tache") into the pending outputs.
//
// The scatter form finalizes s[n] as soon as e[n] has been read, which is
// what makes the streaming engine zero-latency. The gather form is kept as
// the reference every other path is checked against.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <type_traits>
#include <vector>

#include "taches/signal.hpp"

namespace taches {

/// Counters filled in by the scatter routines.
struct ScatterStats {
  std::size_t iterations = 0;        // samples of the driving signal visited
  std::size_t taches_scattered = 0;  // of those, how many were added in
};

namespace detail {

template <typename T>
void require_convolvable(const BasicSignal<T>& e, const BasicSignal<T>& h) {
  if (e.empty()) throw DomainError("input signal is empty");
  if (h.empty()) throw DomainError("impulse response is empty");
  if (e.sample_rate() != h.sample_rate()) {
    throw DomainError("sample rate mismatch: input " +
                      std::to_string(e.sample_rate()) + " Hz, impulse response " +
                      std::to_string(h.sample_rate()) + " Hz");
  }
}

/// dst[i] += x * h[i] for every i. Taps are visited in increasing order.
template <typename T>
inline void add_tache(std::span<T> dst, T x, std::span<const T> h) noexcept {
  T* __restrict d = dst.data();
  const T* __restrict src = h.data();
  const std::size_t n = h.size();
  for (std::size_t i = 0; i < n; ++i) d[i] += x * src[i];
}

// Scatters every sample of `drive` (|x| > threshold) across `out`, which must
// hold drive.size() + taps.size() - 1 zero-initialized samples. A negative
// threshold disables skipping altogether.
template <typename T>
void scatter_all(std::span<T> out, std::span<const T> drive,
                 std::span<const T> taps, T threshold, ScatterStats* stats) {
  for (std::size_t n = 0; n < drive.size(); ++n) {
    const T x = drive[n];
    if (stats) ++stats->iterations;
    if (threshold >= T(0) && std::abs(x) <= threshold) continue;
    add_tache(out.subspan(n, taps.size()), x, taps);
    if (stats) ++stats->taches_scattered;
  }
}

template <typename T>
BasicConvOutput<T> split_output(std::vector<T> full, std::size_t body_len,
                                unsigned rate) {
  std::vector<T> tail(full.begin() + static_cast<std::ptrdiff_t>(body_len),
                      full.end());
  full.resize(body_len);
  return {BasicSignal<T>(std::move(full), rate),
          BasicSignal<T>(std::move(tail), rate)};
}

}  // namespace detail

/// Gather-form linear convolution, length N_e + N_h - 1. Products are
/// summed in increasing input index into an `Acc` accumulator (extended
/// precision by default) and rounded to T once per output sample.
template <typename Acc = long double, typename T>
BasicSignal<T> direct_form(const BasicSignal<T>& e, const BasicSignal<T>& h) {
  detail::require_convolvable(e, h);
  const std::size_t ne = e.size();
  const std::size_t nh = h.size();
  std::vector<T> s(ne + nh - 1);
  for (std::size_t n = 0; n < s.size(); ++n) {
    const std::size_t m_lo = n >= nh - 1 ? n - (nh - 1) : 0;
    const std::size_t m_hi = std::min(n, ne - 1);
    Acc acc = Acc(0);
    for (std::size_t m = m_lo; m <= m_hi; ++m) {
      acc += static_cast<Acc>(e[m]) * static_cast<Acc>(h[n - m]);
    }
    s[n] = static_cast<T>(acc);
  }
  return BasicSignal<T>(std::move(s), e.sample_rate());
}

/// Scatter-form convolution. body[n] is final once e[0..n] have been read;
/// the tail is the residue remaining after the last input sample.
template <typename T>
BasicConvOutput<T> scatter_convolve(const BasicSignal<T>& e,
                                    const BasicSignal<T>& h,
                                    ScatterStats* stats = nullptr) {
  detail::require_convolvable(e, h);
  std::vector<T> full(e.size() + h.size() - 1, T(0));
  detail::scatter_all<T>(full, e.samples(), h.samples(), T(-1), stats);
  return detail::split_output(std::move(full), e.size(), e.sample_rate());
}

/// Off-line variant: whichever of e and h is shorter drives the scatter
/// loop, so fewer but longer taches are added. The body/tail split still
/// follows the original N_e and N_h. Ties keep e as the driver.
template <typename T>
BasicConvOutput<T> commuted_convolve(const BasicSignal<T>& e,
                                     const BasicSignal<T>& h,
                                     ScatterStats* stats = nullptr) {
  detail::require_convolvable(e, h);
  std::vector<T> full(e.size() + h.size() - 1, T(0));
  if (h.size() < e.size()) {
    detail::scatter_all<T>(full, h.samples(), e.samples(), T(-1), stats);
  } else {
    detail::scatter_all<T>(full, e.samples(), h.samples(), T(-1), stats);
  }
  return detail::split_output(std::move(full), e.size(), e.sample_rate());
}

/// Scatter-form convolution that adds no tache for input samples with
/// |x| <= threshold. threshold == 0 only skips exact zeros and is therefore
/// identical to scatter_convolve.
template <typename T>
BasicConvOutput<T> scatter_convolve_skip_zeros(const BasicSignal<T>& e,
                                               const BasicSignal<T>& h,
                                               std::type_identity_t<T> threshold = T(0),
                                               ScatterStats* stats = nullptr) {
  if (!(threshold >= T(0))) {
    throw DomainError("zero-skip threshold must be non-negative");
  }
  detail::require_convolvable(e, h);
  std::vector<T> full(e.size() + h.size() - 1, T(0));
  detail::scatter_all<T>(full, e.samples(), h.samples(), threshold, stats);
  return detail::split_output(std::move(full), e.size(), e.sample_rate());
}

}  // namespace taches
