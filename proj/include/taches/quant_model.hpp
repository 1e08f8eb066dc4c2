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

// Requantization accounting for fixed-point convolution.
//
// Two schemes are modelled for an N-bit word and an N_h-tap filter:
//
//   ideal  the accumulator is wide enough for the exact sum (2N + N_h - 1
//          bits) and each output sample is rounded back once, removing
//          N + N_h - 1 bits;
//   mac    every multiply-accumulate is followed by a rounding back to the
//          word's resolution: N_h - 1 roundings of N bits per output.
//
// The carry term N_h - 1 is the worst case for full-scale inputs; the
// tight headroom is ceil(log2(N_h)) bits.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "taches/conv_core.hpp"
#include "taches/signal.hpp"

namespace taches::quant {

enum class Rounding { kNearestEven };
enum class Overflow { kSaturate };
enum class Scheme { kIdeal, kMac };

inline const char* to_string(Scheme s) {
  return s == Scheme::kIdeal ? "ideal" : "mac";
}

/// Two's-complement fractional format: codes k / 2^(N-1) covering [-1, 1).
struct FixedPointFormat {
  int word_bits = 16;
  Rounding rounding = Rounding::kNearestEven;
  Overflow overflow = Overflow::kSaturate;

  void validate() const {
    // 32 bits keeps every product and partial sum inside a 128-bit integer.
    if (word_bits < 2 || word_bits > 32) {
      throw DomainError("word length must be in [2, 32] bits, got " +
                        std::to_string(word_bits));
    }
  }
  std::int64_t max_code() const { return (std::int64_t{1} << (word_bits - 1)) - 1; }
  std::int64_t min_code() const { return -(std::int64_t{1} << (word_bits - 1)); }
  /// Weight of one least significant bit.
  double ulp() const { return std::ldexp(1.0, -(word_bits - 1)); }
};

struct RequantReport {
  Scheme scheme = Scheme::kIdeal;
  std::int64_t operations_per_sample = 0;  // closed-form count
  std::int64_t bits_removed_per_op = 0;    // closed-form width
  std::int64_t total_operations = 0;       // roundings actually performed
  double rms_error = 0.0;
  double max_error = 0.0;
  double ulp = 0.0;
  Signal output;  // dequantized fixed-point result
};

namespace detail {

inline void require_formula_args(std::int64_t word_bits, std::int64_t taps) {
  if (word_bits < 2) {
    throw DomainError("word length must be at least 2 bits, got " +
                      std::to_string(word_bits));
  }
  if (taps < 1) {
    throw DomainError("impulse response length must be positive, got " +
                      std::to_string(taps));
  }
}

using Wide = __int128;

// v / 2^shift rounded to nearest, ties to even.
inline Wide round_shift(Wide v, int shift) {
  if (shift == 0) return v;
  const Wide one = 1;
  Wide q = v >> shift;  // floor
  const Wide rem = v - (q << shift);
  const Wide half = one << (shift - 1);
  if (rem > half || (rem == half && (q & 1) != 0)) ++q;
  return q;
}

}  // namespace detail

/// Accumulator width for an exact output sample: 2N + N_h - 1.
inline std::int64_t ideal_accumulator_bits(std::int64_t word_bits,
                                           std::int64_t taps) {
  detail::require_formula_args(word_bits, taps);
  return 2 * word_bits + taps - 1;
}

/// Bits dropped by the single final rounding: N + N_h - 1.
inline std::int64_t ideal_bits_removed(std::int64_t word_bits,
                                       std::int64_t taps) {
  detail::require_formula_args(word_bits, taps);
  return word_bits + taps - 1;
}

struct MacRequantCount {
  std::int64_t count;
  std::int64_t bits_each;
  friend bool operator==(const MacRequantCount&, const MacRequantCount&) = default;
};

/// Roundings per output sample under the per-MAC scheme: (N_h - 1, N).
inline MacRequantCount mac_requant_count(std::int64_t word_bits,
                                         std::int64_t taps) {
  detail::require_formula_args(word_bits, taps);
  return {taps - 1, word_bits};
}

/// Maps v in [-1, 1) to its nearest code, saturating at the top code.
inline std::int64_t quantize(double v, const FixedPointFormat& fmt) {
  if (!(v >= -1.0 && v < 1.0)) {
    throw DomainError("sample " + std::to_string(v) +
                      " outside the fixed-point range [-1, 1)");
  }
  const double scaled = std::nearbyint(std::ldexp(v, fmt.word_bits - 1));
  return std::clamp(static_cast<std::int64_t>(scaled), fmt.min_code(),
                    fmt.max_code());
}

inline double dequantize(std::int64_t code, const FixedPointFormat& fmt) {
  return std::ldexp(static_cast<double>(code), -(fmt.word_bits - 1));
}

/// Quantizes e and h to `fmt`, convolves them in fixed point under `scheme`
/// and compares against an extended-precision convolution of the same
/// quantized inputs.
///
/// Output samples keep the input resolution (2^-(N-1)) and are not
/// saturated; only the inputs are confined to [-1, 1).
inline RequantReport simulate_fixed_point_conv(const Signal& e, const Signal& h,
                                               const FixedPointFormat& fmt,
                                               Scheme scheme) {
  fmt.validate();
  taches::detail::require_convolvable(e, h);

  std::vector<std::int64_t> ec(e.size()), hc(h.size());
  std::vector<double> eq(e.size()), hq(h.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    ec[i] = quantize(e[i], fmt);
    eq[i] = dequantize(ec[i], fmt);
  }
  for (std::size_t i = 0; i < h.size(); ++i) {
    hc[i] = quantize(h[i], fmt);
    hq[i] = dequantize(hc[i], fmt);
  }
  const Signal reference =
      direct_form(Signal(eq, e.sample_rate()), Signal(hq, e.sample_rate()));

  const int frac = fmt.word_bits - 1;
  const std::size_t ne = e.size();
  const std::size_t nh = h.size();
  std::vector<double> out(ne + nh - 1);

  RequantReport report;
  report.scheme = scheme;
  report.ulp = fmt.ulp();
  const auto n_bits = static_cast<std::int64_t>(fmt.word_bits);
  const auto n_taps = static_cast<std::int64_t>(nh);
  if (scheme == Scheme::kIdeal) {
    report.operations_per_sample = 1;
    report.bits_removed_per_op = ideal_bits_removed(n_bits, n_taps);
  } else {
    const MacRequantCount mac = mac_requant_count(n_bits, n_taps);
    report.operations_per_sample = mac.count;
    report.bits_removed_per_op = mac.bits_each;
  }

  double sum_sq = 0.0;
  for (std::size_t n = 0; n < out.size(); ++n) {
    // Terms are visited in increasing input index, the order in which the
    // scatter form deposits them.
    const std::size_t m_lo = n >= nh - 1 ? n - (nh - 1) : 0;
    const std::size_t m_hi = std::min(n, ne - 1);
    detail::Wide acc = 0;
    detail::Wide code = 0;
    if (scheme == Scheme::kIdeal) {
      for (std::size_t m = m_lo; m <= m_hi; ++m) {
        acc += static_cast<detail::Wide>(ec[m]) * hc[n - m];
      }
      code = detail::round_shift(acc, frac);
      ++report.total_operations;
    } else {
      acc = static_cast<detail::Wide>(ec[m_lo]) * hc[n - m_lo];
      if (m_lo == m_hi) {
        code = detail::round_shift(acc, frac);
      } else {
        for (std::size_t m = m_lo + 1; m <= m_hi; ++m) {
          acc += static_cast<detail::Wide>(ec[m]) * hc[n - m];
          code = detail::round_shift(acc, frac);
          acc = code * (detail::Wide{1} << frac);
          ++report.total_operations;
        }
      }
    }
    out[n] = std::ldexp(static_cast<double>(code), -frac);
    const double err = std::abs(out[n] - reference[n]);
    sum_sq += err * err;
    report.max_error = std::max(report.max_error, err);
  }
  report.rms_error = std::sqrt(sum_sq / static_cast<double>(out.size()));
  report.output = Signal(std::move(out), e.sample_rate());
  return report;
}

}  // namespace taches::quant
