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

// Streaming scatter-form convolver.
//
// The engine keeps the residue of every tache scattered so far in a
// circular ring. For each input sample x it
//
//   1. adds x * h[i] into ring[(read_index + i) mod L] for i = 0..N_h-1,
//   2. emits ring[read_index] (which already contains x * h[0]),
//   3. zeroes that slot and advances read_index.
//
// Output sample n therefore never depends on input sample n + 1, and the
// impulse response may be replaced between any two samples.
//
// Ring length L equals N_h except transiently after swapping to a shorter
// impulse response: residue scheduled further out than the new N_h keeps
// its emission time, and the ring only shrinks once that residue is gone.
//
// process_block works on kTileInputs samples at a time in a linear scratch
// copy of the ring, walking the taps in cache-sized chunks from the last
// chunk down to the first. For any output slot the products still arrive in
// increasing input order, so the result is bit-identical to feeding the
// samples one by one.
//
// An engine is not thread-safe; run one instance per channel.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "taches/conv_core.hpp"
#include "taches/signal.hpp"

namespace taches {

enum class TailPolicy {
  kEmitOnFlush,  // run() returns the body only; call flush() for the tail
  kAutoAppend,   // run() appends the flushed tail to its output
};

inline constexpr std::size_t kDefaultBlockSize = 8192;

struct EngineConfig {
  std::size_t block_size = kDefaultBlockSize;
  double zero_skip_threshold = 0.0;
  TailPolicy tail_policy = TailPolicy::kEmitOnFlush;

  void validate() const {
    if (block_size < 1) throw DomainError("block size must be at least 1");
    if (!(zero_skip_threshold >= 0.0)) {
      throw DomainError("zero-skip threshold must be non-negative");
    }
  }
};

template <typename T>
class BasicStreamEngine {
 public:
  static constexpr std::size_t kTileInputs = 128;
  static constexpr std::size_t kTileTaps = 1024;

  BasicStreamEngine(BasicSignal<T> h, EngineConfig config = {})
      : config_(config), ir_(std::move(h)) {
    config_.validate();
    if (ir_.empty()) throw DomainError("impulse response is empty");
    reset_ring(ir_.size());
  }

  const EngineConfig& config() const noexcept { return config_; }
  const BasicSignal<T>& current_ir() const noexcept { return ir_; }
  std::size_t ring_size() const noexcept { return len_; }
  std::size_t read_index() const noexcept { return read_; }
  std::uint64_t samples_consumed() const noexcept { return consumed_; }
  std::uint64_t taches_scattered() const noexcept { return scattered_; }

  /// The ring_size() pending sums in emission order, starting at the read
  /// index.
  std::vector<T> residue() const {
    std::vector<T> out(len_);
    for (std::size_t j = 0; j < len_; ++j) out[j] = ring_[(read_ + j) % len_];
    return out;
  }

  T process_sample(T x) {
    const bool scatter = !skipped(x);
    if (scatter) scatter_at_read(x, ir_.samples());
    const T y = emit(scatter);
    maybe_shrink();
    return y;
  }

  /// Processes up to block_size samples; out must be as long as in.
  void process_block(std::span<const T> in, std::span<T> out) {
    if (in.size() > config_.block_size) {
      throw DomainError("block of " + std::to_string(in.size()) +
                        " samples exceeds block size " +
                        std::to_string(config_.block_size));
    }
    if (out.size() != in.size()) {
      throw DomainError("output block length differs from input block");
    }
    if (deferred_ir_) {
      swap_ir(std::move(*deferred_ir_));
      deferred_ir_.reset();
    }
    for (std::size_t pos = 0; pos < in.size(); pos += kTileInputs) {
      const std::size_t n = std::min(kTileInputs, in.size() - pos);
      process_tile(in.subspan(pos, n), out.subspan(pos, n));
    }
  }

  BasicSignal<T> process_block(const BasicSignal<T>& block) {
    std::vector<T> out(block.size());
    process_block(block.samples(), std::span<T>(out));
    return BasicSignal<T>(std::move(out), block.sample_rate());
  }

  /// Emits the pending residue (ring_size() - 1 samples, i.e. N_h - 1 when
  /// no swap is draining) and returns the engine to its initial state.
  BasicSignal<T> flush() {
    std::vector<T> tail = residue();
    tail.pop_back();
    reset_ring(ir_.size());
    return BasicSignal<T>(std::move(tail), ir_.sample_rate());
  }

  /// Replaces the impulse response from the next input sample on. Residue
  /// already in the ring is emitted unchanged at its scheduled time.
  void swap_ir(BasicSignal<T> h_new) {
    if (h_new.empty()) throw DomainError("impulse response is empty");
    ir_ = std::move(h_new);
    if (ir_.size() > len_) {
      relayout(ir_.size());
    } else {
      maybe_shrink();
    }
  }

  /// Like swap_ir, but takes effect at the start of the next process_block.
  void swap_ir_at_next_block(BasicSignal<T> h_new) {
    if (h_new.empty()) throw DomainError("impulse response is empty");
    deferred_ir_ = std::move(h_new);
  }

  /// Convolves a whole signal in block_size chunks. With kAutoAppend the
  /// result holds N_e + N_h - 1 samples and the engine is left flushed.
  BasicSignal<T> run(const BasicSignal<T>& e) {
    std::vector<T> out(e.size());
    const std::span<const T> in = e.samples();
    for (std::size_t pos = 0; pos < in.size(); pos += config_.block_size) {
      const std::size_t n = std::min(config_.block_size, in.size() - pos);
      process_block(in.subspan(pos, n), std::span<T>(out).subspan(pos, n));
    }
    if (config_.tail_policy == TailPolicy::kAutoAppend) {
      const BasicSignal<T> tail = flush();
      out.insert(out.end(), tail.begin(), tail.end());
    }
    return BasicSignal<T>(std::move(out), e.sample_rate());
  }

 private:
  bool skipped(T x) const {
    return std::abs(x) <= static_cast<T>(config_.zero_skip_threshold);
  }

  // Adds x * taps[i] into ring slot (read_index + i) mod L.
  void scatter_at_read(T x, std::span<const T> taps) {
    const std::size_t first = std::min(taps.size(), len_ - read_);
    std::span<T> ring(ring_);
    detail::add_tache(ring.subspan(read_, first), x, taps.first(first));
    if (first < taps.size()) {
      detail::add_tache(ring.first(taps.size() - first), x, taps.subspan(first));
    }
  }

  void account(bool scattered) {
    if (scattered) {
      extent_ = std::max(extent_, ir_.size());
      ++scattered_;
    }
    if (extent_ > 0) --extent_;
    ++consumed_;
  }

  T emit(bool scattered) {
    account(scattered);
    const T y = ring_[read_];
    ring_[read_] = T(0);
    read_ = read_ + 1 == len_ ? 0 : read_ + 1;
    return y;
  }

  void process_tile(std::span<const T> in, std::span<T> out) {
    const std::size_t n = in.size();
    const std::span<const T> taps = ir_.samples();
    // scratch_[j] is the slot j samples past the read index.
    scratch_.assign(len_ + n, T(0));
    for (std::size_t j = 0; j < len_; ++j) scratch_[j] = ring_[(read_ + j) % len_];
    std::array<bool, kTileInputs> scatter{};
    for (std::size_t m = 0; m < n; ++m) scatter[m] = !skipped(in[m]);
    const std::span<T> lin(scratch_);
    for (std::size_t hi = taps.size(); hi > 0;) {
      const std::size_t lo = hi > kTileTaps ? hi - kTileTaps : 0;
      const std::span<const T> chunk = taps.subspan(lo, hi - lo);
      for (std::size_t m = 0; m < n; ++m) {
        if (scatter[m]) detail::add_tache(lin.subspan(m + lo, chunk.size()), in[m], chunk);
      }
      hi = lo;
    }
    for (std::size_t m = 0; m < n; ++m) {
      account(scatter[m]);
      out[m] = scratch_[m];
    }
    read_ = (read_ + n) % len_;
    for (std::size_t j = 0; j < len_; ++j) ring_[(read_ + j) % len_] = scratch_[n + j];
    maybe_shrink();
  }

  void maybe_shrink() {
    if (len_ > ir_.size() && extent_ < ir_.size()) relayout(ir_.size());
  }

  void reset_ring(std::size_t len) {
    len_ = len;
    ring_.assign(len, T(0));
    read_ = 0;
    extent_ = 0;
    consumed_ = 0;
  }

  // Re-linearizes the ring to logical length `len` starting at index 0,
  // keeping every pending value at the same offset from the read position.
  void relayout(std::size_t len) {
    std::vector<T> ordered = residue();
    ordered.resize(len, T(0));
    ring_ = std::move(ordered);
    len_ = len;
    read_ = 0;
  }

  EngineConfig config_;
  BasicSignal<T> ir_;
  std::optional<BasicSignal<T>> deferred_ir_;
  std::vector<T> ring_;
  std::vector<T> scratch_;
  std::size_t len_ = 0;
  std::size_t read_ = 0;
  // Offsets [0, extent_) from read_ may hold non-zero residue. The ring
  // only shrinks to N_h once extent_ < N_h, so its last logical slot is
  // always zero between calls.
  std::size_t extent_ = 0;
  std::uint64_t consumed_ = 0;
  std::uint64_t scattered_ = 0;
};

using StreamEngine = BasicStreamEngine<double>;

}  // namespace taches
