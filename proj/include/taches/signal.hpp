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

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace taches {

/// Raised when an argument violates an operation's precondition
/// (empty signal, mismatched rates, negative threshold, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by file readers and writers. The message names the file and,
/// for malformed input, the offending chunk.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr unsigned kDefaultSampleRate = 44100;

/// A finite run of real samples at a fixed sample rate. Used for the
/// input, the impulse response and the output alike.
template <typename T>
class BasicSignal {
 public:
  using value_type = T;

  BasicSignal() = default;

  explicit BasicSignal(std::vector<T> samples,
                       unsigned sample_rate = kDefaultSampleRate)
      : samples_(std::move(samples)), sample_rate_(sample_rate) {
    if (sample_rate_ == 0) throw DomainError("sample rate must be positive");
  }

  BasicSignal(std::initializer_list<T> samples,
              unsigned sample_rate = kDefaultSampleRate)
      : BasicSignal(std::vector<T>(samples), sample_rate) {}

  /// The one-sample unit impulse [1].
  static BasicSignal impulse(unsigned sample_rate = kDefaultSampleRate) {
    return BasicSignal(std::vector<T>{T(1)}, sample_rate);
  }

  static BasicSignal zeros(std::size_t n,
                           unsigned sample_rate = kDefaultSampleRate) {
    return BasicSignal(std::vector<T>(n, T(0)), sample_rate);
  }

  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  unsigned sample_rate() const noexcept { return sample_rate_; }
  double duration_seconds() const noexcept {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }

  T operator[](std::size_t i) const { return samples_[i]; }
  T& operator[](std::size_t i) { return samples_[i]; }

  std::span<const T> samples() const noexcept { return samples_; }
  std::span<T> samples() noexcept { return samples_; }
  const std::vector<T>& vector() const noexcept { return samples_; }
  std::vector<T>& vector() noexcept { return samples_; }

  auto begin() const noexcept { return samples_.begin(); }
  auto end() const noexcept { return samples_.end(); }

  friend bool operator==(const BasicSignal&, const BasicSignal&) = default;

 private:
  std::vector<T> samples_;
  unsigned sample_rate_ = kDefaultSampleRate;
};

using Signal = BasicSignal<double>;

/// Result of a whole-signal convolution. `body` is aligned with the input
/// (N_e samples); `tail` is the N_h - 1 samples of residue left after the
/// last input sample.
template <typename T>
struct BasicConvOutput {
  BasicSignal<T> body;
  BasicSignal<T> tail;

  std::size_t size() const noexcept { return body.size() + tail.size(); }

  BasicSignal<T> concat() const {
    std::vector<T> all;
    all.reserve(size());
    all.insert(all.end(), body.begin(), body.end());
    all.insert(all.end(), tail.begin(), tail.end());
    return BasicSignal<T>(std::move(all), body.sample_rate());
  }
};

using ConvOutput = BasicConvOutput<double>;

}  // namespace taches
