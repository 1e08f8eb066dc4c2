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

#include "taches/conv_core.hpp"

#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "test_support.hpp"

namespace taches {
namespace {

using testing::brute_force_convolve;
using testing::random_size;
using testing::random_vector;
using testing::summand_scale;

std::vector<double> concat(const ConvOutput& out) { return out.concat().vector(); }

TEST(DirectFormTest, UnitImpulseReproducesIr) {
  EXPECT_EQ(direct_form(Signal{1.0}, Signal{5, 6, 7}).vector(),
            (std::vector<double>{5, 6, 7}));
}

TEST(DirectFormTest, TwoByTwo) {
  EXPECT_EQ(direct_form(Signal{1, 2}, Signal{3, 4}).vector(),
            (std::vector<double>{3, 10, 8}));
}

TEST(DirectFormTest, ZeroInput) {
  EXPECT_EQ(direct_form(Signal{0, 0, 0}, Signal{1, 1}).vector(),
            (std::vector<double>{0, 0, 0, 0}));
}

TEST(DirectFormTest, RejectsEmptyAndMismatchedRates) {
  EXPECT_THROW(direct_form(Signal{}, Signal{1.0}), DomainError);
  EXPECT_THROW(direct_form(Signal{1.0}, Signal{}), DomainError);
  EXPECT_THROW(direct_form(Signal({1.0}, 44100), Signal({1.0}, 48000)),
               DomainError);
}

TEST(ScatterConvolveTest, SplitsBodyAndTail) {
  const ConvOutput out = scatter_convolve(Signal{1, 2}, Signal{3, 4});
  EXPECT_EQ(out.body.vector(), (std::vector<double>{3, 10}));
  EXPECT_EQ(out.tail.vector(), (std::vector<double>{8}));
}

TEST(ScatterConvolveTest, SingleTapHasEmptyTail) {
  const ConvOutput out = scatter_convolve(Signal{1, 0, 0, 0}, Signal{9});
  EXPECT_EQ(out.body.vector(), (std::vector<double>{9, 0, 0, 0}));
  EXPECT_TRUE(out.tail.empty());
}

TEST(ScatterConvolveTest, DelayedImpulseDelaysIr) {
  std::mt19937_64 rng(11);
  const std::vector<double> h = random_vector(rng, 7);
  for (std::size_t k = 0; k < 5; ++k) {
    std::vector<double> e(k + 1, 0.0);
    e[k] = 1.0;
    std::vector<double> expected(k, 0.0);
    expected.insert(expected.end(), h.begin(), h.end());
    EXPECT_EQ(concat(scatter_convolve(Signal(e), Signal(h))), expected) << "k=" << k;
  }
}

TEST(ScatterConvolveTest, KeepsSampleRate) {
  const ConvOutput out = scatter_convolve(Signal({1, 2}, 8000), Signal({1}, 8000));
  EXPECT_EQ(out.body.sample_rate(), 8000u);
  EXPECT_EQ(out.tail.sample_rate(), 8000u);
}

TEST(ScatterConvolveTest, RejectsEmpty) {
  EXPECT_THROW(scatter_convolve(Signal{}, Signal{1.0}), DomainError);
  EXPECT_THROW(scatter_convolve(Signal{1.0}, Signal{}), DomainError);
}

TEST(CommutedConvolveTest, ShorterSignalDrives) {
  ScatterStats stats;
  const ConvOutput out =
      commuted_convolve(Signal{1, 2, 3, 4, 5, 6}, Signal{1, -1, 2}, &stats);
  EXPECT_EQ(stats.iterations, 3u);
  EXPECT_EQ(out.body.size(), 6u);
  EXPECT_EQ(out.tail.size(), 2u);
  EXPECT_EQ(concat(out), direct_form(Signal{1, 2, 3, 4, 5, 6}, Signal{1, -1, 2}).vector());

  ScatterStats plain;
  scatter_convolve(Signal{1, 2, 3, 4, 5, 6}, Signal{1, -1, 2}, &plain);
  EXPECT_EQ(plain.iterations, 6u);
}

TEST(CommutedConvolveTest, TwoByTwo) {
  const ConvOutput out = commuted_convolve(Signal{1, 2}, Signal{3, 4});
  EXPECT_EQ(out.body.vector(), (std::vector<double>{3, 10}));
  EXPECT_EQ(out.tail.vector(), (std::vector<double>{8}));
}

TEST(CommutedConvolveTest, SplitFollowsOriginalLengthsWhenIrIsLonger) {
  ScatterStats stats;
  const ConvOutput out = commuted_convolve(Signal{2}, Signal{1, 2, 3, 4}, &stats);
  EXPECT_EQ(stats.iterations, 1u);
  EXPECT_EQ(out.body.vector(), (std::vector<double>{2}));
  EXPECT_EQ(out.tail.vector(), (std::vector<double>{4, 6, 8}));
}

TEST(CommutedConvolveTest, SymmetricArguments) {
  std::mt19937_64 rng(5);
  const Signal x(random_vector(rng, 9));
  EXPECT_EQ(concat(commuted_convolve(x, x)), concat(scatter_convolve(x, x)));
}

TEST(SkipZerosTest, ExactZerosOnly) {
  const ConvOutput out = scatter_convolve_skip_zeros(Signal{1, 0, 2}, Signal{1, 1}, 0.0);
  EXPECT_EQ(out.body.vector(), (std::vector<double>{1, 1, 2}));
  EXPECT_EQ(out.tail.vector(), (std::vector<double>{2}));
}

TEST(SkipZerosTest, AllZeroInputScattersNothing) {
  ScatterStats stats;
  const ConvOutput out =
      scatter_convolve_skip_zeros(Signal{0, 0}, Signal{3, -2, 7}, 0.0, &stats);
  EXPECT_EQ(stats.taches_scattered, 0u);
  EXPECT_EQ(stats.iterations, 2u);
  for (double v : concat(out)) EXPECT_EQ(v, 0.0);
}

TEST(SkipZerosTest, ThresholdDropsSmallSamples) {
  const ConvOutput out =
      scatter_convolve_skip_zeros(Signal{1, 1e-9, 1}, Signal{1.0}, 1e-6);
  EXPECT_EQ(out.body.vector(), (std::vector<double>{1, 0, 1}));
}

TEST(SkipZerosTest, NegativeThresholdRejected) {
  EXPECT_THROW(scatter_convolve_skip_zeros(Signal{1.0}, Signal{1.0}, -1e-3), DomainError);
}

TEST(SkipZerosTest, ZeroThresholdMatchesPlainScatterBitExactly) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> e = random_vector(rng, random_size(rng, 1, 64));
    for (double& v : e) {
      if (random_size(rng, 0, 2) == 0) v = 0.0;
    }
    const Signal h(random_vector(rng, random_size(rng, 1, 64)));
    EXPECT_EQ(concat(scatter_convolve_skip_zeros(Signal(e), h, 0.0)),
              concat(scatter_convolve(Signal(e), h)));
  }
}

TEST(SkipZerosTest, PositiveThresholdEqualsThresholdedInput) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<double> e = random_vector(rng, random_size(rng, 1, 64));
    const Signal h(random_vector(rng, random_size(rng, 1, 64)));
    const double eps = 0.25;
    std::vector<double> kept = e;
    for (double& v : kept) {
      if (std::abs(v) <= eps) v = 0.0;
    }
    EXPECT_EQ(concat(scatter_convolve_skip_zeros(Signal(e), h, eps)),
              concat(scatter_convolve(Signal(kept), h)));
  }
}

// Property suite over random lengths 1..64 and values in [-1, 1].

TEST(ConvPropertyTest, ScatterMatchesBruteForce) {
  std::mt19937_64 rng(20260101);
  for (int trial = 0; trial < 300; ++trial) {
    const auto e = random_vector(rng, random_size(rng, 1, 64));
    const auto h = random_vector(rng, random_size(rng, 1, 64));
    const auto got = concat(scatter_convolve(Signal(e), Signal(h)));
    const auto want = brute_force_convolve(e, h);
    const auto scale = summand_scale(e, h);
    ASSERT_EQ(got.size(), e.size() + h.size() - 1);
    for (std::size_t n = 0; n < got.size(); ++n) {
      ASSERT_TRUE(testing::close(got[n], want[n], scale[n], 1e-12))
          << "trial " << trial << " n " << n;
    }
  }
}

TEST(ConvPropertyTest, DirectFormMatchesBruteForce) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto e = random_vector(rng, random_size(rng, 1, 64));
    const auto h = random_vector(rng, random_size(rng, 1, 64));
    const auto got = direct_form(Signal(e), Signal(h)).vector();
    const auto want = brute_force_convolve(e, h);
    const auto scale = summand_scale(e, h);
    for (std::size_t n = 0; n < got.size(); ++n) {
      ASSERT_TRUE(testing::close(got[n], want[n], scale[n], 1e-12));
    }
  }
}

TEST(ConvPropertyTest, BitExactWithSameAccumulationOrder) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const Signal e(random_vector(rng, random_size(rng, 1, 64)));
    const Signal h(random_vector(rng, random_size(rng, 1, 64)));
    EXPECT_EQ(concat(scatter_convolve(e, h)), direct_form<double>(e, h).vector());
  }
}

TEST(ConvPropertyTest, Commutativity) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const auto e = random_vector(rng, random_size(rng, 1, 64));
    const auto h = random_vector(rng, random_size(rng, 1, 64));
    const auto a = concat(scatter_convolve(Signal(e), Signal(h)));
    const auto b = concat(scatter_convolve(Signal(h), Signal(e)));
    const auto c = concat(commuted_convolve(Signal(e), Signal(h)));
    const auto scale = summand_scale(e, h);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t n = 0; n < a.size(); ++n) {
      ASSERT_TRUE(testing::close(a[n], b[n], scale[n], 1e-12));
      ASSERT_TRUE(testing::close(a[n], c[n], scale[n], 1e-12));
    }
  }
}

TEST(ConvPropertyTest, Linearity) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> coef(-10.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t ne = random_size(rng, 1, 64);
    const auto e1 = random_vector(rng, ne);
    const auto e2 = random_vector(rng, ne);
    const auto h = random_vector(rng, random_size(rng, 1, 64));
    const double a = coef(rng), b = coef(rng);
    std::vector<double> mix(ne);
    for (std::size_t i = 0; i < ne; ++i) mix[i] = a * e1[i] + b * e2[i];
    const auto lhs = concat(scatter_convolve(Signal(mix), Signal(h)));
    const auto y1 = concat(scatter_convolve(Signal(e1), Signal(h)));
    const auto y2 = concat(scatter_convolve(Signal(e2), Signal(h)));
    const auto scale = summand_scale(mix, h);
    const auto s1 = summand_scale(e1, h);
    const auto s2 = summand_scale(e2, h);
    for (std::size_t n = 0; n < lhs.size(); ++n) {
      const double rhs = a * y1[n] + b * y2[n];
      const double mag = std::max(scale[n], std::abs(a) * s1[n] + std::abs(b) * s2[n]);
      ASSERT_TRUE(testing::close(lhs[n], rhs, mag, 1e-10)) << "trial " << trial;
    }
  }
}

TEST(ConvPropertyTest, TimeInvarianceAndLengthLaw) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto e = random_vector(rng, random_size(rng, 1, 64));
    const auto h = random_vector(rng, random_size(rng, 1, 64));
    const std::size_t k = random_size(rng, 0, 16);
    std::vector<double> shifted(k, 0.0);
    shifted.insert(shifted.end(), e.begin(), e.end());
    const auto base = concat(scatter_convolve(Signal(e), Signal(h)));
    const auto out = concat(scatter_convolve(Signal(shifted), Signal(h)));
    ASSERT_EQ(base.size(), e.size() + h.size() - 1);
    ASSERT_EQ(out.size(), base.size() + k);
    for (std::size_t i = 0; i < k; ++i) ASSERT_EQ(out[i], 0.0);
    for (std::size_t i = 0; i < base.size(); ++i) ASSERT_EQ(out[k + i], base[i]);
  }
}

TEST(ConvPropertyTest, UnitImpulseIdentity) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const auto h = random_vector(rng, random_size(rng, 1, 64));
    EXPECT_EQ(concat(scatter_convolve(Signal::impulse(), Signal(h))), h);
  }
}

}  // namespace
}  // namespace taches
