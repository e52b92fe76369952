// Copyright 2026 The pauli-tomo Authors
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


#include <cmath>
#include <cstdint>

#include <gtest/gtest.h>

#include "pauli_tomo/parallel.hpp"
#include "pauli_tomo/rng.hpp"

namespace pauli_tomo {
namespace {

struct Moments {
    double mean;
    double var;
};

Moments binomial_moments(std::uint64_t n, double p, int draws, std::uint64_t seed) {
    MeanAccumulator acc;
    for (int t = 0; t < draws; ++t) {
        CounterRng rng(stream_key(seed, static_cast<std::uint64_t>(t), 0));
        acc.add(static_cast<double>(sample_binomial(rng, n, p)));
    }
    return {acc.mean(), acc.variance()};
}

TEST(CounterRng, Deterministic) {
    CounterRng a(stream_key(42, 7, 3));
    CounterRng b(stream_key(42, 7, 3));
    for (int k = 0; k < 100; ++k) {
        EXPECT_EQ(a(), b());
    }
}

TEST(CounterRng, StreamsDiffer) {
    EXPECT_NE(stream_key(1, 0, 0), stream_key(2, 0, 0));
    EXPECT_NE(stream_key(1, 0, 0), stream_key(1, 1, 0));
    EXPECT_NE(stream_key(1, 0, 0), stream_key(1, 0, 1));
}

TEST(CounterRng, UniformOpenInterval) {
    CounterRng rng(stream_key(9, 0, 0));
    MeanAccumulator acc;
    for (int k = 0; k < 100000; ++k) {
        const double u = rng.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        acc.add(u);
    }
    EXPECT_NEAR(acc.mean(), 0.5, 4.0 * acc.std_error());
    EXPECT_NEAR(acc.variance(), 1.0 / 12.0, 2e-3);
}

TEST(SampleBinomial, EdgeProbabilities) {
    CounterRng rng(stream_key(1, 0, 0));
    for (int k = 0; k < 50; ++k) {
        EXPECT_EQ(sample_binomial(rng, 1000, 0.0), 0u);
        EXPECT_EQ(sample_binomial(rng, 1000, 1.0), 1000u);
    }
}

TEST(SampleBinomial, RejectsInvalidProbability) {
    CounterRng rng(stream_key(1, 0, 0));
    EXPECT_THROW(sample_binomial(rng, 10, -0.1), InvalidArgument);
    EXPECT_THROW(sample_binomial(rng, 10, 1.1), InvalidArgument);
    EXPECT_THROW(sample_binomial(rng, 10, std::nan("")), InvalidArgument);
}

class BinomialMoments : public ::testing::TestWithParam<std::pair<std::uint64_t, double>> {};

TEST_P(BinomialMoments, MeanAndVarianceMatch) {
    const auto [n, p] = GetParam();
    const int draws = 40000;
    const Moments m = binomial_moments(n, p, draws, 11);
    const double mean = static_cast<double>(n) * p;
    const double var = mean * (1.0 - p);
    EXPECT_NEAR(m.mean, mean, 5.0 * std::sqrt(var / draws));
    // sample variance has relative standard error about sqrt(2 / draws)
    EXPECT_NEAR(m.var / var, 1.0, 5.0 * std::sqrt(2.0 / draws) + 0.02);
}

INSTANTIATE_TEST_SUITE_P(InversionAndRejection, BinomialMoments,
                         ::testing::Values(std::pair<std::uint64_t, double>{10, 0.3},
                                           std::pair<std::uint64_t, double>{100, 0.05},
                                           std::pair<std::uint64_t, double>{1000, 0.5},
                                           std::pair<std::uint64_t, double>{1000, 0.9},
                                           std::pair<std::uint64_t, double>{1000000, 0.2},
                                           std::pair<std::uint64_t, double>{50, 0.999}));

TEST(SampleBinomial, SmallCaseDistribution) {
    // n = 3, p = 0.4: exact pmf
    const double pmf[4] = {0.216, 0.432, 0.288, 0.064};
    const int draws = 100000;
    int hist[4] = {0, 0, 0, 0};
    for (int t = 0; t < draws; ++t) {
        CounterRng rng(stream_key(5, static_cast<std::uint64_t>(t), 0));
        ++hist[sample_binomial(rng, 3, 0.4)];
    }
    for (int k = 0; k < 4; ++k) {
        const double se = std::sqrt(pmf[k] * (1 - pmf[k]) / draws);
        EXPECT_NEAR(hist[k] / static_cast<double>(draws), pmf[k], 5.0 * se);
    }
}

TEST(MeanAccumulator, MergeMatchesSequential) {
    MeanAccumulator whole;
    MeanAccumulator left;
    MeanAccumulator right;
    for (int k = 0; k < 1000; ++k) {
        const double v = std::sin(0.37 * k) + 0.001 * k;
        whole.add(v);
        (k < 400 ? left : right).add(v);
    }
    left.merge(right);
    EXPECT_NEAR(left.mean(), whole.mean(), 1e-14);
    EXPECT_NEAR(left.variance(), whole.variance(), 1e-12);
}

}  // namespace
}  // namespace pauli_tomo
