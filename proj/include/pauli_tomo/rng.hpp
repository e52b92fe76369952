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

// Reproducible random streams.
//
// The generator is SplitMix64 (Steele, Lea & Flood, 2014) run as a
// counter-based generator: the k-th output of a stream with key K is
// mix64(K + k * 0x9E3779B97F4A7C15). Stream keys are derived by hashing
// (seed, trial, cell), so any trial can be replayed without generating the
// ones before it and trials can run on any thread in any order.
//
// Binomial variates use sequential inversion when N p (1 - p) < 30 and
// Hormann's BTRS transformed rejection with squeeze otherwise. Both are exact.

#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

#include "pauli_tomo/errors.hpp"

namespace pauli_tomo {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Key of the stream for one (seed, trial, cell) triple.
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t trial, std::uint64_t cell) {
    std::uint64_t k = mix64(seed + kGoldenGamma);
    k = mix64(k ^ (trial + 0x632BE59BD9B4E019ULL));
    return mix64(k ^ (cell + 0x8CB92BA72F3D8DD7ULL));
}

class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key) : key_(key) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()() { return mix64(key_ + (++counter_) * kGoldenGamma); }

    /// Uniform double in the open interval (0, 1).
    double uniform() {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    [[nodiscard]] std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

namespace detail {

inline std::uint64_t binomial_inversion(CounterRng &rng, std::uint64_t n, double p) {
    const double q = 1.0 - p;
    const double s = p / q;
    const double a = (static_cast<double>(n) + 1.0) * s;
    double r = std::pow(q, static_cast<double>(n));
    double u = rng.uniform();
    std::uint64_t x = 0;
    while (u > r) {
        u -= r;
        ++x;
        if (x > n) {
            // Rounding residue in the tail; restart with a fresh uniform.
            x = 0;
            r = std::pow(q, static_cast<double>(n));
            u = rng.uniform();
            continue;
        }
        r *= a / static_cast<double>(x) - s;
    }
    return x;
}

// BTRS, W. Hormann, "The generation of binomial random variates",
// J. Stat. Comput. Simul. 46 (1993). Requires p <= 1/2 and n p >= 10.
inline std::uint64_t binomial_btrs(CounterRng &rng, std::uint64_t n, double p) {
    const double nd = static_cast<double>(n);
    const double q = 1.0 - p;
    const double spq = std::sqrt(nd * p * q);
    const double b = 1.15 + 2.53 * spq;
    const double a = -0.0873 + 0.0248 * b + 0.01 * p;
    const double c = nd * p + 0.5;
    const double v_r = 0.92 - 4.2 / b;
    const double alpha = (2.83 + 5.1 / b) * spq;
    const double lpq = std::log(p / q);
    const double m = std::floor((nd + 1.0) * p);
    const double h = std::lgamma(m + 1.0) + std::lgamma(nd - m + 1.0);
    for (;;) {
        const double u = rng.uniform() - 0.5;
        double v = rng.uniform();
        const double us = 0.5 - std::abs(u);
        const double k = std::floor((2.0 * a / us + b) * u + c);
        if (k < 0.0 || k > nd) {
            continue;
        }
        if (us >= 0.07 && v <= v_r) {
            return static_cast<std::uint64_t>(k);
        }
        v = std::log(v * alpha / (a / (us * us) + b));
        if (v <= h - std::lgamma(k + 1.0) - std::lgamma(nd - k + 1.0) + (k - m) * lpq) {
            return static_cast<std::uint64_t>(k);
        }
    }
}

}  // namespace detail

/// One Binomial(n, p) draw. p must already lie in [0, 1].
inline std::uint64_t sample_binomial(CounterRng &rng, std::uint64_t n, double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw InvalidArgument("binomial probability outside [0, 1]");
    }
    if (n == 0 || p == 0.0) {
        return 0;
    }
    if (p == 1.0) {
        return n;
    }
    const bool flip = p > 0.5;
    const double pp = flip ? 1.0 - p : p;
    const double nd = static_cast<double>(n);
    const std::uint64_t k = nd * pp * (1.0 - pp) < 30.0 ? detail::binomial_inversion(rng, n, pp)
                                                         : detail::binomial_btrs(rng, n, pp);
    return flip ? n - k : k;
}

}  // namespace pauli_tomo
