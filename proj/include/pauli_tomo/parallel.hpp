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

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace pauli_tomo {

/// Worker threads to use: hardware concurrency, capped by PAULI_TOMO_THREADS.
inline unsigned worker_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char *env = std::getenv("PAULI_TOMO_THREADS")) {
        try {
            const long cap = std::stol(env);
            if (cap >= 1) {
                n = std::min(n, static_cast<unsigned>(cap));
            }
        } catch (const std::exception &) {
            // ignore malformed values
        }
    }
    return n;
}

/// Calls fn(chunk) for every chunk in [0, n_chunks). Chunks are claimed
/// dynamically; callers store per-chunk results and reduce them in chunk
/// order so the outcome does not depend on the thread count.
template <class Fn>
void parallel_for_chunks(std::size_t n_chunks, Fn &&fn) {
    const unsigned workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(n_chunks, 1));
    if (workers <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) {
            fn(c);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t c = next++; c < n_chunks; c = next++) {
                try {
                    fn(c);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                    next = n_chunks;
                }
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    void add(const CompensatedSum &other) {
        add(other.sum_);
        add(other.comp_);
    }
    [[nodiscard]] double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Sample mean and standard error (sample std / sqrt(n)) from sums.
struct MeanAccumulator {
    CompensatedSum sum;
    CompensatedSum sum_sq;
    std::size_t n = 0;

    void add(double x) {
        sum.add(x);
        sum_sq.add(x * x);
        ++n;
    }
    void merge(const MeanAccumulator &o) {
        sum.add(o.sum);
        sum_sq.add(o.sum_sq);
        n += o.n;
    }
    [[nodiscard]] double mean() const { return n ? sum.value() / static_cast<double>(n) : 0.0; }
    [[nodiscard]] double variance() const {
        if (n < 2) {
            return 0.0;
        }
        const double nd = static_cast<double>(n);
        const double m = mean();
        return std::max(0.0, (sum_sq.value() - nd * m * m) / (nd - 1.0));
    }
    [[nodiscard]] double std_error() const {
        return n ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
    }
};

}  // namespace pauli_tomo
