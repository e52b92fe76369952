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
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>

namespace pauli_tomo {

template <std::size_t D>
struct SimplexResult {
    std::array<double, D> x{};
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct SimplexOptions {
    double initial_step = 0.1;
    /// Stop when (f_max - f_min) <= f_tolerance * max(|f_min|, 1e-300) ...
    double f_tolerance = 1e-10;
    /// ... and the simplex diameter is below x_tolerance.
    double x_tolerance = 1e-10;
    int max_iterations = 20000;
};

/// Nelder-Mead downhill simplex with the standard coefficients
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2). Deterministic.
template <std::size_t D, class F>
SimplexResult<D> nelder_mead(F &&f, const std::array<double, D> &start, const SimplexOptions &opt = {}) {
    using Point = std::array<double, D>;
    std::array<Point, D + 1> pts;
    std::array<double, D + 1> vals;
    pts[0] = start;
    for (std::size_t k = 0; k < D; ++k) {
        pts[k + 1] = start;
        pts[k + 1][k] += opt.initial_step;
    }
    for (std::size_t k = 0; k <= D; ++k) {
        vals[k] = f(pts[k]);
    }

    auto combine = [](const Point &a, const Point &b, double t) {
        Point out;
        for (std::size_t k = 0; k < D; ++k) {
            out[k] = a[k] + t * (b[k] - a[k]);
        }
        return out;
    };

    std::array<std::size_t, D + 1> order;
    SimplexResult<D> res;
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[D - 1];

        double diameter = 0.0;
        for (std::size_t k = 0; k <= D; ++k) {
            for (std::size_t c = 0; c < D; ++c) {
                diameter = std::max(diameter, std::abs(pts[k][c] - pts[best][c]));
            }
        }
        const double spread = vals[worst] - vals[best];
        if (spread <= opt.f_tolerance * std::max(std::abs(vals[best]), 1e-300) && diameter <= opt.x_tolerance) {
            res.converged = true;
            break;
        }

        Point centroid{};
        for (std::size_t k = 0; k <= D; ++k) {
            if (k == worst) {
                continue;
            }
            for (std::size_t c = 0; c < D; ++c) {
                centroid[c] += pts[k][c] / static_cast<double>(D);
            }
        }

        const Point reflected = combine(centroid, pts[worst], -1.0);
        const double f_r = f(reflected);
        if (f_r < vals[best]) {
            const Point expanded = combine(centroid, pts[worst], -2.0);
            const double f_e = f(expanded);
            if (f_e < f_r) {
                pts[worst] = expanded;
                vals[worst] = f_e;
            } else {
                pts[worst] = reflected;
                vals[worst] = f_r;
            }
            continue;
        }
        if (f_r < vals[second]) {
            pts[worst] = reflected;
            vals[worst] = f_r;
            continue;
        }
        const bool outside = f_r < vals[worst];
        const Point contracted = outside ? combine(centroid, reflected, 0.5) : combine(centroid, pts[worst], 0.5);
        const double f_c = f(contracted);
        if (f_c < (outside ? f_r : vals[worst])) {
            pts[worst] = contracted;
            vals[worst] = f_c;
            continue;
        }
        for (std::size_t k = 0; k <= D; ++k) {
            if (k == best) {
                continue;
            }
            pts[k] = combine(pts[best], pts[k], 0.5);
            vals[k] = f(pts[k]);
        }
    }
    const std::size_t best =
        static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    res.x = pts[best];
    res.value = vals[best];
    res.iterations = it;
    return res;
}

}  // namespace pauli_tomo
