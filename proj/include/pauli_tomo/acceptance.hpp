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

// Release acceptance checks. Shared by the acceptance test binary and the
// `reproduce` subcommand; every check is seeded and deterministic.

#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pauli_tomo/core_model.hpp"
#include "pauli_tomo/design_opt.hpp"
#include "pauli_tomo/experiment.hpp"
#include "pauli_tomo/extraction.hpp"
#include "pauli_tomo/format.hpp"
#include "pauli_tomo/risk.hpp"
#include "pauli_tomo/sampling.hpp"

namespace pauli_tomo::acceptance {

struct Verdict {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct Criterion {
    int id;
    const char *title;
    std::function<Verdict()> run;
};

namespace detail {

inline constexpr std::uint64_t kSeed = 20260419;

inline const Contractions kChannelA{0.8, 0.65, 0.5};
inline const Contractions kChannelB{0.9, 0.67, 0.6};
inline constexpr std::uint64_t kShots = 1000;

inline OrthogonalFrame identity_frame() { return OrthogonalFrame::from_matrix(Mat3::Identity()); }

inline std::string fmt(double v) { return format_fixed(v, 10); }

/// Fast planar angle risk N * h~2 from precomputed cos/sin of both angles.
/// M = R_z(tau), Theta = R_z(vartheta), lambda = (l1, l2, 0).
inline double planar_kernel(double l1, double l2, double ct, double st, double cv, double sv) {
    const double m[2][2] = {{ct, -st}, {st, ct}};
    const double t[2][2] = {{cv, -sv}, {sv, cv}};
    double var = 0.0;
    for (int k = 0; k < 2; ++k) {
        for (int l = 0; l < 2; ++l) {
            const double x = m[0][k] * l1 * t[0][l] + m[1][k] * l2 * t[1][l];
            const double w = m[0][k] * t[1][l] + m[1][k] * t[0][l];
            var += w * w * (1.0 - x * x);
        }
    }
    const double gap = l1 - l2;
    return var / (4.0 * gap * gap);
}

struct GridMin {
    double tau = 0.0;
    double vartheta = 0.0;
    double value = 0.0;
};

/// Exhaustive grid minimization of N * h~2 over [0,pi/2)^2. A 1e-2 coarse
/// pass locates the basins; the best 4 coarse nodes are each refined by an
/// exhaustive 1e-4 grid over a +-2e-2 periodic window.
inline GridMin brute_force_planar(double l1, double l2) {
    const double period = kPi / 2.0;
    const double coarse = 1e-2;
    const int nc = static_cast<int>(std::ceil(period / coarse));
    std::vector<double> cs(nc), sn(nc);
    for (int i = 0; i < nc; ++i) {
        cs[i] = std::cos(i * coarse);
        sn[i] = std::sin(i * coarse);
    }
    std::vector<std::array<double, 3>> nodes;
    nodes.reserve(static_cast<std::size_t>(nc) * nc);
    for (int i = 0; i < nc; ++i) {
        for (int j = 0; j < nc; ++j) {
            nodes.push_back({planar_kernel(l1, l2, cs[i], sn[i], cs[j], sn[j]), i * coarse, j * coarse});
        }
    }
    std::partial_sort(nodes.begin(), nodes.begin() + 4, nodes.end());

    const double fine = 1e-4;
    const int half = 200;
    GridMin best{0.0, 0.0, std::numeric_limits<double>::infinity()};
    std::vector<double> ct(2 * half + 1), st(2 * half + 1), cv(2 * half + 1), sv(2 * half + 1);
    for (int n = 0; n < 4; ++n) {
        const double t0 = nodes[n][1];
        const double v0 = nodes[n][2];
        for (int k = -half; k <= half; ++k) {
            ct[k + half] = std::cos(t0 + k * fine);
            st[k + half] = std::sin(t0 + k * fine);
            cv[k + half] = std::cos(v0 + k * fine);
            sv[k + half] = std::sin(v0 + k * fine);
        }
        for (int a = 0; a <= 2 * half; ++a) {
            for (int b = 0; b <= 2 * half; ++b) {
                const double h = planar_kernel(l1, l2, ct[a], st[a], cv[b], sv[b]);
                if (h < best.value) {
                    best = {t0 + (a - half) * fine, v0 + (b - half) * fine, h};
                }
            }
        }
    }
    auto wrap = [&](double x) {
        double r = std::fmod(x, period);
        return r < 0.0 ? r + period : r;
    };
    best.tau = wrap(best.tau);
    best.vartheta = wrap(best.vartheta);
    return best;
}

/// Distance between two angles modulo pi/2.
inline double quarter_distance(double a, double b) {
    const double p = kPi / 2.0;
    const double d = std::fmod(std::abs(a - b), p);
    return std::min(d, p - d);
}

}  // namespace detail

inline Verdict channel_a_zero_design() {
    const auto id = detail::identity_frame();
    const double h = analytic_h_tilde(detail::kChannelA, id, id, detail::kShots);
    const double err = std::abs(h - 0.05);
    return {1, "", err <= 1e-12, "h~(0,0) = " + format_double(h) + ", |error| = " + format_double(err)};
}

inline Verdict channel_a_conjecture_points() {
    const double h1 = h_tilde_at(detail::kChannelA, kConjectureDesign1, kConjectureDesign1, detail::kShots);
    const double h2 = h_tilde_at(detail::kChannelA, kConjectureDesign2, kConjectureDesign2, detail::kShots);
    const bool ok = std::abs(h1 - 0.03676) <= 5e-5 && std::abs(h2 - 0.03676) <= 5e-5;
    return {2, "", ok, "h~(pi/4,pi/4,0) = " + detail::fmt(h1) + ", h~(pi/4,0,pi/4) = " + detail::fmt(h2) +
                           ", expected 0.03676 +- 5e-5"};
}

inline Verdict channel_a_optimum() {
    const ConjectureReport r = conjecture_report(detail::kChannelA, detail::kShots);
    const auto t = r.optimum.tau.as_array();
    const auto v = r.optimum.vartheta.as_array();
    double worst = 0.0;
    for (int k = 0; k < 3; ++k) {
        worst = std::max(worst, angle_distance(t[k], v[k]));
    }
    const bool ok = std::abs(r.optimum.h_min - 0.03634) <= 5e-5 && worst <= 1e-3;
    return {3, "", ok, "h_min = " + detail::fmt(r.optimum.h_min) + " (expected 0.03634 +- 5e-5), max |tau-vartheta| = " +
                           format_fixed(worst, 3)};
}

inline Verdict channel_b_values() {
    const ConjectureReport r = conjecture_report(detail::kChannelB, detail::kShots);
    const auto id = detail::identity_frame();
    const double h0 = analytic_h_tilde(detail::kChannelB, id, id, detail::kShots);
    // zero design: X = diag(lambda), C = I, Var(a_ij + a_ji) = 2 / N off the diagonal
    double oracle = 0.0;
    for (const auto &[i, j] : std::array<std::array<int, 2>, 3>{{{0, 1}, {0, 2}, {1, 2}}}) {
        const double gap = detail::kChannelB[i] - detail::kChannelB[j];
        oracle += (2.0 / static_cast<double>(detail::kShots)) / (4.0 * gap * gap);
    }
    const bool zero_ok = std::abs(h0 - oracle) <= 1e-12;
    const bool opt_ok = std::abs(r.optimum.h_min - 0.01659) <= 5e-5;
    const bool conj_ok = std::abs(std::min(r.h_conjecture_1, r.h_conjecture_2) - 0.01675) <= 5e-5;
    return {4, "", zero_ok && opt_ok && conj_ok,
            "h_min = " + detail::fmt(r.optimum.h_min) + " (expected 0.01659 +- 5e-5), conjecture value = " +
                detail::fmt(std::min(r.h_conjecture_1, r.h_conjecture_2)) +
                " (expected 0.01675 +- 5e-5), zero design " + detail::fmt(h0) + " vs oracle " + detail::fmt(oracle) +
                (zero_ok ? " (match)" : " (MISMATCH)")};
}

namespace detail {

template <class Risk, class Bound>
Verdict bound_check(int id, Risk &&risk, Bound &&bound, std::uint64_t stream) {
    CounterRng rng(stream_key(kSeed, stream, 0));
    const auto id_frame = identity_frame();
    double worst_violation = -std::numeric_limits<double>::infinity();
    double worst_equality = 0.0;
    for (int c = 0; c < 100; ++c) {
        const Contractions l = random_contractions(rng, false);
        const double b = bound(l, kShots);
        for (int d = 0; d < 100; ++d) {
            const OrthogonalFrame input = build_frame(random_design_angles(rng));
            const OrthogonalFrame meas = build_frame(random_design_angles(rng));
            worst_violation = std::max(worst_violation, b - risk(l, input, meas, kShots));
        }
        worst_equality = std::max(worst_equality, std::abs(risk(l, id_frame, id_frame, kShots) - b));
    }
    const bool ok = worst_violation <= 1e-12 && worst_equality <= 1e-12;
    return {id, "", ok,
            "max(bound - risk) = " + format_fixed(worst_violation, 3) + ", max |risk(0) - bound| = " +
                format_fixed(worst_equality, 3) + " over 100 channels x 100 designs"};
}

}  // namespace detail

inline Verdict matrix_bound() {
    return detail::bound_check(
        5, [](auto &&...a) { return analytic_f(a...); }, [](auto &&...a) { return bound_f(a...); }, 5);
}

inline Verdict contraction_bound() {
    return detail::bound_check(
        6, [](auto &&...a) { return analytic_g_tilde(a...); }, [](auto &&...a) { return bound_g(a...); }, 6);
}

inline Verdict planar_closed_form() {
    CounterRng rng(stream_key(detail::kSeed, 7, 0));
    int per_regime[2] = {0, 0};
    double worst_loc = 0.0;
    double worst_val = 0.0;
    int checked = 0;
    auto check = [&](double l1, double l2) {
        const H2Optimum closed = h2_optimal_design(l1, l2, 1);
        const detail::GridMin grid = detail::brute_force_planar(l1, l2);
        const double loc = std::max(
            std::min(detail::quarter_distance(grid.tau, closed.tau), detail::quarter_distance(grid.tau, closed.tau_alt)),
            std::min(detail::quarter_distance(grid.vartheta, closed.tau),
                     detail::quarter_distance(grid.vartheta, closed.tau_alt)));
        worst_loc = std::max(worst_loc, loc);
        worst_val = std::max(worst_val, std::abs(grid.value - closed.value) / closed.value);
        ++checked;
    };
    while (per_regime[0] + per_regime[1] < 50) {
        double l1 = uniform_in(rng, -1.0, 1.0);
        double l2 = uniform_in(rng, -1.0, 1.0);
        if (l1 < l2) {
            std::swap(l1, l2);
        }
        if (std::abs(l1) + std::abs(l2) > 1.0 || l1 - l2 < 1e-2) {
            continue;
        }
        const double sum2 = (l1 + l2) * (l1 + l2);
        const double diff2 = (l1 - l2) * (l1 - l2);
        // near l1 = -l2 the minimum sits in a valley flat to ~1e-9 relative;
        // its location is not identifiable on a 1e-4 grid
        if (sum2 < 0.01 * diff2) {
            continue;
        }
        const int regime = sum2 >= 2.0 * diff2 ? 0 : 1;
        if (per_regime[regime] >= 25) {
            continue;
        }
        ++per_regime[regime];
        check(l1, l2);
    }
    const H2Optimum a = h2_optimal_design(0.8, 0.2, 1);
    const H2Optimum b = h2_optimal_design(1.0, 0.0, 1);
    const bool named = a.regime == 1 && std::abs(a.tau - kPi / 4.0) <= 1e-15 && b.regime == 2 &&
                       (std::abs(b.tau - kPi / 6.0) <= 1e-12 || std::abs(b.tau - kPi / 3.0) <= 1e-12) &&
                       (std::abs(b.tau_alt - kPi / 6.0) <= 1e-12 || std::abs(b.tau_alt - kPi / 3.0) <= 1e-12);
    check(0.8, 0.2);
    check(1.0, 0.0);
    const bool ok = named && worst_loc <= 2e-4 && worst_val <= 1e-8;
    return {7, "", ok,
            std::to_string(checked) + " pairs (" + std::to_string(per_regime[0]) + " regime-1, " +
                std::to_string(per_regime[1]) + " regime-2): max location error " + format_fixed(worst_loc, 3) +
                ", max relative value error " + format_fixed(worst_val, 3) + "; (0.8,0.2) -> " +
                format_fixed(a.tau, 12) + ", (1,0) -> " + format_fixed(b.tau, 12) + " / " +
                format_fixed(b.tau_alt, 12)};
}

inline Verdict estimator_unbiased() {
    CounterRng rng(stream_key(detail::kSeed, 8, 0));
    double worst_z = 0.0;
    for (int c = 0; c < 3; ++c) {
        const ChannelParams p = random_canonical_params(rng);
        const ChannelMatrix a = compose_channel_matrix(p);
        const OrthogonalFrame input = build_frame(random_design_angles(rng));
        const OrthogonalFrame meas = build_frame(random_design_angles(rng));
        const MatrixMoments m = mc_estimator_moments(a, input, meas, detail::kShots, 100000, detail::kSeed + 8 + c);
        for (int k = 0; k < 9; ++k) {
            const double se = m.std_error(k / 3, k % 3);
            const double z = std::abs(m.mean(k / 3, k % 3) - a(k / 3, k % 3)) / se;
            worst_z = std::max(worst_z, z);
        }
    }
    return {8, "", worst_z <= 4.0,
            "max |mean(A^) - A| / SE = " + format_fixed(worst_z, 4) + " over 3 channels x 9 entries, 1e5 trials"};
}

inline Verdict mc_matches_analytic() {
    CounterRng rng(stream_key(detail::kSeed, 9, 0));
    double worst_f = 0.0;
    double worst_h = 0.0;
    for (int c = 0; c < 3; ++c) {
        const ChannelParams p{random_contractions(rng, true, 0.1), {}};
        const ExperimentDesign d{random_design_angles(rng), random_design_angles(rng), detail::kShots};
        const OrthogonalFrame input = build_frame(d.input);
        const OrthogonalFrame meas = build_frame(d.meas);
        const RiskReport mc = mc_loss(p, d, 20000, detail::kSeed + 90 + c);
        const double f = analytic_f(p.lambda, input, meas, d.shots);
        worst_f = std::max(worst_f, std::abs(mc.f - f) / mc.se_f);

        const ExperimentDesign dh{d.input, d.meas, 100000};
        const RiskReport mch = mc_loss(p, dh, 20000, detail::kSeed + 95 + c);
        const double h = analytic_h_tilde(p.lambda, input, meas, dh.shots);
        worst_h = std::max(worst_h, std::abs(mch.h - h) / mch.se_h);
    }
    return {9, "", worst_f <= 4.0 && worst_h <= 4.0,
            "max |f^ - f| / SE = " + format_fixed(worst_f, 4) + ", max |h^ - h~| / SE = " + format_fixed(worst_h, 4) +
                " (3 channels, 2e4 trials)"};
}

inline Verdict round_trip() {
    CounterRng rng(stream_key(detail::kSeed, 10, 0));
    double worst = 0.0;
    for (int n = 0; n < 10000; ++n) {
        const ChannelParams p = random_canonical_params(rng);
        const ParamEstimate e = extract_params(compose_channel_matrix(p));
        for (int i = 0; i < 3; ++i) {
            worst = std::max(worst, std::abs(e.lambda[i] - p.lambda[i]));
        }
        const auto a = e.phi.as_array();
        const auto b = p.phi.as_array();
        for (int i = 0; i < 3; ++i) {
            worst = std::max(worst, angle_distance(a[i], b[i]));
        }
    }
    return {10, "", worst <= 1e-9, "max component error " + format_fixed(worst, 3) + " over 1e4 parameter sets"};
}

inline Verdict rotational_invariance() {
    CounterRng rng(stream_key(detail::kSeed, 11, 0));
    double worst = 0.0;
    for (int n = 0; n < 50; ++n) {
        const ChannelParams p = random_canonical_params(rng);
        const ChannelMatrix a = compose_channel_matrix(p);
        const OrthogonalFrame input = build_frame(random_design_angles(rng));
        const OrthogonalFrame meas = build_frame(random_design_angles(rng));
        const Mat3 o = random_rotation(rng);
        const ChannelMatrix ar = o * a * o.transpose();
        const OrthogonalFrame ir = input.rotated(o);
        const OrthogonalFrame mr = meas.rotated(o);
        const std::array<double, 3> before{matrix_risk(a, input, meas, detail::kShots),
                                           contraction_risk(a, input, meas, detail::kShots),
                                           angle_risk(a, input, meas, detail::kShots)};
        const std::array<double, 3> after{matrix_risk(ar, ir, mr, detail::kShots),
                                          contraction_risk(ar, ir, mr, detail::kShots),
                                          angle_risk(ar, ir, mr, detail::kShots)};
        for (int k = 0; k < 3; ++k) {
            worst = std::max(worst, std::abs(before[k] - after[k]) / std::max(1.0, std::abs(before[k])));
        }
    }
    return {11, "", worst <= 1e-12,
            "max |risk - risk(rotated)| / max(1, |risk|) = " + format_fixed(worst, 3) + " over 50 rotations"};
}

inline Verdict output_error_proportional() {
    CounterRng rng(stream_key(detail::kSeed, 12, 0));
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int n = 0; n < 20; ++n) {
        Mat3 a;
        Mat3 b;
        for (int k = 0; k < 9; ++k) {
            a(k / 3, k % 3) = uniform_in(rng, -1.0, 1.0);
            b(k / 3, k % 3) = uniform_in(rng, -1.0, 1.0);
        }
        const double r = output_error_ratio(a, b, 1000000, detail::kSeed + 120 + n);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    const bool ok = hi / lo - 1.0 <= 0.01 && std::abs(lo - 0.1) <= 0.005 && std::abs(hi - 0.1) <= 0.005;
    return {12, "", ok, "ratio range [" + format_fixed(lo, 6) + ", " + format_fixed(hi, 6) + "] over 20 pairs"};
}

inline const std::vector<Criterion> &criteria() {
    static const std::vector<Criterion> table{
        {1, "zero-design angle risk, reference channel A", channel_a_zero_design},
        {2, "conjecture designs, reference channel A", channel_a_conjecture_points},
        {3, "optimal design, reference channel A", channel_a_optimum},
        {4, "optimal design and conjecture value, reference channel B", channel_b_values},
        {5, "matrix risk lower bound and attainment", matrix_bound},
        {6, "contraction risk lower bound and attainment", contraction_bound},
        {7, "planar closed form vs brute force", planar_closed_form},
        {8, "channel matrix estimator unbiased", estimator_unbiased},
        {9, "Monte Carlo vs analytic risks", mc_matches_analytic},
        {10, "extraction round trip", round_trip},
        {11, "rotational invariance of risks", rotational_invariance},
        {12, "output-state error proportional to matrix error", output_error_proportional},
    };
    return table;
}

inline Verdict run(const Criterion &c) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = c.run();
    } catch (const std::exception &e) {
        v.passed = false;
        v.detail = std::string("exception: ") + e.what();
    }
    v.id = c.id;
    v.title = c.title;
    v.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return v;
}

inline std::vector<Verdict> run_all() {
    std::vector<Verdict> out;
    for (const Criterion &c : criteria()) {
        out.push_back(run(c));
    }
    return out;
}

inline std::string verdict_line(const Verdict &v) {
    return std::string(v.passed ? "PASS" : "FAIL") + "  [" + std::to_string(v.id) + "] " + v.title + ": " + v.detail;
}

}  // namespace pauli_tomo::acceptance
