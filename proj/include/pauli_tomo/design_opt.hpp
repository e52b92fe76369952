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

// Design search over (tau, vartheta) and the two-step protocol.
//
// The angle risk h~ is invariant under relabeling or flipping the three input
// states or the three measurement directions (Theta -> Theta P, M -> M P for
// proper signed permutations P), so it is periodic in every design angle. The
// search runs unconstrained and maps the result back into the design ranges,
// choosing the vartheta representative closest to tau.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "pauli_tomo/core_model.hpp"
#include "pauli_tomo/experiment.hpp"
#include "pauli_tomo/extraction.hpp"
#include "pauli_tomo/nelder_mead.hpp"
#include "pauli_tomo/parallel.hpp"
#include "pauli_tomo/risk.hpp"

namespace pauli_tomo {

struct OptimizerConfig {
    int grid_nodes = 8;
    int starts = 5;
    int max_iterations = 20000;
    double tolerance = 1e-10;
    bool keep_surface = false;
};

inline void validate(const OptimizerConfig &c) {
    if (c.grid_nodes < 4) {
        throw InvalidArgument("grid resolution must be at least 4 nodes per angle");
    }
    if (c.starts < 1) {
        throw InvalidArgument("at least one refinement start is required");
    }
    if (!(c.tolerance > 0.0)) {
        throw InvalidArgument("tolerance must be positive");
    }
    if (c.max_iterations < 1) {
        throw InvalidArgument("max_iterations must be positive");
    }
}

struct SurfacePoint {
    AngleTriple tau;
    AngleTriple vartheta;
    double h = 0.0;
};

struct DesignOptimum {
    AngleTriple tau;
    AngleTriple vartheta;
    double h_min = 0.0;
    std::vector<SurfacePoint> surface;
};

struct ConjectureReport {
    DesignOptimum optimum;
    double h_conjecture_1 = 0.0;  // tau = vartheta = (pi/4, pi/4, 0)
    double h_conjecture_2 = 0.0;  // tau = vartheta = (pi/4, 0, pi/4)
    double h_zero = 0.0;          // tau = vartheta = 0
    double gap_1 = 0.0;
    double gap_2 = 0.0;
    double symmetry_residual = 0.0;
};

inline constexpr AngleTriple kConjectureDesign1{kPi / 4.0, kPi / 4.0, 0.0};
inline constexpr AngleTriple kConjectureDesign2{kPi / 4.0, 0.0, kPi / 4.0};

/// sqrt(sum_k dist(a_k, b_k)^2) with the mod-pi angle distance.
inline double angle_residual(const AngleTriple &a, const AngleTriple &b) {
    const auto x = a.as_array();
    const auto y = b.as_array();
    double s = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double d = angle_distance(x[k], y[k]);
        s += d * d;
    }
    return std::sqrt(s);
}

/// Design-range angles of a frame, modulo relabeling. When a reference triple
/// is given the representative closest to it is returned.
inline AngleTriple design_angles_for_frame(const Mat3 &frame, const AngleTriple *reference = nullptr) {
    const std::vector<AngleTriple> reps = design_representations(frame);
    if (reps.empty()) {
        throw InvalidArgument("frame has no representation in the design ranges");
    }
    if (reference == nullptr) {
        return *std::min_element(reps.begin(), reps.end(), [](const AngleTriple &a, const AngleTriple &b) {
            return a.as_array() < b.as_array();
        });
    }
    return *std::min_element(reps.begin(), reps.end(), [&](const AngleTriple &a, const AngleTriple &b) {
        return angle_residual(a, *reference) < angle_residual(b, *reference);
    });
}

namespace detail {

inline void require_design_lambda(const Contractions &lambda) {
    require_finite(lambda);
    require_separated(lambda);
    if (!cp_check(lambda)) {
        throw InvalidArgument("contractions violate complete positivity");
    }
}

template <std::size_t D, class F>
SimplexResult<D> refine(F &&objective, const std::array<double, D> &start, double step, const OptimizerConfig &cfg) {
    SimplexOptions opt;
    opt.initial_step = step;
    opt.f_tolerance = cfg.tolerance;
    opt.x_tolerance = cfg.tolerance;
    opt.max_iterations = cfg.max_iterations;
    SimplexResult<D> r = nelder_mead<D>(objective, start, opt);
    // one restart from the converged point guards against a collapsed simplex
    opt.initial_step = step * 0.05;
    SimplexResult<D> again = nelder_mead<D>(objective, r.x, opt);
    return again.value <= r.value ? again : r;
}

/// Indices of the `count` smallest values, ties broken by index.
inline std::vector<std::size_t> best_indices(const std::vector<double> &values, std::size_t count) {
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    count = std::min(count, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                          return values[a] < values[b] || (values[a] == values[b] && a < b);
                      });
    idx.resize(count);
    return idx;
}

}  // namespace detail

/// Minimizes h~(tau, vartheta) over the six design angles: coarse grid over
/// the design ranges, Nelder-Mead from the best grid nodes.
inline DesignOptimum optimize_angle_risk(const Contractions &lambda, std::uint64_t shots,
                                         const OptimizerConfig &cfg = {}) {
    detail::require_design_lambda(lambda);
    validate(cfg);
    if (shots < 1) {
        throw InvalidArgument("shots must be at least 1");
    }
    const int n = cfg.grid_nodes;
    std::vector<AngleTriple> nodes;
    nodes.reserve(static_cast<std::size_t>(n) * n * n);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            for (int c = 0; c < n; ++c) {
                nodes.push_back({a * kPi / n, b * kPi / n, c * kPi / (2.0 * n)});
            }
        }
    }
    std::vector<Mat3> frames(nodes.size());
    std::transform(nodes.begin(), nodes.end(), frames.begin(), [](const AngleTriple &a) { return rotation_zyx(a); });

    const std::size_t m = nodes.size();
    std::vector<double> values(m * m);
    parallel_for_chunks(m, [&](std::size_t i) {
        for (std::size_t j = 0; j < m; ++j) {
            values[i * m + j] = angle_risk_kernel(lambda, frames[i], frames[j]);
        }
    });

    auto objective = [&](const std::array<double, 6> &p) {
        return angle_risk_kernel(lambda, rotation_zyx({p[0], p[1], p[2]}), rotation_zyx({p[3], p[4], p[5]}));
    };
    const double step = 0.5 * kPi / n;
    SimplexResult<6> best;
    best.value = std::numeric_limits<double>::infinity();
    for (std::size_t idx : detail::best_indices(values, static_cast<std::size_t>(cfg.starts))) {
        const AngleTriple &t = nodes[idx / m];
        const AngleTriple &v = nodes[idx % m];
        const SimplexResult<6> r = detail::refine<6>(objective, {t.z, t.y, t.x, v.z, v.y, v.x}, step, cfg);
        if (r.value < best.value) {
            best = r;
        }
    }

    DesignOptimum out;
    out.tau = design_angles_for_frame(rotation_zyx({best.x[0], best.x[1], best.x[2]}));
    out.vartheta = design_angles_for_frame(rotation_zyx({best.x[3], best.x[4], best.x[5]}), &out.tau);
    const double nd = static_cast<double>(shots);
    out.h_min = std::min(best.value, angle_risk_kernel(lambda, rotation_zyx(out.tau), rotation_zyx(out.vartheta))) / nd;
    if (cfg.keep_surface) {
        out.surface.reserve(values.size());
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                out.surface.push_back({nodes[i], nodes[j], values[i * m + j] / nd});
            }
        }
    }
    return out;
}

inline double h_tilde_at(const Contractions &lambda, const AngleTriple &tau, const AngleTriple &vartheta,
                         std::uint64_t shots) {
    return analytic_h_tilde(lambda, build_frame(vartheta), build_frame(tau), shots);
}

inline ConjectureReport conjecture_report(const Contractions &lambda, std::uint64_t shots,
                                          const OptimizerConfig &cfg = {}) {
    ConjectureReport r;
    r.optimum = optimize_angle_risk(lambda, shots, cfg);
    r.h_conjecture_1 = h_tilde_at(lambda, kConjectureDesign1, kConjectureDesign1, shots);
    r.h_conjecture_2 = h_tilde_at(lambda, kConjectureDesign2, kConjectureDesign2, shots);
    r.h_zero = h_tilde_at(lambda, {}, {}, shots);
    r.gap_1 = r.h_conjecture_1 - r.optimum.h_min;
    r.gap_2 = r.h_conjecture_2 - r.optimum.h_min;
    r.symmetry_residual = angle_residual(r.optimum.tau, r.optimum.vartheta);
    return r;
}

struct PlanarOptimum {
    double tau = 0.0;
    double vartheta = 0.0;
    double h_min = 0.0;
    std::vector<std::array<double, 3>> surface;  // (tau, vartheta, h~2)
};

/// The same grid + simplex search restricted to planar designs
/// Theta = R_z(vartheta), M = R_z(tau) with l3 = 0 known.
inline PlanarOptimum optimize_planar(double l1, double l2, std::uint64_t shots, const OptimizerConfig &cfg = {}) {
    validate(cfg);
    const double quarter = kPi / 2.0;
    auto h2 = [&](double tau, double vartheta) { return analytic_h2(l1, l2, tau, vartheta, 1); };
    const int n = cfg.grid_nodes;
    std::vector<double> values(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            values[static_cast<std::size_t>(i) * n + j] = h2(i * quarter / n, j * quarter / n);
        }
    }
    auto objective = [&](const std::array<double, 2> &p) { return h2(p[0], p[1]); };
    SimplexResult<2> best;
    best.value = std::numeric_limits<double>::infinity();
    for (std::size_t idx : detail::best_indices(values, static_cast<std::size_t>(cfg.starts))) {
        const double t = static_cast<double>(idx / n) * quarter / n;
        const double v = static_cast<double>(idx % n) * quarter / n;
        const SimplexResult<2> r = detail::refine<2>(objective, {t, v}, 0.5 * quarter / n, cfg);
        if (r.value < best.value) {
            best = r;
        }
    }
    auto wrap_quarter = [&](double a) {
        double r = std::fmod(a, quarter);
        if (r < 0.0) {
            r += quarter;
        }
        return r >= quarter ? 0.0 : r;
    };
    const double nd = static_cast<double>(shots);
    PlanarOptimum out;
    out.tau = wrap_quarter(best.x[0]);
    out.vartheta = wrap_quarter(best.x[1]);
    out.h_min = best.value / nd;
    if (cfg.keep_surface) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                out.surface.push_back({i * quarter / n, j * quarter / n, values[static_cast<std::size_t>(i) * n + j] / nd});
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Two-step protocol.

struct TwoStepResult {
    ParamEstimate estimate;
    ParamEstimate stage1;
    ExperimentDesign stage1_design;
    ExperimentDesign stage2_design;
    TrialLosses losses;
    RiskReport report;
};

inline constexpr double kDefaultSplit = 0.2;

/// Per-cell shots (n1, n2) of the two stages for a total budget.
inline std::pair<std::uint64_t, std::uint64_t> two_step_shots(std::uint64_t budget, double split) {
    if (!(split > 0.0 && split < 1.0)) {
        throw InvalidArgument("split must lie in (0, 1)");
    }
    if (budget < 18) {
        throw InvalidArgument("budget must allow at least one shot per cell in both stages");
    }
    const auto n1 = static_cast<std::uint64_t>(std::floor(split * static_cast<double>(budget) / 9.0));
    const std::uint64_t n2 = (budget - 9 * n1) / 9;
    if (n1 < 1 || n2 < 1) {
        throw InvalidArgument("budget too small for the requested split");
    }
    return {n1, n2};
}

/// Stage 1 spends `split` of the budget at the conjecture design and extracts
/// the channel directions. Stage 2 aligns inputs and measurements with them
/// (tau = vartheta = phi^) and reads each contraction off the diagonal of the
/// outcome matrix. Trials 2r and 2r+1 of `seed` drive replication r.
inline TwoStepResult two_step_tomography(const ChannelParams &truth, std::uint64_t budget, double split,
                                         std::uint64_t seed, std::uint64_t replication = 0,
                                         const AngleTriple &stage1_angles = kConjectureDesign1) {
    const auto [n1, n2] = two_step_shots(budget, split);
    const ChannelMatrix a = compose_channel_matrix(truth);

    TwoStepResult res;
    res.stage1_design = {stage1_angles, stage1_angles, n1};
    const OrthogonalFrame f1 = build_frame(stage1_angles);
    const OutcomeMatrix x1 = forward_outcomes(a, f1, f1);
    const CountsMatrix c1 = sample_counts(x1, n1, seed, 2 * replication);
    res.stage1 = extract_params(estimate_channel_matrix(estimate_x(c1, n1), f1, f1));

    const AngleTriple aligned = design_angles_for_frame(res.stage1.frame);
    res.stage2_design = {aligned, aligned, n2};
    const OrthogonalFrame f2 = build_frame(aligned);
    const OutcomeMatrix x2 = forward_outcomes(a, f2, f2);
    const OutcomeMatrix x2_hat = estimate_x(sample_counts(x2, n2, seed, 2 * replication + 1), n2);

    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int p, int q) { return x2_hat(p, p) > x2_hat(q, q); });
    Mat3 frame;
    for (int k = 0; k < 3; ++k) {
        frame.col(k) = f2.column(order[k]);
    }
    if (frame.determinant() < 0.0) {
        frame.col(2) *= -1.0;
    }
    const Contractions lambda{x2_hat(order[0], order[0]), x2_hat(order[1], order[1]), x2_hat(order[2], order[2])};
    const ChannelParams p = canonicalize(lambda, frame);
    res.estimate.lambda = p.lambda;
    res.estimate.phi = p.phi;
    res.estimate.frame = frame;
    res.estimate.cp_valid = cp_check(lambda);

    res.losses.f = (compose_channel_matrix(p) - a).squaredNorm();
    for (int i = 0; i < 3; ++i) {
        const double d = p.lambda[i] - truth.lambda[i];
        res.losses.g += d * d;
    }
    const auto hat = p.phi.as_array();
    const auto ref = truth.phi.as_array();
    for (int i = 0; i < 3; ++i) {
        const double d = angle_distance(hat[i], ref[i]);
        res.losses.h += d * d;
    }
    res.report.mode = RiskMode::monte_carlo;
    res.report.shots = n2;
    res.report.trials = 1;
    res.report.f = res.losses.f;
    res.report.g = res.losses.g;
    res.report.h = res.losses.h;
    res.report.f_bound = bound_f(truth.lambda, n2);
    res.report.g_bound = bound_g(truth.lambda, n2);
    return res;
}

/// Mean losses of the two-step protocol over independent replications.
inline RiskReport two_step_risk(const ChannelParams &truth, std::uint64_t budget, double split,
                                std::uint64_t replications, std::uint64_t seed) {
    if (replications < 1) {
        throw InvalidArgument("replications must be at least 1");
    }
    std::vector<TrialLosses> per(replications);
    const std::uint64_t n2 = two_step_shots(budget, split).second;
    parallel_for_chunks(replications, [&](std::size_t r) {
        per[r] = two_step_tomography(truth, budget, split, seed, r).losses;
    });
    std::array<MeanAccumulator, 3> acc;
    for (const TrialLosses &l : per) {
        acc[0].add(l.f);
        acc[1].add(l.g);
        acc[2].add(l.h);
    }
    RiskReport r;
    r.mode = RiskMode::monte_carlo;
    r.shots = n2;
    r.trials = replications;
    r.f = acc[0].mean();
    r.g = acc[1].mean();
    r.h = acc[2].mean();
    r.se_f = acc[0].std_error();
    r.se_g = acc[1].std_error();
    r.se_h = acc[2].std_error();
    r.f_bound = bound_f(truth.lambda, n2);
    r.g_bound = bound_g(truth.lambda, n2);
    return r;
}

}  // namespace pauli_tomo
