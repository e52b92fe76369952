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

// Loss functions of the tomography experiment.
//
// A^ is linear in X^: a^_k = sum_l c_kl x^_l with c_(ij),(kl) = M_ik Theta_jl,
// and the x^_l are independent with Var(x^_l) = (1 - x_l^2) / N. Every loss
// below is a sum of variances of linear combinations of the a^_k:
//
//   f  = sum_i Var(a^_ii) + 1/2 sum_{i<j} Var(a^_ij + a^_ji)
//   g~ = sum_i Var(a^_ii)
//   h~ = sum_{i<j} Var(a^_ij + a^_ji) / (4 (l_i - l_j)^2)
//
// (channel in canonical orientation). For a channel in any other orientation
// the same quantities are taken in its eigenbasis.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pauli_tomo/core_model.hpp"
#include "pauli_tomo/experiment.hpp"
#include "pauli_tomo/extraction.hpp"
#include "pauli_tomo/parallel.hpp"
#include "pauli_tomo/rng.hpp"

namespace pauli_tomo {

using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat9 = Eigen::Matrix<double, 9, 9>;

/// Flat index of entry (i, j) of a 3x3 matrix.
constexpr int flat(int i, int j) { return 3 * i + j; }

class CoefficientMatrix {
public:
    CoefficientMatrix(const OrthogonalFrame &theta_frame, const OrthogonalFrame &meas_frame) {
        const Mat3 &m = meas_frame.matrix();
        const Mat3 &t = theta_frame.matrix();
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                for (int k = 0; k < 3; ++k) {
                    for (int l = 0; l < 3; ++l) {
                        c_(flat(i, j), flat(k, l)) = m(i, k) * t(j, l);
                    }
                }
            }
        }
    }

    [[nodiscard]] const Mat9 &matrix() const { return c_; }
    [[nodiscard]] double operator()(int k, int l) const { return c_(k, l); }

    /// a^ = C x^ with both matrices flattened row-major.
    [[nodiscard]] Mat3 apply(const Mat3 &x_hat) const {
        Vec9 x;
        for (int k = 0; k < 9; ++k) {
            x(k) = x_hat(k / 3, k % 3);
        }
        const Vec9 a = c_ * x;
        Mat3 out;
        for (int k = 0; k < 9; ++k) {
            out(k / 3, k % 3) = a(k);
        }
        return out;
    }

private:
    Mat9 c_ = Mat9::Zero();
};

inline CoefficientMatrix coefficient_matrix(const OrthogonalFrame &theta_frame, const OrthogonalFrame &meas_frame) {
    return {theta_frame, meas_frame};
}

/// Var(sum_k d_k a^_k) = sum_l (sum_k d_k c_kl)^2 (1 - x_l^2) / N.
inline double var_linear_combination(const Vec9 &d, const CoefficientMatrix &c, const OutcomeMatrix &x,
                                     std::uint64_t shots) {
    if (shots < 1) {
        throw InvalidArgument("shots must be at least 1");
    }
    const Vec9 w = c.matrix().transpose() * d;
    double var = 0.0;
    for (int l = 0; l < 9; ++l) {
        const double xl = x(l / 3, l % 3);
        var += w(l) * w(l) * (1.0 - xl * xl);
    }
    return var / static_cast<double>(shots);
}

namespace detail {

inline Vec9 unit9(int k) {
    Vec9 d = Vec9::Zero();
    d(k) = 1.0;
    return d;
}

/// Coefficients of u^T A^ v + v^T A^ u.
inline Vec9 symmetric_form(const Vec3 &u, const Vec3 &v) {
    Vec9 d;
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            d(flat(a, b)) = u(a) * v(b) + v(a) * u(b);
        }
    }
    return d;
}

inline constexpr std::array<std::array<int, 2>, 3> kAnglePairs{{{0, 1}, {0, 2}, {1, 2}}};

}  // namespace detail

/// E ||A^_s - A||^2 for any symmetric channel matrix A.
inline double matrix_risk(const ChannelMatrix &a, const OrthogonalFrame &theta_frame,
                          const OrthogonalFrame &meas_frame, std::uint64_t shots) {
    const CoefficientMatrix c(theta_frame, meas_frame);
    const OutcomeMatrix x = forward_outcomes(a, theta_frame, meas_frame);
    double f = 0.0;
    for (int i = 0; i < 3; ++i) {
        f += var_linear_combination(detail::unit9(flat(i, i)), c, x, shots);
    }
    for (const auto &[i, j] : detail::kAnglePairs) {
        const Vec9 d = detail::unit9(flat(i, j)) + detail::unit9(flat(j, i));
        f += 0.5 * var_linear_combination(d, c, x, shots);
    }
    return f;
}

/// Linearized contraction risk sum_i Var(v_i^T A^ v_i) in the eigenbasis of A.
inline double contraction_risk(const ChannelMatrix &a, const OrthogonalFrame &theta_frame,
                               const OrthogonalFrame &meas_frame, std::uint64_t shots) {
    const SymmetricEigen e = eig3_symmetric(a);
    const CoefficientMatrix c(theta_frame, meas_frame);
    const OutcomeMatrix x = forward_outcomes(a, theta_frame, meas_frame);
    double g = 0.0;
    for (int i = 0; i < 3; ++i) {
        const Vec3 v = e.vectors.col(i);
        g += var_linear_combination(0.5 * detail::symmetric_form(v, v), c, x, shots);
    }
    return g;
}

/// Linearized angle risk in the eigenbasis of A.
inline double angle_risk(const ChannelMatrix &a, const OrthogonalFrame &theta_frame,
                         const OrthogonalFrame &meas_frame, std::uint64_t shots) {
    const SymmetricEigen e = eig3_symmetric(a);
    const Contractions l{e.values(0), e.values(1), e.values(2)};
    require_separated(l);
    const CoefficientMatrix c(theta_frame, meas_frame);
    const OutcomeMatrix x = forward_outcomes(a, theta_frame, meas_frame);
    double h = 0.0;
    for (const auto &[i, j] : detail::kAnglePairs) {
        const Vec9 d = detail::symmetric_form(e.vectors.col(i), e.vectors.col(j));
        const double gap = l[i] - l[j];
        h += var_linear_combination(d, c, x, shots) / (4.0 * gap * gap);
    }
    return h;
}

inline double analytic_f(const Contractions &lambda, const OrthogonalFrame &theta_frame,
                         const OrthogonalFrame &meas_frame, std::uint64_t shots) {
    detail::require_finite(lambda);
    return matrix_risk(Mat3(lambda.as_vector().asDiagonal()), theta_frame, meas_frame, shots);
}

inline double analytic_g_tilde(const Contractions &lambda, const OrthogonalFrame &theta_frame,
                               const OrthogonalFrame &meas_frame, std::uint64_t shots) {
    detail::require_finite(lambda);
    const CoefficientMatrix c(theta_frame, meas_frame);
    const OutcomeMatrix x = forward_outcomes(Mat3(lambda.as_vector().asDiagonal()), theta_frame, meas_frame);
    double g = 0.0;
    for (int i = 0; i < 3; ++i) {
        g += var_linear_combination(detail::unit9(flat(i, i)), c, x, shots);
    }
    return g;
}

inline double analytic_h_tilde(const Contractions &lambda, const OrthogonalFrame &theta_frame,
                               const OrthogonalFrame &meas_frame, std::uint64_t shots) {
    detail::require_finite(lambda);
    require_separated(lambda);
    const CoefficientMatrix c(theta_frame, meas_frame);
    const OutcomeMatrix x = forward_outcomes(Mat3(lambda.as_vector().asDiagonal()), theta_frame, meas_frame);
    double h = 0.0;
    for (const auto &[i, j] : detail::kAnglePairs) {
        const Vec9 d = detail::unit9(flat(i, j)) + detail::unit9(flat(j, i));
        const double gap = lambda[i] - lambda[j];
        h += var_linear_combination(d, c, x, shots) / (4.0 * gap * gap);
    }
    return h;
}

/// N * h~ for a canonical channel, expanded without the 9x9 matrix. Used in
/// the optimizer's inner loop; agrees with analytic_h_tilde * N.
inline double angle_risk_kernel(const Contractions &lambda, const Mat3 &meas, const Mat3 &input) {
    const Vec3 l = lambda.as_vector();
    const Mat3 x = meas.transpose() * l.asDiagonal() * input;
    double h = 0.0;
    for (const auto &[i, j] : detail::kAnglePairs) {
        double var = 0.0;
        for (int k = 0; k < 3; ++k) {
            for (int m = 0; m < 3; ++m) {
                const double w = meas(i, k) * input(j, m) + meas(j, k) * input(i, m);
                var += w * w * (1.0 - x(k, m) * x(k, m));
            }
        }
        const double gap = l(i) - l(j);
        h += var / (4.0 * gap * gap);
    }
    return h;
}

/// (6 - sum l^2) / N.
inline double bound_f(const Contractions &lambda, std::uint64_t shots) {
    if (shots < 1) {
        throw InvalidArgument("shots must be at least 1");
    }
    return (6.0 - lambda.sum_squares()) / static_cast<double>(shots);
}

/// (3 - sum l^2) / N.
inline double bound_g(const Contractions &lambda, std::uint64_t shots) {
    if (shots < 1) {
        throw InvalidArgument("shots must be at least 1");
    }
    return (3.0 - lambda.sum_squares()) / static_cast<double>(shots);
}

// ---------------------------------------------------------------------------
// Planar problem: third direction known with l3 = 0, Theta = R_z(vartheta),
// M = R_z(tau), one angle parameter.

namespace detail {

inline void require_planar_lambda(double l1, double l2) {
    require_finite(l1, "lambda1");
    require_finite(l2, "lambda2");
    if (!(l1 > l2)) {
        throw InvalidArgument("planar problem requires lambda1 > lambda2");
    }
    if (l1 == -l2) {
        throw InvalidArgument("planar problem requires lambda1 != -lambda2");
    }
}

}  // namespace detail

inline double analytic_h2(double l1, double l2, double tau, double vartheta, std::uint64_t shots) {
    detail::require_planar_lambda(l1, l2);
    const OrthogonalFrame meas = OrthogonalFrame::from_matrix(rotation_matrix(Axis::z, tau));
    const OrthogonalFrame input = OrthogonalFrame::from_matrix(rotation_matrix(Axis::z, vartheta));
    const CoefficientMatrix c(input, meas);
    const OutcomeMatrix x = forward_outcomes(Vec3(l1, l2, 0.0).asDiagonal(), input, meas);
    const Vec9 d = detail::unit9(flat(0, 1)) + detail::unit9(flat(1, 0));
    const double gap = l1 - l2;
    return var_linear_combination(d, c, x, shots) / (4.0 * gap * gap);
}

struct H2Optimum {
    double tau = 0.0;        // = vartheta at the optimum
    double tau_alt = 0.0;    // the other minimizer, pi/2 - tau (mod pi/2)
    double value = 0.0;
    int regime = 1;
};

/// Closed-form minimizer of the planar angle risk.
inline H2Optimum h2_optimal_design(double l1, double l2, std::uint64_t shots) {
    detail::require_planar_lambda(l1, l2);
    if (shots < 1) {
        throw InvalidArgument("shots must be at least 1");
    }
    const double n = static_cast<double>(shots);
    const double sum2 = (l1 + l2) * (l1 + l2);
    const double diff2 = (l1 - l2) * (l1 - l2);
    const double prefactor = 1.0 / (4.0 * diff2) / (2.0 * n);
    H2Optimum out;
    if (sum2 >= 2.0 * diff2) {
        out.regime = 1;
        out.tau = kPi / 4.0;
        out.tau_alt = kPi / 4.0;
        out.value = prefactor * (4.0 - sum2);
    } else {
        out.regime = 2;
        out.tau = 0.25 * std::acos(-sum2 / (2.0 * diff2));
        out.tau_alt = kPi / 2.0 - out.tau;
        out.value = prefactor * (4.0 - (l1 * l1 + l2 * l2) - sum2 * sum2 / (8.0 * diff2));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reports and Monte Carlo.

enum class RiskMode { analytic, monte_carlo };

inline const char *to_string(RiskMode m) { return m == RiskMode::analytic ? "analytic" : "monte-carlo"; }

struct RiskReport {
    RiskMode mode = RiskMode::analytic;
    std::uint64_t shots = 0;
    std::uint64_t trials = 0;
    double f = 0.0;
    double g = 0.0;
    double h = 0.0;
    double se_f = 0.0;
    double se_g = 0.0;
    double se_h = 0.0;
    double f_bound = 0.0;
    double g_bound = 0.0;
};

/// Analytic f, g~, h~ for a channel in any orientation. h is NaN when the
/// spectrum is degenerate.
inline RiskReport analytic_report(const ChannelParams &params, const ExperimentDesign &design) {
    validate(design);
    const ChannelMatrix a = compose_channel_matrix(params);
    const OrthogonalFrame input = build_frame(design.input);
    const OrthogonalFrame meas = build_frame(design.meas);
    RiskReport r;
    r.mode = RiskMode::analytic;
    r.shots = design.shots;
    r.f = matrix_risk(a, input, meas, design.shots);
    r.g = contraction_risk(a, input, meas, design.shots);
    try {
        r.h = angle_risk(a, input, meas, design.shots);
    } catch (const DegenerateSpectrum &) {
        r.h = std::numeric_limits<double>::quiet_NaN();
    }
    r.f_bound = bound_f(params.lambda, design.shots);
    r.g_bound = bound_g(params.lambda, design.shots);
    return r;
}

struct TrialLosses {
    double f = 0.0;
    double g = 0.0;
    double h = 0.0;
};

/// Squared errors of one run of the estimator chain from an outcome estimate.
inline TrialLosses trial_losses(const ChannelParams &truth, const ChannelMatrix &a_true, const OutcomeMatrix &x_hat,
                                const OrthogonalFrame &input, const OrthogonalFrame &meas) {
    const ParamEstimate est = extract_params(estimate_channel_matrix(x_hat, input, meas));
    TrialLosses out;
    out.f = (compose_channel_matrix(est.params()) - a_true).squaredNorm();
    for (int i = 0; i < 3; ++i) {
        const double d = est.lambda[i] - truth.lambda[i];
        out.g += d * d;
    }
    const auto hat = est.phi.as_array();
    const auto ref = truth.phi.as_array();
    for (int i = 0; i < 3; ++i) {
        const double d = angle_distance(hat[i], ref[i]);
        out.h += d * d;
    }
    return out;
}

inline constexpr std::size_t kTrialChunk = 512;

/// Sample means of the three losses over seeded runs of sample -> estimate
/// -> extract. Trial t uses streams (seed, t, cell).
inline RiskReport mc_loss(const ChannelParams &params, const ExperimentDesign &design, std::uint64_t trials,
                          std::uint64_t seed) {
    if (trials < 1) {
        throw InvalidArgument("trials must be at least 1");
    }
    validate(design);
    const ChannelMatrix a = compose_channel_matrix(params);
    const OrthogonalFrame input = build_frame(design.input);
    const OrthogonalFrame meas = build_frame(design.meas);
    const OutcomeMatrix x = forward_outcomes(a, input, meas);

    const std::size_t n_chunks = (trials + kTrialChunk - 1) / kTrialChunk;
    std::vector<std::array<MeanAccumulator, 3>> partial(n_chunks);
    parallel_for_chunks(n_chunks, [&](std::size_t chunk) {
        const std::uint64_t begin = chunk * kTrialChunk;
        const std::uint64_t end = std::min<std::uint64_t>(trials, begin + kTrialChunk);
        auto &acc = partial[chunk];
        for (std::uint64_t t = begin; t < end; ++t) {
            const CountsMatrix counts = sample_counts(x, design.shots, seed, t);
            const TrialLosses l = trial_losses(params, a, estimate_x(counts, design.shots), input, meas);
            acc[0].add(l.f);
            acc[1].add(l.g);
            acc[2].add(l.h);
        }
    });
    std::array<MeanAccumulator, 3> total;
    for (const auto &p : partial) {
        for (int k = 0; k < 3; ++k) {
            total[k].merge(p[k]);
        }
    }
    RiskReport r;
    r.mode = RiskMode::monte_carlo;
    r.shots = design.shots;
    r.trials = trials;
    r.f = total[0].mean();
    r.g = total[1].mean();
    r.h = total[2].mean();
    r.se_f = total[0].std_error();
    r.se_g = total[1].std_error();
    r.se_h = total[2].std_error();
    r.f_bound = bound_f(params.lambda, design.shots);
    r.g_bound = bound_g(params.lambda, design.shots);
    return r;
}

struct MatrixMoments {
    Mat3 mean = Mat3::Zero();
    Mat3 std_error = Mat3::Zero();
    Mat3 variance = Mat3::Zero();
};

/// Entrywise sample mean, variance and standard error of A^ over seeded trials.
inline MatrixMoments mc_estimator_moments(const ChannelMatrix &a, const OrthogonalFrame &input,
                                          const OrthogonalFrame &meas, std::uint64_t shots, std::uint64_t trials,
                                          std::uint64_t seed) {
    if (trials < 2) {
        throw InvalidArgument("trials must be at least 2");
    }
    const OutcomeMatrix x = forward_outcomes(a, input, meas);
    const std::size_t n_chunks = (trials + kTrialChunk - 1) / kTrialChunk;
    std::vector<std::array<MeanAccumulator, 9>> partial(n_chunks);
    parallel_for_chunks(n_chunks, [&](std::size_t chunk) {
        const std::uint64_t begin = chunk * kTrialChunk;
        const std::uint64_t end = std::min<std::uint64_t>(trials, begin + kTrialChunk);
        for (std::uint64_t t = begin; t < end; ++t) {
            const Mat3 a_hat = estimate_channel_matrix(estimate_x(sample_counts(x, shots, seed, t), shots), input, meas);
            for (int k = 0; k < 9; ++k) {
                partial[chunk][k].add(a_hat(k / 3, k % 3));
            }
        }
    });
    std::array<MeanAccumulator, 9> total;
    for (const auto &p : partial) {
        for (int k = 0; k < 9; ++k) {
            total[k].merge(p[k]);
        }
    }
    MatrixMoments out;
    for (int k = 0; k < 9; ++k) {
        out.mean(k / 3, k % 3) = total[k].mean();
        out.variance(k / 3, k % 3) = total[k].variance();
        out.std_error(k / 3, k % 3) = total[k].std_error();
    }
    return out;
}

/// Uniform point of the unit ball by rejection from the enclosing cube.
inline Vec3 sample_bloch_ball(CounterRng &rng) {
    for (;;) {
        const Vec3 v(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
        if (v.squaredNorm() <= 1.0) {
            return v;
        }
    }
}

/// Mean over uniform states of (1/2)||(A - A^) theta||^2, divided by ||A - A^||^2.
inline double output_error_ratio(const Mat3 &a, const Mat3 &a_hat, std::uint64_t samples, std::uint64_t seed) {
    if (samples < 1) {
        throw InvalidArgument("samples must be at least 1");
    }
    const Mat3 d = a - a_hat;
    const double norm2 = d.squaredNorm();
    if (norm2 == 0.0) {
        throw InvalidArgument("matrices must differ");
    }
    CounterRng rng(stream_key(seed, 0, 0xB10C));
    CompensatedSum sum;
    for (std::uint64_t s = 0; s < samples; ++s) {
        sum.add(0.5 * (d * sample_bloch_ball(rng)).squaredNorm());
    }
    return sum.value() / static_cast<double>(samples) / norm2;
}

}  // namespace pauli_tomo
