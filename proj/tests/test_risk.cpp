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

#include "pauli_tomo/experiment.hpp"
#include "pauli_tomo/parallel.hpp"
#include "pauli_tomo/risk.hpp"
#include "pauli_tomo/sampling.hpp"

namespace pauli_tomo {
namespace {

const Contractions kLambda{0.8, 0.65, 0.5};
const OrthogonalFrame kId;

Vec9 unit(int k) { return Vec9::Unit(k); }

TEST(CoefficientMatrix, IdentityFrames) { EXPECT_EQ(coefficient_matrix(kId, kId).matrix(), Mat9::Identity()); }

TEST(CoefficientMatrix, OrthogonalAndBistochastic) {
    CounterRng rng(stream_key(41, 0, 0));
    for (int n = 0; n < 100; ++n) {
        const CoefficientMatrix c(build_frame(random_design_angles(rng)), build_frame(random_design_angles(rng)));
        const Mat9 sq = c.matrix().cwiseAbs2();
        EXPECT_LE((sq.rowwise().sum() - Vec9::Ones()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE((sq.colwise().sum().transpose() - Vec9::Ones()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE((c.matrix().transpose() * c.matrix() - Mat9::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(CoefficientMatrix, ApplyMatchesMatrixInversion) {
    CounterRng rng(stream_key(42, 0, 0));
    for (int n = 0; n < 50; ++n) {
        const OrthogonalFrame t = build_frame(random_design_angles(rng));
        const OrthogonalFrame m = build_frame(random_design_angles(rng));
        const Mat3 xh = Mat3::NullaryExpr([&](Eigen::Index, Eigen::Index) { return uniform_in(rng, -1, 1); });
        EXPECT_LE((CoefficientMatrix(t, m).apply(xh) - estimate_channel_matrix(xh, t, m)).cwiseAbs().maxCoeff(),
                  1e-14);
    }
}

TEST(VarLinearCombination, NamedCases) {
    const CoefficientMatrix c(kId, kId);
    const Mat3 x = kLambda.as_vector().asDiagonal();
    EXPECT_EQ(var_linear_combination(Vec9::Zero(), c, x, 1000), 0.0);
    EXPECT_NEAR(var_linear_combination(unit(0), c, x, 1000), (1 - 0.64) / 1000, 1e-18);
    EXPECT_NEAR(var_linear_combination(unit(1), c, x, 1000), 1.0 / 1000, 1e-18);
    EXPECT_THROW(var_linear_combination(unit(0), c, x, 0), InvalidArgument);
}

TEST(VarLinearCombination, MatchesMonteCarlo) {
    const OrthogonalFrame t = build_frame({0.4, 1.1, 0.3});
    const OrthogonalFrame m = build_frame({2.0, 0.5, 1.2});
    const Mat3 a = compose_channel_matrix({kLambda, {0.3, 0.7, 0.2}});
    const MatrixMoments mom = mc_estimator_moments(a, t, m, 1000, 20000, 3);
    const CoefficientMatrix c(t, m);
    const OutcomeMatrix x = forward_outcomes(a, t, m);
    for (int k = 0; k < 9; ++k) {
        const double var = var_linear_combination(unit(k), c, x, 1000);
        // relative standard error of a sample variance is about sqrt(2 / trials)
        EXPECT_NEAR(mom.variance(k / 3, k % 3) / var, 1.0, 4.0 * std::sqrt(2.0 / 20000));
        EXPECT_NEAR(mom.mean(k / 3, k % 3), a(k / 3, k % 3), 4.0 * mom.std_error(k / 3, k % 3));
    }
}

TEST(VarLinearCombination, PairwiseDifferencesBounded) {
    CounterRng rng(stream_key(43, 0, 0));
    for (int n = 0; n < 50; ++n) {
        const CoefficientMatrix c(build_frame(random_design_angles(rng)), build_frame(random_design_angles(rng)));
        const Mat3 x = forward_outcomes(compose_channel_matrix(random_canonical_params(rng)), kId, kId);
        for (int p = 0; p < 9; ++p) {
            for (int q = p + 1; q < 9; ++q) {
                EXPECT_LE(var_linear_combination(unit(p) - unit(q), c, x, 1000), 2.0 / 1000 + 1e-15);
            }
        }
    }
}

TEST(AnalyticF, NamedCases) {
    EXPECT_NEAR(analytic_f(kLambda, kId, kId, 1000), 0.0046875, 1e-15);
    CounterRng rng(stream_key(44, 0, 0));
    for (int n = 0; n < 20; ++n) {
        const OrthogonalFrame t = build_frame(random_design_angles(rng));
        const OrthogonalFrame m = build_frame(random_design_angles(rng));
        EXPECT_NEAR(analytic_f({0, 0, 0}, t, m, 500), 6.0 / 500, 1e-14);
    }
}

TEST(AnalyticGTilde, NamedCases) {
    EXPECT_NEAR(analytic_g_tilde(kLambda, kId, kId, 1000), 0.0016875, 1e-15);
    EXPECT_EQ(analytic_g_tilde({1, 1, 1}, kId, kId, 1000), 0.0);
}

TEST(AnalyticRisks, BoundedBelowForRandomDesigns) {
    CounterRng rng(stream_key(45, 0, 0));
    for (int n = 0; n < 100; ++n) {
        const Contractions l = random_contractions(rng);
        for (int d = 0; d < 10; ++d) {
            const OrthogonalFrame t = build_frame(random_design_angles(rng));
            const OrthogonalFrame m = build_frame(random_design_angles(rng));
            EXPECT_GE(analytic_f(l, t, m, 1000), bound_f(l, 1000) - 1e-15);
            EXPECT_GE(analytic_g_tilde(l, t, m, 1000), bound_g(l, 1000) - 1e-15);
        }
    }
}

TEST(AnalyticHTilde, ExampleValues) {
    EXPECT_NEAR(analytic_h_tilde(kLambda, kId, kId, 1000), 0.05, 1e-12);
    const OrthogonalFrame c1 = build_frame({kPi / 4, kPi / 4, 0});
    const OrthogonalFrame c2 = build_frame({kPi / 4, 0, kPi / 4});
    const double h1 = analytic_h_tilde(kLambda, c1, c1, 1000);
    const double h2 = analytic_h_tilde(kLambda, c2, c2, 1000);
    EXPECT_NEAR(h1, 0.03676, 5e-5);
    EXPECT_NEAR(h1, h2, 1e-15);
    EXPECT_THROW(analytic_h_tilde({0.8, 0.8, 0.5}, kId, kId, 1000), DegenerateSpectrum);
}

TEST(AnalyticHTilde, KernelAgrees) {
    CounterRng rng(stream_key(46, 0, 0));
    for (int n = 0; n < 100; ++n) {
        const Contractions l = random_contractions(rng, true, 0.05);
        const OrthogonalFrame t = build_frame(random_design_angles(rng));
        const OrthogonalFrame m = build_frame(random_design_angles(rng));
        const double h = analytic_h_tilde(l, t, m, 1000);
        EXPECT_NEAR(angle_risk_kernel(l, m.matrix(), t.matrix()) / 1000, h, 1e-12 * std::max(1.0, h));
    }
}

TEST(GeneralOrientationRisks, ReduceToCanonical) {
    CounterRng rng(stream_key(47, 0, 0));
    for (int n = 0; n < 100; ++n) {
        const Contractions l = random_contractions(rng, true, 0.05);
        const Mat3 o = random_rotation(rng);
        const OrthogonalFrame t = build_frame(random_design_angles(rng));
        const OrthogonalFrame m = build_frame(random_design_angles(rng));
        const Mat3 a = o * l.as_vector().asDiagonal() * o.transpose();
        const double h = analytic_h_tilde(l, t, m, 1000);
        EXPECT_NEAR(matrix_risk(a, t.rotated(o), m.rotated(o), 1000), analytic_f(l, t, m, 1000), 1e-15);
        EXPECT_NEAR(contraction_risk(a, t.rotated(o), m.rotated(o), 1000), analytic_g_tilde(l, t, m, 1000), 1e-14);
        EXPECT_NEAR(angle_risk(a, t.rotated(o), m.rotated(o), 1000), h, 1e-12 * std::max(1.0, h));
    }
}

TEST(Bounds, NamedCases) {
    EXPECT_EQ(bound_f({0, 0, 0}, 1), 6.0);
    EXPECT_EQ(bound_g({0, 0, 0}, 1), 3.0);
    EXPECT_NEAR(bound_f({1, 1, 1}, 1000), 0.003, 1e-18);
    EXPECT_EQ(bound_g({1, 1, 1}, 1000), 0.0);
    EXPECT_NEAR(bound_f(kLambda, 1000), 0.0046875, 1e-18);
    EXPECT_NEAR(bound_g(kLambda, 1000), 0.0016875, 1e-18);
    EXPECT_THROW(bound_f(kLambda, 0), InvalidArgument);
}

TEST(AnalyticH2, NamedCases) {
    EXPECT_NEAR(analytic_h2(0.8, 0.2, kPi / 4, kPi / 4, 1000), 3.0 / (4 * 0.36) / 2000, 1e-15);
    EXPECT_THROW(analytic_h2(0.2, 0.8, 0, 0, 1000), InvalidArgument);
    EXPECT_THROW(analytic_h2(0.5, 0.5, 0, 0, 1000), InvalidArgument);
}

double grid_argmin(double l1, double l2, double *value) {
    double best = 1e300;
    double at = 0.0;
    const int steps = 786;
    for (int i = 0; i < steps; ++i) {
        for (int j = 0; j < steps; ++j) {
            const double tau = i * 2e-3;
            const double h = analytic_h2(l1, l2, tau, j * 2e-3, 1000);
            if (h < best) {
                best = h;
                at = tau;
            }
        }
    }
    *value = best;
    return at;
}

TEST(AnalyticH2, GridMinimaMatchNamedLocations) {
    double v = 0.0;
    EXPECT_NEAR(grid_argmin(0.8, 0.2, &v), kPi / 4, 2e-3);
    const double x = grid_argmin(1.0, 0.0, &v);
    EXPECT_TRUE(std::abs(x - kPi / 6) <= 2e-3 || std::abs(x - kPi / 3) <= 2e-3) << x;
}

TEST(H2OptimalDesign, NamedCases) {
    const H2Optimum a = h2_optimal_design(0.8, 0.2, 1000);
    EXPECT_EQ(a.regime, 1);
    EXPECT_NEAR(a.tau, kPi / 4, 1e-15);
    EXPECT_NEAR(a.value, 0.00104166666666, 1e-14);

    const H2Optimum b = h2_optimal_design(1.0, 0.0, 1000);
    EXPECT_EQ(b.regime, 2);
    EXPECT_NEAR(b.tau, kPi / 6, 1e-14);
    EXPECT_NEAR(b.tau_alt, kPi / 3, 1e-14);
    EXPECT_NEAR(b.value, 2.875 / 8000, 1e-15);
    EXPECT_NEAR(analytic_h2(1.0, 0.0, b.tau, b.tau, 1000), b.value, 1e-15);
    EXPECT_NEAR(analytic_h2(1.0, 0.0, b.tau_alt, b.tau_alt, 1000), b.value, 1e-15);
}

TEST(H2OptimalDesign, RegimeBoundaryContinuity) {
    const double l2 = 0.1;
    const double l1 = (3.0 + 2.0 * std::sqrt(2.0)) * 0.1;
    const double n = 1000.0;
    const double sum2 = (l1 + l2) * (l1 + l2);
    const double diff2 = (l1 - l2) * (l1 - l2);
    const double pre = 1.0 / (4.0 * diff2) / (2.0 * n);
    const double case1 = pre * (4.0 - sum2);
    const double case2 = pre * (4.0 - (l1 * l1 + l2 * l2) - sum2 * sum2 / (8.0 * diff2));
    EXPECT_NEAR(case1, case2, 1e-12);
    EXPECT_NEAR(0.25 * std::acos(-0.5 * sum2 / diff2), kPi / 4, 1e-7);
    const H2Optimum o = h2_optimal_design(l1, l2, 1000);
    EXPECT_NEAR(o.tau, kPi / 4, 1e-7);
    EXPECT_NEAR(o.value, case1, 1e-12);
}

TEST(H2OptimalDesign, Errors) {
    EXPECT_THROW(h2_optimal_design(0.2, 0.8, 1000), InvalidArgument);
    EXPECT_THROW(h2_optimal_design(0.5, -0.5, 1000), InvalidArgument);
    EXPECT_THROW(h2_optimal_design(0.8, 0.2, 0), InvalidArgument);
}

TEST(McLoss, NoiseFreeRunHasZeroLoss) {
    const ChannelParams truth{kLambda, {0.3, 0.7, 0.2}};
    const Mat3 a = compose_channel_matrix(truth);
    const OrthogonalFrame t = build_frame({0.4, 1.1, 0.3});
    const OrthogonalFrame m = build_frame({2.0, 0.5, 1.2});
    const Mat3 counts = expected_counts(forward_outcomes(a, t, m), 1000);
    const TrialLosses l = trial_losses(truth, a, estimate_x(counts, 1000), t, m);
    EXPECT_LE(l.f, 1e-24);
    EXPECT_LE(l.g, 1e-24);
    EXPECT_LE(l.h, 1e-18);
}

TEST(McLoss, MatchesAnalyticAtIdentityDesign) {
    const ChannelParams truth{kLambda, {}};
    const RiskReport r = mc_loss(truth, ExperimentDesign{{}, {}, 1000}, 100000, 17);
    EXPECT_EQ(r.mode, RiskMode::monte_carlo);
    EXPECT_EQ(r.trials, 100000u);
    EXPECT_NEAR(r.f, 0.0046875, 4.0 * r.se_f);
    EXPECT_EQ(r.f_bound, bound_f(kLambda, 1000));
}

TEST(McLoss, DeterministicAndValidated) {
    const ChannelParams truth{kLambda, {0.3, 0.7, 0.2}};
    const ExperimentDesign d{{0.4, 1.1, 0.3}, {2.0, 0.5, 1.2}, 500};
    const RiskReport a = mc_loss(truth, d, 1000, 5);
    const RiskReport b = mc_loss(truth, d, 1000, 5);
    EXPECT_EQ(a.f, b.f);
    EXPECT_EQ(a.h, b.h);
    EXPECT_THROW(mc_loss(truth, d, 0, 5), InvalidArgument);
    EXPECT_THROW(mc_loss(truth, ExperimentDesign{{0, 0, 2.0}, {}, 10}, 10, 5), InvalidArgument);
}

TEST(AnalyticReport, DegenerateSpectrumGivesNanAngleRisk) {
    const RiskReport r = analytic_report({{0.5, 0.5, 0.5}, {}}, ExperimentDesign{});
    EXPECT_TRUE(std::isnan(r.h));
    EXPECT_NEAR(r.f, analytic_f({0.5, 0.5, 0.5}, kId, kId, 1000), 1e-18);
}

TEST(OutputErrorRatio, OneTenthOfMatrixError) {
    const Mat3 a = Vec3(0.8, 0.65, 0.5).asDiagonal();
    Mat3 a_hat = a;
    a_hat(0, 1) += 0.02;
    a_hat(2, 2) -= 0.01;
    // E[theta theta^T] = I / 5 over the ball, halved
    EXPECT_NEAR(output_error_ratio(a, a_hat, 200000, 1), 0.1, 2e-3);
    EXPECT_THROW(output_error_ratio(a, a, 10, 1), InvalidArgument);
}

}  // namespace
}  // namespace pauli_tomo
