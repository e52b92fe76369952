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


#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "pauli_tomo/experiment.hpp"
#include "pauli_tomo/extraction.hpp"
#include "pauli_tomo/parallel.hpp"
#include "pauli_tomo/sampling.hpp"

namespace pauli_tomo {
namespace {

const Contractions kLambda{0.8, 0.65, 0.5};
const Mat3 kDiag = Vec3(0.8, 0.65, 0.5).asDiagonal();

Mat3 random_symmetric(CounterRng &rng) {
    Mat3 m;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            m(i, j) = uniform_in(rng, -1, 1);
        }
    }
    return 0.5 * (m + m.transpose());
}

// Real roots of -t^3 + c2 t^2 - c1 t + c0 via the companion matrix, descending.
Vec3 cubic_roots(const Mat3 &s) {
    const double tr = s.trace();
    const double c1 = 0.5 * (tr * tr - (s * s).trace());
    const double det = s.determinant();
    Mat3 companion = Mat3::Zero();
    companion(1, 0) = 1.0;
    companion(2, 1) = 1.0;
    companion(0, 2) = det;
    companion(1, 2) = -c1;
    companion(2, 2) = tr;
    const Eigen::EigenSolver<Mat3> es(companion);
    Vec3 r = es.eigenvalues().real();
    std::sort(r.data(), r.data() + 3, std::greater<>());
    return r;
}

TEST(Symmetrize, Projection) {
    Mat3 s;
    s << 1, 2, 3, 2, 4, 5, 3, 5, 6;
    EXPECT_EQ(symmetrize(s), s);
    Mat3 k;
    k << 0, 1, -2, -1, 0, 3, 2, -3, 0;
    EXPECT_TRUE(symmetrize(k).isZero());
    CounterRng rng(stream_key(31, 0, 0));
    for (int n = 0; n < 50; ++n) {
        Mat3 m = Mat3::NullaryExpr([&](Eigen::Index, Eigen::Index) { return uniform_in(rng, -1, 1); });
        EXPECT_TRUE(symmetrize(symmetrize(m)).isApprox(symmetrize(m)));
    }
}

TEST(Eig3Symmetric, Diagonal) {
    const SymmetricEigen e = eig3_symmetric(kDiag);
    EXPECT_EQ(e.values, Vec3(0.8, 0.65, 0.5));
    EXPECT_EQ(e.vectors, Mat3::Identity());
}

TEST(Eig3Symmetric, SimilarityInvariance) {
    CounterRng rng(stream_key(32, 0, 0));
    for (int n = 0; n < 500; ++n) {
        const Mat3 r = random_rotation(rng);
        const SymmetricEigen e = eig3_symmetric(r * kDiag * r.transpose());
        EXPECT_LE((e.values - Vec3(0.8, 0.65, 0.5)).cwiseAbs().maxCoeff(), 1e-13);
    }
}

TEST(Eig3Symmetric, MatchesCubicRootsAndResidual) {
    CounterRng rng(stream_key(33, 0, 0));
    for (int n = 0; n < 2000; ++n) {
        const Mat3 s = random_symmetric(rng);
        const SymmetricEigen e = eig3_symmetric(s);
        EXPECT_LE((e.values - cubic_roots(s)).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LE((s * e.vectors - e.vectors * e.values.asDiagonal()).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LE((e.vectors.transpose() * e.vectors - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_NEAR(e.vectors.determinant(), 1.0, 1e-12);
        EXPECT_GE(e.values(0), e.values(1));
        EXPECT_GE(e.values(1), e.values(2));
    }
}

TEST(Eig3Symmetric, NearlyDegenerateSpectra) {
    CounterRng rng(stream_key(34, 0, 0));
    for (const Vec3 &d : {Vec3(0.5, 0.5, 0.5), Vec3(0.7, 0.7 - 1e-9, 0.2), Vec3(0.9, 0.1, 0.1 - 1e-12)}) {
        for (int n = 0; n < 100; ++n) {
            const Mat3 r = random_rotation(rng);
            const Mat3 s = symmetrize(r * d.asDiagonal() * r.transpose());
            const SymmetricEigen e = eig3_symmetric(s);
            EXPECT_LE((e.values - d).cwiseAbs().maxCoeff(), 1e-12);
            EXPECT_LE((s * e.vectors - e.vectors * e.values.asDiagonal()).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
}

TEST(Eig3Symmetric, Errors) {
    Mat3 s = kDiag;
    s(0, 1) = 0.1;
    EXPECT_THROW(eig3_symmetric(s), InvalidArgument);
    s(1, 0) = std::nan("");
    EXPECT_THROW(eig3_symmetric(s), InvalidArgument);
}

TEST(ExtractAngles, NamedCases) {
    EXPECT_EQ(extract_angles(Mat3::Identity(), kLambda), AngleTriple{});
    const AngleTriple a = extract_angles(rotation_matrix(Axis::z, 0.3), kLambda);
    EXPECT_NEAR(a.z, 0.3, 1e-12);
    EXPECT_NEAR(a.y, 0.0, 1e-12);
    EXPECT_NEAR(a.x, 0.0, 1e-12);
    const double l = 0.4;
    const double eps = 0.1 * tol::deg;
    EXPECT_EQ(extract_angles(rotation_zyx({0.3, 0.7, 0.2}), {l + eps, l, l - eps}), AngleTriple{});
}

TEST(ExtractParams, NamedCases) {
    const ParamEstimate p = extract_params(compose_channel_matrix({kLambda, {0.3, 0.7, 0.2}}));
    EXPECT_NEAR(p.lambda.l1, 0.8, 1e-12);
    EXPECT_NEAR(p.lambda.l2, 0.65, 1e-12);
    EXPECT_NEAR(p.lambda.l3, 0.5, 1e-12);
    EXPECT_NEAR(p.phi.z, 0.3, 1e-10);
    EXPECT_NEAR(p.phi.y, 0.7, 1e-10);
    EXPECT_NEAR(p.phi.x, 0.2, 1e-10);
    EXPECT_TRUE(p.cp_valid);

    const ParamEstimate id = extract_params(Mat3::Identity());
    EXPECT_EQ(id.lambda.as_vector(), Vec3(1, 1, 1));
    EXPECT_EQ(id.phi, AngleTriple{});
}

TEST(ExtractParams, NoiseFreeCountsPipeline) {
    const ChannelParams truth{kLambda, {0.3, 0.7, 0.2}};
    const OrthogonalFrame t = build_frame({0.4, 1.1, 0.3});
    const OrthogonalFrame m = build_frame({2.0, 0.5, 1.2});
    const Mat3 counts = expected_counts(forward_outcomes(compose_channel_matrix(truth), t, m), 1000);
    const ParamEstimate p = extract_params(estimate_channel_matrix(estimate_x(counts, 1000), t, m));
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(p.lambda[i], truth.lambda[i], 1e-12);
        EXPECT_LE(angle_distance(p.phi.as_array()[i], truth.phi.as_array()[i]), 1e-10);
    }
}

TEST(ExtractParams, RoundTripRandomCanonicalParams) {
    CounterRng rng(stream_key(35, 0, 0));
    for (int n = 0; n < 10000; ++n) {
        const ChannelParams truth = random_canonical_params(rng);
        const ParamEstimate p = extract_params(compose_channel_matrix(truth));
        for (int i = 0; i < 3; ++i) {
            ASSERT_NEAR(p.lambda[i], truth.lambda[i], 1e-9);
            ASSERT_LE(angle_distance(p.phi.as_array()[i], truth.phi.as_array()[i]), 1e-9);
        }
    }
}

TEST(ExtractParams, FlagsEigenvaluesOutsideCpRegion) {
    EXPECT_FALSE(extract_params(Vec3(1.05, 0.5, 0.1).asDiagonal().toDenseMatrix()).cp_valid);
    EXPECT_FALSE(extract_params(Vec3(1.0, 1.0, -0.5).asDiagonal().toDenseMatrix()).cp_valid);
    EXPECT_TRUE(extract_params(Vec3(1.0, -1.0, -1.0).asDiagonal().toDenseMatrix()).cp_valid);
}

TEST(DTComponents, NamedCases) {
    const DerivativeTable t = dT_components(kLambda);
    for (double d : t.dlambda_daii) {
        EXPECT_EQ(d, 1.0);
    }
    EXPECT_NEAR(t.dphi_z_da12s, 6.6667, 1e-4);
    EXPECT_NEAR(t.dphi_y_da13s, 1.0 / 0.3, 1e-12);
    EXPECT_NEAR(t.dphi_x_da23s, 1.0 / 0.15, 1e-12);
    EXPECT_THROW(dT_components({0.8, 0.8, 0.5}), DegenerateSpectrum);
    EXPECT_THROW(dT_components({0.8, 0.5, 0.5}), DegenerateSpectrum);
}

TEST(DTComponents, MatchFiniteDifferences) {
    const double h = 1e-6;
    const DerivativeTable t = dT_components(kLambda);
    const std::array<std::pair<int, int>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
    const std::array<double, 3> analytic{t.dphi_z_da12s, t.dphi_y_da13s, t.dphi_x_da23s};
    for (int k = 0; k < 3; ++k) {
        Mat3 bump = Mat3::Zero();
        bump(pairs[k].first, pairs[k].second) = h;
        bump(pairs[k].second, pairs[k].first) = h;
        const double plus = angle_distance(extract_params(kDiag + bump).phi.as_array()[k], 0.0);
        const double minus = angle_distance(extract_params(kDiag - bump).phi.as_array()[k], 0.0);
        // distance is |phi| near zero, so the central difference becomes a mean
        EXPECT_NEAR(0.5 * (plus + minus) / h, analytic[k], 1e-4 * analytic[k]);
    }
    for (int i = 0; i < 3; ++i) {
        Mat3 bump = Mat3::Zero();
        bump(i, i) = h;
        const double d = (extract_params(kDiag + bump).lambda[i] - extract_params(kDiag - bump).lambda[i]) / (2 * h);
        EXPECT_NEAR(d, 1.0, 1e-6);
    }
}

TEST(LinearizedEstimates, ExactAtTruth) {
    const LinearizedEstimate e = linearized_estimates(kDiag, kDiag);
    EXPECT_EQ(e.lambda.as_vector(), Vec3(0.8, 0.65, 0.5));
    EXPECT_EQ(e.phi, AngleTriple{});
}

TEST(LinearizedEstimates, AgreeWithExactMapToSecondOrder) {
    CounterRng rng(stream_key(36, 0, 0));
    const double eps = 3e-6;
    for (int n = 0; n < 200; ++n) {
        const Mat3 d = Mat3::NullaryExpr([&](Eigen::Index, Eigen::Index) { return uniform_in(rng, -1, 1); });
        const Mat3 a_hat = kDiag + eps * d;
        const LinearizedEstimate lin = linearized_estimates(kDiag, a_hat);
        const ParamEstimate exact = extract_params(a_hat);
        // small angles from the eigenframe, column signs aligned with the identity
        Mat3 v = exact.frame;
        for (int k = 0; k < 3; ++k) {
            if (v(k, k) < 0.0) {
                v.col(k) *= -1.0;
            }
        }
        const Vec3 small(v(1, 0), v(2, 0), v(2, 1));
        for (int i = 0; i < 3; ++i) {
            EXPECT_NEAR(lin.lambda[i], exact.lambda[i], 1e-9);
            EXPECT_NEAR(lin.phi.as_array()[i], small(i), 1e-9);
        }
    }
}

TEST(LinearizedEstimates, UnbiasedOverTrials) {
    const OrthogonalFrame t = build_frame({0.4, 1.1, 0.3});
    const OrthogonalFrame m = build_frame({2.0, 0.5, 1.2});
    const OutcomeMatrix x = forward_outcomes(kDiag, t, m);
    std::array<MeanAccumulator, 6> acc;
    for (std::uint64_t trial = 0; trial < 10000; ++trial) {
        const Mat3 a_hat = estimate_channel_matrix(estimate_x(sample_counts(x, 1000, 7, trial), 1000), t, m);
        const LinearizedEstimate e = linearized_estimates(kDiag, a_hat);
        for (int i = 0; i < 3; ++i) {
            acc[i].add(e.lambda[i]);
            acc[3 + i].add(e.phi.as_array()[i]);
        }
    }
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(acc[i].mean(), kLambda[i], 3.0 * acc[i].std_error());
        EXPECT_NEAR(acc[3 + i].mean(), 0.0, 3.0 * acc[3 + i].std_error());
    }
}

TEST(LinearizedEstimates, GapToExactShrinksLikeInverseShots) {
    const OrthogonalFrame t = build_frame({0.4, 1.1, 0.3});
    const OrthogonalFrame m = build_frame({2.0, 0.5, 1.2});
    const OutcomeMatrix x = forward_outcomes(kDiag, t, m);
    std::vector<double> gaps;
    for (std::uint64_t shots : {1000u, 10000u, 100000u}) {
        MeanAccumulator acc;
        for (std::uint64_t trial = 0; trial < 2000; ++trial) {
            const Mat3 a_hat =
                estimate_channel_matrix(estimate_x(sample_counts(x, shots, 8, trial), shots), t, m);
            const LinearizedEstimate lin = linearized_estimates(kDiag, a_hat);
            const ParamEstimate exact = extract_params(a_hat);
            for (int i = 0; i < 3; ++i) {
                acc.add(std::abs(lin.lambda[i] - exact.lambda[i]));
            }
        }
        gaps.push_back(acc.mean());
    }
    for (int k = 0; k + 1 < 3; ++k) {
        const double ratio = gaps[k] / gaps[k + 1];
        EXPECT_GT(ratio, 7.0);
        EXPECT_LT(ratio, 14.0);
    }
}

TEST(LinearizedEstimates, Errors) {
    EXPECT_THROW(linearized_estimates(compose_channel_matrix({kLambda, {0.3, 0, 0}}), kDiag), InvalidArgument);
    EXPECT_THROW(linearized_estimates(Vec3(0.5, 0.65, 0.8).asDiagonal().toDenseMatrix(), kDiag), InvalidArgument);
    EXPECT_THROW(linearized_estimates(Vec3(0.8, 0.8, 0.5).asDiagonal().toDenseMatrix(), kDiag), DegenerateSpectrum);
}

TEST(AngleDistance, NamedCases) {
    EXPECT_EQ(angle_distance(0.7, 0.7), 0.0);
    EXPECT_NEAR(angle_distance(0.1, kPi - 0.05), 0.15, 1e-15);
    EXPECT_NEAR(angle_distance(0.0, kPi / 2), kPi / 2, 1e-15);
    EXPECT_NEAR(angle_distance(5 * kPi + 0.2, -0.1), 0.3, 1e-13);
    EXPECT_THROW(angle_distance(std::nan(""), 0.0), InvalidArgument);
}

}  // namespace
}  // namespace pauli_tomo
