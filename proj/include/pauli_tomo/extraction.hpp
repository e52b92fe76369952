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

// Parameter extraction: channel matrix estimate -> (lambda, phi).
//
// A^ is symmetrized, diagonalized, and the eigenframe is converted to
// canonical angles. Around a channel in canonical orientation the map has
// the first-order expansion
//
//     lambda~_i = lambda_i + (A^ - A)_ii
//     phi~_z    = (A^ - A)_12,s / (l1 - l2)
//     phi~_y    = (A^ - A)_13,s / (l1 - l3)
//     phi~_x    = (A^ - A)_23,s / (l2 - l3)
//
// with B_ij,s = (B_ij + B_ji) / 2.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <utility>

#include "pauli_tomo/core_model.hpp"
#include "pauli_tomo/errors.hpp"

namespace pauli_tomo {

struct SymmetricEigen {
    Vec3 values;   // descending
    Mat3 vectors;  // columns, right-handed
};

struct ParamEstimate {
    Contractions lambda;
    AngleTriple phi;
    Mat3 frame = Mat3::Identity();
    bool cp_valid = true;

    [[nodiscard]] ChannelParams params() const { return {lambda, phi}; }
};

/// Non-vanishing partials of the extraction map at A(lambda, 0).
struct DerivativeTable {
    std::array<double, 3> dlambda_daii{1.0, 1.0, 1.0};
    double dphi_z_da12s = 0.0;
    double dphi_y_da13s = 0.0;
    double dphi_x_da23s = 0.0;
};

inline Mat3 symmetrize(const Mat3 &a_hat) { return 0.5 * (a_hat + a_hat.transpose()); }

namespace detail {

inline constexpr double kJacobiSwitchGap = 1e-6;

inline SymmetricEigen finish_eigen(Vec3 values, Mat3 vectors) {
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) { return values(a) > values(b); });
    SymmetricEigen out;
    for (int k = 0; k < 3; ++k) {
        out.values(k) = values(order[k]);
        out.vectors.col(k) = vectors.col(order[k]);
    }
    out.vectors = fix_frame_signs(out.vectors);
    return out;
}

inline SymmetricEigen jacobi_eigen(const Mat3 &s) {
    Mat3 a = s;
    Mat3 v = Mat3::Identity();
    for (int sweep = 0; sweep < 64; ++sweep) {
        const double off = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
        if (off == 0.0) {
            break;
        }
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (a(p, q) == 0.0) {
                    continue;
                }
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                Mat3 g = Mat3::Identity();
                g(p, p) = c;
                g(q, q) = c;
                g(p, q) = sn;
                g(q, p) = -sn;
                a = g.transpose() * a * g;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                v = v * g;
            }
        }
    }
    return finish_eigen(a.diagonal(), v);
}

/// Unit null vector of S - lambda I from the largest cross product of its rows.
inline Vec3 null_vector(const Mat3 &s, double lambda) {
    const Mat3 m = s - lambda * Mat3::Identity();
    const std::array<Vec3, 3> candidates{
        Vec3(m.row(0).transpose().cross(m.row(1).transpose())),
        Vec3(m.row(0).transpose().cross(m.row(2).transpose())),
        Vec3(m.row(1).transpose().cross(m.row(2).transpose())),
    };
    const auto best = std::max_element(candidates.begin(), candidates.end(),
                                       [](const Vec3 &a, const Vec3 &b) { return a.squaredNorm() < b.squaredNorm(); });
    return best->normalized();
}

}  // namespace detail

/// Eigen-decomposition of a symmetric 3x3 matrix. Roots of the characteristic
/// cubic (trigonometric form) are polished by one Newton step; close roots
/// fall back to cyclic Jacobi.
inline SymmetricEigen eig3_symmetric(const Mat3 &s) {
    if (!s.allFinite()) {
        throw InvalidArgument("matrix must be finite");
    }
    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw InvalidArgument("matrix is not symmetric");
    }
    const double off = s(0, 1) * s(0, 1) + s(0, 2) * s(0, 2) + s(1, 2) * s(1, 2);
    if (off == 0.0) {
        return detail::finish_eigen(s.diagonal(), Mat3::Identity());
    }
    const double tr = s.trace();
    const double q = tr / 3.0;
    const double p2 = (s(0, 0) - q) * (s(0, 0) - q) + (s(1, 1) - q) * (s(1, 1) - q) +
                      (s(2, 2) - q) * (s(2, 2) - q) + 2.0 * off;
    const double p = std::sqrt(p2 / 6.0);
    const Mat3 b = (s - q * Mat3::Identity()) / p;
    const double r = std::clamp(b.determinant() / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    Vec3 roots;
    roots(0) = q + 2.0 * p * std::cos(phi);
    roots(2) = q + 2.0 * p * std::cos(phi + 2.0 * kPi / 3.0);
    roots(1) = tr - roots(0) - roots(2);

    // det(S - t I) = -t^3 + tr t^2 - c2 t + det
    const double c2 = s(0, 0) * s(1, 1) + s(0, 0) * s(2, 2) + s(1, 1) * s(2, 2) - off;
    const double det = s.determinant();
    for (int k = 0; k < 3; ++k) {
        const double t = roots(k);
        const double f = ((-t + tr) * t - c2) * t + det;
        const double df = (-3.0 * t + 2.0 * tr) * t - c2;
        if (df != 0.0) {
            roots(k) = t - f / df;
        }
    }
    std::sort(roots.data(), roots.data() + 3, std::greater<>());
    const double gap = std::min(roots(0) - roots(1), roots(1) - roots(2));
    if (gap < detail::kJacobiSwitchGap * scale) {
        return detail::jacobi_eigen(s);
    }
    Mat3 v;
    v.col(0) = detail::null_vector(s, roots(0));
    Vec3 v3 = detail::null_vector(s, roots(2));
    v3 = (v3 - v3.dot(v.col(0)) * v.col(0)).normalized();
    v.col(2) = v3;
    v.col(1) = v3.cross(v.col(0));
    // polish: Jacobi on the nearly diagonal V^T S V
    const Mat3 vsv = v.transpose() * s * v;
    const SymmetricEigen polish = detail::jacobi_eigen(0.5 * (vsv + vsv.transpose()));
    SymmetricEigen out;
    out.values = polish.values;
    out.vectors = detail::fix_frame_signs(v * polish.vectors);
    return out;
}

/// Canonical angles of an eigenframe whose columns follow descending lambda.
inline AngleTriple extract_angles(const Mat3 &frame, const Contractions &lambda_hat) {
    return canonicalize(lambda_hat, frame).phi;
}

/// The inverse map T: A^ -> (lambda^, phi^). Eigenvalues are returned as
/// computed (no projection onto the CP region); cp_valid reports whether
/// they satisfy it.
inline ParamEstimate extract_params(const Mat3 &a_hat) {
    const SymmetricEigen e = eig3_symmetric(symmetrize(a_hat));
    ParamEstimate out;
    out.lambda = {e.values(0), e.values(1), e.values(2)};
    out.frame = e.vectors;
    out.phi = extract_angles(e.vectors, out.lambda);
    out.cp_valid = cp_check(out.lambda) && std::abs(out.lambda.l1) <= 1.0 + tol::cp &&
                   std::abs(out.lambda.l3) <= 1.0 + tol::cp;
    return out;
}

inline void require_separated(const Contractions &l) {
    const double slack = tol::deg * detail::spectrum_scale(l);
    if (!(l.l1 - l.l2 > slack && l.l2 - l.l3 > slack)) {
        throw DegenerateSpectrum("contractions must be strictly separated: l1 > l2 > l3");
    }
}

inline DerivativeTable dT_components(const Contractions &lambda) {
    detail::require_finite(lambda);
    require_separated(lambda);
    DerivativeTable t;
    t.dphi_z_da12s = 1.0 / (lambda.l1 - lambda.l2);
    t.dphi_y_da13s = 1.0 / (lambda.l1 - lambda.l3);
    t.dphi_x_da23s = 1.0 / (lambda.l2 - lambda.l3);
    return t;
}

struct LinearizedEstimate {
    Contractions lambda;
    AngleTriple phi;
};

/// First-order estimates around a channel in canonical orientation
/// (diagonal A with strictly descending diagonal).
inline LinearizedEstimate linearized_estimates(const ChannelMatrix &a_true, const Mat3 &a_hat) {
    if (!a_true.allFinite() || !a_hat.allFinite()) {
        throw InvalidArgument("matrices must be finite");
    }
    const Mat3 off = a_true - Mat3(a_true.diagonal().asDiagonal());
    if (off.cwiseAbs().maxCoeff() > tol::num) {
        throw InvalidArgument("reference channel must have zero angle parameters (diagonal matrix)");
    }
    const Contractions l{a_true(0, 0), a_true(1, 1), a_true(2, 2)};
    if (!l.is_sorted_desc()) {
        throw InvalidArgument("reference channel diagonal must be sorted in descending order");
    }
    const DerivativeTable t = dT_components(l);
    const Mat3 d = symmetrize(a_hat - a_true);
    LinearizedEstimate out;
    out.lambda = {l.l1 + d(0, 0), l.l2 + d(1, 1), l.l3 + d(2, 2)};
    out.phi = {t.dphi_z_da12s * d(0, 1), t.dphi_y_da13s * d(0, 2), t.dphi_x_da23s * d(1, 2)};
    return out;
}

/// inf_k |a - (b + k pi)|, in [0, pi/2].
inline double angle_distance(double phi_hat, double phi) {
    detail::require_finite(phi_hat, "angle");
    detail::require_finite(phi, "angle");
    const double d = std::fmod(std::abs(phi_hat - phi), kPi);
    return std::min(d, kPi - d);
}

}  // namespace pauli_tomo
