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

// Bloch-picture primitives for qubit Pauli channels.
//
// A qubit state is a Bloch vector theta in the unit ball, a two-outcome
// projective measurement is a unit vector m, and a Pauli channel acts on
// Bloch vectors through its channel matrix
//
//     A = R_z(phi_z) R_y(phi_y) R_x(phi_x) diag(l1, l2, l3) (...)^T.
//
// R_y uses the sign convention R_y(a) e1 = (cos a, 0, sin a).

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "pauli_tomo/errors.hpp"

namespace pauli_tomo {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using BlochVector = Vec3;
using ChannelMatrix = Mat3;

namespace tol {
/// Slack on the complete-positivity inequalities.
inline constexpr double cp = 1e-12;
/// Relative eigenvalue separation below which two contractions count as equal.
inline constexpr double deg = 1e-9;
/// Round-trip and orthogonality checks.
inline constexpr double num = 1e-9;
/// cos(phi_y) below this is treated as the phi_y = pi/2 gimbal configuration.
inline constexpr double gimbal = 1e-10;
}  // namespace tol

inline constexpr double kPi = std::numbers::pi;

enum class Axis { x, y, z };

/// Rotation angles in z, y, x order (radians).
struct AngleTriple {
    double z = 0.0;
    double y = 0.0;
    double x = 0.0;

    friend bool operator==(const AngleTriple &, const AngleTriple &) = default;
    [[nodiscard]] std::array<double, 3> as_array() const { return {z, y, x}; }
};

/// Contraction parameters (eigenvalues of the channel matrix).
struct Contractions {
    double l1 = 1.0;
    double l2 = 1.0;
    double l3 = 1.0;

    friend bool operator==(const Contractions &, const Contractions &) = default;
    [[nodiscard]] Vec3 as_vector() const { return {l1, l2, l3}; }
    [[nodiscard]] double operator[](int i) const { return i == 0 ? l1 : (i == 1 ? l2 : l3); }
    [[nodiscard]] double sum_squares() const { return l1 * l1 + l2 * l2 + l3 * l3; }
    [[nodiscard]] bool is_sorted_desc() const { return l1 >= l2 && l2 >= l3; }
};

struct ChannelParams {
    Contractions lambda;
    AngleTriple phi;
};

namespace detail {

inline void require_finite(double v, const char *what) {
    if (!std::isfinite(v)) {
        throw InvalidArgument(std::string(what) + " must be finite");
    }
}

inline void require_finite(const Contractions &l) {
    require_finite(l.l1, "lambda1");
    require_finite(l.l2, "lambda2");
    require_finite(l.l3, "lambda3");
}

inline void require_finite(const AngleTriple &a) {
    require_finite(a.z, "angle z");
    require_finite(a.y, "angle y");
    require_finite(a.x, "angle x");
}

inline double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

/// Scale used for relative degeneracy tests on contractions.
inline double spectrum_scale(const Contractions &l) {
    return std::max({1.0, std::abs(l.l1), std::abs(l.l2), std::abs(l.l3)});
}

}  // namespace detail

/// Reduces an angle into [0, pi).
inline double wrap_half_turn(double angle) {
    double r = std::fmod(angle, kPi);
    if (r < 0.0) {
        r += kPi;
    }
    if (r >= kPi) {
        r = 0.0;
    }
    return r;
}

inline Mat3 rotation_matrix(Axis axis, double angle) {
    detail::require_finite(angle, "rotation angle");
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    Mat3 r;
    switch (axis) {
    case Axis::z:
        r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
        break;
    case Axis::y:
        r << c, 0.0, -s, 0.0, 1.0, 0.0, s, 0.0, c;
        break;
    case Axis::x:
        r << 1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c;
        break;
    }
    return r;
}

/// R_z(a.z) R_y(a.y) R_x(a.x).
inline Mat3 rotation_zyx(const AngleTriple &a) {
    return rotation_matrix(Axis::z, a.z) * rotation_matrix(Axis::y, a.y) *
           rotation_matrix(Axis::x, a.x);
}

inline ChannelMatrix compose_channel_matrix(const ChannelParams &p) {
    detail::require_finite(p.lambda);
    const Mat3 r = rotation_zyx(p.phi);
    return r * p.lambda.as_vector().asDiagonal() * r.transpose();
}

/// Complete positivity: 1 + l3 >= |l1 + l2| and 1 - l3 >= |l1 - l2|.
inline bool cp_check(const Contractions &l) {
    if (!std::isfinite(l.l1) || !std::isfinite(l.l2) || !std::isfinite(l.l3)) {
        return false;
    }
    return 1.0 + l.l3 + tol::cp >= std::abs(l.l1 + l.l2) &&
           1.0 - l.l3 + tol::cp >= std::abs(l.l1 - l.l2);
}

inline BlochVector apply_channel(const ChannelMatrix &a, const BlochVector &theta) {
    return a * theta;
}

/// Probability of the outcome along m for the state theta: (1 + m.theta) / 2.
inline double measurement_probability(const BlochVector &m, const BlochVector &theta) {
    if (!m.allFinite() || std::abs(m.norm() - 1.0) > tol::num) {
        throw InvalidArgument("measurement direction must be a unit vector");
    }
    if (!theta.allFinite() || theta.norm() > 1.0 + tol::num) {
        throw InvalidState("Bloch vector lies outside the unit ball");
    }
    return std::clamp(0.5 * (1.0 + m.dot(theta)), 0.0, 1.0);
}

inline Eigen::Matrix2cd bloch_to_density(const BlochVector &theta) {
    if (!theta.allFinite() || theta.norm() > 1.0 + tol::num) {
        throw InvalidState("Bloch vector lies outside the unit ball");
    }
    using cd = std::complex<double>;
    Eigen::Matrix2cd rho;
    rho << cd(1.0 + theta(2), 0.0), cd(theta(0), -theta(1)),
           cd(theta(0), theta(1)), cd(1.0 - theta(2), 0.0);
    return 0.5 * rho;
}

namespace detail {

// Angles of a proper rotation R = R_z(a) R_y(b) R_x(c), reduced into [0, pi)^3
// using the sign-flip symmetries R -> R diag(s1, s2, s3) that leave R L R^T
// unchanged:
//   (a, b, c) ~ (a, b, c + pi) ~ (a, b + pi, -c) ~ (a + pi, -b, -c).
// At b = pi/2 the convention a = 0 is used.
inline AngleTriple half_turn_euler(const Mat3 &r) {
    const double cb = std::hypot(r(0, 0), r(1, 0));
    if (cb <= tol::gimbal) {
        const double c = r(2, 0) > 0.0 ? std::atan2(-r(0, 1), r(1, 1))
                                       : -std::atan2(r(0, 1), r(1, 1));
        return {0.0, kPi / 2.0, wrap_half_turn(c)};
    }
    double a = std::atan2(r(1, 0), r(0, 0));
    double b = std::atan2(r(2, 0), cb);
    double c = std::atan2(r(2, 1), r(2, 2));
    if (a < 0.0 || a >= kPi) {
        const double shifted = a < 0.0 ? a + kPi : a - kPi;
        if (shifted >= 0.0 && shifted < kPi) {
            a = shifted;
            b = -b;
            c = -c;
        } else {
            a = 0.0;
        }
    }
    if (b < 0.0) {
        const double shifted = b + kPi;
        if (shifted < kPi) {
            b = shifted;
            c = -c;
        } else {
            b = 0.0;
        }
    }
    return {a, b, wrap_half_turn(c)};
}

// l1 > l2 = l3: only the first axis v1 = (cos a cos b, sin a cos b, sin b)
// matters and phi_x = 0.
inline AngleTriple angles_from_first_axis(Vec3 v) {
    if (v(2) < 0.0) {
        v = -v;
    }
    const double rho = std::hypot(v(0), v(1));
    if (rho <= tol::gimbal) {
        return {0.0, kPi / 2.0, 0.0};
    }
    double a = std::atan2(v(1), v(0));
    double b = std::atan2(v(2), rho);
    if (std::abs(v(2)) <= 1e-15) {
        return {wrap_half_turn(a), 0.0, 0.0};
    }
    if (a < 0.0) {
        a += kPi;
        b = kPi - b;
    } else if (a >= kPi) {
        a -= kPi;
        b = kPi - b;
    }
    return {wrap_half_turn(a), b, 0.0};
}

// l1 = l2 > l3: only the third axis v3 = R e3 matters. With phi_x = 0,
// v3 = (-cos a sin b, -sin a sin b, cos b); a horizontal v3 is encoded as
// (0, pi/2, c) instead, where v3 = (-cos c, -sin c, 0).
inline AngleTriple angles_from_third_axis(const Vec3 &v) {
    const double rho = std::hypot(v(0), v(1));
    if (rho <= tol::gimbal) {
        return {0.0, 0.0, 0.0};
    }
    if (std::abs(v(2)) <= tol::gimbal) {
        return {0.0, kPi / 2.0, wrap_half_turn(std::atan2(-v(1), -v(0)))};
    }
    double b = std::atan2(rho, v(2));
    double a = std::atan2(-v(1), -v(0));
    if (a < 0.0) {
        a += kPi;
        b = kPi - b;
    } else if (a >= kPi) {
        a -= kPi;
        b = kPi - b;
    }
    return {wrap_half_turn(a), b, 0.0};
}

/// First nonzero component of each column positive, then det forced to +1.
inline Mat3 fix_frame_signs(Mat3 frame) {
    for (int k = 0; k < 3; ++k) {
        for (int i = 0; i < 3; ++i) {
            if (std::abs(frame(i, k)) > 1e-12) {
                if (frame(i, k) < 0.0) {
                    frame.col(k) *= -1.0;
                }
                break;
            }
        }
    }
    if (frame.determinant() < 0.0) {
        frame.col(2) *= -1.0;
    }
    return frame;
}

inline bool is_orthogonal(const Mat3 &m, double eps) {
    return m.allFinite() && (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff() <= eps;
}

}  // namespace detail

/// Maps sorted contractions and their eigenframe to the canonical parameters
/// of the bijective domain, applying the degenerate-spectrum conventions.
inline ChannelParams canonicalize(const Contractions &lambda_sorted, const Mat3 &frame) {
    detail::require_finite(lambda_sorted);
    const double scale = detail::spectrum_scale(lambda_sorted);
    const double slack = tol::deg * scale;
    if (lambda_sorted.l1 + slack < lambda_sorted.l2 || lambda_sorted.l2 + slack < lambda_sorted.l3) {
        throw InvalidArgument("contractions must be sorted in descending order");
    }
    if (!detail::is_orthogonal(frame, tol::num)) {
        throw InvalidArgument("frame is not orthogonal");
    }
    const Mat3 f = detail::fix_frame_signs(frame);
    const bool top_equal = lambda_sorted.l1 - lambda_sorted.l2 <= slack;
    const bool bottom_equal = lambda_sorted.l2 - lambda_sorted.l3 <= slack;

    AngleTriple phi;
    if (top_equal && bottom_equal) {
        phi = {};
    } else if (top_equal) {
        phi = detail::angles_from_third_axis(f.col(2));
    } else if (bottom_equal) {
        phi = detail::angles_from_first_axis(f.col(0));
    } else {
        phi = detail::half_turn_euler(f);
    }
    return {lambda_sorted, phi};
}

}  // namespace pauli_tomo
