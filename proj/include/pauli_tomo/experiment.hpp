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

// Tomography experiment: three orthogonal pure input states (columns of
// Theta), three orthogonal measurement directions (columns of M), N shots
// per (measurement, input) pair, and the linear-inversion estimator
//
//     x^_ij = 2 N_ij / N - 1,      A^ = M X^ Theta^T.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pauli_tomo/core_model.hpp"
#include "pauli_tomo/rng.hpp"

namespace pauli_tomo {

using OutcomeMatrix = Mat3;

class OrthogonalFrame {
public:
    OrthogonalFrame() : m_(Mat3::Identity()) {}

    /// Validates F^T F = I and det F = +1.
    static OrthogonalFrame from_matrix(const Mat3 &m, double eps = 1e-12) {
        if (!detail::is_orthogonal(m, eps) || m.determinant() < 0.0) {
            throw InvalidArgument("frame must be a proper rotation matrix");
        }
        return OrthogonalFrame(m);
    }

    [[nodiscard]] const Mat3 &matrix() const { return m_; }
    [[nodiscard]] Vec3 column(int k) const { return m_.col(k); }

    /// O F, the frame seen after rotating the whole laboratory by O.
    [[nodiscard]] OrthogonalFrame rotated(const Mat3 &o) const { return from_matrix(o * m_, 1e-10); }

private:
    explicit OrthogonalFrame(const Mat3 &m) : m_(m) {}
    Mat3 m_;
};

/// Input angles, measurement angles and shots per (i, j) pair.
struct ExperimentDesign {
    AngleTriple input;
    AngleTriple meas;
    std::uint64_t shots = 1000;
};

inline bool design_angles_in_range(const AngleTriple &a) {
    return a.z >= 0.0 && a.z < kPi && a.y >= 0.0 && a.y < kPi && a.x >= 0.0 && a.x < kPi / 2.0;
}

inline OrthogonalFrame build_frame(const AngleTriple &angles) {
    detail::require_finite(angles);
    if (!design_angles_in_range(angles)) {
        throw InvalidArgument("design angles outside [0,pi) x [0,pi) x [0,pi/2)");
    }
    return OrthogonalFrame::from_matrix(rotation_zyx(angles), 1e-12);
}

inline void validate(const ExperimentDesign &d) {
    if (d.shots < 1) {
        throw InvalidArgument("shots must be at least 1");
    }
    (void)build_frame(d.input);
    (void)build_frame(d.meas);
}

/// X = M^T A Theta, x_ij = m^(i) . (A theta^(j)).
inline OutcomeMatrix forward_outcomes(const ChannelMatrix &a, const OrthogonalFrame &theta_frame,
                                      const OrthogonalFrame &meas_frame) {
    return meas_frame.matrix().transpose() * a * theta_frame.matrix();
}

/// Successes N_ij of measurement i on output j, row-major.
struct CountsMatrix {
    std::array<std::uint64_t, 9> n{};
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;

    [[nodiscard]] std::uint64_t operator()(int i, int j) const { return n[3 * i + j]; }
};

inline constexpr double kProbabilitySlack = 1e-9;

/// Success probability (1 + x) / 2, clamped when x is within slack of [-1, 1].
inline double outcome_probability(double x) {
    if (!std::isfinite(x)) {
        throw InvalidArgument("outcome value must be finite");
    }
    const double p = 0.5 * (1.0 + x);
    if (p < -kProbabilitySlack || p > 1.0 + kProbabilitySlack) {
        throw InvalidArgument("outcome probability outside [0, 1]");
    }
    return std::clamp(p, 0.0, 1.0);
}

/// Nine independent binomial draws, cell (i, j) on stream (seed, trial, 3i+j).
inline CountsMatrix sample_counts(const OutcomeMatrix &x, std::uint64_t shots, std::uint64_t seed,
                                  std::uint64_t trial = 0) {
    if (shots < 1) {
        throw InvalidArgument("shots must be at least 1");
    }
    std::array<double, 9> p{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            p[3 * i + j] = outcome_probability(x(i, j));
        }
    }
    CountsMatrix c;
    c.shots = shots;
    c.seed = seed;
    c.trial = trial;
    for (int k = 0; k < 9; ++k) {
        CounterRng rng(stream_key(seed, trial, static_cast<std::uint64_t>(k)));
        c.n[k] = sample_binomial(rng, shots, p[k]);
    }
    return c;
}

/// N (1 + x_ij) / 2, the mean of every count cell.
inline Mat3 expected_counts(const OutcomeMatrix &x, std::uint64_t shots) {
    return 0.5 * static_cast<double>(shots) * (Mat3::Ones() + x);
}

inline OutcomeMatrix estimate_x(const Mat3 &counts, std::uint64_t shots) {
    if (shots < 1) {
        throw InvalidArgument("shots must be at least 1");
    }
    return (2.0 / static_cast<double>(shots)) * counts - Mat3::Ones();
}

inline OutcomeMatrix estimate_x(const CountsMatrix &counts, std::uint64_t shots) {
    Mat3 c;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (counts(i, j) > shots) {
                throw InvalidArgument("count exceeds the number of shots");
            }
            c(i, j) = static_cast<double>(counts(i, j));
        }
    }
    return estimate_x(c, shots);
}

/// A^ = M X^ Theta^T.
inline ChannelMatrix estimate_channel_matrix(const OutcomeMatrix &x_hat, const OrthogonalFrame &theta_frame,
                                             const OrthogonalFrame &meas_frame) {
    return meas_frame.matrix() * x_hat * theta_frame.matrix().transpose();
}

/// The 24 signed permutation matrices with determinant +1. Right-multiplying a
/// frame by one of them relabels the states (or directions) and flips some of
/// them to their antipodes, which leaves the estimator's distribution unchanged.
inline const std::array<Mat3, 24> &proper_signed_permutations() {
    static const std::array<Mat3, 24> table = [] {
        std::array<Mat3, 24> out;
        std::array<int, 3> perm{0, 1, 2};
        std::size_t n = 0;
        do {
            for (int signs = 0; signs < 8; ++signs) {
                Mat3 p = Mat3::Zero();
                for (int col = 0; col < 3; ++col) {
                    p(perm[col], col) = (signs >> col) & 1 ? -1.0 : 1.0;
                }
                if (p.determinant() > 0.0) {
                    out[n++] = p;
                }
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        return out;
    }();
    return table;
}

/// Every angle triple inside the design ranges whose frame equals F P for some
/// proper signed permutation P. Never empty for a proper rotation F.
inline std::vector<AngleTriple> design_representations(const Mat3 &frame) {
    std::vector<AngleTriple> reps;
    for (const Mat3 &p : proper_signed_permutations()) {
        const Mat3 g = frame * p;
        const AngleTriple a = detail::half_turn_euler(g);
        if (a.x < kPi / 2.0) {
            reps.push_back(a);
        }
    }
    return reps;
}

}  // namespace pauli_tomo
