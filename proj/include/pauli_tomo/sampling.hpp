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

// Seeded generators for random channels, designs and rotations.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

#include "pauli_tomo/core_model.hpp"
#include "pauli_tomo/extraction.hpp"
#include "pauli_tomo/rng.hpp"

namespace pauli_tomo {

inline double uniform_in(CounterRng &rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

inline double standard_normal(CounterRng &rng) {
    const double u = rng.uniform();
    const double v = rng.uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * kPi * v);
}

/// Sorted CP-valid contractions; with `separated` both gaps exceed min_gap.
inline Contractions random_contractions(CounterRng &rng, bool separated = true, double min_gap = 1e-3) {
    for (;;) {
        std::array<double, 3> v{uniform_in(rng, -1.0, 1.0), uniform_in(rng, -1.0, 1.0), uniform_in(rng, -1.0, 1.0)};
        std::sort(v.begin(), v.end(), std::greater<>());
        const Contractions l{v[0], v[1], v[2]};
        if (!cp_check(l)) {
            continue;
        }
        if (separated && (l.l1 - l.l2 < min_gap || l.l2 - l.l3 < min_gap)) {
            continue;
        }
        return l;
    }
}

/// Angles uniform in the design ranges [0,pi) x [0,pi) x [0,pi/2).
inline AngleTriple random_design_angles(CounterRng &rng) {
    return {uniform_in(rng, 0.0, kPi), uniform_in(rng, 0.0, kPi), uniform_in(rng, 0.0, kPi / 2.0)};
}

/// Haar-random rotation from a uniformly distributed unit quaternion.
inline Mat3 random_rotation(CounterRng &rng) {
    Eigen::Quaterniond q(standard_normal(rng), standard_normal(rng), standard_normal(rng), standard_normal(rng));
    q.normalize();
    return q.toRotationMatrix();
}

/// Random canonical parameters: CP-valid separated contractions and angles
/// reduced to the canonical domain.
inline ChannelParams random_canonical_params(CounterRng &rng) {
    const Contractions l = random_contractions(rng);
    const AngleTriple raw{uniform_in(rng, 0.0, kPi), uniform_in(rng, 0.0, kPi), uniform_in(rng, 0.0, kPi)};
    return canonicalize(l, rotation_zyx(raw));
}

}  // namespace pauli_tomo
