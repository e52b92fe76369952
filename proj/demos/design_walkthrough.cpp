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


// Walks through design choices for one channel: the risk of the naive
// design, the conjectured and optimal designs, the planar closed form, and
// the two-step protocol.

#include <cstdio>

#include "pauli_tomo/pauli_tomo.hpp"

namespace pt = pauli_tomo;

int main() {
    const pt::Contractions lambda{0.8, 0.65, 0.5};
    const std::uint64_t shots = 1000;

    std::printf("channel lambda = (%.2f, %.2f, %.2f), N = %llu shots per cell\n\n", lambda.l1, lambda.l2, lambda.l3,
                static_cast<unsigned long long>(shots));

    const pt::RiskReport zero = pt::analytic_report({lambda, {}}, pt::ExperimentDesign{{}, {}, shots});
    std::printf("zero design      f = %.6f  g = %.6f  h = %.6f\n", zero.f, zero.g, zero.h);
    std::printf("bounds           f >= %.6f  g >= %.6f\n\n", zero.f_bound, zero.g_bound);

    const pt::ConjectureReport c = pt::conjecture_report(lambda, shots);
    std::printf("h at (pi/4, pi/4, 0)   %.6f\n", c.h_conjecture_1);
    std::printf("h at (pi/4, 0, pi/4)   %.6f\n", c.h_conjecture_2);
    std::printf("optimal h              %.6f  at tau = (%.4f, %.4f, %.4f)\n", c.optimum.h_min, c.optimum.tau.z,
                c.optimum.tau.y, c.optimum.tau.x);
    std::printf("                              vartheta = (%.4f, %.4f, %.4f)\n\n", c.optimum.vartheta.z,
                c.optimum.vartheta.y, c.optimum.vartheta.x);

    for (const auto &[l1, l2] : {std::pair{0.8, 0.2}, std::pair{1.0, 0.0}}) {
        const pt::H2Optimum h2 = pt::h2_optimal_design(l1, l2, shots);
        std::printf("planar (%.1f, %.1f): regime %d, tau = vartheta = %.6f (or %.6f), h = %.3e\n", l1, l2, h2.regime,
                    h2.tau, h2.tau_alt, h2.value);
    }
    std::printf("\n");

    const std::uint64_t budget = 90000;
    std::printf("two step vs single step at (0.4, 0.4, 0.4), budget %llu, 200 replications\n",
                static_cast<unsigned long long>(budget));
    for (const pt::ChannelParams &truth :
         {pt::ChannelParams{{0.8, 0.65, 0.5}, {}}, pt::ChannelParams{{1.0, 0.0, 0.0}, {1.2, 0.4, 2.0}}}) {
        const pt::RiskReport two = pt::two_step_risk(truth, budget, pt::kDefaultSplit, 200, 7);
        const pt::RiskReport one =
            pt::mc_loss(truth, pt::ExperimentDesign{{0.4, 0.4, 0.4}, {0.4, 0.4, 0.4}, budget / 9}, 200, 7);
        std::printf("lambda = (%.2f, %.2f, %.2f)  single g = %.3e +- %.1e  two-step g = %.3e +- %.1e  (floor %.3e)\n",
                    truth.lambda.l1, truth.lambda.l2, truth.lambda.l3, one.g, one.se_g, two.g, two.se_g, two.g_bound);
    }
    return 0;
}
