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

#pragma once

#include <stdexcept>
#include <string>

namespace pauli_tomo {

/// Bad input to a library call (non-finite value, out-of-range angle, ...).
struct InvalidArgument : std::invalid_argument {
    explicit InvalidArgument(const std::string &what) : std::invalid_argument(what) {}
};

/// A Bloch vector outside the unit ball where a physical state is required.
struct InvalidState : std::domain_error {
    explicit InvalidState(const std::string &what) : std::domain_error(what) {}
};

/// Raised by operations whose formulas divide by eigenvalue gaps.
struct DegenerateSpectrum : std::domain_error {
    explicit DegenerateSpectrum(const std::string &what) : std::domain_error(what) {}
};

}  // namespace pauli_tomo
