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

// Library umbrella header. The CLI front end (pauli_tomo/cli.hpp) is not
// included; it needs the vendored CLI11 and nlohmann/json headers.

#pragma once

#include "pauli_tomo/core_model.hpp"
#include "pauli_tomo/design_opt.hpp"
#include "pauli_tomo/errors.hpp"
#include "pauli_tomo/experiment.hpp"
#include "pauli_tomo/extraction.hpp"
#include "pauli_tomo/format.hpp"
#include "pauli_tomo/nelder_mead.hpp"
#include "pauli_tomo/parallel.hpp"
#include "pauli_tomo/risk.hpp"
#include "pauli_tomo/rng.hpp"
#include "pauli_tomo/sampling.hpp"
