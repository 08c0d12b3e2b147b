// SPDX-License-Identifier: Apache-2.0
//
// qmimo: multicell massive MIMO with variable-resolution ADCs
// Copyright (C) 2026 The qmimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "qmimo/combining.hpp"
#include "qmimo/energy.hpp"
#include "qmimo/estimation.hpp"
#include "qmimo/quantization.hpp"
#include "qmimo/scenario.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace qmimo {

/// ADC resolution as written in a config: one value for every antenna, one
/// value per BS, or a full BS x antenna matrix.
struct BitsSpec {
    enum class Kind { uniform, per_bs, matrix };
    Kind kind = Kind::uniform;
    int value = kInfiniteBits;
    std::vector<int> per_bs;
    std::vector<std::vector<int>> matrix;

    static BitsSpec uniform_bits(int b);
    /// "3", "inf", "1|1|3|3" or "matrix".
    std::string label() const;
    /// Throws ConfigError when the shape does not fit L x M.
    BitAllocation allocate(int cells, int antennas) const;
    /// Every entry is >= 1.
    bool valid() const;
};

std::string bits_to_string(int bits);

enum class Preset { se_vs_power, nmse_vs_power, se_vs_asd, nmse_vs_asd, ee_vs_bits, custom };
std::string to_string(Preset p);
Preset parse_preset(const std::string& name);

enum class EstimatorMode { aware, unaware, both };
enum class Evaluators { mc, asy, both };

struct ExperimentSpec {
    Preset preset = Preset::se_vs_power;
    NetworkConfig network;
    /// Resolution series; each entry yields one curve.
    std::vector<BitsSpec> bits{BitsSpec::uniform_bits(1), BitsSpec::uniform_bits(3),
                               BitsSpec::uniform_bits(kInfiniteBits)};
    /// Swept quantity: power_dbm, asd_deg, bits or antennas.
    std::string axis = "power_dbm";
    std::vector<double> values{-10.0, 0.0, 10.0, 20.0, 30.0};
    std::vector<Scheme> schemes{Scheme::mrc, Scheme::qa_m_mmse, Scheme::qa_s_mmse};
    EstimatorMode estimator = EstimatorMode::both;
    Evaluators evaluators = Evaluators::both;
    int trials = 50;
    int drops = 50;
    int threads = 1;
    PilotNoiseModel pilot_noise = PilotNoiseModel::exact;
    PowerModel power;
    std::string out_dir = "results";
    bool verbose = false;
    /// Canonical JSON of the parsed spec; hashed into every CSV header.
    std::string canonical;

    std::uint64_t seed() const { return network.rng_seed; }
};

/// Parses a JSON experiment file. Missing keys take preset defaults.
/// Throws ConfigError on malformed input.
ExperimentSpec parse_spec(const std::string& json_text);
ExperimentSpec load_spec(const std::string& path);

/// L = 9, K = 5, M = 30, 100 drops of 100 trials.
void apply_paper_scale(ExperimentSpec& spec);

/// Refreshes the canonical form after programmatic edits.
void refresh_canonical(ExperimentSpec& spec);

/// Every problem that would stop a run; empty when the spec is usable.
std::vector<std::string> validate(const ExperimentSpec& spec);

/// Dry-run report: derived quantities, pilot groups, distortion factors,
/// output files. Never throws for an invalid spec; problems are listed.
std::string describe(const ExperimentSpec& spec);

std::uint64_t fnv1a(const std::string& text);
std::string git_describe();

/// "# qmimo git=... seed=... config_hash=..." line opening each CSV.
std::string csv_preamble(const ExperimentSpec& spec);

struct RunSummary {
    std::vector<std::string> files;
};

/// Runs the experiment, writes CSV files under spec.out_dir and a console
/// table to `console`. Throws ConfigError or SolverError.
RunSummary run(const ExperimentSpec& spec, std::ostream& console);

}  // namespace qmimo
