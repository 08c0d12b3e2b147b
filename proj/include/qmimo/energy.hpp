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

#include "qmimo/quantization.hpp"

namespace qmimo {

/// Hardware power figures (watts) and ADC model constants.
struct PowerModel {
    double p_mix = 30.3e-3;
    double p_filt = 2.5e-3;
    double p_filr = 2.5e-3;
    double p_lna = 20e-3;
    double p_ifa = 3e-3;
    double p_syn = 50e-3;
    double p_agc = 2e-3;
    double v_dd = 3.0;
    double l_min = 0.5e-6;
    double f_cor = 1e6;
    double bandwidth_hz = 20e6;

    /// Throws ConfigError on a negative entry.
    void validate() const;
};

/// 3 V_dd^2 L_min (2 W + f_cor) / 10^{-0.1525 b + 4.838}. Throws DomainError
/// for bits < 1 or the infinite-resolution sentinel.
double p_adc(int bits, const PowerModel& model = {});

/// Total receive-side power of all BSs:
///   L M (2 P_mix + P_filt + P_filr + P_LNA + P_IFA) + 2 L P_syn
///   + sum_{j,m} 2 (c_{j,m} P_AGC + P_ADC(b_{j,m})),
/// with c_{j,m} = 0 for one-bit ADCs and 1 otherwise.
double p_total(const BitAllocation& bits, const PowerModel& model = {});

/// W * sum SE / P_total in bits per joule. Throws DomainError when
/// P_total is not positive.
double energy_efficiency(double sum_se, const BitAllocation& bits, const PowerModel& model = {});

}  // namespace qmimo
