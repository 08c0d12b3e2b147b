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

#include "qmimo/energy.hpp"

#include <cmath>

namespace qmimo {

void PowerModel::validate() const {
    for (double x : {p_mix, p_filt, p_filr, p_lna, p_ifa, p_syn, p_agc, v_dd, l_min, f_cor, bandwidth_hz})
        if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("power model entries must be finite and nonnegative");
}

double p_adc(int bits, const PowerModel& m) {
    if (bits < 1) throw DomainError("p_adc: bits must be >= 1");
    if (bits == kInfiniteBits) throw DomainError("p_adc: no power model for ideal ADCs");
    return 3.0 * m.v_dd * m.v_dd * m.l_min * (2.0 * m.bandwidth_hz + m.f_cor) / std::pow(10.0, -0.1525 * bits + 4.838);
}

double p_total(const BitAllocation& bits, const PowerModel& m) {
    const double L = bits.cells();
    const double M = bits.antennas();
    double total = L * M * (2.0 * m.p_mix + m.p_filt + m.p_filr + m.p_lna + m.p_ifa) + 2.0 * L * m.p_syn;
    for (int j = 0; j < bits.cells(); ++j)
        for (int a = 0; a < bits.antennas(); ++a) {
            const int b = bits.bits(j, a);
            total += 2.0 * ((b > 1 ? m.p_agc : 0.0) + p_adc(b, m));
        }
    return total;
}

double energy_efficiency(double sum_se, const BitAllocation& bits, const PowerModel& m) {
    const double p = p_total(bits, m);
    if (!(p > 0.0)) throw DomainError("energy_efficiency: total power must be positive");
    return m.bandwidth_hz * sum_se / p;
}

}  // namespace qmimo
