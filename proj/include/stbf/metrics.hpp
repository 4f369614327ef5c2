// SPDX-License-Identifier: Apache-2.0
//
// leo-stbf: space-time beamforming for LEO satellite interference networks
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

#include <span>
#include <vector>

#include "stbf/types.hpp"

namespace stbf::metrics
{
    struct PowerConfig
    {
        double tx_power_w = 10.0;
        double noise_w = 0.0;
        double csit_error_var = 0.0;

        void validate() const;
        double noise_over_power() const { return noise_w / tx_power_w; }

        /// σ² = N0 · B with N0 in dBm/Hz.
        static double thermal_noise_w(double noise_psd_dbm_hz, double bandwidth_hz);
    };

    struct RateReport
    {
        std::vector<double> per_user_sinr;
        std::vector<double> per_user_se;
        double sum_se = 0.0;
        int m_used = 1;
    };

    /// channels[k][l] is the stacked channel from satellite l to user k, built with satellite l's
    /// interval. An empty vector marks an absent link.
    using ChannelGrid = std::vector<std::vector<CVec>>;

    /// |h_kk^H f_k|² P / (Σ_{l≠k} |h_kl^H f_l|² P + m σ²)
    double sinr(int user, const ChannelGrid& channels, std::span<const CVec> precoders, const PowerConfig& power,
                int m);

    /// (1/m) log2(1 + sinr); m = 0 is the "nothing transmitted yet" sentinel and returns 0.
    double spectral_efficiency(double sinr, int m);

    RateReport evaluate(const ChannelGrid& channels, std::span<const CVec> precoders, const PowerConfig& power,
                        int m);

    /// Builds a report from per-user SINRs (sum is accumulated in user order).
    RateReport report_from_sinr(std::vector<double> sinrs, int m);

    // Closed-form baselines. Inputs are the single-slot MRT SNRs ‖h_kk‖² P / σ² per user.

    /// (1/2) Σ log2(1 + snr_k): odd/even satellites alternate slots.
    double tdma_partial_sum_se(std::span<const double> snr);

    /// (1/2) Σ log2(1 + 2 snr_k): two-slot zero forcing at the orthogonalising interval.
    double st_zf_sum_se_closed_form(std::span<const double> snr);

    /// (1/K) Σ log2(1 + snr_k): one user per slot.
    double tdma_full_sum_se(std::span<const double> snr);

    /// Neumaier-compensated sum; result does not depend on how the terms were produced.
    double compensated_sum(std::span<const double> values);
}
