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

#include "stbf/metrics.hpp"

#include <cmath>

namespace stbf::metrics
{
    void PowerConfig::validate() const
    {
        if (!(tx_power_w > 0.0))
            throw std::invalid_argument("PowerConfig: transmit power must be positive");
        if (noise_w < 0.0 || csit_error_var < 0.0)
            throw std::invalid_argument("PowerConfig: noise and CSIT error variance must be nonnegative");
    }

    double PowerConfig::thermal_noise_w(double noise_psd_dbm_hz, double bandwidth_hz)
    {
        return dbm_to_watt(noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz));
    }

    double sinr(int user, const ChannelGrid& channels, std::span<const CVec> precoders, const PowerConfig& power,
                int m)
    {
        const auto k_users = static_cast<int>(precoders.size());
        if (user < 0 || user >= k_users || static_cast<int>(channels.size()) != k_users)
            throw std::invalid_argument("sinr: user index or channel grid does not match the precoder count");
        const auto& row = channels[user];
        if (static_cast<int>(row.size()) != k_users)
            throw std::invalid_argument("sinr: channel grid row has wrong length");

        auto gain = [&](int l) {
            const CVec& h = row[l];
            if (h.size() == 0)
                return 0.0;
            if (h.size() != precoders[l].size())
                throw std::invalid_argument("sinr: channel and precoder lengths differ");
            return std::norm(h.dot(precoders[l])); // Eigen dot conjugates the left operand
        };

        const double signal = gain(user) * power.tx_power_w;
        double interference = 0.0;
        for (int l = 0; l < k_users; ++l)
            if (l != user)
                interference += gain(l) * power.tx_power_w;
        return signal / (interference + m * power.noise_w);
    }

    double spectral_efficiency(double sinr, int m)
    {
        if (m == 0)
            return 0.0;
        if (m < 0 || sinr < 0.0)
            throw std::invalid_argument("spectral_efficiency: negative repetitions or SINR");
        return std::log2(1.0 + sinr) / m;
    }

    RateReport report_from_sinr(std::vector<double> sinrs, int m)
    {
        RateReport r;
        r.m_used = m;
        r.per_user_sinr = std::move(sinrs);
        r.per_user_se.reserve(r.per_user_sinr.size());
        for (double s : r.per_user_sinr)
        {
            r.per_user_se.push_back(spectral_efficiency(s, m));
            r.sum_se += r.per_user_se.back();
        }
        return r;
    }

    RateReport evaluate(const ChannelGrid& channels, std::span<const CVec> precoders, const PowerConfig& power,
                        int m)
    {
        std::vector<double> s;
        s.reserve(precoders.size());
        for (int k = 0; k < static_cast<int>(precoders.size()); ++k)
            s.push_back(sinr(k, channels, precoders, power, m));
        return report_from_sinr(std::move(s), m);
    }

    double tdma_partial_sum_se(std::span<const double> snr)
    {
        double sum = 0.0;
        for (double s : snr)
            sum += std::log2(1.0 + s);
        return 0.5 * sum;
    }

    double st_zf_sum_se_closed_form(std::span<const double> snr)
    {
        double sum = 0.0;
        for (double s : snr)
            sum += std::log2(1.0 + 2.0 * s);
        return 0.5 * sum;
    }

    double tdma_full_sum_se(std::span<const double> snr)
    {
        if (snr.empty())
            throw std::invalid_argument("tdma_full_sum_se: at least one user required");
        double sum = 0.0;
        for (double s : snr)
            sum += std::log2(1.0 + s);
        return sum / static_cast<double>(snr.size());
    }

    double compensated_sum(std::span<const double> values)
    {
        double sum = 0.0;
        double c = 0.0;
        for (double v : values)
        {
            const double t = sum + v;
            if (std::abs(sum) >= std::abs(v))
                c += (sum - t) + v;
            else
                c += (v - t) + sum;
            sum = t;
        }
        return sum + c;
    }
}
