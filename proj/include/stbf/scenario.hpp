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

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stbf/beamform.hpp"
#include "stbf/channel.hpp"
#include "stbf/metrics.hpp"

namespace stbf::scenario
{
    enum class Topology
    {
        partial,
        full
    };

    enum class Scheme
    {
        mrt,
        zf,
        slnr,
        tdma,
        st_zf,
        st_slnr,
        st_slnr_imperfect
    };

    std::string to_string(Topology t);
    std::string to_string(Scheme s);
    Topology parse_topology(const std::string& s);
    Scheme parse_scheme(const std::string& s);

    /// One experiment point. Defaults reproduce the reference setup: 8×8 UPA at 1.9925 GHz,
    /// 5 MHz, 530 km altitude, three paths with tap gain 0.5, Doppler within ±50 kHz.
    struct ScenarioConfig
    {
        int k_users = 3;
        Topology topology = Topology::partial;
        Scheme scheme = Scheme::st_zf;

        channel::ArrayGeometry geometry = channel::ArrayGeometry::half_wavelength(8, 8, kSpeedOfLight / 1.9925e9);
        channel::FadingConfig fading{};
        metrics::PowerConfig power{dbm_to_watt(40.0), metrics::PowerConfig::thermal_noise_w(-174.0, 5e6),
                                   metrics::PowerConfig::thermal_noise_w(-174.0, 5e6)};

        double bandwidth_hz = 5e6;
        int r_max = 500;
        int m_max = 8;
        int repetitions = 0; // ST-SLNR repetitions; 0 runs the adaptive search
        double interval_cap_s = 100e-6;

        double altitude_m = 530e3;
        double earth_radius_m = 6371e3;
        double ref_azimuth_deg = 10.0;
        double ref_zenith_deg = 5.0;
        double sat_spacing_deg = 2.0;
        double angle_jitter_deg = 1.0;
        double path_jitter_deg = 1.0;
        double user_disc_radius_m = 5e3;
        double doppler_max_hz = 50e3;
        int num_paths = 3;

        int trials = 2000;
        std::uint64_t seed = 1;

        double sample_period_s() const { return 1.0 / bandwidth_hz; }
        void validate() const;
        std::string digest() const;
    };

    struct Link
    {
        bool present = false;
        channel::PathSet paths;
        double distance_m = 0.0;
    };

    struct TrialRealization
    {
        int k_users = 0;
        Topology topology = Topology::full;
        std::vector<std::vector<Link>> links; // links[user][satellite]
        std::vector<Eigen::Vector3d> satellite_positions;
        std::vector<Eigen::Vector3d> user_positions;
        std::uint64_t seed = 0;
        std::uint64_t trial = 0; // stream id: (seed, trial) fixes every draw

        const Link& link(int user, int satellite) const { return links[user][satellite]; }
    };

    /// Interference edges (satellite -> user) with satellite != user.
    /// Partial: satellite k interferes user k+1 (ring). Full: every other user.
    std::vector<std::pair<int, int>> build_topology(Topology kind, int k_users);

    TrialRealization sample_geometry(const ScenarioConfig& config, std::uint64_t trial);

    /// Zenith/azimuth of `target` seen from a nadir-pointing array at `satellite`.
    std::pair<double, double> array_angles(const Eigen::Vector3d& satellite, const Eigen::Vector3d& target);

    metrics::RateReport run_trial(const TrialRealization& realization, Scheme scheme, const ScenarioConfig& config);

    /// Throws std::invalid_argument when the scheme cannot run on the topology.
    void check_scheme(Scheme scheme, Topology topology);

    struct ErgodicResult
    {
        double mean_sum_se = 0.0;
        double std_error = 0.0;
        std::vector<double> per_trial_values;
        Scheme scheme = Scheme::mrt;
        std::string config_digest;
    };

    /// Trials are split across `threads` workers; values are reduced in trial order so the
    /// result does not depend on the worker count.
    ErgodicResult monte_carlo(const ScenarioConfig& config, int threads = 1);
}
