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

#include <optional>
#include <string>
#include <vector>

#include "stbf/ephemeris.hpp"
#include "stbf/scenario.hpp"

namespace stbf::config
{
    enum class ExperimentKind
    {
        run,
        sweep_power,
        sweep_users,
        sweep_m,
        tle_feasibility
    };

    std::string to_string(ExperimentKind k);
    ExperimentKind parse_experiment(const std::string& s);

    /// Axis label written to the CSV: tx_power_dbm, users, repetitions.
    std::string axis_name(ExperimentKind k);

    struct TleSpec
    {
        std::string file;
        std::string satellite;     // name or catalog number; empty picks the first record
        std::string time_utc;      // empty: epoch + offset_min
        double offset_min = 0.0;
        std::optional<ephemeris::GeoPoint> reference; // empty: sub-satellite point
        double grid_half_span_deg = 15.0; // grid is centred on the reference user
        double grid_step_deg = 1.0;
        ephemeris::FeasibilityOptions options;
    };

    struct ExperimentSpec
    {
        ExperimentKind experiment = ExperimentKind::run;
        scenario::ScenarioConfig scenario;
        std::vector<scenario::Scheme> schemes; // empty: scenario.scheme only
        std::vector<double> sweep_axis;
        std::string output_path;
        int threads = 1;
        TleSpec tle;

        /// Throws std::invalid_argument naming the offending key.
        void validate() const;
        std::vector<scenario::Scheme> effective_schemes() const;
    };

    /// Fills defaults for the experiment kind (sweep axis, schemes) without touching set values.
    void apply_defaults(ExperimentSpec& spec);

    /// JSON document; every key is optional and unknown keys are rejected with their path.
    ExperimentSpec parse_config(const std::string& json_text);
    ExperimentSpec load_config(const std::string& path);

    /// Reference defaults with an empty configuration.
    ExperimentSpec default_spec();
}
