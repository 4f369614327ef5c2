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
#include <iosfwd>
#include <string>
#include <vector>

#include "stbf/config.hpp"

namespace stbf::experiment
{
    struct ResultRow
    {
        std::string experiment;
        std::string scheme;
        std::string axis_name;
        double axis_value = 0.0;
        double mean_sum_se = 0.0;
        double std_error = 0.0;
        int trials = 0;
        std::uint64_t seed = 0;

        bool operator==(const ResultRow&) const = default;
    };

    /// Scenario for one axis point of a sweep.
    scenario::ScenarioConfig point_config(const config::ExperimentSpec& spec, scenario::Scheme scheme, double axis);

    /// One row per (scheme, axis point), schemes outermost. Every scheme/topology pair is checked
    /// before any trial runs.
    std::vector<ResultRow> run_experiment(const config::ExperimentSpec& spec);

    /// Header plus one line per row; numbers use 6 significant digits and '.' decimals.
    void emit_csv(const std::vector<ResultRow>& rows, std::ostream& out);
    void emit_csv(const std::vector<ResultRow>& rows, const std::string& path);
    std::string to_csv(const std::vector<ResultRow>& rows);

    /// Inverse of emit_csv. Throws std::invalid_argument with the line number on malformed input.
    std::vector<ResultRow> parse_csv(const std::string& text);

    /// Loads the catalog, picks the satellite and evaluates the feasibility map.
    std::vector<ephemeris::FeasibilityCell> run_tle_feasibility(const config::TleSpec& tle);
}
