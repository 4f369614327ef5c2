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

#include "stbf/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <locale>
#include <sstream>

namespace stbf::experiment
{
    namespace
    {
        constexpr const char* kHeader =
            "experiment,scheme,axis_name,axis_value,mean_sum_se_bps_hz,std_error,trials,seed";

        std::string fmt(double v)
        {
            char buf[48];
            std::snprintf(buf, sizeof buf, "%.6g", v);
            // Guard against a non-C numeric locale.
            for (char* p = buf; *p; ++p)
                if (*p == ',')
                    *p = '.';
            return buf;
        }

        std::vector<std::string> split(const std::string& line)
        {
            std::vector<std::string> out;
            std::string cur;
            for (char c : line)
            {
                if (c == ',')
                {
                    out.push_back(cur);
                    cur.clear();
                }
                else
                {
                    cur += c;
                }
            }
            out.push_back(cur);
            return out;
        }

        double to_double(const std::string& s, int line)
        {
            std::istringstream in(s);
            in.imbue(std::locale::classic());
            double v = 0.0;
            if (!(in >> v) || !in.eof())
                throw std::invalid_argument("CSV line " + std::to_string(line) + ": bad number '" + s + "'");
            return v;
        }
    }

    scenario::ScenarioConfig point_config(const config::ExperimentSpec& spec, scenario::Scheme scheme, double axis)
    {
        scenario::ScenarioConfig c = spec.scenario;
        c.scheme = scheme;
        switch (spec.experiment)
        {
        case config::ExperimentKind::sweep_power:
            c.power.tx_power_w = dbm_to_watt(axis);
            break;
        case config::ExperimentKind::sweep_users:
            c.k_users = static_cast<int>(axis);
            break;
        case config::ExperimentKind::sweep_m:
            c.repetitions = static_cast<int>(axis);
            break;
        default:
            break;
        }
        return c;
    }

    std::vector<ResultRow> run_experiment(const config::ExperimentSpec& spec)
    {
        spec.validate();
        if (spec.experiment == config::ExperimentKind::tle_feasibility)
            throw std::invalid_argument("run_experiment: use run_tle_feasibility for tle-feasibility");

        const auto schemes = spec.effective_schemes();
        std::vector<double> axis = spec.sweep_axis;
        if (spec.experiment == config::ExperimentKind::run)
            axis = {watt_to_dbm(spec.scenario.power.tx_power_w)};

        // Every point is validated first so a bad pair fails before any trial runs.
        for (auto s : schemes)
            for (double a : axis)
                point_config(spec, s, a).validate();

        std::vector<ResultRow> rows;
        for (auto s : schemes)
        {
            for (double a : axis)
            {
                const auto cfg = point_config(spec, s, a);
                const auto result = scenario::monte_carlo(cfg, spec.threads);
                ResultRow row;
                row.experiment = config::to_string(spec.experiment);
                row.scheme = scenario::to_string(s);
                row.axis_name = config::axis_name(spec.experiment);
                row.axis_value = a;
                row.mean_sum_se = result.mean_sum_se;
                row.std_error = result.std_error;
                row.trials = cfg.trials;
                row.seed = cfg.seed;
                rows.push_back(row);
            }
        }
        return rows;
    }

    void emit_csv(const std::vector<ResultRow>& rows, std::ostream& out)
    {
        out << kHeader << '\n';
        for (const auto& r : rows)
            out << r.experiment << ',' << r.scheme << ',' << r.axis_name << ',' << fmt(r.axis_value) << ','
                << fmt(r.mean_sum_se) << ',' << fmt(r.std_error) << ',' << r.trials << ',' << r.seed << '\n';
    }

    std::string to_csv(const std::vector<ResultRow>& rows)
    {
        std::ostringstream os;
        emit_csv(rows, os);
        return os.str();
    }

    void emit_csv(const std::vector<ResultRow>& rows, const std::string& path)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot open '" + path + "' for writing");
        out << to_csv(rows);
        if (!out.flush())
            throw std::runtime_error("failed writing '" + path + "'");
    }

    std::vector<ResultRow> parse_csv(const std::string& text)
    {
        std::istringstream in(text);
        std::string line;
        int number = 0;
        if (!std::getline(in, line) || line != kHeader)
            throw std::invalid_argument("CSV line 1: missing or unexpected header");
        ++number;
        std::vector<ResultRow> rows;
        while (std::getline(in, line))
        {
            ++number;
            if (line.empty())
                continue;
            const auto f = split(line);
            if (f.size() != 8)
                throw std::invalid_argument("CSV line " + std::to_string(number) + ": expected 8 fields");
            ResultRow r;
            r.experiment = f[0];
            r.scheme = f[1];
            r.axis_name = f[2];
            r.axis_value = to_double(f[3], number);
            r.mean_sum_se = to_double(f[4], number);
            r.std_error = to_double(f[5], number);
            try
            {
                r.trials = std::stoi(f[6]);
                r.seed = std::stoull(f[7]);
            }
            catch (const std::exception&)
            {
                throw std::invalid_argument("CSV line " + std::to_string(number) + ": bad trials or seed");
            }
            rows.push_back(r);
        }
        return rows;
    }

    std::vector<ephemeris::FeasibilityCell> run_tle_feasibility(const config::TleSpec& tle)
    {
        const auto catalog = ephemeris::load_tle_file(tle.file, ephemeris::ParseMode::skip_invalid);
        if (catalog.records.empty())
            throw std::invalid_argument("tle.file: no valid records in '" + tle.file + "'");

        const ephemeris::TleRecord* chosen = &catalog.records.front();
        if (!tle.satellite.empty())
        {
            chosen = nullptr;
            for (const auto& r : catalog.records)
                if (r.name == tle.satellite || std::to_string(r.catalog_number) == tle.satellite)
                {
                    chosen = &r;
                    break;
                }
            if (!chosen)
                throw std::invalid_argument("tle.satellite: '" + tle.satellite + "' not found in '" + tle.file + "'");
        }

        const ephemeris::JulianDate t = tle.time_utc.empty() ? chosen->epoch.plus_seconds(tle.offset_min * 60.0)
                                                             : ephemeris::parse_utc(tle.time_utc);
        ephemeris::GeoPoint ref;
        if (tle.reference)
        {
            ref = *tle.reference;
        }
        else
        {
            const auto state = ephemeris::propagate(*chosen, t);
            const Eigen::Vector3d p = state.position.normalized();
            ref.lat_deg = rad2deg(std::asin(p.z()));
            ref.lon_deg = rad2deg(std::atan2(p.y(), p.x()));
        }
        const double lat_min = std::max(-90.0, ref.lat_deg - tle.grid_half_span_deg);
        const double lat_max = std::min(90.0, ref.lat_deg + tle.grid_half_span_deg);
        const auto grid = ephemeris::make_grid(lat_min, lat_max, ref.lon_deg - tle.grid_half_span_deg,
                                               ref.lon_deg + tle.grid_half_span_deg, tle.grid_step_deg);
        return ephemeris::feasibility_map(*chosen, t, grid, ref, tle.options);
    }
}
