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

#include "stbf/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace stbf::config
{
    namespace
    {
        using nlohmann::json;

        [[noreturn]] void fail(const std::string& path, const std::string& what)
        {
            throw std::invalid_argument("config: " + path + ": " + what);
        }

        // Reads keys from one JSON object and remembers which were consumed so that leftovers
        // can be reported as unknown.
        class ObjectReader
        {
        public:
            ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path))
            {
                if (!obj_.is_object())
                    fail(path_.empty() ? "<root>" : path_, "must be an object");
            }

            std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

            const json* find(const std::string& key)
            {
                seen_.insert(key);
                const auto it = obj_.find(key);
                return it == obj_.end() ? nullptr : &*it;
            }

            template <class Check>
            void number(const std::string& key, double& out, Check check, const char* rule)
            {
                if (const json* v = find(key))
                {
                    if (!v->is_number())
                        fail(key_path(key), "must be a number");
                    const double x = v->get<double>();
                    if (!std::isfinite(x) || !check(x))
                        fail(key_path(key), rule);
                    out = x;
                }
            }

            void integer(const std::string& key, int& out, int min_value)
            {
                if (const json* v = find(key))
                {
                    if (!v->is_number_integer())
                        fail(key_path(key), "must be an integer");
                    const auto x = v->get<long long>();
                    if (x < min_value || x > 1'000'000'000)
                        fail(key_path(key), "must be an integer >= " + std::to_string(min_value));
                    out = static_cast<int>(x);
                }
            }

            void text(const std::string& key, std::string& out)
            {
                if (const json* v = find(key))
                {
                    if (!v->is_string())
                        fail(key_path(key), "must be a string");
                    out = v->get<std::string>();
                }
            }

            void finish() const
            {
                for (auto it = obj_.begin(); it != obj_.end(); ++it)
                    if (!seen_.count(it.key()))
                        fail(key_path(it.key()), "unknown key");
            }

        private:
            const json& obj_;
            std::string path_;
            std::set<std::string> seen_;
        };

        const auto positive = [](double x) { return x > 0.0; };
        const auto nonnegative = [](double x) { return x >= 0.0; };
        const auto any = [](double) { return true; };

        void read_scenario(const json& node, scenario::ScenarioConfig& s)
        {
            ObjectReader r(node, "scenario");
            r.integer("users", s.k_users, 1);
            if (const json* v = r.find("topology"))
            {
                if (!v->is_string())
                    fail("scenario.topology", "must be a string");
                try
                {
                    s.topology = scenario::parse_topology(v->get<std::string>());
                }
                catch (const std::invalid_argument& e)
                {
                    fail("scenario.topology", e.what());
                }
            }
            if (const json* v = r.find("scheme"))
            {
                if (!v->is_string())
                    fail("scenario.scheme", "must be a string");
                try
                {
                    s.scheme = scenario::parse_scheme(v->get<std::string>());
                }
                catch (const std::invalid_argument& e)
                {
                    fail("scenario.scheme", e.what());
                }
            }

            int nx = s.geometry.nx;
            int ny = s.geometry.ny;
            double spacing_wl = s.geometry.spacing_m / s.geometry.wavelength_m;
            double carrier_ghz = s.fading.carrier_hz / 1e9;
            double bandwidth_mhz = s.bandwidth_hz / 1e6;
            double power_dbm = watt_to_dbm(s.power.tx_power_w);
            double power_w = -1.0;
            double noise_psd = -174.0;
            double error_ratio = 1.0;
            r.integer("array_nx", nx, 1);
            r.integer("array_ny", ny, 1);
            r.number("element_spacing_wavelengths", spacing_wl, positive, "must be positive");
            r.number("carrier_ghz", carrier_ghz, positive, "must be positive (GHz)");
            r.number("bandwidth_mhz", bandwidth_mhz, positive, "must be positive (MHz)");
            r.number("tx_power_dbm", power_dbm, any, "must be finite (dBm)");
            r.number("tx_power_w", power_w, positive, "must be positive (W)");
            if (r.find("tx_power_dbm") && r.find("tx_power_w"))
                fail("scenario.tx_power_w", "conflicts with scenario.tx_power_dbm; give one of them");
            r.number("noise_psd_dbm_hz", noise_psd, any, "must be finite (dBm/Hz)");
            r.number("csit_error_to_noise_ratio", error_ratio, nonnegative, "must be >= 0");

            r.number("pathloss_exponent", s.fading.pathloss_exponent, positive, "must be positive");
            r.integer("paths", s.num_paths, 1);
            r.number("tap_gain", s.fading.tap_gain_delta, [](double x) { return x > 0.0 && x < 1.0; },
                     "must lie in (0, 1)");
            r.number("shadowed_rician_b", s.fading.sr_b, positive, "must be positive");
            r.number("shadowed_rician_m", s.fading.sr_m, positive, "must be positive");
            r.number("shadowed_rician_omega", s.fading.sr_omega, positive, "must be positive");

            double altitude_km = s.altitude_m / 1e3;
            double earth_km = s.earth_radius_m / 1e3;
            double disc_km = s.user_disc_radius_m / 1e3;
            double doppler_khz = s.doppler_max_hz / 1e3;
            double cap_us = s.interval_cap_s * 1e6;
            r.number("altitude_km", altitude_km, positive, "must be positive (km)");
            r.number("earth_radius_km", earth_km, positive, "must be positive (km)");
            r.number("ref_azimuth_deg", s.ref_azimuth_deg, any, "must be finite (deg)");
            r.number("ref_zenith_deg", s.ref_zenith_deg, [](double x) { return x >= 0.0 && x < 90.0; },
                     "must lie in [0, 90) deg");
            r.number("satellite_spacing_deg", s.sat_spacing_deg, any, "must be finite (deg)");
            r.number("angle_jitter_deg", s.angle_jitter_deg, nonnegative, "must be >= 0 (deg)");
            r.number("path_jitter_deg", s.path_jitter_deg, nonnegative, "must be >= 0 (deg)");
            r.number("user_disc_radius_km", disc_km, nonnegative, "must be >= 0 (km)");
            r.number("doppler_max_khz", doppler_khz, nonnegative, "must be >= 0 (kHz)");
            r.integer("r_max", s.r_max, 1);
            r.integer("m_max", s.m_max, 1);
            r.integer("repetitions", s.repetitions, 0);
            r.number("interval_cap_us", cap_us, positive, "must be positive (us)");
            r.integer("trials", s.trials, 1);
            if (const json* v = r.find("seed"))
            {
                if (!v->is_number_unsigned())
                    fail("scenario.seed", "must be a nonnegative integer");
                s.seed = v->get<std::uint64_t>();
            }
            r.finish();

            if (disc_km >= earth_km)
                fail("scenario.user_disc_radius_km", "must be smaller than the Earth radius");

            const double wavelength = kSpeedOfLight / (carrier_ghz * 1e9);
            s.geometry.nx = nx;
            s.geometry.ny = ny;
            s.geometry.wavelength_m = wavelength;
            s.geometry.spacing_m = spacing_wl * wavelength;
            s.fading.carrier_hz = carrier_ghz * 1e9;
            s.bandwidth_hz = bandwidth_mhz * 1e6;
            s.power.tx_power_w = power_w > 0.0 ? power_w : dbm_to_watt(power_dbm);
            s.power.noise_w = metrics::PowerConfig::thermal_noise_w(noise_psd, s.bandwidth_hz);
            s.power.csit_error_var = error_ratio * s.power.noise_w;
            s.altitude_m = altitude_km * 1e3;
            s.earth_radius_m = earth_km * 1e3;
            s.user_disc_radius_m = disc_km * 1e3;
            s.doppler_max_hz = doppler_khz * 1e3;
            s.interval_cap_s = cap_us * 1e-6;
        }

        void read_tle(const json& node, TleSpec& t)
        {
            ObjectReader r(node, "tle");
            r.text("file", t.file);
            if (const json* v = r.find("satellite"))
            {
                if (v->is_string())
                    t.satellite = v->get<std::string>();
                else if (v->is_number_unsigned())
                    t.satellite = std::to_string(v->get<std::uint64_t>());
                else
                    fail("tle.satellite", "must be a name or a catalog number");
            }
            r.text("time_utc", t.time_utc);
            r.number("offset_min", t.offset_min, any, "must be finite (min)");
            double lat = 0.0;
            double lon = 0.0;
            const bool has_lat = r.find("reference_lat_deg") != nullptr;
            const bool has_lon = r.find("reference_lon_deg") != nullptr;
            r.number("reference_lat_deg", lat, [](double x) { return std::abs(x) <= 90.0; }, "must lie in [-90, 90]");
            r.number("reference_lon_deg", lon, [](double x) { return std::abs(x) <= 180.0; },
                     "must lie in [-180, 180]");
            if (has_lat != has_lon)
                fail(has_lat ? "tle.reference_lon_deg" : "tle.reference_lat_deg",
                     "reference latitude and longitude must be given together");
            if (has_lat)
                t.reference = ephemeris::GeoPoint{lat, lon};
            r.number("grid_half_span_deg", t.grid_half_span_deg, positive, "must be positive (deg)");
            r.number("grid_step_deg", t.grid_step_deg, positive, "must be positive (deg)");
            r.number("min_elevation_deg", t.options.min_elevation_deg,
                     [](double x) { return x >= 0.0 && x < 90.0; }, "must lie in [0, 90) deg");
            double cap_us = t.options.interval_cap_s * 1e6;
            r.number("interval_cap_us", cap_us, positive, "must be positive (us)");
            t.options.interval_cap_s = cap_us * 1e-6;
            r.finish();
        }
    }

    std::string to_string(ExperimentKind k)
    {
        switch (k)
        {
        case ExperimentKind::run:
            return "run";
        case ExperimentKind::sweep_power:
            return "sweep-power";
        case ExperimentKind::sweep_users:
            return "sweep-users";
        case ExperimentKind::sweep_m:
            return "sweep-m";
        case ExperimentKind::tle_feasibility:
            return "tle-feasibility";
        }
        return "?";
    }

    ExperimentKind parse_experiment(const std::string& s)
    {
        for (auto k : {ExperimentKind::run, ExperimentKind::sweep_power, ExperimentKind::sweep_users,
                       ExperimentKind::sweep_m, ExperimentKind::tle_feasibility})
            if (to_string(k) == s)
                return k;
        throw std::invalid_argument("unknown experiment '" + s +
                                    "' (expected run, sweep-power, sweep-users, sweep-m or tle-feasibility)");
    }

    std::string axis_name(ExperimentKind k)
    {
        switch (k)
        {
        case ExperimentKind::sweep_users:
            return "users";
        case ExperimentKind::sweep_m:
            return "repetitions";
        default:
            return "tx_power_dbm";
        }
    }

    std::vector<scenario::Scheme> ExperimentSpec::effective_schemes() const
    {
        return schemes.empty() ? std::vector<scenario::Scheme>{scenario.scheme} : schemes;
    }

    void ExperimentSpec::validate() const
    {
        try
        {
            scenario.validate();
        }
        catch (const std::invalid_argument& e)
        {
            fail("scenario", e.what());
        }
        if (threads < 1)
            fail("threads", "must be >= 1");

        if (experiment == ExperimentKind::tle_feasibility)
        {
            if (tle.file.empty())
                fail("tle.file", "required for tle-feasibility");
            return;
        }

        const bool sweep = experiment != ExperimentKind::run;
        if (sweep && sweep_axis.empty())
            fail("sweep", "must not be empty");
        for (std::size_t i = 1; i < sweep_axis.size(); ++i)
            if (!(sweep_axis[i] > sweep_axis[i - 1]))
                fail("sweep", "values must be strictly increasing");
        if (experiment == ExperimentKind::sweep_users || experiment == ExperimentKind::sweep_m)
            for (double v : sweep_axis)
                if (v < 1.0 || v != std::floor(v) || v > 1e6)
                    fail("sweep", "values must be positive integers for " + to_string(experiment));

        for (auto s : effective_schemes())
        {
            try
            {
                scenario::check_scheme(s, scenario.topology);
            }
            catch (const std::invalid_argument& e)
            {
                fail("schemes", e.what());
            }
            if (experiment == ExperimentKind::sweep_m && s != scenario::Scheme::st_slnr &&
                s != scenario::Scheme::st_slnr_imperfect)
                fail("schemes", "sweep-m only applies to ST-SLNR and ST-SLNR-imperfect, got " + scenario::to_string(s));
        }
    }

    void apply_defaults(ExperimentSpec& spec)
    {
        if (spec.sweep_axis.empty())
        {
            switch (spec.experiment)
            {
            case ExperimentKind::sweep_power:
                spec.sweep_axis = {30, 35, 40, 45, 50, 55, 60};
                break;
            case ExperimentKind::sweep_users:
                spec.sweep_axis = {2, 3, 4, 5, 6};
                break;
            case ExperimentKind::sweep_m:
                spec.sweep_axis = {1, 2, 3, 4, 5};
                break;
            default:
                break;
            }
        }
        if (spec.schemes.empty() && spec.experiment == ExperimentKind::sweep_m)
            spec.schemes = {scenario::Scheme::st_slnr};
    }

    ExperimentSpec default_spec()
    {
        ExperimentSpec spec;
        spec.scenario.power.csit_error_var = spec.scenario.power.noise_w;
        return spec;
    }

    ExperimentSpec parse_config(const std::string& json_text)
    {
        json root;
        try
        {
            root = json::parse(json_text.empty() ? std::string("{}") : json_text);
        }
        catch (const json::parse_error& e)
        {
            throw std::invalid_argument(std::string("config: malformed JSON: ") + e.what());
        }

        ExperimentSpec spec = default_spec();
        ObjectReader r(root, "");
        if (const json* v = r.find("experiment"))
        {
            if (!v->is_string())
                fail("experiment", "must be a string");
            try
            {
                spec.experiment = parse_experiment(v->get<std::string>());
            }
            catch (const std::invalid_argument& e)
            {
                fail("experiment", e.what());
            }
        }
        if (const json* v = r.find("schemes"))
        {
            if (!v->is_array())
                fail("schemes", "must be an array of scheme names");
            for (std::size_t i = 0; i < v->size(); ++i)
            {
                const std::string path = "schemes[" + std::to_string(i) + "]";
                if (!(*v)[i].is_string())
                    fail(path, "must be a string");
                try
                {
                    spec.schemes.push_back(scenario::parse_scheme((*v)[i].get<std::string>()));
                }
                catch (const std::invalid_argument& e)
                {
                    fail(path, e.what());
                }
            }
        }
        if (const json* v = r.find("sweep"))
        {
            if (!v->is_array())
                fail("sweep", "must be an array of numbers");
            for (std::size_t i = 0; i < v->size(); ++i)
            {
                if (!(*v)[i].is_number())
                    fail("sweep[" + std::to_string(i) + "]", "must be a number");
                spec.sweep_axis.push_back((*v)[i].get<double>());
            }
        }
        r.text("output", spec.output_path);
        r.integer("threads", spec.threads, 1);
        if (const json* v = r.find("scenario"))
            read_scenario(*v, spec.scenario);
        if (const json* v = r.find("tle"))
            read_tle(*v, spec.tle);
        r.finish();

        spec.tle.options.wavelength_m = spec.scenario.geometry.wavelength_m;
        apply_defaults(spec);
        spec.validate();
        return spec;
    }

    ExperimentSpec load_config(const std::string& path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw std::runtime_error("cannot read config file '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_config(buf.str());
    }
}
