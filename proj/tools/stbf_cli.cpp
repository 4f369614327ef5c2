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

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stbf/config.hpp"
#include "stbf/experiment.hpp"

namespace
{
    using stbf::config::ExperimentKind;

    // Exit codes: 0 ok, 2 configuration or usage, 3 input/output, 4 computation.
    enum Exit
    {
        kOk = 0,
        kConfigError = 2,
        kIoError = 3,
        kRuntimeError = 4,
    };

    struct Overrides
    {
        std::string config_path;
        std::string out_path;
        std::optional<std::uint64_t> seed;
        std::optional<int> trials;
        std::optional<int> threads;
        std::vector<std::string> schemes;
        std::string topology;
        std::optional<int> users;
        std::optional<double> power_dbm;
        std::vector<double> sweep;

        // tle-feasibility
        std::string tle_file;
        std::string satellite;
        std::string time_utc;
        std::optional<double> offset_min;
        std::optional<double> ref_lat;
        std::optional<double> ref_lon;
        std::optional<double> span_deg;
        std::optional<double> step_deg;
    };

    struct ConfigError : std::invalid_argument
    {
        using std::invalid_argument::invalid_argument;
    };

    template <class T>
    std::optional<T> env_number(const char* name)
    {
        const char* raw = std::getenv(name);
        if (!raw || !*raw)
            return std::nullopt;
        std::istringstream in(raw);
        T v{};
        if (!(in >> v) || !in.eof())
            throw ConfigError(std::string("environment variable ") + name + "='" + raw + "' is not a valid number");
        return v;
    }

    void add_common(CLI::App* cmd, Overrides& o)
    {
        cmd->add_option("--config", o.config_path, "JSON experiment file (units per key: dBm, GHz, MHz, km, us, deg)");
        cmd->add_option("--out", o.out_path, "output CSV path (stdout when omitted)");
        cmd->add_option("--seed", o.seed, "base seed (env STBF_SEED)");
        cmd->add_option("--trials", o.trials, "Monte Carlo trials per point")->check(CLI::PositiveNumber);
        cmd->add_option("--threads", o.threads, "worker threads (env STBF_THREADS)")->check(CLI::PositiveNumber);
    }

    void add_scenario(CLI::App* cmd, Overrides& o)
    {
        cmd->add_option("--scheme", o.schemes, "MRT, ZF, SLNR, TDMA, ST-ZF, ST-SLNR, ST-SLNR-imperfect (repeatable)");
        cmd->add_option("--topology", o.topology, "partial or full");
        cmd->add_option("--users", o.users, "number of satellite-user pairs")->check(CLI::PositiveNumber);
        cmd->add_option("--power-dbm", o.power_dbm, "transmit power in dBm");
    }

    stbf::config::ExperimentSpec build_spec(ExperimentKind kind, const Overrides& o)
    {
        std::ostringstream json;
        if (!o.config_path.empty())
        {
            std::ifstream in(o.config_path, std::ios::binary);
            if (!in)
                throw std::runtime_error("cannot read config file '" + o.config_path + "'");
            json << in.rdbuf();
        }
        stbf::config::ExperimentSpec spec;
        try
        {
            spec = stbf::config::parse_config(json.str());
        }
        catch (const std::invalid_argument& e)
        {
            throw ConfigError(e.what());
        }

        // A sweep axis from the file only applies to the same experiment kind.
        if (spec.experiment != kind)
            spec.sweep_axis.clear();
        spec.experiment = kind;

        try
        {
            auto& s = spec.scenario;
            if (const auto env = env_number<std::uint64_t>("STBF_SEED"))
                s.seed = *env;
            if (const auto env = env_number<int>("STBF_THREADS"))
                spec.threads = *env;
            if (o.seed)
                s.seed = *o.seed;
            if (o.threads)
                spec.threads = *o.threads;
            if (o.trials)
                s.trials = *o.trials;
            if (o.users)
                s.k_users = *o.users;
            if (o.power_dbm)
                s.power.tx_power_w = stbf::dbm_to_watt(*o.power_dbm);
            if (!o.topology.empty())
                s.topology = stbf::scenario::parse_topology(o.topology);
            if (!o.schemes.empty())
            {
                spec.schemes.clear();
                for (const auto& name : o.schemes)
                    spec.schemes.push_back(stbf::scenario::parse_scheme(name));
            }
            if (!o.sweep.empty())
                spec.sweep_axis = o.sweep;
            if (!o.out_path.empty())
                spec.output_path = o.out_path;

            auto& t = spec.tle;
            if (!o.tle_file.empty())
                t.file = o.tle_file;
            if (!o.satellite.empty())
                t.satellite = o.satellite;
            if (!o.time_utc.empty())
                t.time_utc = o.time_utc;
            if (o.offset_min)
                t.offset_min = *o.offset_min;
            if (o.ref_lat.has_value() != o.ref_lon.has_value())
                throw ConfigError("--ref-lat and --ref-lon must be given together");
            if (o.ref_lat)
                t.reference = stbf::ephemeris::GeoPoint{*o.ref_lat, *o.ref_lon};
            if (o.span_deg)
                t.grid_half_span_deg = *o.span_deg;
            if (o.step_deg)
                t.grid_step_deg = *o.step_deg;

            stbf::config::apply_defaults(spec);
            spec.validate();
        }
        catch (const ConfigError&)
        {
            throw;
        }
        catch (const std::invalid_argument& e)
        {
            throw ConfigError(e.what());
        }
        return spec;
    }

    void write_output(const std::string& path, const std::string& text)
    {
        if (path.empty())
        {
            std::cout << text;
            return;
        }
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw std::ios_base::failure("cannot open '" + path + "' for writing");
        out << text;
        if (!out.flush())
            throw std::ios_base::failure("failed writing '" + path + "'");
    }

    int execute(ExperimentKind kind, const Overrides& o)
    {
        try
        {
            const auto spec = build_spec(kind, o);
            if (kind == ExperimentKind::tle_feasibility)
            {
                const auto cells = stbf::experiment::run_tle_feasibility(spec.tle);
                std::ostringstream os;
                stbf::ephemeris::write_feasibility_csv(cells, os);
                write_output(spec.output_path, os.str());
                return kOk;
            }
            const auto rows = stbf::experiment::run_experiment(spec);
            write_output(spec.output_path, stbf::experiment::to_csv(rows));
            return kOk;
        }
        catch (const ConfigError& e)
        {
            std::cerr << "error [config]: " << e.what() << '\n';
            return kConfigError;
        }
        catch (const std::invalid_argument& e)
        {
            std::cerr << "error [config]: " << e.what() << '\n';
            return kConfigError;
        }
        catch (const std::ios_base::failure& e)
        {
            std::cerr << "error [io]: " << e.what() << '\n';
            return kIoError;
        }
        catch (const stbf::ephemeris::TleParseError& e)
        {
            std::cerr << "error [input]: " << e.what() << '\n';
            return kIoError;
        }
        catch (const std::runtime_error& e)
        {
            std::cerr << "error [io]: " << e.what() << '\n';
            return kIoError;
        }
        catch (const std::exception& e)
        {
            std::cerr << "error [runtime]: " << e.what() << '\n';
            return kRuntimeError;
        }
    }
}

int main(int argc, char** argv)
{
    CLI::App app{"Space-time beamforming experiments for LEO satellite interference networks"};
    app.require_subcommand(1);

    Overrides o;
    struct Sub
    {
        const char* name;
        ExperimentKind kind;
        const char* help;
    };
    const Sub subs[] = {
        {"run", ExperimentKind::run, "single Monte Carlo point at the configured power"},
        {"sweep-power", ExperimentKind::sweep_power, "ergodic sum SE versus transmit power (dBm)"},
        {"sweep-users", ExperimentKind::sweep_users, "ergodic sum SE versus number of users"},
        {"sweep-m", ExperimentKind::sweep_m, "ST-SLNR ergodic sum SE versus repetition count"},
        {"tle-feasibility", ExperimentKind::tle_feasibility, "Doppler offsets and retransmission intervals from TLEs"},
    };

    std::vector<std::pair<CLI::App*, ExperimentKind>> commands;
    for (const auto& s : subs)
    {
        CLI::App* cmd = app.add_subcommand(s.name, s.help);
        add_common(cmd, o);
        if (s.kind == ExperimentKind::tle_feasibility)
        {
            cmd->add_option("--tle", o.tle_file, "TLE catalog file");
            cmd->add_option("--satellite", o.satellite, "satellite name or catalog number (default: first record)");
            cmd->add_option("--time", o.time_utc, "evaluation instant, YYYY-MM-DDTHH:MM:SSZ (default: epoch)");
            cmd->add_option("--offset-min", o.offset_min, "minutes after the TLE epoch when --time is absent");
            cmd->add_option("--ref-lat", o.ref_lat, "reference user latitude, deg (default: sub-satellite point)");
            cmd->add_option("--ref-lon", o.ref_lon, "reference user longitude, deg");
            cmd->add_option("--span-deg", o.span_deg, "grid half-width around the reference user, deg");
            cmd->add_option("--step-deg", o.step_deg, "grid spacing, deg");
        }
        else
        {
            add_scenario(cmd, o);
            if (s.kind != ExperimentKind::run)
                cmd->add_option("--sweep", o.sweep, "axis values (strictly increasing)");
        }
        commands.emplace_back(cmd, s.kind);
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    for (const auto& [cmd, kind] : commands)
        if (cmd->parsed())
            return execute(kind, o);
    return kConfigError;
}
