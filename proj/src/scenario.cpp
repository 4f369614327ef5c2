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

#include "stbf/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "stbf/random.hpp"

namespace stbf::scenario
{
    namespace
    {
        struct SchemeName
        {
            Scheme scheme;
            const char* name;
        };

        constexpr SchemeName kSchemeNames[] = {
            {Scheme::mrt, "MRT"},
            {Scheme::zf, "ZF"},
            {Scheme::slnr, "SLNR"},
            {Scheme::tdma, "TDMA"},
            {Scheme::st_zf, "ST-ZF"},
            {Scheme::st_slnr, "ST-SLNR"},
            {Scheme::st_slnr_imperfect, "ST-SLNR-imperfect"},
        };

        double wrap_pi(double a)
        {
            return std::remainder(a, 2.0 * kPi);
        }

        Eigen::Vector3d spherical(double radius, double zenith, double azimuth)
        {
            return radius * Eigen::Vector3d(std::sin(zenith) * std::cos(azimuth), std::sin(zenith) * std::sin(azimuth),
                                            std::cos(zenith));
        }

        bool partial_link(int user, int satellite, int k)
        {
            return user == satellite || user == (satellite + 1) % k;
        }

        std::vector<CVec> spatial_row(const TrialRealization& r, const channel::ArrayGeometry& g, int user)
        {
            std::vector<CVec> row(r.k_users);
            for (int s = 0; s < r.k_users; ++s)
                if (r.link(user, s).present)
                    row[s] = channel::spatial_channel(r.link(user, s).paths, g);
            return row;
        }

        metrics::ChannelGrid stack_grid(const TrialRealization& r, const std::vector<std::vector<CVec>>& spatial, int m,
                                        const std::vector<double>& tau)
        {
            const int k = r.k_users;
            metrics::ChannelGrid grid(k, std::vector<CVec>(k));
            for (int u = 0; u < k; ++u)
                for (int s = 0; s < k; ++s)
                    if (r.link(u, s).present)
                        grid[u][s] = channel::space_time_channel(spatial[u][s], r.link(u, s).paths.doppler_hz, m,
                                                                 tau[s])
                                         .vector;
            return grid;
        }

        std::vector<double> mrt_snr(const TrialRealization& r, const std::vector<std::vector<CVec>>& spatial,
                                    const metrics::PowerConfig& power)
        {
            std::vector<double> snr;
            for (int k = 0; k < r.k_users; ++k)
                snr.push_back(spatial[k][k].squaredNorm() * power.tx_power_w / power.noise_w);
            return snr;
        }

        metrics::RateReport run_spatial(const TrialRealization& r, Scheme scheme,
                                        const std::vector<std::vector<CVec>>& spatial, const ScenarioConfig& config)
        {
            const int k = r.k_users;
            std::vector<CVec> f;
            for (int s = 0; s < k; ++s)
            {
                const CVec& h = spatial[s][s];
                std::vector<int> others;
                for (int u = 0; u < k; ++u)
                    if (u != s && r.link(u, s).present)
                        others.push_back(u);
                CMat l(h.size(), static_cast<Eigen::Index>(others.size()));
                for (std::size_t i = 0; i < others.size(); ++i)
                    l.col(static_cast<Eigen::Index>(i)) = spatial[others[i]][s];

                switch (scheme)
                {
                case Scheme::mrt:
                    f.push_back(beamform::mrt(h, 1).vector);
                    break;
                case Scheme::zf:
                    f.push_back(beamform::zf_project(h, l, 1).vector);
                    break;
                default:
                    f.push_back(beamform::slnr_precoder(h, l, config.power.noise_over_power(), 1).vector);
                    break;
                }
            }
            const std::vector<double> tau(k, 0.0);
            return metrics::evaluate(stack_grid(r, spatial, 1, tau), f, config.power, 1);
        }

        metrics::RateReport run_st_zf(const TrialRealization& r, const std::vector<std::vector<CVec>>& spatial,
                                      const ScenarioConfig& config)
        {
            const int k = r.k_users;
            std::vector<double> tau(k, config.sample_period_s());
            std::vector<CVec> f;
            for (int s = 0; s < k; ++s)
            {
                const int victim = (s + 1) % k;
                const double f_own = r.link(s, s).paths.doppler_hz;
                const auto desired_at = [&](double t) {
                    return channel::space_time_channel(spatial[s][s], f_own, 2, t);
                };
                if (victim == s)
                {
                    f.push_back(beamform::mrt(desired_at(tau[s])).vector);
                    continue;
                }
                const double f_victim = r.link(victim, s).paths.doppler_hz;
                try
                {
                    tau[s] = beamform::st_zf_interval(f_own, f_victim, config.interval_cap_s).tau_s;
                }
                catch (const InfeasibleInterval&)
                {
                    // Identical Dopplers: no interval separates the users, keep the default and let ZF fail.
                }
                const auto interferer = channel::space_time_channel(spatial[victim][s], f_victim, 2, tau[s]);
                f.push_back(beamform::st_zf(desired_at(tau[s]), interferer).vector);
            }
            return metrics::evaluate(stack_grid(r, spatial, 2, tau), f, config.power, 2);
        }

        std::vector<beamform::LocalCsit> local_csit(const TrialRealization& r,
                                                    const std::vector<std::vector<CVec>>& spatial,
                                                    const ScenarioConfig& config, double error_var, int slots)
        {
            const int k = r.k_users;
            const Eigen::Index n = config.geometry.size();
            std::vector<beamform::LocalCsit> out(k);
            for (int s = 0; s < k; ++s)
            {
                auto& c = out[s];
                c.desired = s;
                c.spatial = CMat::Zero(n, k);
                c.doppler_hz.assign(k, 0.0);
                c.present.assign(k, false);
                for (int u = 0; u < k; ++u)
                {
                    if (!r.link(u, s).present)
                        continue;
                    c.present[u] = true;
                    c.spatial.col(u) = spatial[u][s];
                    c.doppler_hz[u] = r.link(u, s).paths.doppler_hz;
                }
                if (error_var > 0.0)
                {
                    c.slot_errors.assign(slots, CMat::Zero(n, k));
                    for (int u = 0; u < k; ++u)
                    {
                        if (!c.present[u])
                            continue;
                        // Slot errors are drawn in slot order, so the first m slots do not depend on m_max.
                        Rng rng = make_stream(r.seed, r.trial, StreamPurpose::csit, static_cast<std::uint64_t>(u * k + s));
                        for (int m = 0; m < slots; ++m)
                            c.slot_errors[m].col(u) = channel::complex_gaussian(n, error_var, rng);
                    }
                }
                c.prepare(slots);
            }
            return out;
        }

        metrics::RateReport run_st_slnr(const TrialRealization& r, bool imperfect,
                                        const std::vector<std::vector<CVec>>& spatial, const ScenarioConfig& config)
        {
            const int k = r.k_users;
            const double error_var = imperfect ? config.power.csit_error_var : 0.0;
            const int slots = config.repetitions > 0 ? config.repetitions : config.m_max;
            const auto csits = local_csit(r, spatial, config, error_var, slots);

            beamform::StSlnrOptions opt;
            opt.sample_period_s = config.sample_period_s();
            opt.r_max = config.r_max;
            opt.m_max = config.m_max;
            opt.tx_power_w = config.power.tx_power_w;
            opt.noise_w = config.power.noise_w;
            opt.error_total = k * error_var;

            int m = 0;
            std::vector<double> tau;
            std::vector<CVec> f;
            if (config.repetitions > 0)
            {
                const auto sol = beamform::st_slnr_fixed(csits, config.repetitions, opt);
                m = sol.m;
                for (int s = 0; s < k; ++s)
                {
                    tau.push_back(sol.per_satellite_tau[s].tau_s);
                    f.push_back(sol.per_satellite_precoder[s].vector);
                }
            }
            else
            {
                const auto sol = beamform::st_slnr_algorithm(csits, opt);
                m = sol.chosen_m;
                tau = sol.per_satellite_tau;
                for (const auto& b : sol.per_satellite_precoder)
                    f.push_back(b.vector);
            }
            // Rates always use the true channels.
            return metrics::evaluate(stack_grid(r, spatial, m, tau), f, config.power, m);
        }
    }

    std::string to_string(Topology t)
    {
        return t == Topology::partial ? "partial" : "full";
    }

    std::string to_string(Scheme s)
    {
        for (const auto& e : kSchemeNames)
            if (e.scheme == s)
                return e.name;
        return "?";
    }

    Topology parse_topology(const std::string& s)
    {
        if (s == "partial")
            return Topology::partial;
        if (s == "full")
            return Topology::full;
        throw std::invalid_argument("unknown topology '" + s + "' (expected partial or full)");
    }

    Scheme parse_scheme(const std::string& s)
    {
        for (const auto& e : kSchemeNames)
            if (s == e.name)
                return e.scheme;
        throw std::invalid_argument("unknown scheme '" + s +
                                    "' (expected MRT, ZF, SLNR, TDMA, ST-ZF, ST-SLNR or ST-SLNR-imperfect)");
    }

    void ScenarioConfig::validate() const
    {
        if (k_users < 1)
            throw std::invalid_argument("ScenarioConfig: users must be >= 1");
        if (trials < 1)
            throw std::invalid_argument("ScenarioConfig: trials must be >= 1");
        if (num_paths < 1)
            throw std::invalid_argument("ScenarioConfig: paths must be >= 1");
        if (!(bandwidth_hz > 0.0))
            throw std::invalid_argument("ScenarioConfig: bandwidth must be positive");
        if (r_max < 1 || m_max < 1 || repetitions < 0)
            throw std::invalid_argument("ScenarioConfig: r_max and m_max must be >= 1, repetitions >= 0");
        if (!(altitude_m > 0.0) || !(earth_radius_m > 0.0))
            throw std::invalid_argument("ScenarioConfig: altitude and earth radius must be positive");
        if (!(doppler_max_hz >= 0.0) || angle_jitter_deg < 0.0 || path_jitter_deg < 0.0 || user_disc_radius_m < 0.0)
            throw std::invalid_argument("ScenarioConfig: Doppler bound, jitters and disc radius must be nonnegative");
        geometry.validate();
        fading.validate();
        power.validate();
    }

    std::string ScenarioConfig::digest() const
    {
        std::ostringstream os;
        os.precision(17);
        os << k_users << '|' << to_string(topology) << '|' << to_string(scheme) << '|' << geometry.nx << ','
           << geometry.ny << ',' << geometry.spacing_m << ',' << geometry.wavelength_m << '|' << fading.sr_b << ','
           << fading.sr_m << ',' << fading.sr_omega << ',' << fading.tap_gain_delta << ','
           << fading.pathloss_exponent << ',' << fading.carrier_hz << '|' << power.tx_power_w << ','
           << power.noise_w << ',' << power.csit_error_var << '|' << bandwidth_hz << ',' << r_max << ',' << m_max
           << ',' << repetitions << ',' << interval_cap_s << '|' << altitude_m << ',' << earth_radius_m << ','
           << ref_azimuth_deg << ',' << ref_zenith_deg << ',' << sat_spacing_deg << ',' << angle_jitter_deg << ','
           << path_jitter_deg << ',' << user_disc_radius_m << ',' << doppler_max_hz << ',' << num_paths << '|'
           << trials << ',' << seed;
        // FNV-1a
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : os.str())
        {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }

    std::vector<std::pair<int, int>> build_topology(Topology kind, int k_users)
    {
        if (k_users < 1)
            throw std::invalid_argument("build_topology: users must be >= 1");
        std::vector<std::pair<int, int>> edges;
        for (int s = 0; s < k_users; ++s)
        {
            if (kind == Topology::partial)
            {
                const int victim = (s + 1) % k_users;
                if (victim != s)
                    edges.emplace_back(s, victim);
            }
            else
            {
                for (int u = 0; u < k_users; ++u)
                    if (u != s)
                        edges.emplace_back(s, u);
            }
        }
        return edges;
    }

    std::pair<double, double> array_angles(const Eigen::Vector3d& satellite, const Eigen::Vector3d& target)
    {
        const Eigen::Vector3d z = -satellite.normalized();
        Eigen::Vector3d x = Eigen::Vector3d::UnitZ().cross(satellite);
        if (x.norm() < 1e-9 * satellite.norm())
            x = Eigen::Vector3d::UnitX();
        x.normalize();
        const Eigen::Vector3d y = z.cross(x);
        const Eigen::Vector3d u = (target - satellite).normalized();
        const double zenith = std::acos(std::clamp(u.dot(z), -1.0, 1.0));
        const double azimuth = std::atan2(u.dot(y), u.dot(x));
        return {zenith, azimuth};
    }

    TrialRealization sample_geometry(const ScenarioConfig& config, std::uint64_t trial)
    {
        const int k = config.k_users;
        TrialRealization r;
        r.k_users = k;
        r.topology = config.topology;
        r.seed = config.seed;
        r.trial = trial;

        Rng geo = make_stream(config.seed, trial, StreamPurpose::geometry);
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        const double orbit_radius = config.earth_radius_m + config.altitude_m;
        for (int s = 0; s < k; ++s)
            r.satellite_positions.push_back(spherical(orbit_radius, deg2rad(config.ref_zenith_deg),
                                                      deg2rad(config.ref_azimuth_deg + config.sat_spacing_deg * s)));
        for (int u = 0; u < k; ++u)
        {
            const double rad = config.user_disc_radius_m * std::sqrt(unit(geo));
            const double psi = 2.0 * kPi * unit(geo);
            const double x = rad * std::cos(psi);
            const double y = rad * std::sin(psi);
            const double re = config.earth_radius_m;
            r.user_positions.emplace_back(x, y, std::sqrt(re * re - x * x - y * y));
        }

        const double jitter = deg2rad(config.angle_jitter_deg);
        const double path_jitter = deg2rad(config.path_jitter_deg);
        const double wavelength = config.geometry.wavelength_m;

        r.links.assign(k, std::vector<Link>(k));
        std::vector<std::pair<double, double>> los_angles(static_cast<std::size_t>(k * k));
        for (int u = 0; u < k; ++u)
        {
            for (int s = 0; s < k; ++s)
            {
                Link& link = r.links[u][s];
                link.present = config.topology == Topology::full || partial_link(u, s, k);
                Rng rng = make_stream(config.seed, trial, StreamPurpose::link, static_cast<std::uint64_t>(u * k + s));
                std::uniform_real_distribution<double> sym(-1.0, 1.0);

                const auto [zen0, az0] = array_angles(r.satellite_positions[s], r.user_positions[u]);
                const double zen = std::clamp(zen0 + jitter * sym(rng), 0.0, kPi / 2);
                const double az = wrap_pi(az0 + jitter * sym(rng));
                los_angles[static_cast<std::size_t>(u * k + s)] = {zen, az};

                link.distance_m = (r.satellite_positions[s] - r.user_positions[u]).norm();
                link.paths.doppler_hz = config.doppler_max_hz * sym(rng);
                link.paths.rel_velocity_mps = link.paths.doppler_hz * wavelength;

                const double pl = channel::path_loss(link.distance_m, config.fading.carrier_hz,
                                                     config.fading.pathloss_exponent);
                for (int i = 1; i <= config.num_paths; ++i)
                {
                    channel::PathParams p;
                    p.tap_index = i;
                    p.zenith = zen;
                    p.azimuth = az;
                    if (i > 1)
                    {
                        p.zenith = std::clamp(zen + path_jitter * sym(rng), 0.0, kPi / 2);
                        p.azimuth = wrap_pi(az + path_jitter * sym(rng));
                    }
                    const double h = channel::shadowed_rician_sample(config.fading, rng);
                    p.attenuation = channel::path_attenuation(i, config.fading.tap_gain_delta, pl, h, rng);
                    link.paths.paths.push_back(p);
                }
            }
        }

        // Partial network: the victim sees satellite s along the same line-of-sight direction as the served user.
        if (config.topology == Topology::partial && k > 1)
        {
            for (int s = 0; s < k; ++s)
            {
                const int victim = (s + 1) % k;
                const auto [zen, az] = los_angles[static_cast<std::size_t>(s * k + s)];
                auto& los = r.links[victim][s].paths.paths.front();
                const double dz = zen - los.zenith;
                const double da = az - los.azimuth;
                los.zenith = zen;
                los.azimuth = az;
                // Scattered paths keep their offsets relative to the line of sight.
                for (std::size_t i = 1; i < r.links[victim][s].paths.paths.size(); ++i)
                {
                    auto& p = r.links[victim][s].paths.paths[i];
                    p.zenith = std::clamp(p.zenith + dz, 0.0, kPi / 2);
                    p.azimuth = wrap_pi(p.azimuth + da);
                }
            }
        }
        return r;
    }

    void check_scheme(Scheme scheme, Topology topology)
    {
        if (scheme == Scheme::st_zf && topology != Topology::partial)
            throw std::invalid_argument("scheme ST-ZF requires the partial topology");
    }

    metrics::RateReport run_trial(const TrialRealization& realization, Scheme scheme, const ScenarioConfig& config)
    {
        check_scheme(scheme, realization.topology);
        const int k = realization.k_users;
        std::vector<std::vector<CVec>> spatial;
        spatial.reserve(k);
        for (int u = 0; u < k; ++u)
            spatial.push_back(spatial_row(realization, config.geometry, u));

        switch (scheme)
        {
        case Scheme::mrt:
        case Scheme::zf:
        case Scheme::slnr:
            return run_spatial(realization, scheme, spatial, config);
        case Scheme::tdma:
        {
            const auto snr = mrt_snr(realization, spatial, config.power);
            const int slots = realization.topology == Topology::partial ? std::min(2, k) : k;
            return metrics::report_from_sinr(snr, slots);
        }
        case Scheme::st_zf:
            return run_st_zf(realization, spatial, config);
        case Scheme::st_slnr:
            return run_st_slnr(realization, false, spatial, config);
        case Scheme::st_slnr_imperfect:
            return run_st_slnr(realization, true, spatial, config);
        }
        throw std::logic_error("run_trial: unhandled scheme");
    }

    ErgodicResult monte_carlo(const ScenarioConfig& config, int threads)
    {
        config.validate();
        check_scheme(config.scheme, config.topology);

        ErgodicResult out;
        out.scheme = config.scheme;
        out.config_digest = config.digest();
        out.per_trial_values.assign(config.trials, 0.0);

        const int workers = std::max(1, std::min(threads, config.trials));
        auto work = [&](int w) {
            for (int t = w; t < config.trials; t += workers)
            {
                const auto r = sample_geometry(config, static_cast<std::uint64_t>(t));
                out.per_trial_values[t] = run_trial(r, config.scheme, config).sum_se;
            }
        };
        if (workers == 1)
        {
            work(0);
        }
        else
        {
            std::vector<std::exception_ptr> errors(workers);
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w)
                pool.emplace_back([&, w] {
                    try
                    {
                        work(w);
                    }
                    catch (...)
                    {
                        errors[w] = std::current_exception();
                    }
                });
            for (auto& t : pool)
                t.join();
            for (auto& e : errors)
                if (e)
                    std::rethrow_exception(e);
        }

        const auto n = static_cast<double>(config.trials);
        out.mean_sum_se = metrics::compensated_sum(out.per_trial_values) / n;
        if (config.trials > 1)
        {
            std::vector<double> sq;
            sq.reserve(out.per_trial_values.size());
            for (double v : out.per_trial_values)
                sq.push_back((v - out.mean_sum_se) * (v - out.mean_sum_se));
            out.std_error = std::sqrt(metrics::compensated_sum(sq) / (n - 1.0) / n);
        }
        return out;
    }
}
