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

#include "stbf/channel.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace stbf::channel
{
    namespace
    {
        // Splits target into (estimate, error) with fl(estimate + error) == target. The drawn error is
        // rounded onto the ulp grid of target so both parts are exact multiples of one power of two.
        std::pair<double, double> exact_split(double target, double drawn)
        {
            if (target == 0.0)
                return {-drawn, drawn};
            const double a = std::abs(target);
            const double unit = std::nextafter(a, HUGE_VAL) - a;
            const double steps = std::nearbyint(drawn / unit);
            if (std::abs(steps) >= 0x1p52)
                return {target - drawn, drawn}; // |error| beyond 2^52 ulp(target): best effort
            // target - estimate is a multiple of unit below 2^53 units, hence exact
            const double estimate = target - steps * unit;
            return {estimate, target - estimate};
        }
    }

    double ArrayGeometry::aperture_m() const
    {
        return std::max(nx - 1, ny - 1) * spacing_m;
    }

    void ArrayGeometry::validate() const
    {
        if (nx < 1 || ny < 1)
            throw std::invalid_argument("ArrayGeometry: element counts must be >= 1");
        if (!(spacing_m > 0.0) || !(wavelength_m > 0.0))
            throw std::invalid_argument("ArrayGeometry: spacing and wavelength must be positive");
    }

    ArrayGeometry ArrayGeometry::half_wavelength(int nx, int ny, double wavelength_m)
    {
        ArrayGeometry g{nx, ny, 0.5 * wavelength_m, wavelength_m};
        g.validate();
        return g;
    }

    bool PathSet::doppler_consistent(double wavelength_m, double rel_tol) const
    {
        const double expected = rel_velocity_mps / wavelength_m;
        return std::abs(doppler_hz - expected) <= rel_tol * std::max(1.0, std::abs(expected));
    }

    TimingConfig TimingConfig::from_bandwidth(int repetitions, double bandwidth_hz, int interval_multiplier)
    {
        if (repetitions < 1 || interval_multiplier < 1 || !(bandwidth_hz > 0.0))
            throw std::invalid_argument("TimingConfig: repetitions, multiplier and bandwidth must be positive");
        return TimingConfig{repetitions, 1.0 / bandwidth_hz, interval_multiplier};
    }

    void FadingConfig::validate() const
    {
        if (!(sr_b > 0.0) || !(sr_m > 0.0) || sr_omega < 0.0)
            throw std::invalid_argument("FadingConfig: shadowed-Rician parameters out of range");
        if (!(tap_gain_delta > 0.0 && tap_gain_delta < 1.0))
            throw std::invalid_argument("FadingConfig: tap gain must lie in (0, 1)");
        if (!(pathloss_exponent > 0.0) || !(carrier_hz > 0.0))
            throw std::invalid_argument("FadingConfig: path-loss exponent and carrier must be positive");
    }

    CVec steering_1d(double u, int count, double spacing_m, double wavelength_m)
    {
        if (count < 1)
            throw std::invalid_argument("steering_1d: element count must be >= 1");
        if (!(spacing_m > 0.0) || !(wavelength_m > 0.0))
            throw std::invalid_argument("steering_1d: spacing and wavelength must be positive");

        const double k = -2.0 * kPi / wavelength_m * spacing_m * u;
        CVec a(count);
        for (int q = 0; q < count; ++q)
            a[q] = std::polar(1.0, k * q);
        return a;
    }

    CVec upa_response(double zenith, double azimuth, const ArrayGeometry& geometry)
    {
        const double s = std::sin(zenith);
        const CVec ax = steering_1d(s * std::cos(azimuth), geometry.nx, geometry.spacing_m, geometry.wavelength_m);
        const CVec ay = steering_1d(s * std::sin(azimuth), geometry.ny, geometry.spacing_m, geometry.wavelength_m);
        return kron(ax, ay);
    }

    CVec temporal_steering(double doppler_hz, double tau_s, int m)
    {
        if (m < 1)
            throw std::invalid_argument("temporal_steering: repetitions must be >= 1");
        CVec b(m);
        const double w = -2.0 * kPi * doppler_hz * tau_s;
        for (int q = 0; q < m; ++q)
            b[q] = std::polar(1.0, w * q);
        return b;
    }

    CVec spatial_channel(const PathSet& path_set, const ArrayGeometry& geometry)
    {
        if (path_set.paths.empty())
            throw std::invalid_argument("spatial_channel: path list is empty");
        CVec h = CVec::Zero(geometry.size());
        for (const auto& p : path_set.paths)
            h += p.attenuation * upa_response(p.zenith, p.azimuth, geometry);
        return h;
    }

    SpaceTimeChannel space_time_channel(const CVec& spatial, double doppler_hz, int m, double tau_s)
    {
        const CVec b = temporal_steering(doppler_hz, tau_s, m);
        return SpaceTimeChannel{kron(b, spatial), m, tau_s, static_cast<int>(spatial.size())};
    }

    SpaceTimeChannel space_time_channel(const CVec& spatial, double doppler_hz, const TimingConfig& timing)
    {
        return space_time_channel(spatial, doppler_hz, timing.repetitions, timing.interval_s());
    }

    CVec kron(const CVec& a, const CVec& b)
    {
        CVec out(a.size() * b.size());
        for (Eigen::Index i = 0; i < a.size(); ++i)
            out.segment(i * b.size(), b.size()) = a[i] * b;
        return out;
    }

    CMat kron(const CMat& a, const CMat& b)
    {
        CMat out(a.rows() * b.rows(), a.cols() * b.cols());
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            for (Eigen::Index j = 0; j < a.cols(); ++j)
                out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        return out;
    }

    double path_loss(double distance_m, double carrier_hz, double alpha)
    {
        if (!(distance_m > 0.0))
            throw std::invalid_argument("path_loss: distance must be positive");
        return std::pow(kSpeedOfLight / (4.0 * kPi * carrier_hz * distance_m), alpha);
    }

    double shadowed_rician_sample(const FadingConfig& fading, Rng& rng)
    {
        std::gamma_distribution<double> gamma(fading.sr_m, 1.0);
        std::normal_distribution<double> normal(0.0, std::sqrt(fading.sr_b));
        const double los = std::sqrt(fading.sr_omega / fading.sr_m * gamma(rng));
        const double re = los + normal(rng);
        const double im = normal(rng);
        return re * re + im * im;
    }

    cplx path_attenuation(int tap_index, double delta, double pathloss, double fading_power, Rng& rng)
    {
        if (tap_index < 1)
            throw std::invalid_argument("path_attenuation: tap index is 1-based");
        std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
        const double mag = std::pow(delta, tap_index - 1) * std::sqrt(pathloss * fading_power);
        return std::polar(mag, phase(rng));
    }

    CVec complex_gaussian(Eigen::Index size, double variance, Rng& rng)
    {
        CVec v(size);
        if (variance == 0.0)
        {
            v.setZero();
            return v;
        }
        std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * variance));
        for (Eigen::Index i = 0; i < size; ++i)
        {
            const double re = normal(rng);
            const double im = normal(rng);
            v[i] = cplx(re, im);
        }
        return v;
    }

    CsitEstimate corrupt_csit(const SpaceTimeChannel& true_channel, double variance, Rng& rng)
    {
        if (variance < 0.0)
            throw std::invalid_argument("corrupt_csit: variance must be nonnegative");
        CsitEstimate out;
        out.error.variance = variance;
        out.estimate = true_channel;
        const CVec drawn = complex_gaussian(true_channel.vector.size(), variance, rng);
        out.error.error.resize(true_channel.vector.size());
        for (Eigen::Index i = 0; i < true_channel.vector.size(); ++i)
        {
            const cplx h = true_channel.vector[i];
            const auto [er, xr] = exact_split(h.real(), drawn[i].real());
            const auto [ei, xi] = exact_split(h.imag(), drawn[i].imag());
            out.estimate.vector[i] = cplx(er, ei);
            out.error.error[i] = cplx(xr, xi);
        }
        return out;
    }

    double virtual_aperture(const ArrayGeometry& geometry, int m, double tau_s, double rel_velocity_mps)
    {
        if (m < 1)
            throw std::invalid_argument("virtual_aperture: repetitions must be >= 1");
        return geometry.aperture_m() + (m - 1) * tau_s * rel_velocity_mps;
    }
}
