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

#include <vector>

#include "stbf/types.hpp"

namespace stbf::channel
{
    // Uniform planar array in the x-y plane, broadside along the local z axis.
    struct ArrayGeometry
    {
        int nx = 8;
        int ny = 8;
        double spacing_m = 0.0;
        double wavelength_m = 0.0;

        int size() const { return nx * ny; }
        double aperture_m() const; // max(nx-1, ny-1) * spacing
        void validate() const;

        static ArrayGeometry half_wavelength(int nx, int ny, double wavelength_m);
    };

    struct PathParams
    {
        double zenith = 0.0;  // rad, [0, pi/2]
        double azimuth = 0.0; // rad, [-pi, pi]
        cplx attenuation{1.0, 0.0};
        int tap_index = 1; // 1-based
    };

    // All paths of a link share one Doppler shift.
    struct PathSet
    {
        std::vector<PathParams> paths;
        double doppler_hz = 0.0;
        double rel_velocity_mps = 0.0;

        // doppler_hz == rel_velocity / wavelength within a relative tolerance
        bool doppler_consistent(double wavelength_m, double rel_tol = 1e-9) const;
    };

    struct TimingConfig
    {
        int repetitions = 1;
        double sample_period_s = 0.2e-6;
        int interval_multiplier = 1;

        double interval_s() const { return interval_multiplier * sample_period_s; }
        static TimingConfig from_bandwidth(int repetitions, double bandwidth_hz, int interval_multiplier);
    };

    struct SpaceTimeChannel
    {
        CVec vector; // length m * n, slot-major
        int m = 1;
        double tau_s = 0.0;
        int n = 0;
    };

    struct FadingConfig
    {
        double sr_b = 0.126;
        double sr_m = 10.1;
        double sr_omega = 0.835;
        double tap_gain_delta = 0.5;
        double pathloss_exponent = 2.0;
        double carrier_hz = 1.9925e9;

        void validate() const;
    };

    struct CsitError
    {
        double variance = 0.0;
        CVec error;
    };

    struct CsitEstimate
    {
        SpaceTimeChannel estimate;
        CsitError error;
    };

    /// ā(u): entry q is exp(-j 2π/λ q d u).
    CVec steering_1d(double u, int count, double spacing_m, double wavelength_m);

    /// a(θ, φ) = ā_x(sinθ cosφ) ⊗ ā_y(sinθ sinφ), length nx*ny.
    CVec upa_response(double zenith, double azimuth, const ArrayGeometry& geometry);

    /// b(f, τ): entry q is exp(-j 2π q f τ).
    CVec temporal_steering(double doppler_hz, double tau_s, int m);

    /// Σ_i β_i a(θ_i, φ_i). Throws std::invalid_argument for an empty path list.
    CVec spatial_channel(const PathSet& path_set, const ArrayGeometry& geometry);

    /// Slot m carries spatial * exp(-j 2π m f τ); equals b(f, τ) ⊗ spatial.
    SpaceTimeChannel space_time_channel(const CVec& spatial, double doppler_hz, int m, double tau_s);
    SpaceTimeChannel space_time_channel(const CVec& spatial, double doppler_hz, const TimingConfig& timing);

    CVec kron(const CVec& a, const CVec& b);
    CMat kron(const CMat& a, const CMat& b);

    /// (c / (4π f_c d))^α
    double path_loss(double distance_m, double carrier_hz, double alpha);

    /// One shadowed-Rician power draw: |√(Ω/m·G) + s|², G ~ Gamma(m, 1), s ~ CN(0, 2b).
    double shadowed_rician_sample(const FadingConfig& fading, Rng& rng);

    /// δ^(i-1) √(D H) with a uniform random phase.
    cplx path_attenuation(int tap_index, double delta, double pathloss, double fading_power, Rng& rng);

    /// CN(0, variance) vector; variance is the total over real and imaginary parts.
    CVec complex_gaussian(Eigen::Index size, double variance, Rng& rng);

    /// estimate = true - error, error ~ CN(0, variance I).
    CsitEstimate corrupt_csit(const SpaceTimeChannel& true_channel, double variance, Rng& rng);

    /// W + (m-1) τ v
    double virtual_aperture(const ArrayGeometry& geometry, int m, double tau_s, double rel_velocity_mps);
}
