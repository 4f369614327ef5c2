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

#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "stbf/channel.hpp"
#include "stbf/random.hpp"

using namespace stbf;
using namespace stbf::channel;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
    const double kLambda = kSpeedOfLight / 1.9925e9;

    // Element (p, q) of the planar array written out directly, no Kronecker product.
    cplx upa_element(int p, int q, double zenith, double azimuth, const ArrayGeometry& g)
    {
        const double phase = -2.0 * kPi / g.wavelength_m * g.spacing_m *
                             (p * std::sin(zenith) * std::cos(azimuth) + q * std::sin(zenith) * std::sin(azimuth));
        return std::polar(1.0, phase);
    }
}

TEST_CASE("steering_1d at broadside is all ones")
{
    const CVec a = steering_1d(0.0, 8, kLambda / 2, kLambda);
    REQUIRE(a.size() == 8);
    for (int i = 0; i < 8; ++i)
        CHECK(std::abs(a[i] - cplx(1.0, 0.0)) < 1e-15);
}

TEST_CASE("steering_1d phase ramp")
{
    const double u = 0.37;
    const CVec a = steering_1d(u, 5, 0.4 * kLambda, kLambda);
    for (int q = 0; q < 5; ++q)
    {
        const cplx want = std::exp(cplx(0.0, -2.0 * kPi * q * 0.4 * u));
        CHECK(std::abs(a[q] - want) < 1e-13);
    }
}

TEST_CASE("steering_1d rejects bad geometry")
{
    CHECK_THROWS_AS(steering_1d(0.1, 0, 0.1, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(steering_1d(0.1, 4, -0.1, 0.2), std::invalid_argument);
}

TEST_CASE("UPA response matches element-wise phases and has norm N")
{
    const auto g = ArrayGeometry::half_wavelength(8, 8, kLambda);
    Rng rng = make_stream(11, 0, StreamPurpose::sampling);
    std::uniform_real_distribution<double> zen(0.0, kPi / 2);
    std::uniform_real_distribution<double> az(-kPi, kPi);
    for (int trial = 0; trial < 50; ++trial)
    {
        const double t = zen(rng);
        const double f = az(rng);
        const CVec a = upa_response(t, f, g);
        REQUIRE(a.size() == 64);
        CHECK_THAT(a.squaredNorm(), WithinRel(64.0, 1e-12));
        for (int p = 0; p < 8; ++p)
            for (int q = 0; q < 8; ++q)
                CHECK(std::abs(a[p * 8 + q] - upa_element(p, q, t, f, g)) < 1e-12);
    }
}

TEST_CASE("UPA response at zenith 0 is all ones for any azimuth")
{
    const auto g = ArrayGeometry::half_wavelength(4, 3, kLambda);
    const CVec a = upa_response(0.0, 1.234, g);
    CHECK((a - CVec::Ones(12)).norm() < 1e-14);
}

TEST_CASE("temporal steering entries")
{
    const CVec b = temporal_steering(25e3, 20e-6, 4);
    for (int q = 0; q < 4; ++q)
        CHECK(std::abs(b[q] - std::exp(cplx(0.0, -2.0 * kPi * q * 25e3 * 20e-6))) < 1e-14);
    CHECK(temporal_steering(1e4, 1e-5, 1).size() == 1);
    CHECK_THROWS_AS(temporal_steering(1e4, 1e-5, 0), std::invalid_argument);
}

TEST_CASE("space-time channel equals b kron g")
{
    Rng rng = make_stream(3, 0, StreamPurpose::sampling);
    const CVec g = complex_gaussian(16, 1.0, rng);
    for (int m = 1; m <= 4; ++m)
    {
        const auto h = space_time_channel(g, -31e3, m, 7.4e-6);
        REQUIRE(h.vector.size() == m * 16);
        const CVec b = temporal_steering(-31e3, 7.4e-6, m);
        // explicit Kronecker product
        for (int s = 0; s < m; ++s)
            for (int n = 0; n < 16; ++n)
                CHECK(std::abs(h.vector[s * 16 + n] - b[s] * g[n]) < 1e-14);
        CHECK((h.vector - kron(b, g)).norm() < 1e-13);
    }
}

TEST_CASE("space-time channel from timing config")
{
    const auto t = TimingConfig::from_bandwidth(3, 5e6, 100);
    CHECK_THAT(t.sample_period_s, WithinRel(0.2e-6, 1e-15));
    CHECK_THAT(t.interval_s(), WithinRel(20e-6, 1e-12));
    const CVec g = CVec::Ones(4);
    const auto h = space_time_channel(g, 1e4, t);
    CHECK(h.m == 3);
    CHECK_THAT(h.tau_s, WithinRel(20e-6, 1e-12));
    CHECK_THROWS_AS(TimingConfig::from_bandwidth(0, 5e6, 1), std::invalid_argument);
}

TEST_CASE("spatial channel sums weighted responses")
{
    const auto geom = ArrayGeometry::half_wavelength(4, 4, kLambda);
    PathSet ps;
    ps.paths.push_back({0.2, 0.3, cplx(0.5, 0.1), 1});
    ps.paths.push_back({0.25, -0.7, cplx(-0.2, 0.3), 2});
    const CVec h = spatial_channel(ps, geom);
    const CVec want = ps.paths[0].attenuation * upa_response(0.2, 0.3, geom) +
                      ps.paths[1].attenuation * upa_response(0.25, -0.7, geom);
    CHECK((h - want).norm() < 1e-13);

    PathSet single;
    single.paths.push_back({0.4, 0.1, cplx(0.7, 0.0), 1});
    CHECK((spatial_channel(single, geom) - 0.7 * upa_response(0.4, 0.1, geom)).norm() < 1e-14);

    CHECK_THROWS_AS(spatial_channel(PathSet{}, geom), std::invalid_argument);
}

TEST_CASE("Doppler consistency of a path set")
{
    PathSet ps;
    ps.rel_velocity_mps = 7530.0;
    ps.doppler_hz = 7530.0 / kLambda;
    CHECK(ps.doppler_consistent(kLambda));
    ps.doppler_hz *= 1.001;
    CHECK_FALSE(ps.doppler_consistent(kLambda));
}

TEST_CASE("Kronecker product of matrices")
{
    CMat a(2, 2);
    a << cplx(1, 0), cplx(2, 0), cplx(0, 1), cplx(3, 0);
    CMat b = CMat::Identity(2, 2);
    const CMat k = kron(a, b);
    REQUIRE(k.rows() == 4);
    CHECK(std::abs(k(0, 2) - cplx(2, 0)) < 1e-15);
    CHECK(std::abs(k(3, 1) - cplx(0, 1)) < 1e-15);
    CHECK(std::abs(k(1, 0)) < 1e-15);
}

TEST_CASE("path loss follows the free-space formula")
{
    const double d = 530e3;
    const double want = std::pow(kSpeedOfLight / (4 * kPi * 1.9925e9 * d), 2.0);
    CHECK_THAT(path_loss(d, 1.9925e9, 2.0), WithinRel(want, 1e-14));
    // doubling distance costs 6.02 dB for alpha = 2
    CHECK_THAT(10 * std::log10(path_loss(d, 1.9925e9, 2.0) / path_loss(2 * d, 1.9925e9, 2.0)),
               WithinRel(20 * std::log10(2.0), 1e-12));
    CHECK_THROWS_AS(path_loss(0.0, 1e9, 2.0), std::invalid_argument);
}

TEST_CASE("shadowed-Rician mean power equals 2b + Omega")
{
    FadingConfig f;
    Rng rng = make_stream(2024, 0, StreamPurpose::sampling);
    const int n = 1'000'000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
    {
        const double h = shadowed_rician_sample(f, rng);
        REQUIRE(h >= 0.0);
        sum += h;
    }
    CHECK_THAT(sum / n, WithinRel(2 * f.sr_b + f.sr_omega, 0.01));
}

TEST_CASE("path attenuation magnitude")
{
    Rng rng = make_stream(5, 0, StreamPurpose::sampling);
    for (int i = 1; i <= 3; ++i)
    {
        const cplx beta = path_attenuation(i, 0.5, 2e-16, 1.3, rng);
        CHECK_THAT(std::abs(beta), WithinRel(std::pow(0.5, i - 1) * std::sqrt(2e-16 * 1.3), 1e-12));
    }
    CHECK_THROWS_AS(path_attenuation(0, 0.5, 1.0, 1.0, rng), std::invalid_argument);
}

TEST_CASE("fading config validation")
{
    FadingConfig f;
    CHECK_NOTHROW(f.validate());
    f.tap_gain_delta = 1.5;
    CHECK_THROWS_AS(f.validate(), std::invalid_argument);
    ArrayGeometry g;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument); // zero spacing
}

TEST_CASE("complex Gaussian has the requested total variance")
{
    Rng rng = make_stream(8, 0, StreamPurpose::sampling);
    const CVec x = complex_gaussian(1'000'000, 2.5, rng);
    double re = 0.0;
    double im = 0.0;
    for (const auto& v : x)
    {
        re += v.real() * v.real();
        im += v.imag() * v.imag();
    }
    CHECK_THAT((re + im) / x.size(), WithinRel(2.5, 0.01));
    CHECK_THAT(re / x.size(), WithinRel(1.25, 0.01)); // circular: equal split
    CHECK_THAT(x.mean().real(), WithinAbs(0.0, 0.01));
}

TEST_CASE("corrupt_csit reconstructs the true channel exactly")
{
    Rng rng = make_stream(9, 0, StreamPurpose::sampling);
    const CVec g = complex_gaussian(64, 3e-16, rng);
    const auto h = space_time_channel(g, 12e3, 3, 10e-6);

    // Per component: bit-exact when |error| <= |h|. Beyond that both parts live on a grid coarser
    // than ulp(h) and one rounding remains.
    const auto check_split = [&h](const CsitEstimate& est)
    {
        REQUIRE(est.estimate.vector.size() == h.vector.size());
        CHECK(est.estimate.m == 3);
        int exact = 0;
        for (Eigen::Index i = 0; i < h.vector.size(); ++i)
        {
            const cplx sum = est.estimate.vector[i] + est.error.error[i];
            const double parts[2][3] = {{sum.real(), h.vector[i].real(), est.error.error[i].real()},
                                        {sum.imag(), h.vector[i].imag(), est.error.error[i].imag()}};
            for (const auto& p : parts)
            {
                if (std::abs(p[2]) <= std::abs(p[1]))
                {
                    CHECK(p[0] == p[1]);
                    ++exact;
                }
                else
                    CHECK(std::abs(p[0] - p[1]) <= std::numeric_limits<double>::epsilon() * std::abs(p[2]));
            }
        }
        return exact;
    };
    CHECK(check_split(corrupt_csit(h, 3e-20, rng)) > 300);
    check_split(corrupt_csit(h, 2e-14, rng));

    const auto exact = corrupt_csit(h, 0.0, rng);
    CHECK(exact.estimate.vector == h.vector);
    CHECK_THROWS_AS(corrupt_csit(h, -1.0, rng), std::invalid_argument);
}

TEST_CASE("corrupt_csit error statistics")
{
    Rng rng = make_stream(10, 0, StreamPurpose::sampling);
    const CVec g = CVec::Ones(8);
    const auto h = space_time_channel(g, 1e3, 2, 1e-6);
    const double var = 0.7;
    const int draws = 62'500; // 10^6 entries
    double sum = 0.0;
    cplx cross = 0.0;
    for (int i = 0; i < draws; ++i)
    {
        const auto e = corrupt_csit(h, var, rng).error.error;
        sum += e.squaredNorm();
        cross += e[0] * std::conj(e[1]);
    }
    CHECK_THAT(sum / (draws * 16.0), WithinRel(var, 0.01));
    // off-diagonal covariance within 3 standard errors of zero
    const double se = var / std::sqrt(static_cast<double>(draws));
    CHECK(std::abs(cross / static_cast<double>(draws)) < 3.0 * se * std::sqrt(2.0));
}

TEST_CASE("virtual aperture")
{
    const auto g = ArrayGeometry::half_wavelength(8, 8, kLambda);
    CHECK_THAT(g.aperture_m(), WithinRel(7 * kLambda / 2, 1e-15));
    CHECK_THAT(virtual_aperture(g, 1, 50e-6, 7500), WithinRel(g.aperture_m(), 1e-15));
    CHECK_THAT(virtual_aperture(g, 3, 50e-6, 7500), WithinRel(g.aperture_m() + 2 * 50e-6 * 7500, 1e-14));
    CHECK_THROWS_AS(virtual_aperture(g, 0, 1e-6, 1.0), std::invalid_argument);
}

TEST_CASE("stream factory is deterministic and keyed")
{
    Rng a = make_stream(1, 2, StreamPurpose::link, 3);
    Rng b = make_stream(1, 2, StreamPurpose::link, 3);
    Rng c = make_stream(1, 2, StreamPurpose::link, 4);
    Rng d = make_stream(1, 3, StreamPurpose::link, 3);
    const auto va = a();
    CHECK(va == b());
    CHECK(va != c());
    CHECK(va != d());
}
