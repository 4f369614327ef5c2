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

#include "stbf/beamform.hpp"
#include "stbf/random.hpp"

using namespace stbf;
using namespace stbf::beamform;
using channel::complex_gaussian;
using channel::space_time_channel;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
    const double kLambda = kSpeedOfLight / 1.9925e9;

    CVec random_vec(Eigen::Index n, Rng& rng)
    {
        return complex_gaussian(n, 1.0, rng);
    }

    // Oracle: explicit (L L^H + ρ I)^{-1} h in the full dimension.
    CVec direct_slnr_direction(const CVec& h, const CMat& l, double rho)
    {
        CMat a = l * l.adjoint();
        a.diagonal().array() += rho;
        return a.fullPivLu().solve(h);
    }

    CVec random_unit(Eigen::Index n, Rng& rng)
    {
        CVec v = random_vec(n, rng);
        return v / v.norm();
    }
}

TEST_CASE("MRT is the scaled desired channel")
{
    Rng rng = make_stream(1, 0, StreamPurpose::sampling);
    const CVec h = random_vec(12, rng);
    const auto f = mrt(h, 3);
    CHECK_THAT(f.vector.squaredNorm(), WithinRel(3.0, 1e-12));
    CHECK_THAT(std::abs(h.dot(f.vector)), WithinRel(h.norm() * std::sqrt(3.0), 1e-12));
    CHECK_FALSE(f.degenerate);
    CHECK_THROWS_AS(mrt(CVec::Zero(4), 1), std::invalid_argument);
}

TEST_CASE("spatial ZF nulls every interferer")
{
    Rng rng = make_stream(2, 0, StreamPurpose::sampling);
    const CVec h = random_vec(16, rng);
    CMat l(16, 3);
    for (int i = 0; i < 3; ++i)
        l.col(i) = random_vec(16, rng);
    const auto f = zf_project(h, l, 1);
    CHECK_THAT(f.vector.squaredNorm(), WithinRel(1.0, 1e-12));
    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(l.col(i).dot(f.vector)) < 1e-10 * l.col(i).norm());
    CHECK(std::abs(h.dot(f.vector)) > 0.0);
}

TEST_CASE("ZF degenerates when the desired channel lies in the interferer span")
{
    Rng rng = make_stream(3, 0, StreamPurpose::sampling);
    CMat l(8, 2);
    l.col(0) = random_vec(8, rng);
    l.col(1) = random_vec(8, rng);
    const CVec h = 0.3 * l.col(0) - cplx(0, 2) * l.col(1);
    const auto f = zf_project(h, l, 1);
    CHECK(f.degenerate);
    CHECK(f.vector.norm() == 0.0);

    CHECK_THROWS_AS(zf_project(random_vec(2, rng), CMat::Ones(2, 2), 1), std::invalid_argument);
}

TEST_CASE("ST-ZF interval is the orthogonalising interval")
{
    auto a = st_zf_interval(30e3, 5e3);
    CHECK_THAT(a.tau_s, WithinRel(20e-6, 1e-12));
    CHECK(a.feasible);
    auto b = st_zf_interval(-2e3, 3e3); // |Δf| = 5 kHz: exactly on the cap
    CHECK_THAT(b.tau_s, WithinRel(100e-6, 1e-12));
    CHECK(b.feasible);
    auto c = st_zf_interval(1e3, 5e3);
    CHECK_THAT(c.tau_s, WithinRel(125e-6, 1e-12));
    CHECK_FALSE(c.feasible);
    CHECK_THROWS_AS(st_zf_interval(7e3, 7e3), InfeasibleInterval);
}

TEST_CASE("ST-ZF on aligned line-of-sight channels: orthogonality and 4N gain")
{
    const auto geom = channel::ArrayGeometry::half_wavelength(8, 8, kLambda);
    Rng rng = make_stream(4, 0, StreamPurpose::sampling);
    std::uniform_real_distribution<double> fd(-50e3, 50e3);
    std::uniform_real_distribution<double> ang(0.0, 0.5);
    for (int i = 0; i < 200; ++i)
    {
        const double f1 = fd(rng);
        double f2 = fd(rng);
        if (std::abs(f1 - f2) < 1e3)
            f2 = f1 + 1e3;
        const CVec g = channel::upa_response(ang(rng), 4 * ang(rng), geom);
        const double tau = st_zf_interval(f1, f2, 1.0).tau_s;
        const auto hd = space_time_channel(g, f1, 2, tau);
        const auto hi = space_time_channel(g * cplx(0.3, -0.8), f2, 2, tau);
        CHECK(std::abs(hd.vector.dot(hi.vector)) / (hd.vector.norm() * hi.vector.norm()) < 1e-10);
        const auto f = st_zf(hd, hi);
        CHECK_THAT(f.vector.squaredNorm(), WithinRel(2.0, 1e-12));
        CHECK_THAT(std::norm(hd.vector.dot(f.vector)), WithinRel(4.0 * 64, 1e-9));
        CHECK(std::abs(hi.vector.dot(f.vector)) < 1e-9);
    }
}

TEST_CASE("st_zf rejects mismatched inputs")
{
    const CVec g = CVec::Ones(4);
    CHECK_THROWS_AS(st_zf(space_time_channel(g, 1e3, 3, 1e-5), space_time_channel(g, 2e3, 3, 1e-5)),
                    std::invalid_argument);
    CHECK_THROWS_AS(st_zf(space_time_channel(g, 1e3, 2, 1e-5), space_time_channel(g, 2e3, 2, 2e-5)),
                    std::invalid_argument);
}

TEST_CASE("SLNR two-dimensional example")
{
    CVec h(2);
    h << 1.0, 0.0;
    CMat l(2, 1);
    l << 0.0, 1.0;
    const auto f = slnr_precoder(h, l, 1.0, 1);
    CHECK(std::abs(f.vector[0] - cplx(1.0, 0.0)) < 1e-14);
    CHECK(std::abs(f.vector[1]) < 1e-14);
    CHECK_THAT(slnr_value(f.vector, h, l, 1.0, 1.0, 1), WithinRel(1.0, 1e-14));
    CHECK_THAT(slnr_reduced_value(h, l, 1.0), WithinRel(1.0, 1e-14));

    // brute force over a fine grid of unit vectors in C^2
    double best = 0.0;
    for (int i = 0; i <= 200; ++i)
        for (int j = 0; j < 64; ++j)
        {
            const double t = kPi / 2 * i / 200.0;
            CVec v(2);
            v << std::cos(t), std::polar(std::sin(t), 2 * kPi * j / 64.0);
            best = std::max(best, slnr_value(v, h, l, 1.0, 1.0, 1));
        }
    CHECK(best <= 1.0 + 1e-12);
    CHECK_THAT(best, WithinRel(1.0, 1e-12));
}

TEST_CASE("SLNR precoder matches the full-dimension inverse and beats random precoders")
{
    Rng rng = make_stream(5, 0, StreamPurpose::sampling);
    for (int inst = 0; inst < 20; ++inst)
    {
        const int n = 2 + inst % 7;
        const int m = 1 + inst % 3;
        const int k = 1 + inst % 4;
        const Eigen::Index dim = n * m;
        const CVec h = random_vec(dim, rng);
        CMat l(dim, k - 1);
        for (int i = 0; i < k - 1; ++i)
            l.col(i) = random_vec(dim, rng);
        const double rho = 0.05 + 0.1 * inst;

        const auto f = slnr_precoder(h, l, rho, m);
        CHECK_THAT(f.vector.squaredNorm(), WithinRel(static_cast<double>(m), 1e-12));
        const CVec w = direct_slnr_direction(h, l, rho);
        const CVec wn = w * (std::sqrt(static_cast<double>(m)) / w.norm());
        CHECK((f.vector - wn).norm() < 1e-9 * std::sqrt(static_cast<double>(m)));

        const double p = 1.0;
        // With ‖f‖² = m the m σ² term cancels against the norm, leaving ρ = σ²/P.
        const double sigma2 = rho * p;
        const double value = slnr_value(f.vector, h, l, p, sigma2, m);
        const double reduced = slnr_reduced_value(h, l, rho);
        CHECK_THAT(value, WithinRel(reduced, 1e-8));
        for (int t = 0; t < 2000; ++t)
        {
            const CVec v = random_unit(dim, rng) * std::sqrt(static_cast<double>(m));
            CHECK(slnr_value(v, h, l, p, sigma2, m) <= value * (1 + 1e-12));
        }
    }
}

TEST_CASE("SLNR regularised by noise-to-power only")
{
    Rng rng = make_stream(6, 0, StreamPurpose::sampling);
    const CVec h = random_vec(6, rng);
    CMat l(6, 2);
    l.col(0) = random_vec(6, rng);
    l.col(1) = random_vec(6, rng);
    CHECK_THROWS_AS(slnr_precoder(h, l, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(slnr_precoder(h, CMat::Ones(5, 1), 1.0, 1), std::invalid_argument);
    // no leakage: SLNR reduces to MRT
    const auto f = slnr_precoder(h, CMat(6, 0), 0.1, 1);
    CHECK((f.vector - mrt(h, 1).vector).norm() < 1e-12);
}

TEST_CASE("imperfect-CSIT precoder")
{
    Rng rng = make_stream(7, 0, StreamPurpose::sampling);
    const CVec h = random_vec(8, rng);
    CMat l(8, 3);
    for (int i = 0; i < 3; ++i)
        l.col(i) = random_vec(8, rng);

    SECTION("zero error reduces to the perfect-CSIT precoder")
    {
        const auto a = slnr_precoder_imperfect(h, l, 0.0, 0.2, 2);
        const auto b = slnr_precoder(h, l, 0.2, 2);
        CHECK((a.vector - b.vector).norm() < 1e-14);
    }
    SECTION("large error converges to MRT on the estimate")
    {
        const auto a = slnr_precoder_imperfect(h, l, 1e9, 0.2, 1);
        CHECK((a.vector - mrt(h, 1).vector).norm() < 1e-6);
    }
    SECTION("maximises the imperfect-CSIT SLNR")
    {
        const double p = 2.0;
        const double sigma2 = 0.3;
        const double err_total = 4 * 0.3; // K σ_h² with σ_h² = σ²
        const auto f = slnr_precoder_imperfect(h, l, err_total, sigma2 / p, 1);
        const double best = slnr_value_imperfect(f.vector, h, l, p, sigma2, err_total, 1);
        for (int t = 0; t < 20000; ++t)
        {
            const CVec v = random_unit(8, rng);
            CHECK(slnr_value_imperfect(v, h, l, p, sigma2, err_total, 1) <= best * (1 + 1e-12));
        }
    }
    CHECK_THROWS_AS(slnr_precoder_imperfect(h, l, -1.0, 0.2, 1), std::invalid_argument);
}

namespace
{
    // Two users seen along the same line-of-sight direction by one satellite.
    LocalCsit two_user_los(double f_desired, double f_other)
    {
        const auto geom = channel::ArrayGeometry::half_wavelength(8, 8, kLambda);
        const CVec g = channel::upa_response(0.1, 0.4, geom);
        LocalCsit c;
        c.desired = 0;
        c.spatial = CMat(64, 2);
        c.spatial.col(0) = g;
        c.spatial.col(1) = g;
        c.doppler_hz = {f_desired, f_other};
        c.present = {true, true};
        c.prepare(4);
        return c;
    }
}

TEST_CASE("interval search peaks at the orthogonalising interval")
{
    const auto c = two_user_los(30e3, 5e3); // Δf = 25 kHz
    const double rho = 0.01;
    const auto best = optimize_tau(c, 2, 0.2e-6, 500, rho);
    CHECK(best.r == 100);
    CHECK_THAT(best.tau_s, WithinRel(20e-6, 1e-12));
    for (int r = 1; r <= 500; ++r)
        CHECK(c.reduced_slnr(2, r * 0.2e-6, rho) <= best.objective * (1 + 1e-12));
}

TEST_CASE("interval search ties go to the smallest r")
{
    // Shared Doppler: the temporal factor cancels from every inner product, so the objective is
    // flat in τ.
    const auto geom = channel::ArrayGeometry::half_wavelength(8, 8, kLambda);
    LocalCsit c;
    c.desired = 0;
    c.spatial = CMat(64, 2);
    c.spatial.col(0) = channel::upa_response(0.1, 0.4, geom);
    c.spatial.col(1) = channel::upa_response(0.5, 1.2, geom);
    c.doppler_hz = {12e3, 12e3};
    c.present = {true, true};
    c.prepare(4);
    const auto best = optimize_tau(c, 2, 0.2e-6, 50, 0.01);
    CHECK(best.r == 1);
}

TEST_CASE("Gram route agrees with explicit stacked channels")
{
    Rng rng = make_stream(8, 0, StreamPurpose::sampling);
    for (int with_errors = 0; with_errors < 2; ++with_errors)
    {
        LocalCsit c;
        c.desired = 1;
        c.spatial = CMat(10, 4);
        for (int j = 0; j < 4; ++j)
            c.spatial.col(j) = random_vec(10, rng);
        c.doppler_hz = {-41e3, 3e3, 17e3, 44e3};
        c.present = {true, true, false, true};
        if (with_errors)
            for (int s = 0; s < 5; ++s)
                c.slot_errors.push_back(complex_gaussian(10, 0.1, rng).replicate(1, 4) +
                                        CMat::Random(10, 4) * 0.1);
        c.prepare(5);

        for (int m = 1; m <= 5; ++m)
        {
            for (double tau : {0.2e-6, 13e-6, 77.4e-6})
            {
                const CVec h = c.stacked(1, m, tau);
                const CMat l = c.leakage(m, tau);
                CHECK(l.cols() == 2);
                const double direct = slnr_reduced_value(h, l, 0.3);
                CHECK_THAT(c.reduced_slnr(m, tau, 0.3), WithinRel(direct, 1e-9));
            }
            const auto via_gram = optimize_tau(c, m, 0.2e-6, 120, 0.3);
            const auto via_vectors = optimize_tau(
                [&](int r) {
                    return LocalChannels{c.stacked(1, m, r * 0.2e-6), c.leakage(m, r * 0.2e-6)};
                },
                0.2e-6, 120, 0.3);
            CHECK(via_gram.r == via_vectors.r);
            CHECK_THAT(via_gram.objective, WithinRel(via_vectors.objective, 1e-9));
        }
    }
}

TEST_CASE("LocalCsit input checks")
{
    LocalCsit c;
    c.spatial = CMat::Ones(4, 2);
    c.doppler_hz = {1.0};
    CHECK_THROWS_AS(c.prepare(2), std::invalid_argument);
    c.doppler_hz = {1.0, 2.0};
    c.slot_errors.assign(1, CMat::Zero(4, 2));
    CHECK_THROWS_AS(c.prepare(2), std::invalid_argument);
    c.slot_errors.clear();
    c.prepare(1);
    CHECK_THROWS_AS(c.gram(2, 1e-6), std::logic_error);
}

namespace
{
    std::vector<LocalCsit> random_network(int k, int n, Rng& rng, double gain)
    {
        std::vector<LocalCsit> out(k);
        std::uniform_real_distribution<double> fd(-50e3, 50e3);
        Eigen::MatrixXd dop(k, k);
        for (int u = 0; u < k; ++u)
            for (int s = 0; s < k; ++s)
                dop(u, s) = fd(rng);
        for (int s = 0; s < k; ++s)
        {
            auto& c = out[s];
            c.desired = s;
            c.spatial = CMat(n, k);
            const CVec common = random_vec(n, rng);
            for (int u = 0; u < k; ++u)
            {
                c.spatial.col(u) = gain * (common + 0.2 * random_vec(n, rng)); // nearly aligned users
                c.doppler_hz.push_back(dop(u, s));
            }
            c.present.assign(k, true);
            c.prepare(8);
        }
        return out;
    }
}

TEST_CASE("repetition search stops at the first decrease")
{
    Rng rng = make_stream(9, 0, StreamPurpose::sampling);
    StSlnrOptions opt;
    opt.tx_power_w = 10.0;
    opt.noise_w = 1e-3;
    opt.r_max = 60;
    for (int inst = 0; inst < 10; ++inst)
    {
        const auto net = random_network(3, 6, rng, 0.05);
        const auto sol = st_slnr_algorithm(net, opt);
        const auto& t = sol.sum_se_trajectory;
        REQUIRE(!t.empty());
        CHECK(sol.chosen_m >= 1);
        CHECK(sol.chosen_m <= opt.m_max);
        // non-decreasing up to chosen m, then (if the loop stopped early) one strict drop
        for (int m = 1; m < sol.chosen_m; ++m)
            CHECK(t[m] >= t[m - 1]);
        if (static_cast<int>(t.size()) > sol.chosen_m)
        {
            CHECK(static_cast<int>(t.size()) == sol.chosen_m + 1);
            CHECK(t.back() < t[sol.chosen_m - 1]);
        }
        CHECK_THAT(sol.achieved_sum_se, WithinRel(t[sol.chosen_m - 1], 1e-15));
        for (std::size_t k = 0; k < net.size(); ++k)
        {
            const double r = sol.per_satellite_tau[k] / opt.sample_period_s;
            CHECK_THAT(r, WithinAbs(std::round(r), 1e-9));
            CHECK_THAT(sol.per_satellite_precoder[k].vector.squaredNorm(),
                       WithinRel(static_cast<double>(sol.chosen_m), 1e-12));
        }
    }
}

TEST_CASE("repetition search respects the cap and single-user networks keep M = 1")
{
    Rng rng = make_stream(10, 0, StreamPurpose::sampling);
    StSlnrOptions opt;
    opt.r_max = 20;
    opt.m_max = 1;
    const auto net = random_network(3, 4, rng, 1.0);
    CHECK(st_slnr_algorithm(net, opt).chosen_m == 1);

    opt.m_max = 8;
    const auto single = random_network(1, 4, rng, 1.0);
    const auto sol = st_slnr_algorithm(single, opt);
    CHECK(sol.chosen_m == 1);
    CHECK(sol.sum_se_trajectory.size() == 2);
}

TEST_CASE("fixed M = 1 is spatial SLNR")
{
    Rng rng = make_stream(11, 0, StreamPurpose::sampling);
    StSlnrOptions opt;
    opt.tx_power_w = 4.0;
    opt.noise_w = 0.2;
    const auto net = random_network(3, 5, rng, 1.0);
    const auto sol = st_slnr_fixed(net, 1, opt);
    for (int s = 0; s < 3; ++s)
    {
        CMat l(5, 2);
        int c = 0;
        for (int u = 0; u < 3; ++u)
            if (u != s)
                l.col(c++) = net[s].spatial.col(u);
        const auto want = slnr_precoder(net[s].spatial.col(s), l, 0.05, 1);
        CHECK((sol.per_satellite_precoder[s].vector - want.vector).norm() < 1e-12);
        CHECK(sol.per_satellite_tau[s].r == 0);
    }
}
