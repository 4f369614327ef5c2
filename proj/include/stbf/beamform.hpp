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

#include <functional>
#include <span>
#include <vector>

#include "stbf/channel.hpp"

namespace stbf::beamform
{
    using channel::SpaceTimeChannel;

    /// Stacked precoder over m slots. Non-degenerate precoders satisfy ‖vector‖² = m.
    struct Beamformer
    {
        CVec vector;
        int m = 1;
        bool degenerate = false; // zero beamformer: desired channel lies in the nulled span

        static Beamformer zero(Eigen::Index size, int m);
    };

    // ---- spatial / space-time precoders -------------------------------------

    Beamformer mrt(const CVec& desired, int m);
    Beamformer mrt(const SpaceTimeChannel& desired);

    /// Projects the desired channel onto the orthogonal complement of the interferer columns.
    /// Returns the flagged zero beamformer when ‖P⊥h‖ < 1e-12 ‖h‖.
    Beamformer zf_project(const CVec& desired, const CMat& interferers, int m);
    Beamformer zf_project(const SpaceTimeChannel& desired, std::span<const SpaceTimeChannel> interferers);

    struct IntervalChoice
    {
        double tau_s = 0.0;
        bool feasible = false; // tau_s <= cap
    };

    inline constexpr double kDefaultIntervalCap = 100e-6;

    /// |1 / (2 (f_desired - f_interferer))|. Throws InfeasibleInterval for equal Dopplers.
    IntervalChoice st_zf_interval(double f_desired_hz, double f_interferer_hz, double cap_s = kDefaultIntervalCap);

    /// Two-slot zero forcing toward one interferer; both channels must share m = 2 and τ.
    Beamformer st_zf(const SpaceTimeChannel& desired, const SpaceTimeChannel& interferer);

    // ---- SLNR ----------------------------------------------------------------

    /// √m · w/‖w‖ with w = (L L^H + ρ I)^{-1} h, ρ = noise_over_power (+ any CSIT error term).
    /// Solved through the (K-1)×(K-1) system (ρ I + L^H L) so the cost is linear in the vector length.
    Beamformer slnr_precoder(const CVec& desired, const CMat& leakage, double noise_over_power, int m);

    /// h^H (L L^H + ρ I)^{-1} h, the SLNR attained by slnr_precoder.
    double slnr_reduced_value(const CVec& desired, const CMat& leakage, double noise_over_power);

    /// |h^H f|² P / (‖L^H f‖² P + m σ²)
    double slnr_value(const CVec& precoder, const CVec& desired, const CMat& leakage, double p_watts,
                      double noise_watts, int m);

    /// SLNR with estimated channels and an error term error_total · ‖f‖² · P in the denominator.
    double slnr_value_imperfect(const CVec& precoder, const CVec& desired_est, const CMat& leakage_est,
                                double p_watts, double noise_watts, double error_total, int m);

    /// Precoder from estimated channels; the regulariser becomes error_total + noise_over_power.
    Beamformer slnr_precoder_imperfect(const CVec& desired_est, const CMat& leakage_est, double error_total,
                                       double noise_over_power, int m);

    // ---- interval search -----------------------------------------------------

    struct LocalChannels
    {
        CVec desired;
        CMat leakage;
    };

    struct TauChoice
    {
        int r = 1;
        double tau_s = 0.0;
        double objective = 0.0;
    };

    /// Exhaustive search over r ∈ [1, r_max] of the reduced SLNR; ties go to the smallest r.
    TauChoice optimize_tau(const std::function<LocalChannels(int r)>& channels_at, double sample_period_s,
                           int r_max, double regulariser);

    /// Everything satellite k knows about its own K outgoing links. Column l of `spatial`
    /// is the (possibly estimated) single-slot channel toward user l. Space-time vectors are
    /// b(f_l, τ) ⊗ spatial_l minus the stacked per-slot error, when errors are present.
    struct LocalCsit
    {
        int desired = 0;
        CMat spatial;                  // N × K
        std::vector<double> doppler_hz; // K
        std::vector<bool> present;     // links the satellite transmits toward (others are zero)
        std::vector<CMat> slot_errors; // slot_errors[m] is N × K; empty for perfect CSIT

        int users() const { return static_cast<int>(spatial.cols()); }
        int antennas() const { return static_cast<int>(spatial.rows()); }

        /// Stacked (estimated) space-time channel toward `user`.
        CVec stacked(int user, int m, double tau_s) const;

        /// Leakage matrix: stacked channels of all present users other than `desired`.
        CMat leakage(int m, double tau_s) const;

        /// K × K Gram matrix of the stacked channels, evaluated from per-slot inner products
        /// in O(K² m) once the slot products are cached.
        CMat gram(int m, double tau_s) const;

        /// Reduced SLNR via the Gram matrix.
        double reduced_slnr(int m, double tau_s, double regulariser) const;

        /// Caches spatial and error inner products for `gram`; call after filling the fields.
        void prepare(int m_max);

    private:
        CMat spatial_gram_;                      // S(l, j) = g_l^H g_j
        std::vector<CMat> spatial_error_;        // A[m](l, j) = g_l^H e_j[m]
        std::vector<CMat> error_gram_;           // E[m](l, j) = e_l[m]^H e_j[m]
        int prepared_m_ = 0;
    };

    /// Same search as optimize_tau, on the Gram route.
    TauChoice optimize_tau(const LocalCsit& csit, int m, double sample_period_s, int r_max, double regulariser);

    // ---- Algorithm: repetition count search -----------------------------------

    struct StSlnrOptions
    {
        double sample_period_s = 0.2e-6;
        int r_max = 500;
        int m_max = 8;
        double tx_power_w = 10.0;
        double noise_w = 1e-13;
        double error_total = 0.0; // Σ_i σ_h,i² (zero for perfect CSIT)
    };

    struct StSlnrSolution
    {
        int chosen_m = 1;
        std::vector<double> per_satellite_tau;
        std::vector<Beamformer> per_satellite_precoder;
        double achieved_sum_se = 0.0;
        std::vector<double> sum_se_trajectory; // index m-1 holds the sum SE evaluated at m
    };

    struct FixedMSolution
    {
        int m = 1;
        std::vector<TauChoice> per_satellite_tau;
        std::vector<Beamformer> per_satellite_precoder;
    };

    /// Per-satellite interval search and SLNR precoders at a fixed repetition count.
    /// m = 1 uses the plain spatial precoder (τ does not enter).
    FixedMSolution st_slnr_fixed(const std::vector<LocalCsit>& csits, int m, const StSlnrOptions& options);

    /// Sum SE the transmitters predict from their own CSIT (csits[l] column k is h_{k,l}).
    double predicted_sum_se(const std::vector<LocalCsit>& csits, const FixedMSolution& solution,
                            const StSlnrOptions& options);

    /// Increase m from 1 until the predicted sum SE first drops (or m_max), keep the best m.
    StSlnrSolution st_slnr_algorithm(const std::vector<LocalCsit>& csits, const StSlnrOptions& options);
}
