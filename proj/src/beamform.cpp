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

#include "stbf/beamform.hpp"

#include <cmath>

#include "stbf/metrics.hpp"

namespace stbf::beamform
{
    namespace
    {
        // Candidates must beat the incumbent by this relative margin, so values that agree up to
        // rounding keep the smallest r.
        constexpr double kTieTolerance = 1e-12;

        Beamformer normalized(const CVec& w, int m)
        {
            const double norm = w.norm();
            if (!(norm > 0.0) || !std::isfinite(norm))
                return Beamformer::zero(w.size(), m);
            return Beamformer{w * (std::sqrt(static_cast<double>(m)) / norm), m, false};
        }

        // (ρ I + L^H L)^{-1} L^H h
        CVec leakage_coefficients(const CVec& desired, const CMat& leakage, double regulariser)
        {
            const CMat gram = leakage.adjoint() * leakage;
            const CVec q = leakage.adjoint() * desired;
            CMat a = gram;
            a.diagonal().array() += regulariser;
            return a.ldlt().solve(q);
        }

        std::vector<int> leakage_indices(const LocalCsit& csit)
        {
            std::vector<int> idx;
            for (int l = 0; l < csit.users(); ++l)
                if (l != csit.desired && csit.present[l])
                    idx.push_back(l);
            return idx;
        }
    }

    Beamformer Beamformer::zero(Eigen::Index size, int m)
    {
        return Beamformer{CVec::Zero(size), m, true};
    }

    Beamformer mrt(const CVec& desired, int m)
    {
        if (!(desired.norm() > 0.0))
            throw std::invalid_argument("mrt: desired channel is zero");
        return normalized(desired, m);
    }

    Beamformer mrt(const SpaceTimeChannel& desired)
    {
        return mrt(desired.vector, desired.m);
    }

    Beamformer zf_project(const CVec& desired, const CMat& interferers, int m)
    {
        if (interferers.rows() != desired.size() && interferers.cols() > 0)
            throw std::invalid_argument("zf_project: interferer length differs from desired channel");
        if (interferers.cols() >= desired.size())
            throw std::invalid_argument("zf_project: too many interferers for the available dimensions");

        const double h_norm = desired.norm();
        if (!(h_norm > 0.0))
            throw std::invalid_argument("zf_project: desired channel is zero");

        CVec residual = desired;
        if (interferers.cols() > 0)
        {
            Eigen::ColPivHouseholderQR<CMat> qr(interferers);
            const Eigen::Index rank = qr.rank();
            if (rank > 0)
            {
                const CMat q = CMat(qr.householderQ()).leftCols(rank);
                // Two projection passes keep the leakage at rounding level.
                residual -= q * (q.adjoint() * residual);
                residual -= q * (q.adjoint() * residual);
            }
        }
        if (residual.norm() < 1e-12 * h_norm)
            return Beamformer::zero(desired.size(), m);
        return normalized(residual, m);
    }

    Beamformer zf_project(const SpaceTimeChannel& desired, std::span<const SpaceTimeChannel> interferers)
    {
        CMat l(desired.vector.size(), static_cast<Eigen::Index>(interferers.size()));
        for (std::size_t i = 0; i < interferers.size(); ++i)
        {
            if (interferers[i].vector.size() != desired.vector.size())
                throw std::invalid_argument("zf_project: interferer length differs from desired channel");
            l.col(static_cast<Eigen::Index>(i)) = interferers[i].vector;
        }
        return zf_project(desired.vector, l, desired.m);
    }

    IntervalChoice st_zf_interval(double f_desired_hz, double f_interferer_hz, double cap_s)
    {
        const double df = f_desired_hz - f_interferer_hz;
        if (df == 0.0)
            throw InfeasibleInterval("st_zf_interval: equal Doppler shifts admit no orthogonalising interval");
        const double tau = std::abs(1.0 / (2.0 * df));
        return IntervalChoice{tau, tau <= cap_s};
    }

    Beamformer st_zf(const SpaceTimeChannel& desired, const SpaceTimeChannel& interferer)
    {
        if (desired.m != 2 || interferer.m != 2)
            throw std::invalid_argument("st_zf: both channels must span two slots");
        if (desired.tau_s != interferer.tau_s)
            throw std::invalid_argument("st_zf: channels were built with different intervals");
        const SpaceTimeChannel others[] = {interferer};
        return zf_project(desired, others);
    }

    Beamformer slnr_precoder(const CVec& desired, const CMat& leakage, double noise_over_power, int m)
    {
        if (!(noise_over_power > 0.0))
            throw std::invalid_argument("slnr_precoder: noise-to-power ratio must be positive");
        if (leakage.cols() > 0 && leakage.rows() != desired.size())
            throw std::invalid_argument("slnr_precoder: leakage rows differ from desired length");
        if (leakage.cols() == 0)
            return normalized(desired, m);
        // (L L^H + ρI)^{-1} h = (h - L (ρI + L^H L)^{-1} L^H h) / ρ; the 1/ρ drops out in normalization.
        const CVec w = desired - leakage * leakage_coefficients(desired, leakage, noise_over_power);
        return normalized(w, m);
    }

    double slnr_reduced_value(const CVec& desired, const CMat& leakage, double noise_over_power)
    {
        if (!(noise_over_power > 0.0))
            throw std::invalid_argument("slnr_reduced_value: noise-to-power ratio must be positive");
        double value = desired.squaredNorm();
        if (leakage.cols() > 0)
        {
            const CVec c = leakage_coefficients(desired, leakage, noise_over_power);
            value -= (leakage.adjoint() * desired).dot(c).real();
        }
        return value / noise_over_power;
    }

    double slnr_value(const CVec& precoder, const CVec& desired, const CMat& leakage, double p_watts,
                      double noise_watts, int m)
    {
        return slnr_value_imperfect(precoder, desired, leakage, p_watts, noise_watts, 0.0, m);
    }

    double slnr_value_imperfect(const CVec& precoder, const CVec& desired_est, const CMat& leakage_est,
                                double p_watts, double noise_watts, double error_total, int m)
    {
        const double signal = std::norm(desired_est.dot(precoder)) * p_watts;
        double leak = 0.0;
        if (leakage_est.cols() > 0)
            leak = (leakage_est.adjoint() * precoder).squaredNorm() * p_watts;
        const double err = error_total * precoder.squaredNorm() * p_watts;
        return signal / (leak + err + m * noise_watts);
    }

    Beamformer slnr_precoder_imperfect(const CVec& desired_est, const CMat& leakage_est, double error_total,
                                       double noise_over_power, int m)
    {
        if (error_total < 0.0)
            throw std::invalid_argument("slnr_precoder_imperfect: error covariance must be nonnegative");
        return slnr_precoder(desired_est, leakage_est, error_total + noise_over_power, m);
    }

    TauChoice optimize_tau(const std::function<LocalChannels(int r)>& channels_at, double sample_period_s,
                           int r_max, double regulariser)
    {
        if (r_max < 1)
            throw std::invalid_argument("optimize_tau: r_max must be >= 1");
        TauChoice best;
        best.objective = -1.0;
        for (int r = 1; r <= r_max; ++r)
        {
            const LocalChannels ch = channels_at(r);
            const double v = slnr_reduced_value(ch.desired, ch.leakage, regulariser);
            if (best.objective < 0.0 || v > best.objective * (1.0 + kTieTolerance))
                best = TauChoice{r, r * sample_period_s, v};
        }
        return best;
    }

    // ---- LocalCsit -------------------------------------------------------------

    void LocalCsit::prepare(int m_max)
    {
        const int k = users();
        if (static_cast<int>(doppler_hz.size()) != k)
            throw std::invalid_argument("LocalCsit: doppler list does not match user count");
        if (present.empty())
            present.assign(k, true);
        if (static_cast<int>(present.size()) != k || desired < 0 || desired >= k)
            throw std::invalid_argument("LocalCsit: presence mask or desired index invalid");
        if (!slot_errors.empty() && static_cast<int>(slot_errors.size()) < m_max)
            throw std::invalid_argument("LocalCsit: fewer error slots than the largest repetition count");

        spatial_gram_ = spatial.adjoint() * spatial;
        spatial_error_.clear();
        error_gram_.clear();
        if (!slot_errors.empty())
        {
            for (int s = 0; s < m_max; ++s)
            {
                spatial_error_.push_back(spatial.adjoint() * slot_errors[s]);
                error_gram_.push_back(slot_errors[s].adjoint() * slot_errors[s]);
            }
        }
        prepared_m_ = m_max;
    }

    CVec LocalCsit::stacked(int user, int m, double tau_s) const
    {
        const Eigen::Index n = spatial.rows();
        CVec out = CVec::Zero(m * n);
        if (!present[user])
            return out;
        const CVec b = channel::temporal_steering(doppler_hz[user], tau_s, m);
        for (int s = 0; s < m; ++s)
        {
            out.segment(s * n, n) = b[s] * spatial.col(user);
            if (!slot_errors.empty())
                out.segment(s * n, n) -= slot_errors[s].col(user);
        }
        return out;
    }

    CMat LocalCsit::leakage(int m, double tau_s) const
    {
        const auto idx = leakage_indices(*this);
        CMat l(m * spatial.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i)
            l.col(static_cast<Eigen::Index>(i)) = stacked(idx[i], m, tau_s);
        return l;
    }

    CMat LocalCsit::gram(int m, double tau_s) const
    {
        if (m > prepared_m_)
            throw std::logic_error("LocalCsit::gram: prepare() was not called for this repetition count");
        const int k = users();
        CMat b(m, k);
        for (int l = 0; l < k; ++l)
            b.col(l) = channel::temporal_steering(doppler_hz[l], tau_s, m);

        CMat g(k, k);
        for (int l = 0; l < k; ++l)
        {
            for (int j = 0; j < k; ++j)
            {
                if (!present[l] || !present[j])
                {
                    g(l, j) = 0.0;
                    continue;
                }
                cplx v = b.col(l).dot(b.col(j)) * spatial_gram_(l, j);
                if (!slot_errors.empty())
                {
                    for (int s = 0; s < m; ++s)
                    {
                        v -= std::conj(b(s, l)) * spatial_error_[s](l, j);
                        v -= b(s, j) * std::conj(spatial_error_[s](j, l));
                        v += error_gram_[s](l, j);
                    }
                }
                g(l, j) = v;
            }
        }
        return g;
    }

    double LocalCsit::reduced_slnr(int m, double tau_s, double regulariser) const
    {
        const CMat g = gram(m, tau_s);
        const auto idx = leakage_indices(*this);
        double value = g(desired, desired).real();
        if (!idx.empty())
        {
            const auto n = static_cast<Eigen::Index>(idx.size());
            CMat a(n, n);
            CVec q(n);
            for (Eigen::Index i = 0; i < n; ++i)
            {
                q[i] = g(idx[i], desired);
                for (Eigen::Index j = 0; j < n; ++j)
                    a(i, j) = g(idx[i], idx[j]);
                a(i, i) += regulariser;
            }
            const CVec c = a.ldlt().solve(q);
            value -= q.dot(c).real();
        }
        return value / regulariser;
    }

    TauChoice optimize_tau(const LocalCsit& csit, int m, double sample_period_s, int r_max, double regulariser)
    {
        if (r_max < 1)
            throw std::invalid_argument("optimize_tau: r_max must be >= 1");
        TauChoice best;
        best.objective = -1.0;
        for (int r = 1; r <= r_max; ++r)
        {
            const double tau = r * sample_period_s;
            const double v = csit.reduced_slnr(m, tau, regulariser);
            if (best.objective < 0.0 || v > best.objective * (1.0 + kTieTolerance))
                best = TauChoice{r, tau, v};
        }
        return best;
    }

    // ---- repetition search -----------------------------------------------------

    FixedMSolution st_slnr_fixed(const std::vector<LocalCsit>& csits, int m, const StSlnrOptions& options)
    {
        if (m < 1)
            throw std::invalid_argument("st_slnr_fixed: repetitions must be >= 1");
        const double rho = options.noise_w / options.tx_power_w + options.error_total;

        FixedMSolution sol;
        sol.m = m;
        for (const auto& csit : csits)
        {
            TauChoice tc{0, 0.0, 0.0};
            if (m > 1)
                tc = optimize_tau(csit, m, options.sample_period_s, options.r_max, rho);
            const CVec h = csit.stacked(csit.desired, m, tc.tau_s);
            const CMat l = csit.leakage(m, tc.tau_s);
            if (m == 1)
                tc.objective = slnr_reduced_value(h, l, rho);
            sol.per_satellite_tau.push_back(tc);
            sol.per_satellite_precoder.push_back(slnr_precoder(h, l, rho, m));
        }
        return sol;
    }

    double predicted_sum_se(const std::vector<LocalCsit>& csits, const FixedMSolution& solution,
                            const StSlnrOptions& options)
    {
        const int k = static_cast<int>(csits.size());
        metrics::ChannelGrid grid(k, std::vector<CVec>(k));
        std::vector<CVec> f;
        for (int l = 0; l < k; ++l)
        {
            f.push_back(solution.per_satellite_precoder[l].vector);
            for (int u = 0; u < k; ++u)
                if (csits[l].present[u])
                    grid[u][l] = csits[l].stacked(u, solution.m, solution.per_satellite_tau[l].tau_s);
        }
        const metrics::PowerConfig power{options.tx_power_w, options.noise_w, 0.0};
        return metrics::evaluate(grid, f, power, solution.m).sum_se;
    }

    StSlnrSolution st_slnr_algorithm(const std::vector<LocalCsit>& csits, const StSlnrOptions& options)
    {
        if (csits.empty())
            throw std::invalid_argument("st_slnr_algorithm: no satellites");
        if (options.m_max < 1)
            throw std::invalid_argument("st_slnr_algorithm: m_max must be >= 1");

        StSlnrSolution out;
        FixedMSolution best = st_slnr_fixed(csits, 1, options);
        double best_se = predicted_sum_se(csits, best, options);
        out.sum_se_trajectory.push_back(best_se);

        for (int m = 2; m <= options.m_max; ++m)
        {
            FixedMSolution cand = st_slnr_fixed(csits, m, options);
            const double se = predicted_sum_se(csits, cand, options);
            out.sum_se_trajectory.push_back(se);
            if (se < best_se)
                break;
            best = std::move(cand);
            best_se = se;
        }

        out.chosen_m = best.m;
        out.achieved_sum_se = best_se;
        for (std::size_t k = 0; k < csits.size(); ++k)
        {
            out.per_satellite_tau.push_back(best.per_satellite_tau[k].tau_s);
            out.per_satellite_precoder.push_back(best.per_satellite_precoder[k]);
        }
        return out;
    }
}
