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

#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace stbf::ephemeris
{
    inline constexpr double kMuEarth = 3.986004418e14;      // m^3/s^2
    inline constexpr double kEarthRotation = 7.2921159e-5; // rad/s, sidereal
    inline constexpr double kEarthRadius = 6371e3;         // spherical Earth for user sites
    inline constexpr double kMaxPropagationDays = 7.0;

    /// UTC instant as a Julian date plus a seconds offset. A lone double near 2.46e6 days resolves
    /// only ~40 μs; the offset keeps short intervals exact.
    struct JulianDate
    {
        double days = 0.0;
        double offset_s = 0.0;

        double total_days() const { return days + offset_s / 86400.0; }
        JulianDate plus_seconds(double s) const { return {days, offset_s + s}; }
        double seconds_since(const JulianDate& other) const
        {
            return (days - other.days) * 86400.0 + (offset_s - other.offset_s);
        }
    };

    JulianDate julian_date(int year, int month, int day, int hour = 0, int minute = 0, double second = 0.0);

    /// Accepts "YYYY-MM-DDTHH:MM:SS[.fff][Z]". Throws std::invalid_argument otherwise.
    JulianDate parse_utc(const std::string& iso);

    struct TleRecord
    {
        std::string name;
        int catalog_number = 0;
        JulianDate epoch;
        double inclination_deg = 0.0;
        double raan_deg = 0.0;
        double eccentricity = 0.0;
        double arg_perigee_deg = 0.0;
        double mean_anomaly_deg = 0.0;
        double mean_motion_rev_day = 0.0;
        bool checksum_valid = false;
        int first_line = 0; // 1-based line number of element line 1 in the source text
    };

    class TleParseError : public std::runtime_error
    {
    public:
        TleParseError(int line, const std::string& what);
        int line() const { return line_; }

    private:
        int line_;
    };

    struct TleIssue
    {
        int line = 0;
        std::string message;
    };

    enum class ParseMode
    {
        strict,       // first bad record throws
        skip_invalid, // bad records are skipped and listed in issues
    };

    struct TleParseResult
    {
        std::vector<TleRecord> records;
        std::vector<TleIssue> issues;
    };

    /// Modulo-10 checksum over columns 1-68: digits count their value, '-' counts 1.
    int tle_checksum(std::string_view line);

    /// Line is 69 characters and column 69 equals tle_checksum.
    bool checksum_ok(std::string_view line);

    /// 2-line and 3-line groups; a leading "0 " on a name line is dropped.
    /// Truncated or out-of-order element lines always throw TleParseError. Checksum and field
    /// errors throw in strict mode and are reported per record in skip_invalid mode.
    TleParseResult parse_tle(std::string_view text, ParseMode mode = ParseMode::strict);
    TleParseResult load_tle_file(const std::string& path, ParseMode mode = ParseMode::strict);

    /// Writes the two element lines with fresh checksums; used to build synthetic catalogs.
    std::pair<std::string, std::string> format_tle(const TleRecord& record, char classification = 'U');

    /// Earth-fixed state, metres and metres per second.
    struct SatState
    {
        Eigen::Vector3d position = Eigen::Vector3d::Zero();
        Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
        double epoch_offset_s = 0.0;

        double altitude_m(double earth_radius_m = kEarthRadius) const { return position.norm() - earth_radius_m; }
    };

    class StaleEphemeris : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    class Propagator
    {
    public:
        virtual ~Propagator() = default;
        virtual SatState propagate(const TleRecord& record, const JulianDate& t) const = 0;
    };

    /// Two-body motion from the TLE mean elements, rotated into the Earth-fixed frame with
    /// GMST. Ignores J2 and drag.
    class KeplerPropagator final : public Propagator
    {
    public:
        SatState propagate(const TleRecord& record, const JulianDate& t) const override;

        /// Same orbit in the inertial frame of the mean elements (no Earth rotation).
        SatState inertial_state(const TleRecord& record, const JulianDate& t) const;
    };

    /// Greenwich mean sidereal angle in radians, [0, 2π).
    double gmst_rad(const JulianDate& t);

    /// Throws StaleEphemeris when |t − epoch| exceeds kMaxPropagationDays.
    SatState propagate(const TleRecord& record, const JulianDate& t, const Propagator& propagator);
    SatState propagate(const TleRecord& record, const JulianDate& t);

    /// Point on the spherical Earth.
    Eigen::Vector3d site_ecef(double lat_deg, double lon_deg, double radius_m = kEarthRadius);

    double elevation_deg(const Eigen::Vector3d& satellite, const Eigen::Vector3d& site);

    /// Range rate d|r_sat − r_user|/dt in m/s. Negative while the satellite approaches.
    /// Users are fixed in the Earth frame, so Earth rotation enters through the satellite's
    /// Earth-fixed velocity.
    double relative_velocity(const SatState& state, const Eigen::Vector3d& user_ecef);

    /// −range_rate / λ: an approaching satellite gives a positive offset.
    double doppler_offset(double range_rate_mps, double wavelength_m);

    struct GeoPoint
    {
        double lat_deg = 0.0;
        double lon_deg = 0.0;
    };

    std::vector<GeoPoint> make_grid(double lat_min, double lat_max, double lon_min, double lon_max, double step_deg);

    struct FeasibilityCell
    {
        GeoPoint location;
        double rel_velocity_mps = 0.0;
        double doppler_hz = 0.0;
        double delta_f_hz = 0.0;
        double retx_interval_s = 0.0; // +inf when delta_f_hz == 0
        bool feasible = false;
    };

    struct FeasibilityOptions
    {
        double wavelength_m = 3e8 / 1.9925e9;
        double interval_cap_s = 100e-6;
        double min_elevation_deg = 10.0;
    };

    /// Cells of `grid` that see the satellite above the elevation mask, each with its Doppler
    /// offset relative to `reference` and τ = 1/(2|Δf|). Throws std::invalid_argument for an
    /// empty grid or a reference user that cannot see the satellite.
    std::vector<FeasibilityCell> feasibility_map(const TleRecord& satellite, const JulianDate& t,
                                                 const std::vector<GeoPoint>& grid, const GeoPoint& reference,
                                                 const FeasibilityOptions& options, const Propagator& propagator);
    std::vector<FeasibilityCell> feasibility_map(const TleRecord& satellite, const JulianDate& t,
                                                 const std::vector<GeoPoint>& grid, const GeoPoint& reference,
                                                 const FeasibilityOptions& options = {});

    /// Columns lat_deg, lon_deg, rel_velocity_mps, doppler_hz, delta_f_hz, retx_interval_us, feasible.
    void write_feasibility_csv(const std::vector<FeasibilityCell>& cells, std::ostream& out);
    void write_feasibility_csv(const std::vector<FeasibilityCell>& cells, const std::string& path);
}
