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

#include "stbf/ephemeris.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace stbf::ephemeris
{
    namespace
    {
        constexpr double kTwoPi = 6.283185307179586476925286766559;
        constexpr double kDeg = kTwoPi / 360.0;
        constexpr std::size_t kLineLength = 69;

        struct NumberedLine
        {
            int number;
            std::string text;
        };

        std::string trim(std::string_view s)
        {
            const auto b = s.find_first_not_of(" \t\r\n");
            if (b == std::string_view::npos)
                return {};
            const auto e = s.find_last_not_of(" \t\r\n");
            return std::string(s.substr(b, e - b + 1));
        }

        // Columns are 1-based and inclusive, as in the format description.
        std::string field(const std::string& line, int first, int last)
        {
            return trim(std::string_view(line).substr(first - 1, last - first + 1));
        }

        bool parse_number(const std::string& text, double& out)
        {
            if (text.empty())
                return false;
            const char* begin = text.data();
            if (*begin == '+')
                ++begin;
            const auto [ptr, ec] = std::from_chars(begin, text.data() + text.size(), out);
            return ec == std::errc() && ptr == text.data() + text.size();
        }

        bool parse_int(const std::string& text, int& out)
        {
            if (text.empty())
                return false;
            const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
            return ec == std::errc() && ptr == text.data() + text.size();
        }

        bool is_element_line(const std::string& s, char which)
        {
            return s.size() >= 2 && s[0] == which && s[1] == ' ';
        }

        void require_length(const NumberedLine& l)
        {
            if (l.text.size() != kLineLength)
                throw TleParseError(l.number, "element line has " + std::to_string(l.text.size()) +
                                                  " characters, expected 69");
        }

        // Field-level validation; returns an empty message on success.
        std::string decode(const NumberedLine& l1, const NumberedLine& l2, TleRecord& rec, int& bad_line)
        {
            bad_line = l1.number;
            if (!checksum_ok(l1.text))
                return "checksum mismatch on line 1 (expected " + std::to_string(tle_checksum(l1.text)) + ")";
            bad_line = l2.number;
            if (!checksum_ok(l2.text))
                return "checksum mismatch on line 2 (expected " + std::to_string(tle_checksum(l2.text)) + ")";

            int cat1 = 0;
            int cat2 = 0;
            bad_line = l1.number;
            if (!parse_int(field(l1.text, 3, 7), cat1))
                return "bad catalog number";
            bad_line = l2.number;
            if (!parse_int(field(l2.text, 3, 7), cat2))
                return "bad catalog number";
            if (cat1 != cat2)
                return "catalog numbers differ between lines 1 and 2";
            rec.catalog_number = cat1;

            bad_line = l1.number;
            int yy = 0;
            double day = 0.0;
            if (!parse_int(field(l1.text, 19, 20), yy) || !parse_number(field(l1.text, 21, 32), day) || day < 1.0 ||
                day >= 367.0)
                return "bad epoch";
            const int year = yy < 57 ? 2000 + yy : 1900 + yy;
            rec.epoch = {julian_date(year, 1, 1).days + day - 1.0};

            bad_line = l2.number;
            double ecc_digits = 0.0;
            if (!parse_number(field(l2.text, 9, 16), rec.inclination_deg) ||
                !parse_number(field(l2.text, 18, 25), rec.raan_deg) ||
                !parse_number("0." + field(l2.text, 27, 33), ecc_digits) ||
                !parse_number(field(l2.text, 35, 42), rec.arg_perigee_deg) ||
                !parse_number(field(l2.text, 44, 51), rec.mean_anomaly_deg) ||
                !parse_number(field(l2.text, 53, 63), rec.mean_motion_rev_day))
                return "bad orbital element field";
            rec.eccentricity = ecc_digits;
            if (!(rec.eccentricity >= 0.0 && rec.eccentricity < 1.0))
                return "eccentricity outside [0, 1)";
            if (!(rec.mean_motion_rev_day > 0.0))
                return "mean motion must be positive";
            rec.checksum_valid = true;
            rec.first_line = l1.number;
            return {};
        }

        Eigen::Matrix3d rot_z(double a)
        {
            Eigen::Matrix3d r;
            const double c = std::cos(a);
            const double s = std::sin(a);
            r << c, -s, 0, s, c, 0, 0, 0, 1;
            return r;
        }

        Eigen::Matrix3d rot_x(double a)
        {
            Eigen::Matrix3d r;
            const double c = std::cos(a);
            const double s = std::sin(a);
            r << 1, 0, 0, 0, c, -s, 0, s, c;
            return r;
        }
    }

    TleParseError::TleParseError(int line, const std::string& what)
        : std::runtime_error("TLE line " + std::to_string(line) + ": " + what), line_(line)
    {
    }

    JulianDate julian_date(int year, int month, int day, int hour, int minute, double second)
    {
        // Fliegel-Van Flandern day number for the Gregorian calendar.
        const int a = (14 - month) / 12;
        const int y = year + 4800 - a;
        const int m = month + 12 * a - 3;
        const long jdn = day + (153 * m + 2) / 5 + 365L * y + y / 4 - y / 100 + y / 400 - 32045;
        return {static_cast<double>(jdn) - 0.5 + (hour + (minute + second / 60.0) / 60.0) / 24.0};
    }

    JulianDate parse_utc(const std::string& iso)
    {
        int y = 0;
        int mo = 0;
        int d = 0;
        int h = 0;
        int mi = 0;
        double s = 0.0;
        char tail = 0;
        const int n = std::sscanf(iso.c_str(), "%d-%d-%dT%d:%d:%lf%c", &y, &mo, &d, &h, &mi, &s, &tail);
        if (n < 6 || (n == 7 && tail != 'Z') || mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 ||
            mi > 59 || s < 0.0 || s >= 61.0)
            throw std::invalid_argument("invalid UTC time '" + iso + "' (expected YYYY-MM-DDTHH:MM:SS[Z])");
        return julian_date(y, mo, d, h, mi, s);
    }

    int tle_checksum(std::string_view line)
    {
        int sum = 0;
        for (std::size_t i = 0; i < std::min<std::size_t>(line.size(), kLineLength - 1); ++i)
        {
            const char c = line[i];
            if (c >= '0' && c <= '9')
                sum += c - '0';
            else if (c == '-')
                sum += 1;
        }
        return sum % 10;
    }

    bool checksum_ok(std::string_view line)
    {
        if (line.size() != kLineLength)
            return false;
        const char c = line[kLineLength - 1];
        return c >= '0' && c <= '9' && c - '0' == tle_checksum(line);
    }

    TleParseResult parse_tle(std::string_view text, ParseMode mode)
    {
        std::vector<NumberedLine> lines;
        {
            int number = 0;
            std::size_t pos = 0;
            while (pos <= text.size())
            {
                const auto end = text.find('\n', pos);
                const auto raw = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
                ++number;
                std::string s(raw);
                while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
                    s.pop_back();
                if (!trim(s).empty())
                    lines.push_back({number, s});
                if (end == std::string_view::npos)
                    break;
                pos = end + 1;
            }
        }

        TleParseResult result;
        std::size_t i = 0;
        while (i < lines.size())
        {
            std::string name;
            if (is_element_line(lines[i].text, '2'))
                throw TleParseError(lines[i].number, "element line 2 without a preceding line 1");
            if (!is_element_line(lines[i].text, '1'))
            {
                name = trim(lines[i].text);
                if (name.size() >= 2 && name[0] == '0' && name[1] == ' ')
                    name = trim(name.substr(2));
                ++i;
                if (i >= lines.size() || !is_element_line(lines[i].text, '1'))
                    throw TleParseError(i < lines.size() ? lines[i].number : lines[i - 1].number,
                                        "expected element line 1 after name '" + name + "'");
            }
            const NumberedLine& l1 = lines[i];
            if (i + 1 >= lines.size() || !is_element_line(lines[i + 1].text, '2'))
                throw TleParseError(l1.number, "element line 1 is not followed by line 2");
            const NumberedLine& l2 = lines[i + 1];
            i += 2;
            require_length(l1);
            require_length(l2);

            TleRecord rec;
            rec.name = name;
            int bad_line = 0;
            const std::string problem = decode(l1, l2, rec, bad_line);
            if (problem.empty())
            {
                result.records.push_back(std::move(rec));
                continue;
            }
            if (mode == ParseMode::strict)
                throw TleParseError(bad_line, problem);
            result.issues.push_back({bad_line, problem});
        }
        return result;
    }

    TleParseResult load_tle_file(const std::string& path, ParseMode mode)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw std::runtime_error("cannot open TLE file '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_tle(buf.str(), mode);
    }

    std::pair<std::string, std::string> format_tle(const TleRecord& r, char classification)
    {
        // Epoch back to year + fractional day of year.
        int year = 1957;
        while (julian_date(year + 1, 1, 1).days <= r.epoch.total_days())
            ++year;
        const double doy = r.epoch.total_days() - julian_date(year, 1, 1).days + 1.0;

        char l1[80];
        char l2[80];
        std::snprintf(l1, sizeof l1, "1 %05d%c %-8s %02d%012.8f  .00000000  00000-0  00000-0 0  999",
                      r.catalog_number, classification, "24001A", year % 100, doy);
        std::snprintf(l2, sizeof l2, "2 %05d %8.4f %8.4f %07ld %8.4f %8.4f %11.8f    1", r.catalog_number,
                      r.inclination_deg, r.raan_deg, std::lround(r.eccentricity * 1e7), r.arg_perigee_deg,
                      r.mean_anomaly_deg, r.mean_motion_rev_day);
        std::string a(l1);
        std::string b(l2);
        a += static_cast<char>('0' + tle_checksum(a));
        b += static_cast<char>('0' + tle_checksum(b));
        return {a, b};
    }

    double gmst_rad(const JulianDate& t)
    {
        const double tu = ((t.days - 2451545.0) + t.offset_s / 86400.0) / 36525.0;
        double sec = 67310.54841 + (876600.0 * 3600.0 + 8640184.812866) * tu + 0.093104 * tu * tu -
                     6.2e-6 * tu * tu * tu;
        double a = std::fmod(sec * kTwoPi / 86400.0, kTwoPi);
        return a < 0.0 ? a + kTwoPi : a;
    }

    SatState KeplerPropagator::inertial_state(const TleRecord& r, const JulianDate& t) const
    {
        const double n = r.mean_motion_rev_day * kTwoPi / 86400.0;
        const double a = std::cbrt(kMuEarth / (n * n));
        const double e = r.eccentricity;
        const double dt = t.seconds_since(r.epoch);

        const double m = std::remainder(r.mean_anomaly_deg * kDeg + n * dt, kTwoPi);
        double ea = e < 0.8 ? m : kTwoPi / 2.0;
        for (int it = 0; it < 50; ++it)
        {
            const double step = (ea - e * std::sin(ea) - m) / (1.0 - e * std::cos(ea));
            ea -= step;
            if (std::abs(step) < 1e-14)
                break;
        }
        const double cos_e = std::cos(ea);
        const double sin_e = std::sin(ea);
        const double root = std::sqrt(1.0 - e * e);
        const double radius = a * (1.0 - e * cos_e);
        const Eigen::Vector3d pos_pf(a * (cos_e - e), a * root * sin_e, 0.0);
        const double rate = std::sqrt(kMuEarth * a) / radius;
        const Eigen::Vector3d vel_pf(-rate * sin_e, rate * root * cos_e, 0.0);

        const Eigen::Matrix3d q =
            rot_z(r.raan_deg * kDeg) * rot_x(r.inclination_deg * kDeg) * rot_z(r.arg_perigee_deg * kDeg);
        SatState s;
        s.position = q * pos_pf;
        s.velocity = q * vel_pf;
        s.epoch_offset_s = dt;
        return s;
    }

    SatState KeplerPropagator::propagate(const TleRecord& r, const JulianDate& t) const
    {
        const SatState eci = inertial_state(r, t);
        const Eigen::Matrix3d to_fixed = rot_z(-gmst_rad(t));
        const Eigen::Vector3d omega(0.0, 0.0, kEarthRotation);
        SatState s;
        s.position = to_fixed * eci.position;
        s.velocity = to_fixed * eci.velocity - omega.cross(s.position);
        s.epoch_offset_s = eci.epoch_offset_s;
        return s;
    }

    SatState propagate(const TleRecord& record, const JulianDate& t, const Propagator& propagator)
    {
        const double days = std::abs(t.seconds_since(record.epoch)) / 86400.0;
        if (!(days <= kMaxPropagationDays))
            throw StaleEphemeris("requested time is " + std::to_string(days) + " days from the epoch of '" +
                                 record.name + "' (limit 7 days)");
        return propagator.propagate(record, t);
    }

    SatState propagate(const TleRecord& record, const JulianDate& t)
    {
        static const KeplerPropagator kepler;
        return propagate(record, t, kepler);
    }

    Eigen::Vector3d site_ecef(double lat_deg, double lon_deg, double radius_m)
    {
        const double lat = lat_deg * kDeg;
        const double lon = lon_deg * kDeg;
        return radius_m * Eigen::Vector3d(std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat));
    }

    double elevation_deg(const Eigen::Vector3d& satellite, const Eigen::Vector3d& site)
    {
        const Eigen::Vector3d los = (satellite - site).normalized();
        return std::asin(std::clamp(los.dot(site.normalized()), -1.0, 1.0)) / kDeg;
    }

    double relative_velocity(const SatState& state, const Eigen::Vector3d& user_ecef)
    {
        const Eigen::Vector3d los = state.position - user_ecef;
        return state.velocity.dot(los) / los.norm();
    }

    double doppler_offset(double range_rate_mps, double wavelength_m)
    {
        if (!(wavelength_m > 0.0))
            throw std::invalid_argument("doppler_offset: wavelength must be positive");
        return -range_rate_mps / wavelength_m;
    }

    std::vector<GeoPoint> make_grid(double lat_min, double lat_max, double lon_min, double lon_max, double step_deg)
    {
        if (!(step_deg > 0.0) || lat_max < lat_min || lon_max < lon_min)
            throw std::invalid_argument("make_grid: need step > 0 and min <= max");
        std::vector<GeoPoint> grid;
        const auto n_lat = static_cast<int>(std::floor((lat_max - lat_min) / step_deg + 1e-9));
        const auto n_lon = static_cast<int>(std::floor((lon_max - lon_min) / step_deg + 1e-9));
        for (int i = 0; i <= n_lat; ++i)
            for (int j = 0; j <= n_lon; ++j)
                grid.push_back({lat_min + i * step_deg, lon_min + j * step_deg});
        return grid;
    }

    namespace
    {
        // τ = 1/(2|Δf|) with τ·2|Δf| == 1 in floating point. A correctly rounded reciprocal misses by
        // one ulp for ~15% of inputs; moving Δf by at most a few ulps and τ by one always recovers
        // the identity. Falls back to the plain reciprocal if the search fails.
        void snap_interval(double& delta_f, double& tau)
        {
            const double sign = delta_f < 0.0 ? -1.0 : 1.0;
            double up = std::abs(delta_f);
            double down = up;
            for (int k = 0; k < 16; ++k)
            {
                for (const double f : {up, down})
                {
                    const double t0 = 1.0 / (2.0 * f);
                    for (const double t : {t0, std::nextafter(t0, 0.0), std::nextafter(t0, HUGE_VAL)})
                        if (t * (2.0 * f) == 1.0)
                        {
                            delta_f = sign * f;
                            tau = t;
                            return;
                        }
                }
                up = std::nextafter(up, HUGE_VAL);
                down = std::nextafter(down, 0.0);
            }
            tau = 1.0 / (2.0 * std::abs(delta_f));
        }
    }

    std::vector<FeasibilityCell> feasibility_map(const TleRecord& satellite, const JulianDate& t,
                                                 const std::vector<GeoPoint>& grid, const GeoPoint& reference,
                                                 const FeasibilityOptions& options, const Propagator& propagator)
    {
        if (grid.empty())
            throw std::invalid_argument("feasibility_map: empty user grid");
        const SatState state = propagate(satellite, t, propagator);
        const Eigen::Vector3d ref = site_ecef(reference.lat_deg, reference.lon_deg);
        if (!(elevation_deg(state.position, ref) > options.min_elevation_deg))
            throw std::invalid_argument("feasibility_map: reference user does not see the satellite above the "
                                        "elevation mask");
        const double f_ref = doppler_offset(relative_velocity(state, ref), options.wavelength_m);

        std::vector<FeasibilityCell> cells;
        for (const auto& p : grid)
        {
            const Eigen::Vector3d site = site_ecef(p.lat_deg, p.lon_deg);
            if (!(elevation_deg(state.position, site) > options.min_elevation_deg))
                continue;
            FeasibilityCell c;
            c.location = p;
            c.rel_velocity_mps = relative_velocity(state, site);
            c.doppler_hz = doppler_offset(c.rel_velocity_mps, options.wavelength_m);
            c.delta_f_hz = c.doppler_hz - f_ref;
            if (c.delta_f_hz == 0.0)
            {
                c.retx_interval_s = std::numeric_limits<double>::infinity();
            }
            else
            {
                snap_interval(c.delta_f_hz, c.retx_interval_s);
                c.feasible = c.retx_interval_s <= options.interval_cap_s;
            }
            cells.push_back(c);
        }
        return cells;
    }

    std::vector<FeasibilityCell> feasibility_map(const TleRecord& satellite, const JulianDate& t,
                                                 const std::vector<GeoPoint>& grid, const GeoPoint& reference,
                                                 const FeasibilityOptions& options)
    {
        static const KeplerPropagator kepler;
        return feasibility_map(satellite, t, grid, reference, options, kepler);
    }

    void write_feasibility_csv(const std::vector<FeasibilityCell>& cells, std::ostream& out)
    {
        out << "lat_deg,lon_deg,rel_velocity_mps,doppler_hz,delta_f_hz,retx_interval_us,feasible\n";
        char buf[256];
        for (const auto& c : cells)
        {
            char tau[32];
            if (std::isinf(c.retx_interval_s))
                std::snprintf(tau, sizeof tau, "inf");
            else
                std::snprintf(tau, sizeof tau, "%.9g", c.retx_interval_s * 1e6);
            std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f,%.6f,%s,%d\n", c.location.lat_deg, c.location.lon_deg,
                          c.rel_velocity_mps, c.doppler_hz, c.delta_f_hz, tau, c.feasible ? 1 : 0);
            out << buf;
        }
        if (!out)
            throw std::runtime_error("failed writing feasibility CSV");
    }

    void write_feasibility_csv(const std::vector<FeasibilityCell>& cells, const std::string& path)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot open '" + path + "' for writing");
        write_feasibility_csv(cells, out);
        if (!out.flush())
            throw std::runtime_error("failed writing '" + path + "'");
    }
}
