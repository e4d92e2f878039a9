// SPDX-License-Identifier: Apache-2.0
//
// mmsounder - shared constants and small numeric helpers

#pragma once

#include <cmath>
#include <complex>
#include <vector>

namespace mmsounder {

using cdouble = std::complex<double>;
using cvector = std::vector<cdouble>;

// Recorded capture samples are single precision (digitizer output width).
using cfloat = std::complex<float>;
using cfvector = std::vector<cfloat>;

constexpr double speed_of_light = 299792458.0; // m/s
constexpr double pi = 3.14159265358979323846;
constexpr double two_pi = 2.0 * pi;

inline double deg2rad(double d) { return d * pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / pi; }

// Wrap an angle in degrees to (-180, 180]
inline double wrap_deg(double a)
{
    a = std::fmod(a, 360.0);
    if (a <= -180.0)
        a += 360.0;
    else if (a > 180.0)
        a -= 360.0;
    return a;
}

inline double db2lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin2db(double lin) { return 10.0 * std::log10(lin); }

// Field (voltage) ratios
inline double db2mag(double db) { return std::pow(10.0, db / 20.0); }
inline double mag2db(double mag) { return 20.0 * std::log10(mag); }

// dBm <-> linear milliwatt
inline double dbm2mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw2dbm(double mw) { return 10.0 * std::log10(mw); }

} // namespace mmsounder
