// SPDX-License-Identifier: Apache-2.0
//
// mmsounder - back-to-back system frequency response (H_cal) synthesis and application

#include "mmsounder/calibration.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mmsounder/errors.hpp"
#include "mmsounder/hash.hpp"

namespace mmsounder {

void CalibrationResponse::validate() const
{
    if (tone_hz.empty())
        throw std::invalid_argument("calibration: empty tone grid");
    if (tone_hz.size() != response.size())
        throw std::invalid_argument("calibration: grid/response size mismatch");
    for (std::size_t m = 1; m < tone_hz.size(); ++m)
        if (tone_hz[m] <= tone_hz[m - 1])
            throw std::invalid_argument("calibration: tone grid must be ascending");
    for (const auto &r : response)
        if (std::abs(r) < 1e-12)
            throw std::invalid_argument("calibration: zero-magnitude tone");
    if (source != "synthetic" && source != "measured-file")
        throw std::invalid_argument("calibration: unknown source '" + source + "'");
}

bool CalibrationResponse::matches_grid(const MultitoneSpec &spec) const
{
    if (tone_hz.size() != static_cast<std::size_t>(spec.num_tones))
        return false;
    for (int m = 0; m < spec.num_tones; ++m) {
        const double want = spec.first_tone_hz + m * spec.tone_spacing_hz;
        if (std::abs(tone_hz[static_cast<std::size_t>(m)] - want) > 1e-3)
            return false;
    }
    return true;
}

static std::vector<double> grid_of(const MultitoneSpec &spec)
{
    std::vector<double> g(static_cast<std::size_t>(spec.num_tones));
    for (int m = 0; m < spec.num_tones; ++m)
        g[static_cast<std::size_t>(m)] = spec.first_tone_hz + m * spec.tone_spacing_hz;
    return g;
}

CalibrationResponse identity_response(const MultitoneSpec &spec)
{
    spec.validate();
    CalibrationResponse cal;
    cal.tone_hz = grid_of(spec);
    cal.response.assign(cal.tone_hz.size(), cdouble{1.0, 0.0});
    cal.source = "synthetic";
    return cal;
}

// Sum of a handful of random-phase cosine cycles across the band; zero mean
// over the grid, then rescaled so the empirical RMS hits the target exactly.
static std::vector<double> smooth_ripple(std::size_t n, double target_rms,
                                         std::mt19937_64 &rng)
{
    std::vector<double> v(n, 0.0);
    if (target_rms <= 0.0 || n < 2)
        return v;
    constexpr int max_cycles = 12; // keeps the ripple slowly varying in frequency
    std::normal_distribution<double> amp(0.0, 1.0);
    std::uniform_real_distribution<double> ph(0.0, two_pi);
    for (int k = 1; k <= max_cycles; ++k) {
        const double a = amp(rng);
        const double p = ph(rng);
        for (std::size_t m = 0; m < n; ++m)
            v[m] += a * std::cos(two_pi * k * static_cast<double>(m) /
                                     static_cast<double>(n) +
                                 p);
    }
    double ss = 0.0;
    for (double x : v)
        ss += x * x;
    double rms = std::sqrt(ss / static_cast<double>(n));
    if (rms < 1e-30) { // vanishingly unlikely, but keep the contract exact
        for (std::size_t m = 0; m < n; ++m)
            v[m] = std::cos(two_pi * static_cast<double>(m) / static_cast<double>(n));
        ss = 0.0;
        for (double x : v)
            ss += x * x;
        rms = std::sqrt(ss / static_cast<double>(n));
    }
    const double scale = target_rms / rms;
    for (double &x : v)
        x *= scale;
    return v;
}

CalibrationResponse synthesize_system_response(const MultitoneSpec &spec,
                                               double ripple_db_rms,
                                               double phase_rms_rad,
                                               std::uint64_t seed)
{
    spec.validate();
    if (ripple_db_rms < 0.0)
        throw std::invalid_argument("calibration: ripple RMS must be >= 0");
    if (phase_rms_rad < 0.0)
        throw std::invalid_argument("calibration: phase RMS must be >= 0");

    const auto n = static_cast<std::size_t>(spec.num_tones);
    std::mt19937_64 rng_amp(derive_seed(seed, 0x0ca1u, 1));
    std::mt19937_64 rng_ph(derive_seed(seed, 0x0ca1u, 2));
    const std::vector<double> amp_db = smooth_ripple(n, ripple_db_rms, rng_amp);
    const std::vector<double> ph_rad = smooth_ripple(n, phase_rms_rad, rng_ph);

    CalibrationResponse cal;
    cal.tone_hz = grid_of(spec);
    cal.response.resize(n);
    for (std::size_t m = 0; m < n; ++m)
        cal.response[m] = std::polar(db2mag(amp_db[m]), ph_rad[m]);
    cal.source = "synthetic";
    cal.validate();
    return cal;
}

cvector apply_calibration(const cvector &capture_tones,
                          const CalibrationResponse &cal)
{
    cal.validate();
    if (capture_tones.size() != cal.response.size())
        throw std::invalid_argument("calibration: tone-grid mismatch");
    cvector out(capture_tones.size());
    for (std::size_t m = 0; m < out.size(); ++m)
        out[m] = capture_tones[m] / cal.response[m];
    return out;
}

void write_calibration(const CalibrationResponse &cal, const std::string &path)
{
    cal.validate();
    std::ofstream f(path);
    if (!f)
        throw io_error("cannot open calibration file for writing: " + path);
    const double spacing =
        cal.tone_hz.size() > 1 ? cal.tone_hz[1] - cal.tone_hz[0] : 0.0;
    f.precision(12);
    f << "num_tones=" << cal.tone_hz.size() << "\n";
    f << "tone_spacing_hz=" << spacing << "\n";
    f << "first_tone_hz=" << cal.tone_hz.front() << "\n";
    f << "source=" << cal.source << "\n";
    f << "response\n";
    f.precision(17);
    for (const auto &r : cal.response)
        f << r.real() << " " << r.imag() << "\n";
    if (!f)
        throw io_error("write failure on calibration file: " + path);
}

CalibrationResponse read_calibration(const std::string &path)
{
    std::ifstream f(path);
    if (!f)
        throw io_error("cannot open calibration file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    bool in_response = false;
    CalibrationResponse cal;
    while (std::getline(f, line)) {
        if (line.empty())
            continue;
        if (!in_response) {
            if (line == "response") {
                in_response = true;
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw format_error("calibration file: malformed line '" + line + "'");
            kv[line.substr(0, eq)] = line.substr(eq + 1);
        } else {
            std::istringstream ss(line);
            double re = 0.0, im = 0.0;
            if (!(ss >> re >> im))
                throw format_error("calibration file: bad response line '" + line + "'");
            cal.response.emplace_back(re, im);
        }
    }
    const auto need = [&](const char *key) -> std::string {
        const auto it = kv.find(key);
        if (it == kv.end())
            throw format_error(std::string("calibration file: missing key ") + key);
        return it->second;
    };
    const auto n = static_cast<std::size_t>(std::stoull(need("num_tones")));
    const double spacing = std::stod(need("tone_spacing_hz"));
    const double first = std::stod(need("first_tone_hz"));
    if (kv.count("source"))
        cal.source = kv["source"];
    if (cal.response.size() != n)
        throw format_error("calibration file: expected " + std::to_string(n) +
                           " response lines, got " +
                           std::to_string(cal.response.size()));
    cal.tone_hz.resize(n);
    for (std::size_t m = 0; m < n; ++m)
        cal.tone_hz[m] = first + static_cast<double>(m) * spacing;
    try {
        cal.validate();
    } catch (const std::invalid_argument &e) {
        throw format_error(std::string("calibration file: ") + e.what());
    }
    return cal;
}

} // namespace mmsounder
