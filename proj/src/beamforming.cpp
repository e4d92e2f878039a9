// SPDX-License-Identifier: Apache-2.0
//
// mmsounder - quantized phased-array beam codebooks and far-field gain

#include "mmsounder/beamforming.hpp"
#include "mmsounder/hash.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace mmsounder {

namespace {

struct vec3 {
    double x, y, z;
};

// Unit direction in the array frame: x = boresight, y = horizontal scan
// plane, z = up. Azimuth rotates toward +y, elevation toward +z.
vec3 direction(double azimuth_deg, double elevation_deg)
{
    const double az = deg2rad(azimuth_deg);
    const double el = deg2rad(elevation_deg);
    return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
}

// Element position list: horizontal index fastest, centered on the origin.
std::vector<vec3> element_positions(const ArrayGeometry &g)
{
    std::vector<vec3> p;
    p.reserve((size_t)g.num_elements());
    for (int v = 0; v < g.num_v; ++v)
        for (int h = 0; h < g.num_h; ++h)
            p.push_back({0.0,
                         (h - (g.num_h - 1) / 2.0) * g.spacing_h_m,
                         (v - (g.num_v - 1) / 2.0) * g.spacing_v_m});
    return p;
}

// Front-hemisphere directivity of a cos^q field pattern, by quadrature.
double front_hemisphere_directivity(double q)
{
    // D = 4*pi / integral |cos(psi)|^{2q} over the front hemisphere,
    // with psi measured from boresight. Integrand depends on psi only.
    const int n = 2000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double psi = (i + 0.5) * (pi / 2.0) / n;
        acc += std::pow(std::cos(psi), 2.0 * q) * std::sin(psi);
    }
    acc *= (pi / 2.0) / n * 2.0 * pi;
    return 4.0 * pi / acc;
}

} // namespace

void ArrayGeometry::validate() const
{
    if (num_h < 1 || num_v < 1)
        throw std::invalid_argument("ArrayGeometry: element counts must be >= 1");
    if (spacing_h_m <= 0.0 || spacing_v_m <= 0.0)
        throw std::invalid_argument("ArrayGeometry: spacings must be > 0");
    if (carrier_hz <= 0.0)
        throw std::invalid_argument("ArrayGeometry: carrier_hz must be > 0");
}

double solve_element_exponent(double gain_dbi)
{
    const double target = db2lin(gain_dbi);
    double lo = 0.0, hi = 16.0;
    if (front_hemisphere_directivity(0.0) >= target)
        return 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (front_hemisphere_directivity(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double ideal_boresight_gain_dbi(const ArrayGeometry &geometry)
{
    geometry.validate();
    return lin2db(static_cast<double>(geometry.num_elements())) +
           geometry.subarray_element_gain_dbi;
}

cdouble gain_field(const Beam &beam, const ArrayGeometry &geometry,
                   double azimuth_deg, double elevation_deg)
{
    const vec3 u = direction(azimuth_deg, elevation_deg);
    if (u.x <= 0.0)
        return cdouble(0.0, 0.0); // behind the array plane

    static thread_local double cached_gain = -1.0;
    static thread_local double cached_q = 0.0;
    if (cached_gain != geometry.subarray_element_gain_dbi) {
        cached_q = solve_element_exponent(geometry.subarray_element_gain_dbi);
        cached_gain = geometry.subarray_element_gain_dbi;
    }

    const std::vector<vec3> pos = element_positions(geometry);
    if (beam.weights.size() != pos.size())
        throw std::invalid_argument("gain_field: weight count does not match geometry");

    const double k = 2.0 * pi / geometry.wavelength_m();
    cdouble af(0.0, 0.0);
    for (size_t i = 0; i < pos.size(); ++i) {
        const double phase = k * (pos[i].y * u.y + pos[i].z * u.z);
        af += beam.weights[i] * std::polar(1.0, phase);
    }
    const double elem = std::sqrt(db2lin(geometry.subarray_element_gain_dbi)) *
                        std::pow(u.x, cached_q);
    return af / std::sqrt((double)pos.size()) * elem;
}

double gain_db(const Beam &beam, const ArrayGeometry &geometry,
               double azimuth_deg, double elevation_deg)
{
    const double p = std::norm(gain_field(beam, geometry, azimuth_deg, elevation_deg));
    if (p < 1e-40)
        return -400.0;
    return lin2db(p);
}

BeamCodebook build_codebook(const ArrayGeometry &geometry,
                            const std::vector<double> &azimuths_deg,
                            const std::vector<double> &elevations_deg,
                            double phase_step_deg)
{
    geometry.validate();
    if (phase_step_deg <= 0.0 || phase_step_deg > 180.0)
        throw std::invalid_argument("build_codebook: phase_step_deg out of range");
    if (azimuths_deg.empty() || elevations_deg.empty())
        throw std::invalid_argument("build_codebook: need at least one steering angle");
    for (double a : azimuths_deg)
        if (a < -45.0 || a > 45.0)
            throw std::invalid_argument("build_codebook: azimuth outside [-45, 45] steering range");
    for (size_t i = 1; i < azimuths_deg.size(); ++i)
        if (azimuths_deg[i] <= azimuths_deg[i - 1])
            throw std::invalid_argument("build_codebook: azimuths must be unique and sorted");
    for (double e : elevations_deg)
        if (e < -30.0 || e > 30.0)
            throw std::invalid_argument("build_codebook: elevation outside [-30, 30] steering range");

    BeamCodebook cb;
    cb.geometry = geometry;
    cb.phase_step_deg = phase_step_deg;

    const std::vector<vec3> pos = element_positions(geometry);
    const double k = 2.0 * pi / geometry.wavelength_m();

    for (double el : elevations_deg) {
        for (double az : azimuths_deg) {
            Beam b;
            b.azimuth_deg = az;
            b.elevation_deg = el;
            const vec3 u = direction(az, el);
            b.weights.resize(pos.size());
            b.phase_steps.resize(pos.size());
            for (size_t i = 0; i < pos.size(); ++i) {
                const double ideal_deg = rad2deg(-k * (pos[i].y * u.y + pos[i].z * u.z));
                int steps = (int)std::lround(ideal_deg / phase_step_deg);
                const int per_turn = (int)std::lround(360.0 / phase_step_deg);
                if (per_turn > 0)
                    steps = ((steps % per_turn) + per_turn) % per_turn;
                b.phase_steps[i] = steps;
                b.weights[i] = std::polar(1.0, deg2rad(steps * phase_step_deg));
            }
            b.boresight_gain_dbi = gain_db(b, geometry, az, el);
            cb.beams.push_back(std::move(b));
        }
    }

    // pattern table at 1 degree resolution
    for (int a = -90; a <= 90; ++a)
        cb.grid_az_deg.push_back((double)a);
    for (int e = -40; e <= 40; ++e)
        cb.grid_el_deg.push_back((double)e);
    cb.pattern_db.resize(cb.beams.size() * cb.grid_az_deg.size() * cb.grid_el_deg.size());
    for (size_t bi = 0; bi < cb.beams.size(); ++bi)
        for (size_t ia = 0; ia < cb.grid_az_deg.size(); ++ia)
            for (size_t ie = 0; ie < cb.grid_el_deg.size(); ++ie)
                cb.pattern_db[(bi * cb.grid_az_deg.size() + ia) * cb.grid_el_deg.size() + ie] =
                    gain_db(cb.beams[bi], geometry, cb.grid_az_deg[ia], cb.grid_el_deg[ie]);
    return cb;
}

std::vector<std::vector<double>> beam_pair_power_map(const BeamCodebook &codebook_tx,
                                                     const BeamCodebook &codebook_rx,
                                                     double dod_azimuth_deg,
                                                     double dod_elevation_deg,
                                                     double doa_azimuth_deg,
                                                     double doa_elevation_deg,
                                                     double power_db)
{
    std::vector<std::vector<double>> m(codebook_tx.beams.size(),
                                       std::vector<double>(codebook_rx.beams.size()));
    for (size_t i = 0; i < codebook_tx.beams.size(); ++i) {
        const double gt = gain_db(codebook_tx.beams[i], codebook_tx.geometry,
                                  dod_azimuth_deg, dod_elevation_deg);
        for (size_t j = 0; j < codebook_rx.beams.size(); ++j) {
            const double gr = gain_db(codebook_rx.beams[j], codebook_rx.geometry,
                                      doa_azimuth_deg, doa_elevation_deg);
            m[i][j] = power_db + gt + gr;
        }
    }
    return m;
}

uint64_t BeamCodebook::content_hash() const
{
    uint64_t h = fnv1a64(&geometry.num_h, sizeof(geometry.num_h));
    h = fnv1a64(&geometry.num_v, sizeof(geometry.num_v), h);
    h = fnv1a64(&geometry.spacing_h_m, sizeof(double), h);
    h = fnv1a64(&geometry.spacing_v_m, sizeof(double), h);
    h = fnv1a64(&geometry.carrier_hz, sizeof(double), h);
    h = fnv1a64(&geometry.subarray_element_gain_dbi, sizeof(double), h);
    h = fnv1a64(&phase_step_deg, sizeof(double), h);
    for (const Beam &b : beams) {
        h = fnv1a64(&b.azimuth_deg, sizeof(double), h);
        h = fnv1a64(&b.elevation_deg, sizeof(double), h);
        h = fnv1a64(b.phase_steps.data(), b.phase_steps.size() * sizeof(int), h);
    }
    return h;
}

void write_codebook(const BeamCodebook &codebook, const std::string &path)
{
    nlohmann::json j;
    j["schema_version"] = 1;
    j["geometry"] = {
        {"num_h", codebook.geometry.num_h},
        {"num_v", codebook.geometry.num_v},
        {"spacing_h_m", codebook.geometry.spacing_h_m},
        {"spacing_v_m", codebook.geometry.spacing_v_m},
        {"carrier_hz", codebook.geometry.carrier_hz},
        {"subarray_element_gain_dbi", codebook.geometry.subarray_element_gain_dbi},
    };
    j["phase_step_deg"] = codebook.phase_step_deg;
    nlohmann::json beams = nlohmann::json::array();
    for (const Beam &b : codebook.beams) {
        beams.push_back({{"azimuth_deg", b.azimuth_deg},
                         {"elevation_deg", b.elevation_deg},
                         {"phase_steps", b.phase_steps}});
    }
    j["beams"] = std::move(beams);

    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("write_codebook: cannot open " + path);
    f << j.dump(2) << "\n";
    if (!f)
        throw std::runtime_error("write_codebook: write failed for " + path);
}

BeamCodebook read_codebook(const std::string &path)
{
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("read_codebook: cannot open " + path);
    nlohmann::json j;
    f >> j;
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1)
        throw std::runtime_error("read_codebook: unsupported schema version in " + path);

    ArrayGeometry g;
    const auto &jg = j.at("geometry");
    g.num_h = jg.at("num_h").get<int>();
    g.num_v = jg.at("num_v").get<int>();
    g.spacing_h_m = jg.at("spacing_h_m").get<double>();
    g.spacing_v_m = jg.at("spacing_v_m").get<double>();
    g.carrier_hz = jg.at("carrier_hz").get<double>();
    g.subarray_element_gain_dbi = jg.at("subarray_element_gain_dbi").get<double>();

    const double step = j.at("phase_step_deg").get<double>();

    // Rebuild beams from stored quantized phases, then resample patterns by
    // reusing build_codebook on the recorded steering angles and verifying
    // the quantized phases match (guards against schema drift).
    std::vector<double> azimuths, elevations;
    for (const auto &jb : j.at("beams")) {
        const double az = jb.at("azimuth_deg").get<double>();
        const double el = jb.at("elevation_deg").get<double>();
        if (std::find(azimuths.begin(), azimuths.end(), az) == azimuths.end())
            azimuths.push_back(az);
        if (std::find(elevations.begin(), elevations.end(), el) == elevations.end())
            elevations.push_back(el);
    }
    BeamCodebook cb = build_codebook(g, azimuths, elevations, step);
    if (cb.beams.size() != j.at("beams").size())
        throw std::runtime_error("read_codebook: beam list is not a full angle grid in " + path);
    for (size_t i = 0; i < cb.beams.size(); ++i) {
        const auto stored = j.at("beams")[i].at("phase_steps").get<std::vector<int>>();
        if (stored != cb.beams[i].phase_steps)
            throw std::runtime_error("read_codebook: stored phases mismatch rebuilt codebook in " + path);
    }
    return cb;
}

} // namespace mmsounder
