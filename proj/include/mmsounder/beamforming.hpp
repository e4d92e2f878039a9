// SPDX-License-Identifier: Apache-2.0
//
// mmsounder - quantized phased-array beam codebooks and far-field gain

#pragma once

#include "mmsounder/constants.hpp"

#include <cstdint>
#include <string>

namespace mmsounder {

/*!
 * Planar array of num_h x num_v radiators in the vertical plane, boresight
 * along the array normal. Each radiator is a 2-patch subarray modeled as a
 * cos^q element pattern confined to the front hemisphere, with q solved
 * numerically so the peak element gain matches subarray_element_gain_dbi.
 */
struct ArrayGeometry {
    int num_h = 8;
    int num_v = 2;
    double spacing_h_m = 5.6e-3;
    double spacing_v_m = 12.5e-3;
    double carrier_hz = 27.85e9;
    double subarray_element_gain_dbi = 7.5;

    void validate() const;
    int num_elements() const { return num_h * num_v; }
    double wavelength_m() const { return speed_of_light / carrier_hz; }
};

// Exponent q of the cos^q element field pattern such that a front-hemisphere
// pattern has peak directivity gain_dbi. Solved by bisection on the
// directivity integral.
double solve_element_exponent(double gain_dbi);

// Array gain toward boresight with ideal (unquantized) uniform weights:
// 10*log10(num_elements) + element gain. Used as the EIRP reference when
// converting an EIRP budget into conducted power.
double ideal_boresight_gain_dbi(const ArrayGeometry &geometry);

struct Beam {
    double azimuth_deg = 0.0;    // steering azimuth, [-45, 45]
    double elevation_deg = 0.0;  // steering elevation, [-30, 30]
    cvector weights;             // unit magnitude, phases on the shifter grid
    std::vector<int> phase_steps; // quantized phase as integer step counts
    double boresight_gain_dbi = 0.0; // realized gain at the steering direction
};

struct BeamCodebook {
    ArrayGeometry geometry;
    double phase_step_deg = 11.25;
    std::vector<Beam> beams;

    // sampled gain table, beams x az x el, dBi
    std::vector<double> pattern_db;
    std::vector<double> grid_az_deg;
    std::vector<double> grid_el_deg;

    double pattern_at(size_t beam, size_t ia, size_t ie) const
    {
        return pattern_db[(beam * grid_az_deg.size() + ia) * grid_el_deg.size() + ie];
    }
    uint64_t content_hash() const;
};

/*!
 * Build one beam per (azimuth, elevation) pair from the cross product of the
 * given angle lists. Ideal progressive phases are rounded to the nearest
 * multiple of phase_step_deg.
 */
BeamCodebook build_codebook(const ArrayGeometry &geometry,
                            const std::vector<double> &azimuths_deg,
                            const std::vector<double> &elevations_deg,
                            double phase_step_deg);

// Complex far-field value of a beam toward (azimuth, elevation);
// |gain_field|^2 is the power gain relative to isotropic.
cdouble gain_field(const Beam &beam, const ArrayGeometry &geometry,
                   double azimuth_deg, double elevation_deg);

// Power gain in dBi toward (azimuth, elevation). Directions behind the
// array plane return -inf-like floor (-400 dB).
double gain_db(const Beam &beam, const ArrayGeometry &geometry,
               double azimuth_deg, double elevation_deg);

/*!
 * Received power (dB) over all (TX beam, RX beam) pairs for a single MPC:
 * power_db + TX gain toward the DoD + RX gain toward the DoA.
 * Row index = TX beam, column = RX beam.
 */
std::vector<std::vector<double>> beam_pair_power_map(const BeamCodebook &codebook_tx,
                                                     const BeamCodebook &codebook_rx,
                                                     double dod_azimuth_deg,
                                                     double dod_elevation_deg,
                                                     double doa_azimuth_deg,
                                                     double doa_elevation_deg,
                                                     double power_db);

// JSON export/import: geometry, phase step, per-beam quantized phase steps.
void write_codebook(const BeamCodebook &codebook, const std::string &path);
BeamCodebook read_codebook(const std::string &path);

} // namespace mmsounder
