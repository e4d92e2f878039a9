// SPDX-License-Identifier: Apache-2.0
//
// mmsounder - multi-tone sounding waveform synthesis and PAPR optimization

#pragma once

#include "mmsounder/constants.hpp"

#include <cstdint>
#include <string>

namespace mmsounder {

/*!
 * Frequency-domain description of the sounding waveform: num_tones equally
 * spaced tones of unit amplitude starting at first_tone_hz, with free phases.
 */
struct MultitoneSpec {
    int num_tones = 801;             // 2N+1, odd
    double tone_spacing_hz = 500e3;  // Δf
    double first_tone_hz = 50e6;
    double sample_rate_hz = 1.25e9;
    std::vector<double> phases_rad;  // one per tone; empty means all zero

    void validate() const;            // throws std::invalid_argument
    int period_samples() const;       // round(sample_rate / tone_spacing)
    int first_bin() const;            // round(first_tone / tone_spacing)
    double period_s() const { return 1.0 / tone_spacing_hz; }
    double bandwidth_hz() const { return num_tones * tone_spacing_hz; }
};

struct MultitoneWaveform {
    MultitoneSpec spec;
    cvector samples;   // one period, peak amplitude normalized to 1
    double papr_db = 0.0;
};

// Peak-to-average power ratio of a sample block, in dB (>= 0).
double papr_db(const cvector &samples);

// PAPR evaluated on a spectrally zero-padded (oversampled) copy of the
// signal, to expose inter-sample envelope peaks. factor >= 1.
double papr_db_oversampled(const cvector &samples, int factor);

// Sample one period of the multi-tone waveform on the spec's sample grid.
MultitoneWaveform synthesize(const MultitoneSpec &spec);

/*!
 * Iterative clipping-and-filtering phase optimization: clip the envelope to
 * its RMS radius in the time domain, project back onto the tone grid keeping
 * unit tone magnitudes, repeat. Runs the loop from several deterministic
 * starting points (input phases, a quadratic phase ramp, seeded random) and
 * returns the best. Never returns phases worse than the input.
 */
MultitoneSpec optimize_phases(const MultitoneSpec &spec, double target_papr_db,
                              int max_iters, uint64_t seed);

// Zadoff-Chu phase sequence, theta_k = -pi * root * k * (k+1) / length.
std::vector<double> zadoff_chu_phases(int length, int root);

/*!
 * Comparison baseline: a Zadoff-Chu sequence mapped symbol-per-tone onto a
 * tone grid of width bandwidth_hz, oversampled to sample_rate_hz. With
 * sample_rate == bandwidth the mapping is critically sampled and the result
 * has constant envelope (PAPR 0 dB).
 */
MultitoneWaveform zadoff_chu_baseline(int length, int root, double sample_rate_hz,
                                      double bandwidth_hz);

// Plain-text spec file: key=value lines, then `phases` and one radian value
// per line at 12 significant digits.
void write_waveform_spec(const MultitoneSpec &spec, const std::string &path);
MultitoneSpec read_waveform_spec(const std::string &path);

} // namespace mmsounder
