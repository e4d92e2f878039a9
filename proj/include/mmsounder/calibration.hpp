// SPDX-License-Identifier: Apache-2.0
//
// mmsounder - back-to-back system frequency response (H_cal) synthesis and application

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmsounder/constants.hpp"
#include "mmsounder/waveform.hpp"

namespace mmsounder {

/// Complex system response sampled on the sounding tone grid.  A single
/// shared response is used for all beam pairs: the hardware is calibrated
/// baseband-to-baseband, so beam-dependent front-end ripple is out of scope.
struct CalibrationResponse {
    std::vector<double> tone_hz; ///< tone grid, ascending
    cvector response;            ///< complex response per tone, never zero
    std::string source = "synthetic"; ///< "synthetic" or "measured-file"

    /// Throws std::invalid_argument on empty/mismatched grids or a
    /// zero-magnitude tone (division safety).
    void validate() const;

    /// True when the grid matches the tone frequencies implied by `spec`.
    bool matches_grid(const MultitoneSpec &spec) const;
};

/// All-ones response on the grid of `spec`.
CalibrationResponse identity_response(const MultitoneSpec &spec);

/// Draw a smooth, band-limited random response whose amplitude ripple (dB)
/// and phase ripple (rad) have exactly the requested RMS over the tone grid.
/// Used to distort simulated captures so that calibration is non-trivial.
/// Deterministic in `seed`; zero ripple and zero phase give the identity.
CalibrationResponse synthesize_system_response(const MultitoneSpec &spec,
                                               double ripple_db_rms,
                                               double phase_rms_rad,
                                               std::uint64_t seed);

/// Element-wise division of a captured tone spectrum by the calibration
/// response.  Throws std::invalid_argument when the sizes differ.
cvector apply_calibration(const cvector &capture_tones,
                          const CalibrationResponse &cal);

/// Text file I/O on the same key=value schema as waveform specs, with one
/// "re im" pair per tone after the `response` marker line.
void write_calibration(const CalibrationResponse &cal, const std::string &path);
CalibrationResponse read_calibration(const std::string &path);

} // namespace mmsounder
