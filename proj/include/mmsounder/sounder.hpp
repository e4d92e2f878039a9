// SPDX-License-Identifier: Apache-2.0
//
// mmsounder - sweep execution: beams, channel, clock drift, noise, AGC, quantization

#pragma once

#include <cstdint>
#include <vector>

#include "mmsounder/beamforming.hpp"
#include "mmsounder/calibration.hpp"
#include "mmsounder/constants.hpp"
#include "mmsounder/scene.hpp"
#include "mmsounder/waveform.hpp"

namespace mmsounder {

enum class ClockMode { shared, gps_disciplined, free_running };

/// TX/RX reference-clock relationship.  The drift phase applied to a capture
/// at absolute time t is
///   theta(t) = lo_phase_deg + 360 * f_c * fractional_offset * t
///              + per-capture Gaussian jitter + random walk (gps mode),
/// evaluated per repetition for the linear term so intra-capture drift is
/// visible to the averaging chain.
struct ClockModel {
    ClockMode mode = ClockMode::shared;
    double fractional_offset = 0.0;      ///< df/f between TX and RX references
    double phase_noise_std_deg = 5.8;    ///< trigger-to-trigger jitter, 1 sigma
    double random_walk_coeff = 0.5;      ///< deg/sqrt(s), gps_disciplined only
    double lo_phase_deg = 0.0;           ///< arbitrary global LO phase at t=0
    std::uint64_t seed = 0;              ///< stream salt, combined with run seed

    void validate() const; ///< shared mode must have zero fractional offset
};

struct ReceiverConfig {
    double noise_figure_db = 5.0;
    double bandwidth_hz = 400e6;
    int adc_bits = 10;
    double agc_range_db = 60.0;
    double agc_step_db = 0.5;
    double saturation_dbm = -6.0;
    int awg_bits = 15;
    double agc_backoff_db = 3.0; ///< AGC targets saturation minus this
    bool thermal_noise = true;   ///< disable for noiseless diagnostic runs

    void validate() const;
    double sensitivity_dbm() const; ///< -174 + NF + 10*log10(BW)
};

/// Beam-pair visiting order and timing.  One pair slot lasts
/// repetitions * (waveform_duration + guard); a snapshot visits every
/// (tx, rx) pair once, TX-major; snapshots within a burst are contiguous
/// and bursts repeat every burst_period_s starting at start_time_s.
struct SweepSchedule {
    std::vector<std::uint32_t> tx_beams; ///< indices into the TX codebook
    std::vector<std::uint32_t> rx_beams; ///< indices into the RX codebook
    double waveform_duration_s = 2e-6;
    double guard_s = 2e-6;
    std::uint32_t repetitions_per_pair = 10;
    std::uint32_t snapshots_per_burst = 20;
    double burst_period_s = 60e-3;
    std::uint32_t num_bursts = 1;
    double start_time_s = 0.0; ///< scene time of the first capture

    std::size_t num_pairs() const { return tx_beams.size() * rx_beams.size(); }
    double pair_time_s() const
    {
        return repetitions_per_pair * (waveform_duration_s + guard_s);
    }
    double snapshot_time_s() const
    {
        return static_cast<double>(num_pairs()) * pair_time_s();
    }
    void validate() const;
};

/// Beam identity stored in the recording so analysis can reconstruct the
/// angular axes without the codebook file.
struct BeamRef {
    std::uint32_t index = 0;
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;
};

struct RecordingHeader {
    std::uint16_t version = 1;
    double carrier_hz = 27.85e9;
    std::uint64_t seed = 0;
    ClockModel clock;
    ReceiverConfig rx;
    double tx_eirp_dbm = 0.0;
    double tx_conducted_dbm = 0.0; ///< EIRP minus ideal boresight array gain
    MultitoneSpec waveform;        ///< grid only; phases live in the H_cal file
    SweepSchedule schedule;
    std::vector<BeamRef> tx_beam_refs;
    std::vector<BeamRef> rx_beam_refs;
    std::uint64_t codebook_hash_tx = 0;
    std::uint64_t codebook_hash_rx = 0;
    std::uint64_t scene_hash = 0;
    std::uint32_t clipping_events = 0; ///< captures whose ADC input clipped
    std::uint64_t num_captures = 0;
};

/// One beam-pair dwell: repetitions_per_pair periods of the waveform,
/// contiguous, post-AGC, ADC-quantized, stored at digitizer precision.
struct Capture {
    std::uint32_t snapshot_index = 0; ///< global snapshot ordinal
    std::uint32_t pair_index = 0;     ///< tx_i * |rx_beams| + rx_i
    double timestamp_s = 0.0;         ///< absolute scene time of first sample
    float gain_db = 0.0f;             ///< AGC gain applied to this capture
    cfvector samples;
};

struct SweepRecording {
    RecordingHeader header;
    std::vector<Capture> captures;
};

/// Largest step-quantized gain that keeps the strongest pair at or below
/// saturation minus backoff; clamped to [0, agc_range_db].
double agc_select(const std::vector<double> &pair_powers_dbm,
                  const ReceiverConfig &rx);

struct LinkBudget {
    double sensitivity_dbm = 0.0;
    double eis_dbm = 0.0;          ///< effective isotropic sensitivity
    double max_path_loss_db = 0.0; ///< EIRP minus EIS
    double dynamic_range_db = 0.0; ///< saturation minus sensitivity
};

LinkBudget link_budget(const ReceiverConfig &rx, double tx_eirp_dbm,
                       double rx_beam_gain_dbi);

/// Uniform mid-rise quantization of I and Q with full-scale amplitude
/// `full_scale`; values beyond full scale clip to the outermost level.
/// Returns the number of clipped components.
std::size_t quantize_midrise(cvector &samples, int bits, double full_scale);

/// Per-tone complex transmit amplitudes after AWG quantization, scaled so
/// the total conducted power is exactly conducted_dbm.  Element m is the
/// time-domain amplitude of tone m in one waveform period.
cvector transmit_tone_amplitudes(const MultitoneWaveform &waveform,
                                 int awg_bits, double conducted_dbm);

/// Compose the back-to-back calibration response: transmit amplitudes
/// (AWG quantization included) times the system ripple response.
CalibrationResponse back_to_back_calibration(const MultitoneWaveform &waveform,
                                             int awg_bits, double conducted_dbm,
                                             const CalibrationResponse &system);

/// Execute the sweep.  The scene is evaluated at each capture's own start
/// time; motion inside a capture is applied as per-path Doppler rotation per
/// repetition.  `system` optionally colors the captures with the H_cal
/// ripple (pass the response from synthesize_system_response); identity when
/// null.  Deterministic in `seed`.
SweepRecording run_sweep(const Scene &scene, const MultitoneWaveform &waveform,
                         const BeamCodebook &tx_codebook,
                         const BeamCodebook &rx_codebook,
                         const SweepSchedule &schedule, const ClockModel &clock,
                         const ReceiverConfig &rx, double tx_eirp_dbm,
                         std::uint64_t seed,
                         const CalibrationResponse *system = nullptr);

struct AveragingProbeResult {
    double snr_before_db = 0.0; ///< single repetition, mean over captures
    double snr_after_db = 0.0;  ///< coherent average of all repetitions
    double improvement_db = 0.0;
};

/// Compare in-band SNR of the first repetition against the coherent average
/// of all repetitions, estimating noise from out-of-band FFT bins.
AveragingProbeResult averaging_gain_probe(const SweepRecording &recording);

} // namespace mmsounder
