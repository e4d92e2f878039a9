// SPDX-License-Identifier: Apache-2.0
//
// mmsounder - post-processing: PDP/PADP/PAS, MPC extraction, spreads, Doppler, path loss

#pragma once

#include <cstdint>
#include <vector>

#include "mmsounder/calibration.hpp"
#include "mmsounder/constants.hpp"
#include "mmsounder/sounder.hpp"

namespace mmsounder {

enum class Window { hanning, none };
enum class Side { tx, rx };
enum class OmniMethod { max, sum };
enum class PathLossModel { close_in, alpha_beta_gamma };

/// Power (linear mW, absolute receive level) per TX beam x RX beam x delay
/// bin for one snapshot.  Delay axis: num_delay_bins bins of delay_bin_s
/// starting at zero, spanning one waveform period.
struct DirectionalPDP {
    std::uint32_t snapshot_index = 0;
    double timestamp_s = 0.0;
    std::vector<double> tx_azimuths_deg;
    std::vector<double> rx_azimuths_deg;
    double delay_bin_s = 0.0;
    std::size_t num_delay_bins = 0;
    std::vector<double> power_mw; ///< [tx][rx][delay], row-major

    double at(std::size_t tx, std::size_t rx, std::size_t delay) const
    {
        return power_mw[(tx * rx_azimuths_deg.size() + rx) * num_delay_bins + delay];
    }
    double &at(std::size_t tx, std::size_t rx, std::size_t delay)
    {
        return power_mw[(tx * rx_azimuths_deg.size() + rx) * num_delay_bins + delay];
    }
    /// Median power over the last 10% of the delay axis across all pairs —
    /// beyond plausible path delays, so it estimates the per-bin noise level.
    double noise_floor_mw() const;
};

/// Full first-stage chain, one DirectionalPDP per snapshot: average the
/// repetitions, estimate the tone-grid response, divide by the back-to-back
/// calibration, window, inverse transform, squared magnitude.  AGC gain is
/// removed so PDPs are in absolute receive power.
std::vector<DirectionalPDP> directional_pdp(const SweepRecording &recording,
                                            const CalibrationResponse &calibration,
                                            Window window = Window::hanning);

/// Omnidirectional PDP.  The max-method (entrywise max over both beam axes)
/// is the default; the sum-method is available for sensitivity studies.
std::vector<double> omni_pdp(const DirectionalPDP &pdp,
                             OmniMethod method = OmniMethod::max);

/// Noise floor of a single PDP: median power over its last 10% of delay bins.
/// Apply to the same PDP the consumer scans (per-pair vs max-combined floors
/// differ by the max-over-pairs statistics).
double pdp_noise_floor_mw(const std::vector<double> &pdp_mw);

/// Power angular-delay profile: max over the other side's beam axis.
/// Result is [beam][delay] for the requested side.
std::vector<std::vector<double>> padp(const DirectionalPDP &pdp, Side side);

/// Power angular spectrum: sum over the delay axis, [tx][rx].  The
/// thresholded variant zeroes delay bins at or below threshold_mw first
/// (used when comparing beam powers against a noise-dominated background).
std::vector<std::vector<double>> pas(const DirectionalPDP &pdp);
std::vector<std::vector<double>> pas(const DirectionalPDP &pdp, double threshold_mw);

struct MPCEstimate {
    std::size_t delay_bin = 0;
    std::size_t tx_beam = 0; ///< index into the PDP's TX beam axis
    std::size_t rx_beam = 0;
    double power_dbm = 0.0;
    std::uint32_t snapshot = 0;
};

/*!
 * Peak-search MPC extraction.  A sample is a 3-D peak when strictly greater
 * than its 26 neighbors (ties broken toward the lexicographically lowest
 * (delay, tx, rx)).  Peaks below N_th = noise_floor_dbm + 6 dB are dropped.
 * Per delay bin: the strongest peak is always kept; others are kept when
 * within 10 dB of it, or within 20 dB when both their TX and RX beams differ
 * from the strongest peak's (sidelobe ghost rejection).
 */
std::vector<MPCEstimate> extract_mpcs(const DirectionalPDP &pdp,
                                      double noise_floor_dbm);

/// RMS delay spread of a linear-power PDP, using only bins above the
/// internally estimated noise floor (last-10% median) plus threshold_db.
/// Throws std::invalid_argument when nothing exceeds the threshold.
double rms_delay_spread(const std::vector<double> &pdp_mw, double delay_bin_s,
                        double threshold_db = 6.0);

struct AngularStats {
    double mean_angle_deg = 0.0;
    double angular_spread_deg = 0.0;
};

/// Circular (Fleury) statistics of a power-weighted angle set: the mean is
/// the argument of the power-weighted phasor sum, the spread is
/// sqrt(1 - |R|^2) with R the normalized phasor sum, in degrees.
AngularStats angular_stats(const std::vector<double> &angles_deg,
                           const std::vector<double> &power);

/// Beam-pair choice for the delay-Doppler transform: a fixed (tx, rx) pair,
/// or per delay bin the pair with the largest time-averaged power.
struct PairSelection {
    enum class Mode { fixed, per_bin_max } mode = Mode::fixed;
    std::size_t tx_index = 0; ///< index into the schedule's TX beam list
    std::size_t rx_index = 0;
};

struct DelayDopplerSpectrum {
    std::vector<double> delay_s;
    std::vector<double> doppler_hz; ///< symmetric about 0; for an even
                                    ///< snapshot count the Nyquist bin
                                    ///< appears at both ends
    std::vector<double> power_mw;   ///< [delay][doppler]

    double at(std::size_t delay, std::size_t doppler) const
    {
        return power_mw[delay * doppler_hz.size() + doppler];
    }
};

/// DFT across the snapshots of one burst, per delay bin.  Snapshot
/// timestamps must be uniform; doppler resolution = 1/(snapshots * period),
/// unambiguous range +-1/(2 * period).
DelayDopplerSpectrum delay_doppler(const SweepRecording &recording,
                                   const CalibrationResponse &calibration,
                                   const PairSelection &selection,
                                   std::uint32_t burst_index = 0,
                                   Window delay_window = Window::hanning,
                                   Window snapshot_window = Window::none);

struct PathLossFit {
    PathLossModel model = PathLossModel::close_in;
    double n = 0.0;            ///< close-in exponent
    double intercept_db = 0.0; ///< close-in: FSPL at d0 = 1 m (held fixed)
    double alpha = 0.0;        ///< ABG distance slope
    double beta_db = 0.0;      ///< ABG intercept
    double gamma = 0.0;        ///< ABG frequency slope; 0 at a single carrier
    double shadowing_sigma_db = 0.0;
    std::vector<double> residuals_db;
};

/// Least-squares dB-domain fit of (distance m, path loss dB) samples.
/// Close-in: PL = FSPL(1 m) + 10 n log10(d).  ABG: PL = 10 a log10(d) + b,
/// with the frequency term fixed to zero at a single carrier.
PathLossFit fit_path_loss(const std::vector<std::pair<double, double>> &points,
                          PathLossModel model, double carrier_hz);

struct BeamTrackingSeries {
    std::size_t fixed_tx = 0; ///< pair with the best time-averaged power
    std::size_t fixed_rx = 0;
    std::vector<double> fixed_dbm;         ///< that pair's power per snapshot
    std::vector<double> instantaneous_dbm; ///< per-snapshot best pair power
};

/// Compare staying on the on-average-best beam pair against ideal
/// per-snapshot tracking.  Input: PAS matrix (linear) per snapshot.
BeamTrackingSeries
beam_tracking_gain(const std::vector<std::vector<std::vector<double>>> &pas_series);

} // namespace mmsounder
