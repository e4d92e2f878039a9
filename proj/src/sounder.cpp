// SPDX-License-Identifier: Apache-2.0
//
// mmsounder - sweep execution: beams, channel, clock drift, noise, AGC, quantization

#include "mmsounder/sounder.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "mmsounder/fft.hpp"
#include "mmsounder/hash.hpp"

namespace mmsounder {

void ClockModel::validate() const
{
    if (mode == ClockMode::shared && fractional_offset != 0.0)
        throw std::invalid_argument("ClockModel: shared mode requires zero fractional offset");
    if (phase_noise_std_deg < 0.0)
        throw std::invalid_argument("ClockModel: phase_noise_std_deg must be >= 0");
    if (random_walk_coeff < 0.0)
        throw std::invalid_argument("ClockModel: random_walk_coeff must be >= 0");
}

void ReceiverConfig::validate() const
{
    if (bandwidth_hz <= 0.0)
        throw std::invalid_argument("ReceiverConfig: bandwidth must be > 0");
    if (noise_figure_db < 0.0)
        throw std::invalid_argument("ReceiverConfig: noise figure must be >= 0");
    if (adc_bits < 4 || adc_bits > 24)
        throw std::invalid_argument("ReceiverConfig: adc_bits out of range [4, 24]");
    if (awg_bits < 4 || awg_bits > 24)
        throw std::invalid_argument("ReceiverConfig: awg_bits out of range [4, 24]");
    if (agc_step_db <= 0.0 || agc_range_db < 0.0)
        throw std::invalid_argument("ReceiverConfig: bad AGC step/range");
    if (agc_backoff_db < 0.0)
        throw std::invalid_argument("ReceiverConfig: AGC backoff must be >= 0");
}

double ReceiverConfig::sensitivity_dbm() const
{
    return -174.0 + noise_figure_db + lin2db(bandwidth_hz);
}

void SweepSchedule::validate() const
{
    if (tx_beams.empty() || rx_beams.empty())
        throw std::invalid_argument("SweepSchedule: beam lists must be non-empty");
    if (waveform_duration_s <= 0.0 || guard_s < 0.0)
        throw std::invalid_argument("SweepSchedule: bad slot timing");
    if (repetitions_per_pair < 1)
        throw std::invalid_argument("SweepSchedule: repetitions_per_pair must be >= 1");
    if (snapshots_per_burst < 1 || num_bursts < 1)
        throw std::invalid_argument("SweepSchedule: snapshot/burst counts must be >= 1");
    if (burst_period_s <= 0.0)
        throw std::invalid_argument("SweepSchedule: burst_period_s must be > 0");
    if (snapshots_per_burst * snapshot_time_s() > burst_period_s * (1.0 + 1e-12))
        throw std::invalid_argument("SweepSchedule: snapshots do not fit in the burst period");
    if (start_time_s < 0.0)
        throw std::invalid_argument("SweepSchedule: start_time_s must be >= 0");
}

double agc_select(const std::vector<double> &pair_powers_dbm,
                  const ReceiverConfig &rx)
{
    rx.validate();
    if (pair_powers_dbm.empty())
        throw std::invalid_argument("agc_select: need at least one pair power");
    const double strongest =
        *std::max_element(pair_powers_dbm.begin(), pair_powers_dbm.end());
    const double target = rx.saturation_dbm - rx.agc_backoff_db;
    // Never overshoot: quantize toward zero gain.
    const double raw = target - strongest;
    double gain = std::floor(raw / rx.agc_step_db) * rx.agc_step_db;
    gain = std::clamp(gain, 0.0, rx.agc_range_db);
    return gain;
}

LinkBudget link_budget(const ReceiverConfig &rx, double tx_eirp_dbm,
                       double rx_beam_gain_dbi)
{
    rx.validate();
    LinkBudget lb;
    lb.sensitivity_dbm = rx.sensitivity_dbm();
    lb.eis_dbm = lb.sensitivity_dbm - rx_beam_gain_dbi;
    lb.max_path_loss_db = tx_eirp_dbm - lb.eis_dbm;
    lb.dynamic_range_db = rx.saturation_dbm - lb.sensitivity_dbm;
    return lb;
}

std::size_t quantize_midrise(cvector &samples, int bits, double full_scale)
{
    if (bits < 1 || bits > 30)
        throw std::invalid_argument("quantize_midrise: bits out of range");
    if (full_scale <= 0.0)
        throw std::invalid_argument("quantize_midrise: full_scale must be > 0");
    const double delta = 2.0 * full_scale / static_cast<double>(1L << bits);
    const long top = (1L << (bits - 1)) - 1; // level index of +(FS - delta/2)
    std::size_t clipped = 0;
    const auto quant = [&](double v) {
        if (std::abs(v) > full_scale)
            ++clipped;
        long k = static_cast<long>(std::floor(v / delta));
        k = std::clamp(k, -top - 1, top);
        return (static_cast<double>(k) + 0.5) * delta;
    };
    for (auto &s : samples)
        s = cdouble(quant(s.real()), quant(s.imag()));
    return clipped;
}

cvector transmit_tone_amplitudes(const MultitoneWaveform &waveform,
                                 int awg_bits, double conducted_dbm)
{
    waveform.spec.validate();
    const int period = waveform.spec.period_samples();
    if (waveform.samples.size() != static_cast<std::size_t>(period))
        throw std::invalid_argument("transmit_tone_amplitudes: sample count != period");

    cvector tx = waveform.samples;
    quantize_midrise(tx, awg_bits, 1.0); // waveform is peak-normalized

    const cvector spectrum = fft(tx);
    const int b0 = waveform.spec.first_bin();
    const auto num_tones = static_cast<std::size_t>(waveform.spec.num_tones);
    cvector amps(num_tones);
    double tone_power = 0.0;
    for (std::size_t m = 0; m < num_tones; ++m) {
        amps[m] = spectrum[static_cast<std::size_t>(b0) + m] /
                  static_cast<double>(period);
        tone_power += std::norm(amps[m]);
    }
    // Normalize total conducted tone power; AWG spurs outside the tone grid
    // are below -60 dBc and are left out of the power accounting.
    const double scale = std::sqrt(dbm2mw(conducted_dbm) / tone_power);
    for (auto &a : amps)
        a *= scale;
    return amps;
}

CalibrationResponse back_to_back_calibration(const MultitoneWaveform &waveform,
                                             int awg_bits, double conducted_dbm,
                                             const CalibrationResponse &system)
{
    system.validate();
    if (!system.matches_grid(waveform.spec))
        throw std::invalid_argument("back_to_back_calibration: system response grid mismatch");
    const cvector amps = transmit_tone_amplitudes(waveform, awg_bits, conducted_dbm);
    CalibrationResponse cal;
    cal.tone_hz = system.tone_hz;
    cal.response.resize(amps.size());
    for (std::size_t m = 0; m < amps.size(); ++m)
        cal.response[m] = amps[m] * system.response[m];
    cal.source = "synthetic";
    cal.validate();
    return cal;
}

namespace {

// Linear received power (mW) for one beam pair over the sounded band; the
// idealized estimate the AGC uses before committing a gain setting.
double pair_power_mw(const std::vector<GroundTruthMPC> &mpcs, const Beam &tx_beam,
                     const Beam &rx_beam, const ArrayGeometry &tx_geom,
                     const ArrayGeometry &rx_geom, double conducted_mw)
{
    double p = 0.0;
    for (const auto &m : mpcs) {
        const cdouble ft =
            gain_field(tx_beam, tx_geom, m.dod_azimuth_deg, m.dod_elevation_deg);
        const cdouble fr =
            gain_field(rx_beam, rx_geom, m.doa_azimuth_deg, m.doa_elevation_deg);
        p += conducted_mw * std::norm(ft) * std::norm(fr) * std::norm(m.complex_gain);
    }
    return p;
}

std::vector<BeamRef> make_beam_refs(const std::vector<std::uint32_t> &indices,
                                    const BeamCodebook &codebook)
{
    std::vector<BeamRef> refs;
    refs.reserve(indices.size());
    for (const auto idx : indices) {
        if (idx >= codebook.beams.size())
            throw std::invalid_argument("run_sweep: beam index out of range");
        const Beam &b = codebook.beams[idx];
        refs.push_back({idx, b.azimuth_deg, b.elevation_deg});
    }
    return refs;
}

} // namespace

SweepRecording run_sweep(const Scene &scene, const MultitoneWaveform &waveform,
                         const BeamCodebook &tx_codebook,
                         const BeamCodebook &rx_codebook,
                         const SweepSchedule &schedule, const ClockModel &clock,
                         const ReceiverConfig &rx, double tx_eirp_dbm,
                         std::uint64_t seed, const CalibrationResponse *system)
{
    scene.validate();
    waveform.spec.validate();
    schedule.validate();
    clock.validate();
    rx.validate();
    if (std::abs(schedule.waveform_duration_s - waveform.spec.period_s()) > 1e-12)
        throw std::invalid_argument("run_sweep: schedule waveform duration != waveform period");

    const CalibrationResponse sys =
        system ? *system : identity_response(waveform.spec);
    if (!sys.matches_grid(waveform.spec))
        throw std::invalid_argument("run_sweep: system response grid mismatch");

    const int period = waveform.spec.period_samples();
    const auto num_tones = static_cast<std::size_t>(waveform.spec.num_tones);
    const int b0 = waveform.spec.first_bin();
    const std::uint32_t reps = schedule.repetitions_per_pair;
    const double rep_stride_s = schedule.waveform_duration_s + schedule.guard_s;
    const double spacing = waveform.spec.tone_spacing_hz;

    const double conducted_dbm =
        tx_eirp_dbm - ideal_boresight_gain_dbi(tx_codebook.geometry);
    const double conducted_mw = dbm2mw(conducted_dbm);
    const cvector amps =
        transmit_tone_amplitudes(waveform, rx.awg_bits, conducted_dbm);

    // Per-tone transmit amplitude including the system ripple H_cal removes.
    cvector base(num_tones);
    for (std::size_t m = 0; m < num_tones; ++m)
        base[m] = amps[m] * sys.response[m];

    SweepRecording rec;
    rec.header.carrier_hz = scene.carrier_hz;
    rec.header.seed = seed;
    rec.header.clock = clock;
    rec.header.rx = rx;
    rec.header.tx_eirp_dbm = tx_eirp_dbm;
    rec.header.tx_conducted_dbm = conducted_dbm;
    rec.header.waveform = waveform.spec;
    rec.header.waveform.phases_rad.clear(); // grid only; phases live in H_cal
    rec.header.schedule = schedule;
    rec.header.tx_beam_refs = make_beam_refs(schedule.tx_beams, tx_codebook);
    rec.header.rx_beam_refs = make_beam_refs(schedule.rx_beams, rx_codebook);
    rec.header.codebook_hash_tx = tx_codebook.content_hash();
    rec.header.codebook_hash_rx = rx_codebook.content_hash();
    rec.header.scene_hash = scene.content_hash();

    // Thermal noise: white over the full sampling rate; the sounded band then
    // carries kT*NF*BW as the front end would deliver.
    const double noise_psd_mw =
        dbm2mw(-174.0 + rx.noise_figure_db); // per Hz, at the RX input
    const double noise_var_mw = noise_psd_mw * waveform.spec.sample_rate_hz;
    const double component_sigma = std::sqrt(noise_var_mw / 2.0);
    const double inband_noise_mw =
        rx.thermal_noise
            ? noise_psd_mw * (static_cast<double>(num_tones) * spacing)
            : 0.0;
    const double sat_amp = std::sqrt(dbm2mw(rx.saturation_dbm));

    const std::uint64_t clock_root = derive_seed(seed, clock.seed, 0xc10cu);
    std::mt19937_64 walk_rng(derive_seed(clock_root, 0x3a1du));
    std::normal_distribution<double> unit_normal(0.0, 1.0);
    double walk_deg = 0.0;
    double walk_prev_t = schedule.start_time_s;

    const std::size_t pairs = schedule.num_pairs();
    rec.captures.reserve(static_cast<std::size_t>(schedule.num_bursts) *
                         schedule.snapshots_per_burst * pairs);

    for (std::uint32_t burst = 0; burst < schedule.num_bursts; ++burst) {
        for (std::uint32_t snap = 0; snap < schedule.snapshots_per_burst; ++snap) {
            const std::uint32_t snap_idx = burst * schedule.snapshots_per_burst + snap;
            const double t_snap = schedule.start_time_s +
                                  burst * schedule.burst_period_s +
                                  snap * schedule.snapshot_time_s();

            // AGC: one gain per snapshot from the strongest pair estimate.
            const auto agc_mpcs = snapshot_mpcs(scene, t_snap);
            std::vector<double> powers_dbm;
            powers_dbm.reserve(pairs);
            for (const auto ti : schedule.tx_beams)
                for (const auto ri : schedule.rx_beams) {
                    const double p =
                        pair_power_mw(agc_mpcs, tx_codebook.beams[ti],
                                      rx_codebook.beams[ri], tx_codebook.geometry,
                                      rx_codebook.geometry, conducted_mw) +
                        inband_noise_mw;
                    powers_dbm.push_back(mw2dbm(std::max(p, 1e-300)));
                }
            const double gain_db_snap = agc_select(powers_dbm, rx);
            const double gain_amp = db2mag(gain_db_snap);

            std::uint32_t pair_idx = 0;
            for (const auto ti : schedule.tx_beams) {
                for (const auto ri : schedule.rx_beams) {
                    const double t_cap = t_snap + pair_idx * schedule.pair_time_s();
                    const auto mpcs = snapshot_mpcs(scene, t_cap);

                    // Per-path tone responses -> one time-domain template each.
                    std::vector<cvector> templates;
                    std::vector<double> dopplers;
                    for (const auto &m : mpcs) {
                        const cdouble ft = gain_field(tx_codebook.beams[ti],
                                                      tx_codebook.geometry,
                                                      m.dod_azimuth_deg,
                                                      m.dod_elevation_deg);
                        const cdouble fr = gain_field(rx_codebook.beams[ri],
                                                      rx_codebook.geometry,
                                                      m.doa_azimuth_deg,
                                                      m.doa_elevation_deg);
                        const cdouble c = ft * fr * m.complex_gain;
                        if (std::norm(c) < 1e-60)
                            continue;
                        cvector grid(static_cast<std::size_t>(period), cdouble{});
                        for (std::size_t k = 0; k < num_tones; ++k) {
                            // Tone phases referenced to the first tone; the
                            // carrier term of the delay lives in complex_gain.
                            const cdouble ramp = std::polar(
                                1.0, -two_pi * spacing * m.delay_s *
                                         static_cast<double>(k));
                            grid[static_cast<std::size_t>(b0) + k] =
                                base[k] * c * ramp * static_cast<double>(period);
                        }
                        templates.push_back(ifft(grid));
                        dopplers.push_back(m.doppler_hz);
                    }

                    // Clock state is frozen per capture except the linear
                    // drift, which advances per repetition.
                    std::mt19937_64 jitter_rng(
                        derive_seed(clock_root, snap_idx, pair_idx, 0x11u));
                    const double jitter_deg =
                        clock.phase_noise_std_deg > 0.0
                            ? clock.phase_noise_std_deg * unit_normal(jitter_rng)
                            : 0.0;
                    if (clock.mode == ClockMode::gps_disciplined &&
                        clock.random_walk_coeff > 0.0) {
                        const double dt = std::max(t_cap - walk_prev_t, 0.0);
                        walk_deg += clock.random_walk_coeff * std::sqrt(dt) *
                                    unit_normal(walk_rng);
                        walk_prev_t = t_cap;
                    }
                    const double static_phase_deg =
                        clock.lo_phase_deg + jitter_deg +
                        (clock.mode == ClockMode::gps_disciplined ? walk_deg : 0.0);

                    cvector samples(static_cast<std::size_t>(period) * reps,
                                    cdouble{});
                    for (std::uint32_t r = 0; r < reps; ++r) {
                        const double t_rep = t_cap + r * rep_stride_s;
                        const double drift_deg =
                            360.0 * scene.carrier_hz * clock.fractional_offset * t_rep;
                        const double theta = deg2rad(static_phase_deg + drift_deg);
                        cdouble *out = samples.data() +
                                       static_cast<std::size_t>(r) * period;
                        for (std::size_t p = 0; p < templates.size(); ++p) {
                            const cdouble rot =
                                std::polar(1.0, theta + two_pi * dopplers[p] *
                                                            (t_rep - t_cap));
                            const cdouble *tmpl = templates[p].data();
                            for (int n = 0; n < period; ++n)
                                out[n] += tmpl[n] * rot;
                        }
                    }

                    if (rx.thermal_noise) {
                        std::mt19937_64 noise_rng(
                            derive_seed(seed, snap_idx, pair_idx, 0xa0u));
                        for (auto &s : samples)
                            s += cdouble(component_sigma * unit_normal(noise_rng),
                                         component_sigma * unit_normal(noise_rng));
                    }

                    for (auto &s : samples)
                        s *= gain_amp;
                    const std::size_t clipped =
                        quantize_midrise(samples, rx.adc_bits, sat_amp);
                    if (clipped > 0)
                        ++rec.header.clipping_events;

                    Capture cap;
                    cap.snapshot_index = snap_idx;
                    cap.pair_index = pair_idx;
                    cap.timestamp_s = t_cap;
                    cap.gain_db = static_cast<float>(gain_db_snap);
                    cap.samples.resize(samples.size());
                    for (std::size_t n = 0; n < samples.size(); ++n)
                        cap.samples[n] = cfloat(static_cast<float>(samples[n].real()),
                                                static_cast<float>(samples[n].imag()));
                    rec.captures.push_back(std::move(cap));
                    ++pair_idx;
                }
            }
        }
    }
    rec.header.num_captures = rec.captures.size();
    return rec;
}

namespace {

// In-band SNR of one waveform period, noise estimated from the bins the
// sounding grid leaves empty.
double block_snr(const cvector &block, int b0, std::size_t num_tones)
{
    const cvector spectrum = fft(block);
    double inband = 0.0, outband = 0.0;
    std::size_t n_out = 0;
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        const bool tone = k >= static_cast<std::size_t>(b0) &&
                          k < static_cast<std::size_t>(b0) + num_tones;
        if (tone)
            inband += std::norm(spectrum[k]);
        else {
            outband += std::norm(spectrum[k]);
            ++n_out;
        }
    }
    if (n_out == 0)
        throw std::invalid_argument("averaging_gain_probe: no out-of-band bins");
    const double noise_per_bin = std::max(outband / static_cast<double>(n_out), 1e-300);
    const double noise_inband = noise_per_bin * static_cast<double>(num_tones);
    const double signal = std::max(inband - noise_inband, 1e-300);
    return signal / noise_inband;
}

} // namespace

AveragingProbeResult averaging_gain_probe(const SweepRecording &recording)
{
    const auto &spec = recording.header.waveform;
    spec.validate();
    const auto period = static_cast<std::size_t>(spec.period_samples());
    const std::uint32_t reps = recording.header.schedule.repetitions_per_pair;
    if (reps < 2)
        throw std::invalid_argument("averaging_gain_probe: need at least 2 repetitions");
    if (recording.captures.empty())
        throw std::invalid_argument("averaging_gain_probe: empty recording");

    double before = 0.0, after = 0.0;
    for (const auto &cap : recording.captures) {
        if (cap.samples.size() != period * reps)
            throw std::invalid_argument("averaging_gain_probe: capture size mismatch");
        cvector first(period), avg(period, cdouble{});
        for (std::size_t r = 0; r < reps; ++r)
            for (std::size_t n = 0; n < period; ++n) {
                const cfloat s = cap.samples[r * period + n];
                const cdouble v(s.real(), s.imag());
                if (r == 0)
                    first[n] = v;
                avg[n] += v;
            }
        for (auto &v : avg)
            v /= static_cast<double>(reps);
        before += block_snr(first, spec.first_bin(),
                            static_cast<std::size_t>(spec.num_tones));
        after += block_snr(avg, spec.first_bin(),
                           static_cast<std::size_t>(spec.num_tones));
    }
    const auto n = static_cast<double>(recording.captures.size());
    AveragingProbeResult res;
    res.snr_before_db = lin2db(before / n);
    res.snr_after_db = lin2db(after / n);
    res.improvement_db = res.snr_after_db - res.snr_before_db;
    return res;
}

} // namespace mmsounder
