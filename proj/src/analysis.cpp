// SPDX-License-Identifier: Apache-2.0
//
// mmsounder - post-processing: PDP/PADP/PAS, MPC extraction, spreads, Doppler, path loss

#include "mmsounder/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mmsounder/fft.hpp"
#include "mmsounder/scene.hpp"

namespace mmsounder {

namespace {

std::vector<double> window_weights(Window window, std::size_t n)
{
    std::vector<double> w(n, 1.0);
    if (window == Window::hanning)
        for (std::size_t m = 0; m < n; ++m)
            w[m] = 0.5 * (1.0 - std::cos(two_pi * static_cast<double>(m) /
                                         static_cast<double>(n)));
    return w;
}

double median_of(std::vector<double> v)
{
    if (v.empty())
        throw std::invalid_argument("median of empty set");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        const auto lower =
            std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
        m = 0.5 * (m + *lower);
    }
    return m;
}

// Shared front end of the PDP/Doppler chains: average the repetitions of one
// capture, estimate the tone responses, divide by H_cal, undo the AGC gain.
cvector calibrated_tones(const Capture &capture, const RecordingHeader &header,
                         const CalibrationResponse &calibration)
{
    const auto period = static_cast<std::size_t>(header.waveform.period_samples());
    const std::size_t reps = header.schedule.repetitions_per_pair;
    if (capture.samples.size() != period * reps)
        throw std::invalid_argument("capture sample count inconsistent with schedule");

    cvector avg(period, cdouble{});
    for (std::size_t r = 0; r < reps; ++r)
        for (std::size_t n = 0; n < period; ++n) {
            const cfloat s = capture.samples[r * period + n];
            avg[n] += cdouble(s.real(), s.imag());
        }
    for (auto &v : avg)
        v /= static_cast<double>(reps);

    const cvector spectrum = fft(avg);
    const auto num_tones = static_cast<std::size_t>(header.waveform.num_tones);
    const auto b0 = static_cast<std::size_t>(header.waveform.first_bin());
    const double gain_amp = db2mag(static_cast<double>(capture.gain_db));
    cvector tones(num_tones);
    for (std::size_t m = 0; m < num_tones; ++m)
        tones[m] = spectrum[b0 + m] / static_cast<double>(period) /
                   calibration.response[m] / gain_amp;
    return tones;
}

// Windowed inverse transform of the calibrated tones, scaled so the squared
// magnitude is absolute receive power in mW.
cvector delay_response(const cvector &tones, const std::vector<double> &w,
                       double sum_w, double conducted_mw)
{
    const std::size_t num_tones = tones.size();
    cvector windowed(num_tones);
    for (std::size_t m = 0; m < num_tones; ++m)
        windowed[m] = tones[m] * w[m];
    cvector h = ifft(windowed);
    const double scale =
        std::sqrt(conducted_mw) * static_cast<double>(num_tones) / sum_w;
    for (auto &v : h)
        v *= scale;
    return h;
}

void check_recording_for_analysis(const SweepRecording &recording,
                                  const CalibrationResponse &calibration)
{
    recording.header.waveform.validate();
    calibration.validate();
    if (!calibration.matches_grid(recording.header.waveform))
        throw std::invalid_argument("calibration tone grid does not match the recording");
    const auto &sched = recording.header.schedule;
    const std::size_t expected = static_cast<std::size_t>(sched.num_bursts) *
                                 sched.snapshots_per_burst * sched.num_pairs();
    if (recording.captures.size() != expected)
        throw std::invalid_argument("recording is incomplete: capture count does not match schedule");
}

} // namespace

double DirectionalPDP::noise_floor_mw() const
{
    const std::size_t tail_start = num_delay_bins - num_delay_bins / 10;
    std::vector<double> tail;
    tail.reserve((num_delay_bins - tail_start) * tx_azimuths_deg.size() *
                 rx_azimuths_deg.size());
    for (std::size_t t = 0; t < tx_azimuths_deg.size(); ++t)
        for (std::size_t r = 0; r < rx_azimuths_deg.size(); ++r)
            for (std::size_t l = tail_start; l < num_delay_bins; ++l)
                tail.push_back(at(t, r, l));
    return median_of(std::move(tail));
}

std::vector<DirectionalPDP> directional_pdp(const SweepRecording &recording,
                                            const CalibrationResponse &calibration,
                                            Window window)
{
    check_recording_for_analysis(recording, calibration);
    const auto &header = recording.header;
    const auto &sched = header.schedule;
    const auto num_tones = static_cast<std::size_t>(header.waveform.num_tones);
    const std::size_t pairs = sched.num_pairs();
    const std::size_t num_snapshots =
        static_cast<std::size_t>(sched.num_bursts) * sched.snapshots_per_burst;

    const std::vector<double> w = window_weights(window, num_tones);
    double sum_w = 0.0;
    for (double x : w)
        sum_w += x;
    const double conducted_mw = dbm2mw(header.tx_conducted_dbm);

    std::vector<double> tx_az, rx_az;
    for (const auto &r : header.tx_beam_refs)
        tx_az.push_back(r.azimuth_deg);
    for (const auto &r : header.rx_beam_refs)
        rx_az.push_back(r.azimuth_deg);

    std::vector<DirectionalPDP> out(num_snapshots);
    for (std::size_t s = 0; s < num_snapshots; ++s) {
        out[s].snapshot_index = static_cast<std::uint32_t>(s);
        out[s].tx_azimuths_deg = tx_az;
        out[s].rx_azimuths_deg = rx_az;
        out[s].delay_bin_s =
            1.0 / (header.waveform.tone_spacing_hz * static_cast<double>(num_tones));
        out[s].num_delay_bins = num_tones;
        out[s].power_mw.assign(pairs * num_tones, 0.0);
    }

    for (const auto &cap : recording.captures) {
        if (cap.snapshot_index >= num_snapshots || cap.pair_index >= pairs)
            throw std::invalid_argument("capture indices out of schedule range");
        auto &pdp = out[cap.snapshot_index];
        if (cap.pair_index == 0)
            pdp.timestamp_s = cap.timestamp_s;
        const cvector tones = calibrated_tones(cap, header, calibration);
        const cvector h = delay_response(tones, w, sum_w, conducted_mw);
        const std::size_t tx = cap.pair_index / header.rx_beam_refs.size();
        const std::size_t rx = cap.pair_index % header.rx_beam_refs.size();
        for (std::size_t l = 0; l < num_tones; ++l)
            pdp.at(tx, rx, l) = std::norm(h[l]);
    }
    return out;
}

double pdp_noise_floor_mw(const std::vector<double> &pdp_mw)
{
    if (pdp_mw.size() < 10)
        throw std::invalid_argument("pdp_noise_floor_mw: PDP too short");
    const std::size_t tail_start = pdp_mw.size() - pdp_mw.size() / 10;
    return median_of(std::vector<double>(
        pdp_mw.begin() + static_cast<std::ptrdiff_t>(tail_start), pdp_mw.end()));
}

std::vector<double> omni_pdp(const DirectionalPDP &pdp, OmniMethod method)
{
    std::vector<double> out(pdp.num_delay_bins, 0.0);
    for (std::size_t t = 0; t < pdp.tx_azimuths_deg.size(); ++t)
        for (std::size_t r = 0; r < pdp.rx_azimuths_deg.size(); ++r)
            for (std::size_t l = 0; l < pdp.num_delay_bins; ++l) {
                const double p = pdp.at(t, r, l);
                if (method == OmniMethod::max)
                    out[l] = std::max(out[l], p);
                else
                    out[l] += p;
            }
    return out;
}

std::vector<std::vector<double>> padp(const DirectionalPDP &pdp, Side side)
{
    const std::size_t own =
        side == Side::tx ? pdp.tx_azimuths_deg.size() : pdp.rx_azimuths_deg.size();
    const std::size_t other =
        side == Side::tx ? pdp.rx_azimuths_deg.size() : pdp.tx_azimuths_deg.size();
    std::vector<std::vector<double>> out(own,
                                         std::vector<double>(pdp.num_delay_bins, 0.0));
    for (std::size_t i = 0; i < own; ++i)
        for (std::size_t j = 0; j < other; ++j)
            for (std::size_t l = 0; l < pdp.num_delay_bins; ++l) {
                const double p =
                    side == Side::tx ? pdp.at(i, j, l) : pdp.at(j, i, l);
                out[i][l] = std::max(out[i][l], p);
            }
    return out;
}

std::vector<std::vector<double>> pas(const DirectionalPDP &pdp)
{
    return pas(pdp, -1.0); // no thresholding: every bin contributes
}

std::vector<std::vector<double>> pas(const DirectionalPDP &pdp, double threshold_mw)
{
    std::vector<std::vector<double>> out(
        pdp.tx_azimuths_deg.size(),
        std::vector<double>(pdp.rx_azimuths_deg.size(), 0.0));
    for (std::size_t t = 0; t < pdp.tx_azimuths_deg.size(); ++t)
        for (std::size_t r = 0; r < pdp.rx_azimuths_deg.size(); ++r)
            for (std::size_t l = 0; l < pdp.num_delay_bins; ++l) {
                const double p = pdp.at(t, r, l);
                if (p > threshold_mw)
                    out[t][r] += p;
            }
    return out;
}

std::vector<MPCEstimate> extract_mpcs(const DirectionalPDP &pdp,
                                      double noise_floor_dbm)
{
    const std::size_t nt = pdp.tx_azimuths_deg.size();
    const std::size_t nr = pdp.rx_azimuths_deg.size();
    const std::size_t nd = pdp.num_delay_bins;
    const double nth_mw = dbm2mw(noise_floor_dbm + 6.0);

    struct Peak {
        std::size_t t, r, l;
        double p;
    };
    // 3-D peak search: strictly greater than all 26 neighbors; exact ties go
    // to the lexicographically lowest (delay, tx, rx).
    std::vector<std::vector<Peak>> per_delay(nd);
    for (std::size_t t = 0; t < nt; ++t)
        for (std::size_t r = 0; r < nr; ++r)
            for (std::size_t l = 0; l < nd; ++l) {
                const double p = pdp.at(t, r, l);
                if (p <= nth_mw)
                    continue;
                bool is_peak = true;
                for (int dt = -1; dt <= 1 && is_peak; ++dt)
                    for (int dr = -1; dr <= 1 && is_peak; ++dr)
                        for (int dl = -1; dl <= 1 && is_peak; ++dl) {
                            if (dt == 0 && dr == 0 && dl == 0)
                                continue;
                            const auto ti = static_cast<std::ptrdiff_t>(t) + dt;
                            const auto ri = static_cast<std::ptrdiff_t>(r) + dr;
                            const auto li = static_cast<std::ptrdiff_t>(l) + dl;
                            if (ti < 0 || ri < 0 || li < 0 ||
                                ti >= static_cast<std::ptrdiff_t>(nt) ||
                                ri >= static_cast<std::ptrdiff_t>(nr) ||
                                li >= static_cast<std::ptrdiff_t>(nd))
                                continue;
                            const double q =
                                pdp.at(static_cast<std::size_t>(ti),
                                       static_cast<std::size_t>(ri),
                                       static_cast<std::size_t>(li));
                            if (q > p)
                                is_peak = false;
                            else if (q == p) {
                                const auto mine = std::make_tuple(l, t, r);
                                const auto theirs = std::make_tuple(
                                    static_cast<std::size_t>(li),
                                    static_cast<std::size_t>(ti),
                                    static_cast<std::size_t>(ri));
                                if (theirs < mine)
                                    is_peak = false;
                            }
                        }
                if (is_peak)
                    per_delay[l].push_back({t, r, l, p});
            }

    std::vector<MPCEstimate> mpcs;
    for (std::size_t l = 0; l < nd; ++l) {
        auto &peaks = per_delay[l];
        if (peaks.empty())
            continue;
        std::sort(peaks.begin(), peaks.end(), [](const Peak &a, const Peak &b) {
            if (a.p != b.p)
                return a.p > b.p;
            return std::make_pair(a.t, a.r) < std::make_pair(b.t, b.r);
        });
        const Peak &strongest = peaks.front();
        for (std::size_t i = 0; i < peaks.size(); ++i) {
            const Peak &pk = peaks[i];
            bool accept = i == 0;
            if (!accept && pk.p > strongest.p / 10.0)
                accept = true;
            if (!accept && pk.p > strongest.p / 100.0 && pk.t != strongest.t &&
                pk.r != strongest.r)
                accept = true;
            if (accept)
                mpcs.push_back({pk.l, pk.t, pk.r, mw2dbm(pk.p),
                                pdp.snapshot_index});
        }
    }
    return mpcs;
}

double rms_delay_spread(const std::vector<double> &pdp_mw, double delay_bin_s,
                        double threshold_db)
{
    if (pdp_mw.size() < 10)
        throw std::invalid_argument("rms_delay_spread: PDP too short");
    if (delay_bin_s <= 0.0)
        throw std::invalid_argument("rms_delay_spread: bad delay bin");
    const double threshold_mw = pdp_noise_floor_mw(pdp_mw) * db2lin(threshold_db);

    double total = 0.0, first = 0.0, second = 0.0;
    for (std::size_t l = 0; l < pdp_mw.size(); ++l) {
        if (pdp_mw[l] <= threshold_mw)
            continue;
        const double tau = static_cast<double>(l) * delay_bin_s;
        total += pdp_mw[l];
        first += pdp_mw[l] * tau;
        second += pdp_mw[l] * tau * tau;
    }
    if (total <= 0.0)
        throw std::invalid_argument("rms_delay_spread: no power above threshold");
    const double mean = first / total;
    const double var = std::max(second / total - mean * mean, 0.0);
    return std::sqrt(var);
}

AngularStats angular_stats(const std::vector<double> &angles_deg,
                           const std::vector<double> &power)
{
    if (angles_deg.size() != power.size() || angles_deg.empty())
        throw std::invalid_argument("angular_stats: angle/power size mismatch");
    double total = 0.0;
    cdouble phasor{0.0, 0.0};
    for (std::size_t i = 0; i < angles_deg.size(); ++i) {
        if (power[i] < 0.0)
            throw std::invalid_argument("angular_stats: negative power");
        total += power[i];
        phasor += power[i] * std::polar(1.0, deg2rad(angles_deg[i]));
    }
    if (total <= 0.0)
        throw std::invalid_argument("angular_stats: zero total power");
    const cdouble r = phasor / total;
    AngularStats stats;
    stats.mean_angle_deg = rad2deg(std::arg(r));
    stats.angular_spread_deg =
        rad2deg(std::sqrt(std::max(1.0 - std::norm(r), 0.0)));
    return stats;
}

DelayDopplerSpectrum delay_doppler(const SweepRecording &recording,
                                   const CalibrationResponse &calibration,
                                   const PairSelection &selection,
                                   std::uint32_t burst_index, Window delay_window,
                                   Window snapshot_window)
{
    check_recording_for_analysis(recording, calibration);
    const auto &header = recording.header;
    const auto &sched = header.schedule;
    const std::size_t snaps = sched.snapshots_per_burst;
    if (snaps < 2)
        throw std::invalid_argument("delay_doppler: need at least 2 snapshots per burst");
    if (burst_index >= sched.num_bursts)
        throw std::invalid_argument("delay_doppler: burst index out of range");
    const std::size_t pairs = sched.num_pairs();
    const auto num_tones = static_cast<std::size_t>(header.waveform.num_tones);

    const std::vector<double> w = window_weights(delay_window, num_tones);
    double sum_w = 0.0;
    for (double x : w)
        sum_w += x;
    const double conducted_mw = dbm2mw(header.tx_conducted_dbm);

    const bool fixed = selection.mode == PairSelection::Mode::fixed;
    std::size_t fixed_pair = 0;
    if (fixed) {
        if (selection.tx_index >= sched.tx_beams.size() ||
            selection.rx_index >= sched.rx_beams.size())
            throw std::invalid_argument("delay_doppler: fixed pair out of range");
        fixed_pair = selection.tx_index * sched.rx_beams.size() + selection.rx_index;
    }

    // Complex delay responses, [pair][snapshot][delay] (selected pairs only).
    const std::size_t first_snap = static_cast<std::size_t>(burst_index) * snaps;
    std::vector<std::vector<cvector>> resp(
        fixed ? 1 : pairs, std::vector<cvector>(snaps));
    std::vector<double> times(snaps, 0.0);
    std::vector<bool> seen(snaps, false);
    for (const auto &cap : recording.captures) {
        if (cap.snapshot_index < first_snap || cap.snapshot_index >= first_snap + snaps)
            continue;
        const std::size_t s = cap.snapshot_index - first_snap;
        if (fixed && cap.pair_index != fixed_pair)
            continue;
        const cvector tones = calibrated_tones(cap, header, calibration);
        resp[fixed ? 0 : cap.pair_index][s] =
            delay_response(tones, w, sum_w, conducted_mw);
        if (fixed || cap.pair_index == 0) {
            times[s] = cap.timestamp_s;
            seen[s] = true;
        }
    }
    for (std::size_t s = 0; s < snaps; ++s)
        if (!seen[s])
            throw std::invalid_argument("delay_doppler: burst is missing snapshots");
    const double step = times[1] - times[0];
    for (std::size_t s = 1; s < snaps; ++s)
        if (std::abs(times[s] - times[s - 1] - step) > 1e-9)
            throw std::invalid_argument("delay_doppler: nonuniform snapshot timestamps");

    const std::vector<double> v = window_weights(snapshot_window, snaps);
    double sum_v = 0.0;
    for (double x : v)
        sum_v += x;

    // Doppler axis, symmetric about zero; even snapshot counts alias the
    // Nyquist rate, which therefore appears at both ends.
    const auto half = static_cast<std::ptrdiff_t>(snaps / 2);
    std::vector<std::ptrdiff_t> k_signed;
    for (std::ptrdiff_t k = -half; k <= (snaps % 2 == 0 ? half : half); ++k)
        k_signed.push_back(k);
    const double doppler_res = 1.0 / (static_cast<double>(snaps) * step);

    DelayDopplerSpectrum spec;
    spec.doppler_hz.reserve(k_signed.size());
    for (const auto k : k_signed)
        spec.doppler_hz.push_back(static_cast<double>(k) * doppler_res);
    spec.delay_s.resize(num_tones);
    const double bin_s =
        1.0 / (header.waveform.tone_spacing_hz * static_cast<double>(num_tones));
    for (std::size_t l = 0; l < num_tones; ++l)
        spec.delay_s[l] = static_cast<double>(l) * bin_s;
    spec.power_mw.assign(num_tones * k_signed.size(), 0.0);

    for (std::size_t l = 0; l < num_tones; ++l) {
        // Pick the beam pair: fixed, or strongest on time average per bin.
        std::size_t use = 0;
        if (!fixed) {
            double best = -1.0;
            for (std::size_t p = 0; p < resp.size(); ++p) {
                double acc = 0.0;
                for (std::size_t s = 0; s < snaps; ++s)
                    acc += std::norm(resp[p][s][l]);
                if (acc > best) {
                    best = acc;
                    use = p;
                }
            }
        }
        for (std::size_t j = 0; j < k_signed.size(); ++j) {
            const auto k = ((k_signed[j] % static_cast<std::ptrdiff_t>(snaps)) +
                            static_cast<std::ptrdiff_t>(snaps)) %
                           static_cast<std::ptrdiff_t>(snaps);
            cdouble acc{0.0, 0.0};
            for (std::size_t s = 0; s < snaps; ++s)
                acc += v[s] * resp[use][s][l] *
                       std::polar(1.0, -two_pi * static_cast<double>(k) *
                                           static_cast<double>(s) /
                                           static_cast<double>(snaps));
            spec.power_mw[l * k_signed.size() + j] = std::norm(acc / sum_v);
        }
    }
    return spec;
}

PathLossFit fit_path_loss(const std::vector<std::pair<double, double>> &points,
                          PathLossModel model, double carrier_hz)
{
    if (carrier_hz <= 0.0)
        throw std::invalid_argument("fit_path_loss: carrier must be > 0");
    std::vector<double> x, y;
    for (const auto &[d, pl] : points) {
        if (!(d > 0.0) || !std::isfinite(pl))
            throw std::invalid_argument("fit_path_loss: bad sample");
        x.push_back(10.0 * std::log10(d));
        y.push_back(pl);
    }
    std::vector<double> distinct = x;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end(),
                               [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                   distinct.end());
    const std::size_t min_distinct = model == PathLossModel::close_in ? 2 : 3;
    if (distinct.size() < min_distinct)
        throw std::invalid_argument("fit_path_loss: not enough distinct distances");

    PathLossFit fit;
    fit.model = model;
    const auto n_pts = static_cast<double>(points.size());
    if (model == PathLossModel::close_in) {
        fit.intercept_db = free_space_path_loss_db(1.0, carrier_hz);
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sxx += x[i] * x[i];
            sxy += x[i] * (y[i] - fit.intercept_db);
        }
        if (sxx <= 0.0)
            throw std::invalid_argument("fit_path_loss: degenerate distances");
        fit.n = sxy / sxx;
        double ss = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - fit.intercept_db - fit.n * x[i];
            fit.residuals_db.push_back(r);
            ss += r * r;
        }
        fit.shadowing_sigma_db =
            points.size() > 1 ? std::sqrt(ss / (n_pts - 1.0)) : 0.0;
    } else {
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            mx += x[i];
            my += y[i];
        }
        mx /= n_pts;
        my /= n_pts;
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sxx += (x[i] - mx) * (x[i] - mx);
            sxy += (x[i] - mx) * (y[i] - my);
        }
        if (sxx <= 0.0)
            throw std::invalid_argument("fit_path_loss: degenerate distances");
        const double slope = sxy / sxx;
        fit.alpha = slope;
        fit.beta_db = my - slope * mx;
        fit.gamma = 0.0; // single carrier: frequency slope unidentifiable
        double ss = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - (slope * x[i] + fit.beta_db);
            fit.residuals_db.push_back(r);
            ss += r * r;
        }
        fit.shadowing_sigma_db =
            points.size() > 2 ? std::sqrt(ss / (n_pts - 2.0)) : 0.0;
    }
    return fit;
}

BeamTrackingSeries beam_tracking_gain(
    const std::vector<std::vector<std::vector<double>>> &pas_series)
{
    if (pas_series.empty())
        throw std::invalid_argument("beam_tracking_gain: empty series");
    const std::size_t nt = pas_series.front().size();
    const std::size_t nr = nt > 0 ? pas_series.front().front().size() : 0;
    if (nt == 0 || nr == 0)
        throw std::invalid_argument("beam_tracking_gain: empty PAS matrix");

    std::vector<std::vector<double>> avg(nt, std::vector<double>(nr, 0.0));
    for (const auto &snap : pas_series) {
        if (snap.size() != nt)
            throw std::invalid_argument("beam_tracking_gain: ragged series");
        for (std::size_t t = 0; t < nt; ++t) {
            if (snap[t].size() != nr)
                throw std::invalid_argument("beam_tracking_gain: ragged series");
            for (std::size_t r = 0; r < nr; ++r)
                avg[t][r] += snap[t][r];
        }
    }
    BeamTrackingSeries series;
    double best = -1.0;
    for (std::size_t t = 0; t < nt; ++t)
        for (std::size_t r = 0; r < nr; ++r)
            if (avg[t][r] > best) {
                best = avg[t][r];
                series.fixed_tx = t;
                series.fixed_rx = r;
            }
    for (const auto &snap : pas_series) {
        double inst = 0.0;
        for (std::size_t t = 0; t < nt; ++t)
            for (std::size_t r = 0; r < nr; ++r)
                inst = std::max(inst, snap[t][r]);
        series.fixed_dbm.push_back(
            mw2dbm(std::max(snap[series.fixed_tx][series.fixed_rx], 1e-300)));
        series.instantaneous_dbm.push_back(mw2dbm(std::max(inst, 1e-300)));
    }
    return series;
}

} // namespace mmsounder
