// SPDX-License-Identifier: Apache-2.0
//
// mmsounder - acceptance gate: one pass/fail line per delivered capability

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mmsounder/analysis.hpp"
#include "mmsounder/fft.hpp"
#include "mmsounder/storage.hpp"

using namespace mmsounder;

namespace {

int g_failures = 0;

std::string strf(const char *format, ...)
{
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return std::string(buf);
}

void report(int criterion, const char *what, bool pass, const std::string &detail)
{
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion,
                what, detail.c_str());
    std::fflush(stdout);
    if (!pass)
        ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

/// Shared low-PAPR 801-tone sounding spec; computed once, timed by criterion 1.
const MultitoneSpec &optimized_801()
{
    static const MultitoneSpec spec = [] {
        MultitoneSpec s;
        s.phases_rad.assign(static_cast<std::size_t>(s.num_tones), 0.0);
        return optimize_phases(s, 0.8, 300, 1);
    }();
    return spec;
}

cvector to_cvector(const cfvector &samples)
{
    cvector out(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        out[i] = cdouble(samples[i].real(), samples[i].imag());
    return out;
}

/// Complex tone values of a capture's first repetition period.
cvector capture_tones(const Capture &capture, const MultitoneSpec &spec)
{
    cvector x = to_cvector(capture.samples);
    x.resize(static_cast<std::size_t>(spec.period_samples()));
    const cvector spectrum = fft(x);
    const std::size_t b0 = static_cast<std::size_t>(spec.first_bin());
    cvector tones(static_cast<std::size_t>(spec.num_tones));
    for (std::size_t m = 0; m < tones.size(); ++m)
        tones[m] = spectrum[b0 + m];
    return tones;
}

/// Phase (degrees, in (-180, 180]) of a capture relative to a reference.
double relative_phase_deg(const cvector &tones, const cvector &reference)
{
    cdouble acc{0.0, 0.0};
    for (std::size_t m = 0; m < tones.size(); ++m)
        acc += tones[m] * std::conj(reference[m]);
    return rad2deg(std::arg(acc));
}

Scene los_scene(double distance_m)
{
    Scene scene;
    scene.name = "acceptance-los";
    scene.duration_s = 1.0;
    scene.tx.position = {0.0, 0.0, 5.0};
    scene.tx.boresight_azimuth_deg = 0.0;
    scene.rx.position = {distance_m, 0.0, 5.0};
    scene.rx.boresight_azimuth_deg = 180.0;
    return scene;
}

/// 41-tone sounding grid on the full sample rate; cheap to simulate, keeps
/// the 2 us waveform period of the deployment grid.
MultitoneSpec small_spec()
{
    MultitoneSpec spec;
    spec.num_tones = 41;
    spec.phases_rad = zadoff_chu_phases(spec.num_tones, 1);
    return spec;
}

CalibrationResponse calibration_for(const MultitoneWaveform &waveform,
                                    const RecordingHeader &header)
{
    return back_to_back_calibration(waveform, header.rx.awg_bits,
                                    header.tx_conducted_dbm,
                                    identity_response(waveform.spec));
}

std::vector<double> azimuth_fan(int step_deg)
{
    std::vector<double> az;
    for (int a = -45; a <= 45; a += step_deg)
        az.push_back(static_cast<double>(a));
    return az;
}

std::string slurp(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

// --------------------------------------------------------------------------
// 1. Sounding waveform: optimized PAPR at or below 1 dB, at least 1 dB below
//    a 4x-oversampled constant-envelope sequence on the same bandwidth.
void criterion_1()
{
    const auto t0 = std::chrono::steady_clock::now();
    const MultitoneWaveform wf = synthesize(optimized_801());
    const MultitoneWaveform zc =
        zadoff_chu_baseline(wf.spec.num_tones, 1, 4.0 * wf.spec.bandwidth_hz(),
                            wf.spec.bandwidth_hz());
    const double secs = seconds_since(t0);
    const double margin = zc.papr_db - wf.papr_db;
    const bool pass = wf.papr_db <= 1.0 && margin >= 1.0 && secs < 30.0;
    report(1, "waveform PAPR target and constant-envelope baseline margin", pass,
           strf("papr=%.4f dB, baseline=%.4f dB, margin=%.4f dB, %.1f s",
                wf.papr_db, zc.papr_db, margin, secs));
}

// --------------------------------------------------------------------------
// 2. Link budget arithmetic at 57 dBm EIRP and a 19 dBi receive beam.
void criterion_2()
{
    const ReceiverConfig rx;
    const LinkBudget lb = link_budget(rx, 57.0, 19.0);
    const bool pass = std::abs(lb.sensitivity_dbm - (-83.0)) <= 0.05 &&
                      std::abs(lb.eis_dbm - (-102.0)) <= 0.05 &&
                      std::abs(lb.max_path_loss_db - 159.0) <= 0.05 &&
                      std::abs(lb.dynamic_range_db - 77.0) <= 0.05;
    report(2, "link budget: sensitivity, EIS, max path loss, dynamic range",
           pass,
           strf("%.4f dBm / %.4f dBm / %.4f dB / %.4f dB", lb.sensitivity_dbm,
                lb.eis_dbm, lb.max_path_loss_db, lb.dynamic_range_db));
}

// --------------------------------------------------------------------------
// 3. Sweep timing: 10x10 single-repetition snapshot in 400 us, 19x19
//    ten-repetition sweep in 14.44 ms; the same stride lands in recorded
//    capture timestamps.
void criterion_3()
{
    SweepSchedule dyn;
    for (std::uint32_t i = 0; i < 10; ++i) {
        dyn.tx_beams.push_back(i);
        dyn.rx_beams.push_back(i);
    }
    dyn.repetitions_per_pair = 1;
    dyn.snapshots_per_burst = 1;
    dyn.num_bursts = 1;

    SweepSchedule stat;
    for (std::uint32_t i = 0; i < 19; ++i) {
        stat.tx_beams.push_back(i);
        stat.rx_beams.push_back(i);
    }
    stat.repetitions_per_pair = 10;

    const bool arithmetic =
        std::abs(dyn.snapshot_time_s() - 400e-6) <= 1e-12 &&
        std::abs(stat.snapshot_time_s() - 14.44e-3) <= 1e-12;

    const MultitoneWaveform wf = synthesize(small_spec());
    const ArrayGeometry geom;
    const BeamCodebook cb = build_codebook(geom, azimuth_fan(10), {0.0}, 11.25);
    const ClockModel clk;
    const ReceiverConfig rxc;
    const SweepRecording rec =
        run_sweep(los_scene(30.0), wf, cb, cb, dyn, clk, rxc, 43.0, 1);
    bool stamps =
        rec.captures.size() == 100 &&
        std::abs(rec.header.schedule.snapshot_time_s() - 400e-6) <= 1e-12;
    for (std::size_t i = 0; i < rec.captures.size() && stamps; ++i)
        stamps = std::abs(rec.captures[i].timestamp_s -
                          4e-6 * static_cast<double>(i)) <= 1e-12;

    report(3, "sweep timing: 400 us dynamic snapshot, 14.44 ms static sweep",
           arithmetic && stamps,
           strf("dynamic=%.9g s, static=%.9g s, %zu captures on a 4 us stride",
                dyn.snapshot_time_s(), stat.snapshot_time_s(),
                rec.captures.size()));
}

// --------------------------------------------------------------------------
// 4. End-to-end path loss: 100 noiseless line-of-sight sweeps between 30 and
//    122 m recover a close-in exponent of 2.00 +- 0.01 (+- 0.1 after adding
//    1 dB lognormal shadowing), and FSPL at 6 m evaluates to 76.9 dB.
void criterion_4()
{
    const auto t0 = std::chrono::steady_clock::now();
    const MultitoneWaveform wf = synthesize(optimized_801());
    const ArrayGeometry geom;
    const BeamCodebook cb = build_codebook(geom, {0.0}, {0.0}, 11.25);
    SweepSchedule sch;
    sch.tx_beams = {0};
    sch.rx_beams = {0};
    sch.repetitions_per_pair = 1;
    sch.snapshots_per_burst = 1;
    sch.num_bursts = 1;
    ClockModel clk;
    clk.phase_noise_std_deg = 0.0;
    ReceiverConfig rxc;
    rxc.thermal_noise = false;

    CalibrationResponse cal;
    std::vector<std::pair<double, double>> points;
    const double rx_gain_dbi = cb.beams[0].boresight_gain_dbi;
    for (int i = 0; i < 100; ++i) {
        const double d = 30.0 + 92.0 * static_cast<double>(i) / 99.0;
        const SweepRecording rec =
            run_sweep(los_scene(d), wf, cb, cb, sch, clk, rxc, 43.0, 1);
        if (points.empty())
            cal = calibration_for(wf, rec.header);
        const std::vector<DirectionalPDP> pdps =
            directional_pdp(rec, cal, Window::none);
        const double prx_mw = std::accumulate(pdps.front().power_mw.begin(),
                                              pdps.front().power_mw.end(), 0.0);
        points.emplace_back(d, 43.0 + rx_gain_dbi - mw2dbm(prx_mw));
    }

    const PathLossFit clean =
        fit_path_loss(points, PathLossModel::close_in, 27.85e9);

    std::mt19937_64 rng(42);
    std::normal_distribution<double> shadow(0.0, 1.0);
    std::vector<std::pair<double, double>> noisy = points;
    for (auto &p : noisy)
        p.second += shadow(rng);
    const PathLossFit shadowed =
        fit_path_loss(noisy, PathLossModel::close_in, 27.85e9);

    const double fspl6 = free_space_path_loss_db(6.0, 27.85e9);
    const double secs = seconds_since(t0);
    const bool pass = std::abs(clean.n - 2.0) <= 0.01 &&
                      std::abs(shadowed.n - 2.0) <= 0.1 &&
                      std::abs(fspl6 - 76.9) <= 0.05 && secs < 10.0;
    report(4, "free-space path-loss exponent recovered from recorded sweeps",
           pass,
           strf("n=%.5f, shadowed n=%.4f, FSPL(6 m)=%.4f dB, %.1f s", clean.n,
                shadowed.n, fspl6, secs));
}

// --------------------------------------------------------------------------
// 5. Clock models: a 2.77e-10 fractional offset between free-running
//    references accumulates 4.0 deg of carrier phase over 1.444 ms; shared
//    references show the configured 5.8 deg trigger-jitter std over 1000
//    captures (within 10%).
void criterion_5()
{
    const auto t0 = std::chrono::steady_clock::now();
    const MultitoneSpec spec = small_spec();
    const MultitoneWaveform wf = synthesize(spec);
    const ArrayGeometry geom;
    const BeamCodebook cb = build_codebook(geom, {0.0}, {0.0}, 11.25);
    SweepSchedule sch;
    sch.tx_beams = {0};
    sch.rx_beams = {0};
    sch.repetitions_per_pair = 1;
    sch.num_bursts = 1;
    ReceiverConfig rxc;
    rxc.thermal_noise = false;
    const Scene scene = los_scene(30.0);

    sch.snapshots_per_burst = 400;
    ClockModel freerun;
    freerun.mode = ClockMode::free_running;
    freerun.fractional_offset = 2.77e-10;
    freerun.phase_noise_std_deg = 0.0;
    const SweepRecording drift_rec =
        run_sweep(scene, wf, cb, cb, sch, freerun, rxc, 43.0, 1);
    const cvector ref = capture_tones(drift_rec.captures[0], spec);
    const std::size_t probe = 361; // 361 captures x 4 us = 1.444 ms
    const double drift_deg = std::abs(
        relative_phase_deg(capture_tones(drift_rec.captures[probe], spec), ref));
    const double expected_deg = 360.0 * scene.carrier_hz *
                                freerun.fractional_offset *
                                drift_rec.captures[probe].timestamp_s;

    sch.snapshots_per_burst = 1000;
    const ClockModel shared; // shared mode, 5.8 deg jitter by default
    const SweepRecording jitter_rec =
        run_sweep(scene, wf, cb, cb, sch, shared, rxc, 43.0, 1);
    const cvector jref = capture_tones(jitter_rec.captures[0], spec);
    std::vector<double> phases;
    phases.reserve(jitter_rec.captures.size());
    for (const Capture &c : jitter_rec.captures)
        phases.push_back(relative_phase_deg(capture_tones(c, spec), jref));
    const double mean = std::accumulate(phases.begin(), phases.end(), 0.0) /
                        static_cast<double>(phases.size());
    double ss = 0.0;
    for (double p : phases)
        ss += (p - mean) * (p - mean);
    const double jitter_std_deg =
        std::sqrt(ss / static_cast<double>(phases.size() - 1));

    const double secs = seconds_since(t0);
    const bool pass =
        std::abs(drift_deg - expected_deg) <= 0.2 &&
        std::abs(expected_deg - 4.0103) <= 0.01 &&
        std::abs(jitter_std_deg - shared.phase_noise_std_deg) <=
            0.1 * shared.phase_noise_std_deg &&
        secs < 30.0;
    report(5, "clock drift slope and trigger-jitter statistics", pass,
           strf("drift=%.4f deg (expected %.4f) at %.3f ms, jitter std=%.3f deg"
                ", %.1f s",
                drift_deg, expected_deg,
                drift_rec.captures[probe].timestamp_s * 1e3, jitter_std_deg,
                secs));
}

// --------------------------------------------------------------------------
// 6. Repetition averaging: ten coherent repetitions buy 10 +- 0.5 dB of SNR
//    with a stable clock; a linear drift of 20 deg per repetition (180 deg
//    across the window) costs the closed-form coherence loss within 0.3 dB.
void criterion_6()
{
    const MultitoneSpec spec = small_spec();
    const MultitoneWaveform wf = synthesize(spec);
    const ArrayGeometry geom;
    const BeamCodebook cb = build_codebook(geom, {0.0}, {0.0}, 11.25);
    SweepSchedule sch;
    sch.tx_beams = {0};
    sch.rx_beams = {0};
    sch.repetitions_per_pair = 10;
    sch.snapshots_per_burst = 20;
    sch.num_bursts = 1;
    const ReceiverConfig rxc; // thermal noise on
    const Scene scene = los_scene(200.0);

    const ClockModel stable;
    const AveragingProbeResult good = averaging_gain_probe(
        run_sweep(scene, wf, cb, cb, sch, stable, rxc, 43.0, 1));

    const double rep_stride_s = sch.waveform_duration_s + sch.guard_s;
    ClockModel drifting;
    drifting.mode = ClockMode::free_running;
    drifting.phase_noise_std_deg = 0.0;
    drifting.fractional_offset =
        20.0 / (360.0 * scene.carrier_hz * rep_stride_s);
    const AveragingProbeResult bad = averaging_gain_probe(
        run_sweep(scene, wf, cb, cb, sch, drifting, rxc, 43.0, 1));

    const double reps = static_cast<double>(sch.repetitions_per_pair);
    const double phi = deg2rad(20.0);
    const double coherent =
        std::sin(reps * phi / 2.0) / (reps * std::sin(phi / 2.0));
    const double drift_loss_db = -20.0 * std::log10(std::abs(coherent));
    const double expected_bad_db = 10.0 * std::log10(reps) - drift_loss_db;

    const bool pass = std::abs(good.improvement_db - 10.0) <= 0.5 &&
                      std::abs(bad.improvement_db - expected_bad_db) <= 0.3;
    report(6, "averaging gain, stable clock and 180 deg linear drift", pass,
           strf("stable=%.3f dB, drifting=%.3f dB (expected %.3f, loss %.4f dB)",
                good.improvement_db, bad.improvement_db, expected_bad_db,
                drift_loss_db));
}

// --------------------------------------------------------------------------
// 7. Delay-Doppler: a static link peaks at (LOS delay, 0 Hz) at least 30 dB
//    above the median cell; a 13.39 m/s crossing reflector sampled with a
//    20-snapshot, 400 us burst lands within one 125 Hz bin of +1.25 kHz.
void criterion_7()
{
    const MultitoneWaveform wf = synthesize(optimized_801());
    const ArrayGeometry geom;
    const ClockModel clk;
    const ReceiverConfig rxc;

    const BeamCodebook mono = build_codebook(geom, {0.0}, {0.0}, 11.25);
    SweepSchedule sch;
    sch.tx_beams = {0};
    sch.rx_beams = {0};
    sch.repetitions_per_pair = 1;
    sch.snapshots_per_burst = 20;
    sch.num_bursts = 1;
    const SweepRecording still =
        run_sweep(los_scene(30.0), wf, mono, mono, sch, clk, rxc, 43.0, 1);
    const CalibrationResponse cal = calibration_for(wf, still.header);
    const PairSelection fixed;
    const DelayDopplerSpectrum dd_still = delay_doppler(still, cal, fixed);
    std::size_t best_l = 0, best_j = 0;
    double best = -1.0;
    for (std::size_t l = 0; l < dd_still.delay_s.size(); ++l)
        for (std::size_t j = 0; j < dd_still.doppler_hz.size(); ++j)
            if (dd_still.at(l, j) > best) {
                best = dd_still.at(l, j);
                best_l = l;
                best_j = j;
            }
    std::vector<double> cells = dd_still.power_mw;
    std::nth_element(cells.begin(),
                     cells.begin() + static_cast<std::ptrdiff_t>(cells.size() / 2),
                     cells.end());
    const double median = cells[cells.size() / 2];
    const double clearance_db = 10.0 * std::log10(best / median);
    const double bin_s = dd_still.delay_s[1] - dd_still.delay_s[0];
    const long expected_l = std::lround(30.0 / speed_of_light / bin_s);
    const bool still_ok =
        std::llabs(static_cast<long long>(best_l) - expected_l) <= 1 &&
        std::abs(dd_still.doppler_hz[best_j]) < 1e-9 && clearance_db >= 30.0;

    Scene mover;
    mover.name = "acceptance-mover";
    mover.duration_s = 1.0;
    mover.tx.position = {0.0, -51.96, 2.0};
    mover.tx.boresight_azimuth_deg = 60.0;
    mover.rx.position = {0.0, 51.96, 2.0};
    mover.rx.boresight_azimuth_deg = -60.0;
    Scatterer cart;
    cart.name = "cart";
    cart.kind = ScattererKind::point_reflector;
    cart.reflection_loss_db = 0.0;
    cart.trajectory = {{0.0, {30.0, 0.0, 1.0}}, {1.0, {30.0 - 13.39, 0.0, 1.0}}};
    mover.scatterers.push_back(cart);

    const BeamCodebook fan = build_codebook(geom, azimuth_fan(5), {0.0}, 11.25);
    SweepSchedule dyn;
    for (std::uint32_t b = 0; b < 19; b += 2) {
        dyn.tx_beams.push_back(b);
        dyn.rx_beams.push_back(b);
    }
    dyn.repetitions_per_pair = 1;
    dyn.snapshots_per_burst = 20;
    dyn.num_bursts = 1;
    const SweepRecording moving =
        run_sweep(mover, wf, fan, fan, dyn, clk, rxc, 43.0, 1);
    PairSelection per_bin;
    per_bin.mode = PairSelection::Mode::per_bin_max;
    const DelayDopplerSpectrum dd_mov = delay_doppler(moving, cal, per_bin);

    const auto dist = [](const vec3d &a, const vec3d &b) {
        const double dx = a[0] - b[0];
        const double dy = a[1] - b[1];
        const double dz = a[2] - b[2];
        return std::sqrt(dx * dx + dy * dy + dz * dz);
    };
    const vec3d p0{30.0, 0.0, 1.0};
    const double path_delay = (dist(p0, mover.tx.position) +
                               dist(p0, mover.rx.position)) /
                              speed_of_light;
    const long row = std::lround(path_delay / bin_s);
    std::size_t ml = 0, mj = 0;
    double mbest = -1.0;
    for (long l = row - 5; l <= row + 5; ++l) {
        if (l < 0 || l >= static_cast<long>(dd_mov.delay_s.size()))
            continue;
        for (std::size_t j = 0; j < dd_mov.doppler_hz.size(); ++j) {
            if (dd_mov.doppler_hz[j] < -1e-9)
                continue; // the Nyquist bin is duplicated; keep the +half
            if (dd_mov.at(static_cast<std::size_t>(l), j) > mbest) {
                mbest = dd_mov.at(static_cast<std::size_t>(l), j);
                ml = static_cast<std::size_t>(l);
                mj = j;
            }
        }
    }
    const double doppler_hz = dd_mov.doppler_hz[mj];
    const bool moving_ok =
        std::llabs(static_cast<long long>(ml) - row) <= 2 &&
        std::abs(doppler_hz - 1250.0) <= 125.0 + 1e-9;

    report(7, "delay-Doppler peaks: static LOS and 13.39 m/s crossing",
           still_ok && moving_ok,
           strf("static peak bin %zu (expected %ld), %.1f dB over median; "
                "mover %.0f Hz at bin %zu (expected row %ld)",
                best_l, expected_l, clearance_db, doppler_hz, ml, row));
}

// --------------------------------------------------------------------------
// 8. Path extraction audit: 120 synthetic beam-delay cubes with exponential
//    noise and 1-6 single-bin paths at 12-26 dB SNR. At least 95% of paths
//    must come back delay-bin-exact with both beams within one 5 deg step,
//    and every returned path must satisfy the documented acceptance rules.
void criterion_8()
{
    const auto t0 = std::chrono::steady_clock::now();
    const ArrayGeometry geom;
    const std::vector<double> az = azimuth_fan(5);
    const BeamCodebook cb = build_codebook(geom, az, {0.0}, 11.25);
    const std::size_t nb = cb.beams.size();
    const std::size_t nd = 801;
    const double n0_mw = 1e-12;

    int total_paths = 0;
    int detected = 0;
    int violations = 0;
    const int trials = 120;
    for (int trial = 0; trial < trials; ++trial) {
        std::mt19937_64 rng(9000 + static_cast<std::uint64_t>(trial));
        std::exponential_distribution<double> noise(1.0 / n0_mw);
        std::uniform_int_distribution<int> path_count(1, 6);
        std::uniform_int_distribution<int> bin_draw(20, 360);
        std::uniform_real_distribution<double> angle(-42.0, 42.0);
        std::uniform_real_distribution<double> snr_db(12.0, 26.0);

        DirectionalPDP pdp;
        pdp.tx_azimuths_deg = az;
        pdp.rx_azimuths_deg = az;
        pdp.delay_bin_s = 1.0 / (801.0 * 500e3);
        pdp.num_delay_bins = nd;
        pdp.power_mw.resize(nb * nb * nd);
        for (double &v : pdp.power_mw)
            v = noise(rng);

        const double floor_mw = pdp_noise_floor_mw(omni_pdp(pdp));
        const double floor_dbm = mw2dbm(floor_mw);

        struct TruePath {
            int bin;
            double dod_deg;
            double doa_deg;
        };
        std::vector<TruePath> paths;
        const int want = path_count(rng);
        while (static_cast<int>(paths.size()) < want) {
            const int b = bin_draw(rng);
            bool separated = true;
            for (const TruePath &p : paths)
                separated = separated && std::abs(p.bin - b) >= 3;
            if (!separated)
                continue;
            paths.push_back({b, angle(rng), angle(rng)});
        }
        for (const TruePath &p : paths) {
            const auto map_db =
                beam_pair_power_map(cb, cb, p.dod_deg, 0.0, p.doa_deg, 0.0, 0.0);
            double best_db = -1e300;
            for (const auto &row : map_db)
                for (double v : row)
                    best_db = std::max(best_db, v);
            const double peak_mw = floor_mw * db2lin(snr_db(rng));
            for (std::size_t t = 0; t < nb; ++t)
                for (std::size_t r = 0; r < nb; ++r)
                    pdp.at(t, r, static_cast<std::size_t>(p.bin)) +=
                        peak_mw * db2lin(map_db[t][r] - best_db);
        }

        const std::vector<MPCEstimate> mpcs = extract_mpcs(pdp, floor_dbm);

        total_paths += want;
        for (const TruePath &p : paths) {
            bool hit = false;
            for (const MPCEstimate &m : mpcs)
                hit = hit ||
                      (m.delay_bin == static_cast<std::size_t>(p.bin) &&
                       std::abs(az[m.tx_beam] - p.dod_deg) <= 5.001 &&
                       std::abs(az[m.rx_beam] - p.doa_deg) <= 5.001);
            detected += hit ? 1 : 0;
        }

        // Rule audit: threshold, reported power, 3-D peak property, and the
        // per-delay-bin 10/20 dB sidelobe-ghost acceptance logic.
        for (const MPCEstimate &m : mpcs) {
            const double cell = pdp.at(m.tx_beam, m.rx_beam, m.delay_bin);
            if (m.power_dbm < floor_dbm + 6.0 - 1e-9)
                ++violations;
            if (std::abs(m.power_dbm - mw2dbm(cell)) > 1e-9)
                ++violations;
            bool local_max = true;
            for (int dl = -1; dl <= 1; ++dl)
                for (int dt = -1; dt <= 1; ++dt)
                    for (int dr = -1; dr <= 1; ++dr) {
                        if (dl == 0 && dt == 0 && dr == 0)
                            continue;
                        const long l = static_cast<long>(m.delay_bin) + dl;
                        const long t = static_cast<long>(m.tx_beam) + dt;
                        const long r = static_cast<long>(m.rx_beam) + dr;
                        if (l < 0 || t < 0 || r < 0 ||
                            l >= static_cast<long>(nd) ||
                            t >= static_cast<long>(nb) ||
                            r >= static_cast<long>(nb))
                            continue;
                        local_max =
                            local_max &&
                            cell >= pdp.at(static_cast<std::size_t>(t),
                                           static_cast<std::size_t>(r),
                                           static_cast<std::size_t>(l)) -
                                        1e-15;
                    }
            if (!local_max)
                ++violations;
        }
        std::map<std::size_t, const MPCEstimate *> strongest;
        for (const MPCEstimate &m : mpcs) {
            const auto it = strongest.find(m.delay_bin);
            if (it == strongest.end() || m.power_dbm > it->second->power_dbm)
                strongest[m.delay_bin] = &m;
        }
        for (const MPCEstimate &m : mpcs) {
            const MPCEstimate *ref = strongest[m.delay_bin];
            if (ref == &m)
                continue;
            const bool within_10 = m.power_dbm >= ref->power_dbm - 10.0 - 1e-9;
            const bool within_20_differing =
                m.power_dbm >= ref->power_dbm - 20.0 - 1e-9 &&
                m.tx_beam != ref->tx_beam && m.rx_beam != ref->rx_beam;
            if (!within_10 && !within_20_differing)
                ++violations;
        }
    }

    const double rate =
        static_cast<double>(detected) / static_cast<double>(total_paths);
    const double secs = seconds_since(t0);
    const bool pass = rate >= 0.95 && violations == 0 && secs < 300.0;
    report(8, "synthetic path-extraction sweep: detection and rule audit", pass,
           strf("%d/%d detected (%.1f%%), %d rule violations, %d trials, %.1f s",
                detected, total_paths, 100.0 * rate, violations, trials, secs));
}

// --------------------------------------------------------------------------
// 9. Blockage scenario: while the truck shadows the LOS, the instantaneous
//    best beam pair exceeds the idle-best (fixed) pair by the configured
//    margin, and the receive angular spread grows by at least 3 deg.
void criterion_9()
{
    const MultitoneWaveform wf = synthesize(optimized_801());
    const ArrayGeometry geom;
    const BeamCodebook cb = build_codebook(geom, azimuth_fan(5), {0.0}, 11.25);
    SweepSchedule dyn;
    for (std::uint32_t b = 0; b < 19; b += 2) {
        dyn.tx_beams.push_back(b);
        dyn.rx_beams.push_back(b);
    }
    dyn.repetitions_per_pair = 1;
    dyn.snapshots_per_burst = 20;
    dyn.num_bursts = 1;
    const ClockModel clk;
    const ReceiverConfig rxc;
    const Scene scene = scenario_templates().at("case2_blockage_truck");

    struct RunStats {
        std::vector<std::vector<double>> pas_thresh;
        std::vector<std::vector<double>> pas_full;
    };
    const auto run_at = [&](double start_s) {
        SweepSchedule sch = dyn;
        sch.start_time_s = start_s;
        const SweepRecording rec =
            run_sweep(scene, wf, cb, cb, sch, clk, rxc, 24.6, 1);
        const CalibrationResponse cal = calibration_for(wf, rec.header);
        const std::vector<DirectionalPDP> pdps = directional_pdp(rec, cal);
        RunStats st;
        const std::size_t nt = dyn.tx_beams.size();
        const std::size_t nr = dyn.rx_beams.size();
        st.pas_thresh.assign(nt, std::vector<double>(nr, 0.0));
        st.pas_full.assign(nt, std::vector<double>(nr, 0.0));
        for (const DirectionalPDP &p : pdps) {
            const double floor_mw = pdp_noise_floor_mw(omni_pdp(p));
            const auto thresh = pas(p, floor_mw * db2lin(6.0));
            const auto full = pas(p);
            for (std::size_t t = 0; t < nt; ++t)
                for (std::size_t r = 0; r < nr; ++r) {
                    st.pas_thresh[t][r] +=
                        thresh[t][r] / static_cast<double>(pdps.size());
                    st.pas_full[t][r] +=
                        full[t][r] / static_cast<double>(pdps.size());
                }
        }
        return st;
    };

    const RunStats idle = run_at(1.0);
    const RunStats blocked = run_at(7.0); // LOS shadowed during [5.5, 9] s

    std::size_t fixed_t = 0, fixed_r = 0;
    double best_idle = -1.0;
    for (std::size_t t = 0; t < idle.pas_thresh.size(); ++t)
        for (std::size_t r = 0; r < idle.pas_thresh[t].size(); ++r)
            if (idle.pas_thresh[t][r] > best_idle) {
                best_idle = idle.pas_thresh[t][r];
                fixed_t = t;
                fixed_r = r;
            }
    double best_blocked = -1.0;
    for (const auto &row : blocked.pas_thresh)
        for (double v : row)
            best_blocked = std::max(best_blocked, v);
    const double fixed_blocked = blocked.pas_thresh[fixed_t][fixed_r];
    const double margin_db = fixed_blocked > 0.0
                                 ? 10.0 * std::log10(best_blocked / fixed_blocked)
                                 : 1e9;

    const auto rx_spread_deg = [&](const RunStats &st) {
        std::vector<double> marginal(st.pas_full.front().size(), 0.0);
        for (const auto &row : st.pas_full)
            for (std::size_t r = 0; r < row.size(); ++r)
                marginal[r] += row[r];
        std::vector<double> rx_az;
        for (std::uint32_t b : dyn.rx_beams)
            rx_az.push_back(cb.beams[b].azimuth_deg);
        return angular_stats(rx_az, marginal).angular_spread_deg;
    };
    const double spread_idle = rx_spread_deg(idle);
    const double spread_blocked = rx_spread_deg(blocked);

    const bool pass = margin_db >= 8.5 && margin_db <= 11.5 &&
                      spread_blocked >= spread_idle + 3.0;
    report(9, "blockage: beam re-steering margin and angular-spread growth",
           pass,
           strf("margin=%.2f dB, RX spread %.2f -> %.2f deg", margin_db,
                spread_idle, spread_blocked));
}

// --------------------------------------------------------------------------
// 10. Recording format: parse round trip is byte-exact, payload and trailer
//     corruption are both detected, and equal seeds give equal files.
void criterion_10()
{
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "mmsounder-acceptance";
    fs::create_directories(dir);

    const MultitoneWaveform wf = synthesize(small_spec());
    const ArrayGeometry geom;
    const BeamCodebook cb = build_codebook(geom, {0.0, 10.0}, {0.0}, 11.25);
    SweepSchedule sch;
    sch.tx_beams = {0, 1};
    sch.rx_beams = {0, 1};
    sch.repetitions_per_pair = 2;
    sch.snapshots_per_burst = 2;
    sch.num_bursts = 1;
    const ClockModel clk;
    const ReceiverConfig rxc;
    const Scene scene = los_scene(30.0);
    const SweepRecording rec =
        run_sweep(scene, wf, cb, cb, sch, clk, rxc, 43.0, 5);

    const fs::path first = dir / "a.bin";
    const fs::path reparsed = dir / "b.bin";
    const fs::path rerun = dir / "c.bin";
    write_recording(rec, first.string());
    const SweepRecording back = read_recording(first.string());
    write_recording(back, reparsed.string());
    const std::string bytes = slurp(first);
    const bool round_trip = !bytes.empty() && bytes == slurp(reparsed);

    const fs::path damaged = dir / "damaged.bin";
    std::string corrupt = bytes;
    corrupt[corrupt.size() * 7 / 10] ^= 0x40;
    {
        std::ofstream out(damaged, std::ios::binary);
        out.write(corrupt.data(),
                  static_cast<std::streamsize>(corrupt.size()));
    }
    bool payload_detected = false;
    try {
        read_recording(damaged.string());
    } catch (const integrity_error &) {
        payload_detected = true;
    }
    std::string tail = bytes;
    tail[tail.size() - 1] ^= 0x01; // flip a bit of the stored checksum
    {
        std::ofstream out(damaged, std::ios::binary);
        out.write(tail.data(), static_cast<std::streamsize>(tail.size()));
    }
    bool trailer_detected = false;
    try {
        read_recording(damaged.string());
    } catch (const integrity_error &) {
        trailer_detected = true;
    }

    const SweepRecording again =
        run_sweep(scene, wf, cb, cb, sch, clk, rxc, 43.0, 5);
    write_recording(again, rerun.string());
    const bool deterministic = bytes == slurp(rerun);

    const bool pass =
        round_trip && payload_detected && trailer_detected && deterministic;
    report(10, "recording round-trip, corruption detection, determinism", pass,
           strf("round_trip=%d payload=%d trailer=%d deterministic=%d, %zu bytes",
                round_trip ? 1 : 0, payload_detected ? 1 : 0,
                trailer_detected ? 1 : 0, deterministic ? 1 : 0, bytes.size()));
}

} // namespace

int main()
{
    using CriterionFn = void (*)();
    const std::pair<int, CriterionFn> criteria[] = {
        {1, criterion_1}, {2, criterion_2}, {3, criterion_3}, {4, criterion_4},
        {5, criterion_5}, {6, criterion_6}, {7, criterion_7}, {8, criterion_8},
        {9, criterion_9}, {10, criterion_10},
    };
    for (const auto &[number, fn] : criteria) {
        try {
            fn();
        } catch (const std::exception &e) {
            report(number, "aborted by exception", false, e.what());
        }
    }
    std::printf("%s: %d of 10 criteria failed\n",
                g_failures ? "RESULT FAIL" : "RESULT PASS", g_failures);
    return g_failures ? 1 : 0;
}
