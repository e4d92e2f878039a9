// SPDX-License-Identifier: Apache-2.0
//
// mmsounder - sweep execution, link budget, AGC, and quantizer tests

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mmsounder/sounder.hpp"

using namespace mmsounder;

namespace {

MultitoneSpec sweep_spec()
{
    MultitoneSpec spec;
    spec.num_tones = 41;
    spec.tone_spacing_hz = 5e6;
    spec.first_tone_hz = 50e6;
    spec.sample_rate_hz = 1.25e9;
    spec.phases_rad = zadoff_chu_phases(41, 1); // low PAPR keeps the ADC happy
    return spec;
}

Scene los_scene()
{
    Scene s;
    s.name = "los_only";
    s.duration_s = 2.0;
    s.tx = {{0.0, 0.0, 5.0}, 0.0};
    s.rx = {{30.0, 0.0, 5.0}, 180.0};
    return s;
}

BeamCodebook two_beam_codebook()
{
    ArrayGeometry geom;
    return build_codebook(geom, {0.0, 10.0}, {0.0}, 11.25);
}

SweepSchedule small_schedule(const MultitoneSpec &spec)
{
    SweepSchedule sched;
    sched.tx_beams = {0, 1};
    sched.rx_beams = {0, 1};
    sched.waveform_duration_s = spec.period_s();
    sched.guard_s = spec.period_s();
    sched.repetitions_per_pair = 3;
    sched.snapshots_per_burst = 2;
    sched.num_bursts = 2;
    sched.burst_period_s = 1e-3;
    sched.start_time_s = 0.5;
    return sched;
}

} // namespace

TEST_CASE("link budget checkpoints", "[sounder]")
{
    ReceiverConfig rx; // NF 5 dB, BW 400 MHz, saturation -6 dBm
    const LinkBudget lb = link_budget(rx, 57.0, 19.0);
    CHECK(lb.sensitivity_dbm == Catch::Approx(-82.9794).margin(1e-3));
    CHECK(lb.eis_dbm == Catch::Approx(-101.9794).margin(1e-3));
    CHECK(lb.max_path_loss_db == Catch::Approx(158.9794).margin(1e-3));
    CHECK(lb.dynamic_range_db == Catch::Approx(76.9794).margin(1e-3));
    CHECK(rx.sensitivity_dbm() ==
          Catch::Approx(-174.0 + 5.0 + 10.0 * std::log10(400e6)).margin(1e-12));
}

TEST_CASE("AGC picks the largest step-quantized non-overshooting gain", "[sounder]")
{
    ReceiverConfig rx; // target = -6 - 3 = -9 dBm, step 0.5, range 60
    CHECK(agc_select({-53.3, -60.0}, rx) == Catch::Approx(44.0).margin(1e-12));
    CHECK(agc_select({-9.0}, rx) == Catch::Approx(0.0).margin(1e-12));   // exact fit
    CHECK(agc_select({-5.0}, rx) == Catch::Approx(0.0).margin(1e-12));   // too hot
    CHECK(agc_select({-500.0}, rx) == Catch::Approx(60.0).margin(1e-12)); // clamped
    CHECK_THROWS_AS(agc_select({}, rx), std::invalid_argument);
}

TEST_CASE("mid-rise quantizer levels and clip counting", "[sounder]")
{
    cvector v = {{0.1, -0.1}, {0.6, -0.9}, {1.0, 2.0}};
    const std::size_t clipped = quantize_midrise(v, 2, 1.0);
    CHECK(clipped == 1); // only the 2.0 component exceeds full scale
    CHECK(v[0] == cdouble(0.25, -0.25));
    CHECK(v[1] == cdouble(0.75, -0.75));
    CHECK(v[2] == cdouble(0.75, 0.75));

    cvector w = {{0.0, 0.0}};
    CHECK_THROWS_AS(quantize_midrise(w, 0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(quantize_midrise(w, 31, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(quantize_midrise(w, 4, 0.0), std::invalid_argument);
}

TEST_CASE("transmit tone power is normalized to the conducted level", "[sounder]")
{
    const auto wf = synthesize(sweep_spec());
    const cvector amps = transmit_tone_amplitudes(wf, 15, -12.3);
    double total = 0.0;
    for (const auto &a : amps)
        total += std::norm(a);
    CHECK(total == Catch::Approx(dbm2mw(-12.3)).epsilon(1e-12));

    MultitoneWaveform bad = wf;
    bad.samples.pop_back();
    CHECK_THROWS_AS(transmit_tone_amplitudes(bad, 15, 0.0), std::invalid_argument);
}

TEST_CASE("schedule and clock validation", "[sounder]")
{
    const auto spec = sweep_spec();
    SweepSchedule sched = small_schedule(spec);
    CHECK_NOTHROW(sched.validate());
    CHECK(sched.pair_time_s() == Catch::Approx(3 * 4e-7).margin(1e-15));
    CHECK(sched.snapshot_time_s() == Catch::Approx(4 * 3 * 4e-7).margin(1e-15));

    SweepSchedule bad = sched;
    bad.tx_beams.clear();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = sched;
    bad.repetitions_per_pair = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = sched;
    bad.snapshots_per_burst = 20;
    bad.burst_period_s = 2e-5; // 20 snapshots cannot fit in 20 us
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = sched;
    bad.start_time_s = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    ClockModel clk;
    clk.mode = ClockMode::shared;
    clk.fractional_offset = 1e-9;
    CHECK_THROWS_AS(clk.validate(), std::invalid_argument);
    clk = ClockModel{};
    clk.phase_noise_std_deg = -1.0;
    CHECK_THROWS_AS(clk.validate(), std::invalid_argument);
}

TEST_CASE("sweep timestamps and indices follow the schedule", "[sounder]")
{
    const auto spec = sweep_spec();
    const auto wf = synthesize(spec);
    const auto cb = two_beam_codebook();
    const auto sched = small_schedule(spec);
    const Scene scene = los_scene();
    ClockModel clk;
    ReceiverConfig rx;

    const auto rec = run_sweep(scene, wf, cb, cb, sched, clk, rx, 43.0, 5);
    REQUIRE(rec.captures.size() == 16); // 2 bursts x 2 snapshots x 4 pairs
    CHECK(rec.header.num_captures == 16);
    CHECK(rec.header.tx_conducted_dbm ==
          Catch::Approx(43.0 - ideal_boresight_gain_dbi(cb.geometry)).margin(1e-9));
    CHECK(rec.header.waveform.phases_rad.empty());
    CHECK(rec.header.scene_hash == scene.content_hash());
    REQUIRE(rec.header.tx_beam_refs.size() == 2);
    CHECK(rec.header.tx_beam_refs[1].azimuth_deg == Catch::Approx(10.0));

    const double pair_t = sched.pair_time_s();
    const double snap_t = sched.snapshot_time_s();
    std::size_t i = 0;
    for (std::uint32_t b = 0; b < 2; ++b)
        for (std::uint32_t s = 0; s < 2; ++s)
            for (std::uint32_t p = 0; p < 4; ++p, ++i) {
                const auto &cap = rec.captures[i];
                CHECK(cap.snapshot_index == b * 2 + s);
                CHECK(cap.pair_index == p);
                CHECK(cap.timestamp_s ==
                      Catch::Approx(0.5 + b * 1e-3 + s * snap_t + p * pair_t)
                          .margin(1e-12));
                CHECK(cap.samples.size() == 3 * 250);
            }

    // one AGC decision per snapshot
    for (std::size_t c = 0; c < rec.captures.size(); c += 4) {
        CHECK(rec.captures[c].gain_db == rec.captures[c + 1].gain_db);
        CHECK(rec.captures[c].gain_db == rec.captures[c + 3].gain_db);
        CHECK(rec.captures[c].gain_db >= 0.0f);
        CHECK(rec.captures[c].gain_db <= 60.0f);
    }
}

TEST_CASE("sweep is deterministic in the seed", "[sounder]")
{
    const auto spec = sweep_spec();
    const auto wf = synthesize(spec);
    const auto cb = two_beam_codebook();
    const auto sched = small_schedule(spec);
    const Scene scene = los_scene();
    ClockModel clk;
    ReceiverConfig rx;

    const auto a = run_sweep(scene, wf, cb, cb, sched, clk, rx, 43.0, 7);
    const auto b = run_sweep(scene, wf, cb, cb, sched, clk, rx, 43.0, 7);
    const auto c = run_sweep(scene, wf, cb, cb, sched, clk, rx, 43.0, 8);
    REQUIRE(a.captures.size() == b.captures.size());
    bool equal = true, differ = false;
    for (std::size_t i = 0; i < a.captures.size(); ++i)
        for (std::size_t n = 0; n < a.captures[i].samples.size(); ++n) {
            equal = equal && a.captures[i].samples[n] == b.captures[i].samples[n];
            differ = differ || a.captures[i].samples[n] != c.captures[i].samples[n];
        }
    CHECK(equal);
    CHECK(differ);
}

TEST_CASE("sweep rejects a schedule whose slot does not match the waveform",
          "[sounder]")
{
    const auto spec = sweep_spec();
    const auto wf = synthesize(spec);
    const auto cb = two_beam_codebook();
    SweepSchedule sched = small_schedule(spec);
    sched.waveform_duration_s = 3e-7;
    ClockModel clk;
    ReceiverConfig rx;
    CHECK_THROWS_AS(
        run_sweep(los_scene(), wf, cb, cb, sched, clk, rx, 43.0, 1),
        std::invalid_argument);
}

TEST_CASE("overdriven front end reports clipping", "[sounder]")
{
    const auto spec = sweep_spec();
    const auto wf = synthesize(spec);
    const auto cb = two_beam_codebook();
    SweepSchedule sched = small_schedule(spec);
    sched.num_bursts = 1;
    sched.snapshots_per_burst = 1;
    ClockModel clk;
    ReceiverConfig rx;

    const auto hot = run_sweep(los_scene(), wf, cb, cb, sched, clk, rx, 95.0, 2);
    CHECK(hot.header.clipping_events > 0);
    const auto cold = run_sweep(los_scene(), wf, cb, cb, sched, clk, rx, 43.0, 2);
    CHECK(cold.header.clipping_events == 0);
}

TEST_CASE("averaging probe needs at least two repetitions", "[sounder]")
{
    const auto spec = sweep_spec();
    const auto wf = synthesize(spec);
    const auto cb = two_beam_codebook();
    SweepSchedule sched = small_schedule(spec);
    sched.repetitions_per_pair = 1;
    ClockModel clk;
    ReceiverConfig rx;
    const auto rec = run_sweep(los_scene(), wf, cb, cb, sched, clk, rx, 43.0, 3);
    CHECK_THROWS_AS(averaging_gain_probe(rec), std::invalid_argument);
}
