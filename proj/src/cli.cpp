// SPDX-License-Identifier: Apache-2.0
//
// mmsounder - subcommand bodies and argv dispatch

#include "mmsounder/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mmsounder/analysis.hpp"
#include "mmsounder/beamforming.hpp"
#include "mmsounder/calibration.hpp"
#include "mmsounder/errors.hpp"
#include "mmsounder/scene.hpp"
#include "mmsounder/sounder.hpp"
#include "mmsounder/storage.hpp"
#include "mmsounder/waveform.hpp"

namespace mmsounder {

namespace {

namespace fs = std::filesystem;

std::ofstream open_output(const RunConfig &config, const std::string &name)
{
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec)
        throw io_error("cannot create output directory " + config.out_dir);
    const std::string path = (fs::path(config.out_dir) / name).string();
    std::ofstream out(path);
    if (!out)
        throw io_error("cannot open " + path + " for writing");
    out << std::setprecision(10);
    return out;
}

std::string output_path(const RunConfig &config, const std::string &name)
{
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec)
        throw io_error("cannot create output directory " + config.out_dir);
    return (fs::path(config.out_dir) / name).string();
}

MultitoneSpec spec_from_config(const RunConfig &config)
{
    MultitoneSpec spec;
    spec.num_tones = config.tones;
    spec.tone_spacing_hz = config.tone_spacing_hz;
    spec.first_tone_hz = config.first_tone_hz;
    spec.sample_rate_hz = config.sample_rate_hz;
    spec.validate();
    return spec;
}

BeamCodebook codebook_from_config(const RunConfig &config)
{
    ArrayGeometry geometry;
    geometry.carrier_hz = config.carrier_hz;
    std::vector<double> azimuths;
    if (config.az_step_deg <= 0.0)
        throw std::invalid_argument("azimuth step must be > 0");
    for (double az = config.az_min_deg; az <= config.az_max_deg + 1e-9;
         az += config.az_step_deg)
        azimuths.push_back(az);
    return build_codebook(geometry, azimuths, {0.0}, 11.25);
}

SweepSchedule schedule_from_config(const RunConfig &config,
                                   const MultitoneSpec &spec,
                                   std::size_t num_beams)
{
    SweepSchedule sched;
    sched.waveform_duration_s = spec.period_s();
    sched.guard_s = spec.period_s();
    if (config.preset == "static-19x19x10") {
        for (std::size_t b = 0; b < num_beams; ++b) {
            sched.tx_beams.push_back(static_cast<std::uint32_t>(b));
            sched.rx_beams.push_back(static_cast<std::uint32_t>(b));
        }
        sched.repetitions_per_pair = 10;
        sched.snapshots_per_burst = 1;
    } else if (config.preset == "dynamic-10x10") {
        for (std::size_t b = 0; b < num_beams; b += 2) {
            sched.tx_beams.push_back(static_cast<std::uint32_t>(b));
            sched.rx_beams.push_back(static_cast<std::uint32_t>(b));
        }
        sched.repetitions_per_pair = 1;
        sched.snapshots_per_burst = 20;
    } else {
        throw std::invalid_argument("unknown preset '" + config.preset +
                                    "' (use static-19x19x10 or dynamic-10x10)");
    }
    if (config.snapshots_per_burst > 0)
        sched.snapshots_per_burst = config.snapshots_per_burst;
    sched.burst_period_s = config.burst_period_s;
    sched.num_bursts = config.num_bursts;
    sched.start_time_s = config.start_time_s;
    sched.validate();
    return sched;
}

ClockModel clock_from_config(const RunConfig &config)
{
    ClockModel clock;
    if (config.clock_mode == "shared")
        clock.mode = ClockMode::shared;
    else if (config.clock_mode == "gps")
        clock.mode = ClockMode::gps_disciplined;
    else if (config.clock_mode == "free")
        clock.mode = ClockMode::free_running;
    else
        throw std::invalid_argument("unknown clock mode '" + config.clock_mode +
                                    "' (use shared, gps or free)");
    clock.fractional_offset = config.fractional_offset;
    clock.phase_noise_std_deg = config.phase_noise_std_deg;
    clock.random_walk_coeff = config.random_walk_coeff;
    clock.validate();
    return clock;
}

Scene scene_from_config(const RunConfig &config)
{
    if (!config.scene_file.empty())
        return read_scene(config.scene_file);
    const auto templates = scenario_templates();
    const auto it = templates.find(config.scenario);
    if (it == templates.end()) {
        std::string known;
        for (const auto &[name, scene] : templates)
            known += (known.empty() ? "" : ", ") + name;
        throw std::invalid_argument("unknown scenario '" + config.scenario +
                                    "' (known: " + known + ")");
    }
    return it->second;
}

std::string hex64(std::uint64_t v)
{
    std::ostringstream os;
    os << "0x" << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

double safe_dbm(double mw)
{
    return mw2dbm(std::max(mw, 1e-300));
}

} // namespace

void load_config_file(RunConfig &config, const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open config file " + path);
    nlohmann::json j = nlohmann::json::parse(in); // parse errors map to exit 4
    for (const auto &[key, value] : j.items()) {
        if (key == "out")
            config.out_dir = value.get<std::string>();
        else if (key == "seed")
            config.seed = value.get<std::uint64_t>();
        else if (key == "tones")
            config.tones = value.get<int>();
        else if (key == "tone_spacing_hz")
            config.tone_spacing_hz = value.get<double>();
        else if (key == "first_tone_hz")
            config.first_tone_hz = value.get<double>();
        else if (key == "sample_rate_hz")
            config.sample_rate_hz = value.get<double>();
        else if (key == "compare_zc")
            config.compare_zc = value.get<bool>();
        else if (key == "az_min_deg")
            config.az_min_deg = value.get<double>();
        else if (key == "az_max_deg")
            config.az_max_deg = value.get<double>();
        else if (key == "az_step_deg")
            config.az_step_deg = value.get<double>();
        else if (key == "scenario")
            config.scenario = value.get<std::string>();
        else if (key == "scene_file")
            config.scene_file = value.get<std::string>();
        else if (key == "preset")
            config.preset = value.get<std::string>();
        else if (key == "clock_mode")
            config.clock_mode = value.get<std::string>();
        else if (key == "fractional_offset")
            config.fractional_offset = value.get<double>();
        else if (key == "phase_noise_std_deg")
            config.phase_noise_std_deg = value.get<double>();
        else if (key == "random_walk_coeff")
            config.random_walk_coeff = value.get<double>();
        else if (key == "eirp_dbm")
            config.eirp_dbm = value.get<double>();
        else if (key == "ripple_db")
            config.ripple_db = value.get<double>();
        else if (key == "phase_rms_deg")
            config.phase_rms_deg = value.get<double>();
        else if (key == "num_bursts")
            config.num_bursts = value.get<std::uint32_t>();
        else if (key == "snapshots_per_burst")
            config.snapshots_per_burst = value.get<std::uint32_t>();
        else if (key == "burst_period_s")
            config.burst_period_s = value.get<double>();
        else if (key == "start_time_s")
            config.start_time_s = value.get<double>();
        else if (key == "no_noise")
            config.no_noise = value.get<bool>();
        else if (key == "input")
            config.input_path = value.get<std::string>();
        else if (key == "calibration")
            config.calibration_path = value.get<std::string>();
        else if (key == "pdp")
            config.want_pdp = value.get<bool>();
        else if (key == "pas")
            config.want_pas = value.get<bool>();
        else if (key == "mpc")
            config.want_mpc = value.get<bool>();
        else if (key == "doppler")
            config.want_doppler = value.get<bool>();
        else if (key == "spreads")
            config.want_spreads = value.get<bool>();
        else if (key == "burst_index")
            config.burst_index = value.get<std::uint32_t>();
        else if (key == "rx_gain_dbi")
            config.rx_gain_dbi = value.get<double>();
        else if (key == "samples")
            config.samples_path = value.get<std::string>();
        else if (key == "model")
            config.model = value.get<std::string>();
        else if (key == "carrier_hz")
            config.carrier_hz = value.get<double>();
        else
            throw std::invalid_argument("unknown config key '" + key + "' in " + path);
    }
}

void cmd_waveform(const RunConfig &config)
{
    const MultitoneSpec spec = spec_from_config(config);
    const MultitoneWaveform zero_phase = synthesize(spec);
    const MultitoneSpec optimized_spec = optimize_phases(spec, 0.8, 300, config.seed);
    const MultitoneWaveform optimized = synthesize(optimized_spec);

    write_waveform_spec(optimized_spec, output_path(config, "waveform_spec.txt"));

    auto samples = open_output(config, "waveform_samples.csv");
    samples << "sample_index,i,q\n";
    for (std::size_t n = 0; n < optimized.samples.size(); ++n)
        samples << n << ',' << optimized.samples[n].real() << ','
                << optimized.samples[n].imag() << '\n';

    auto report = open_output(config, "waveform_report.txt");
    report << std::fixed << std::setprecision(4);
    report << "num_tones " << spec.num_tones << '\n'
           << "tone_spacing_hz " << spec.tone_spacing_hz << '\n'
           << "bandwidth_hz " << spec.bandwidth_hz() << '\n'
           << "period_samples " << spec.period_samples() << '\n'
           << "zero_phase_papr_db " << zero_phase.papr_db << '\n'
           << "optimized_papr_db " << optimized.papr_db << '\n';
    if (config.compare_zc) {
        const MultitoneWaveform zc = zadoff_chu_baseline(
            spec.num_tones, 1, 4.0 * spec.bandwidth_hz(), spec.bandwidth_hz());
        report << "zadoff_chu_papr_db " << zc.papr_db << '\n'
               << "papr_advantage_db " << zc.papr_db - optimized.papr_db << '\n';
    }
    std::cout << "waveform: " << spec.num_tones << " tones, optimized PAPR "
              << std::fixed << std::setprecision(3) << optimized.papr_db
              << " dB (zero-phase " << zero_phase.papr_db << " dB)\n";
}

void cmd_codebook(const RunConfig &config)
{
    const BeamCodebook codebook = codebook_from_config(config);
    write_codebook(codebook, output_path(config, "codebook.json"));

    auto pattern = open_output(config, "codebook_pattern.csv");
    pattern << "beam_index,steer_azimuth_deg,azimuth_deg,elevation_deg,gain_dbi\n";
    for (std::size_t b = 0; b < codebook.beams.size(); ++b)
        for (std::size_t ia = 0; ia < codebook.grid_az_deg.size(); ++ia)
            for (std::size_t ie = 0; ie < codebook.grid_el_deg.size(); ++ie)
                pattern << b << ',' << codebook.beams[b].azimuth_deg << ','
                        << codebook.grid_az_deg[ia] << ','
                        << codebook.grid_el_deg[ie] << ','
                        << codebook.pattern_at(b, ia, ie) << '\n';

    auto summary = open_output(config, "codebook_summary.csv");
    summary << "beam_index,steer_azimuth_deg,steer_elevation_deg,boresight_gain_dbi\n";
    for (std::size_t b = 0; b < codebook.beams.size(); ++b)
        summary << b << ',' << codebook.beams[b].azimuth_deg << ','
                << codebook.beams[b].elevation_deg << ','
                << codebook.beams[b].boresight_gain_dbi << '\n';
    std::cout << "codebook: " << codebook.beams.size() << " beams, hash "
              << hex64(codebook.content_hash()) << '\n';
}

void cmd_simulate(const RunConfig &config)
{
    const MultitoneSpec spec = spec_from_config(config);
    const MultitoneSpec optimized = optimize_phases(spec, 0.8, 300, config.seed);
    const MultitoneWaveform waveform = synthesize(optimized);

    const BeamCodebook codebook = codebook_from_config(config);
    const Scene scene = scene_from_config(config);
    const SweepSchedule schedule =
        schedule_from_config(config, spec, codebook.beams.size());
    const ClockModel clock = clock_from_config(config);

    ReceiverConfig rx;
    rx.thermal_noise = !config.no_noise;

    CalibrationResponse system =
        (config.ripple_db > 0.0 || config.phase_rms_deg > 0.0)
            ? synthesize_system_response(spec, config.ripple_db,
                                         deg2rad(config.phase_rms_deg), config.seed)
            : identity_response(spec);

    const SweepRecording recording =
        run_sweep(scene, waveform, codebook, codebook, schedule, clock, rx,
                  config.eirp_dbm, config.seed, &system);
    const CalibrationResponse calibration = back_to_back_calibration(
        waveform, rx.awg_bits, recording.header.tx_conducted_dbm, system);

    write_recording(recording, output_path(config, "recording.bin"));
    write_calibration(calibration, output_path(config, "calibration.cal"));
    write_ground_truth_sidecar(recording, scene,
                               output_path(config, "ground_truth.json"));

    std::cout << "simulate: scene '" << scene.name << "', "
              << recording.captures.size() << " captures, snapshot time "
              << std::setprecision(6) << schedule.snapshot_time_s() * 1e6
              << " us, clipping events " << recording.header.clipping_events
              << '\n';
}

void cmd_analyze(const RunConfig &config)
{
    if (config.input_path.empty())
        throw std::invalid_argument("analyze requires --in <recording>");
    if (config.calibration_path.empty())
        throw std::invalid_argument("analyze requires --cal <calibration>");
    const SweepRecording recording = read_recording(config.input_path);
    const CalibrationResponse calibration = read_calibration(config.calibration_path);
    const std::vector<DirectionalPDP> pdps = directional_pdp(recording, calibration);

    if (config.want_pdp) {
        auto out = open_output(config, "pdp.csv");
        out << "snapshot,delay_ns,power_dbm\n";
        for (const auto &pdp : pdps) {
            const auto omni = omni_pdp(pdp, OmniMethod::max);
            for (std::size_t l = 0; l < omni.size(); ++l)
                out << pdp.snapshot_index << ','
                    << static_cast<double>(l) * pdp.delay_bin_s * 1e9 << ','
                    << safe_dbm(omni[l]) << '\n';
        }
    }

    if (config.want_pas) {
        auto out = open_output(config, "pas.csv");
        out << "snapshot,tx_azimuth_deg,rx_azimuth_deg,power_dbm\n";
        for (const auto &pdp : pdps) {
            const auto spectrum = pas(pdp);
            for (std::size_t t = 0; t < pdp.tx_azimuths_deg.size(); ++t)
                for (std::size_t r = 0; r < pdp.rx_azimuths_deg.size(); ++r)
                    out << pdp.snapshot_index << ',' << pdp.tx_azimuths_deg[t]
                        << ',' << pdp.rx_azimuths_deg[r] << ','
                        << safe_dbm(spectrum[t][r]) << '\n';
        }
    }

    if (config.want_mpc) {
        auto out = open_output(config, "mpc.csv");
        out << "snapshot,delay_ns,tx_azimuth_deg,rx_azimuth_deg,power_dbm\n";
        for (const auto &pdp : pdps) {
            // Threshold against the max-combined floor: that is the statistic
            // the peak search scans, and it sits well above the per-pair one.
            const double floor_dbm =
                safe_dbm(pdp_noise_floor_mw(omni_pdp(pdp, OmniMethod::max)));
            for (const auto &mpc : extract_mpcs(pdp, floor_dbm))
                out << mpc.snapshot << ','
                    << static_cast<double>(mpc.delay_bin) * pdp.delay_bin_s * 1e9
                    << ',' << pdp.tx_azimuths_deg[mpc.tx_beam] << ','
                    << pdp.rx_azimuths_deg[mpc.rx_beam] << ',' << mpc.power_dbm
                    << '\n';
        }
    }

    if (config.want_spreads) {
        auto out = open_output(config, "spreads.csv");
        out << "snapshot,rms_delay_spread_ns,tx_mean_azimuth_deg,tx_spread_deg,"
               "rx_mean_azimuth_deg,rx_spread_deg\n";
        for (const auto &pdp : pdps) {
            const auto omni = omni_pdp(pdp, OmniMethod::sum);
            double dspread = std::nan("");
            try {
                dspread = rms_delay_spread(omni, pdp.delay_bin_s) * 1e9;
            } catch (const std::invalid_argument &) {
                // all-noise snapshot: leave the column as nan
            }
            const auto spectrum = pas(
                pdp, pdp_noise_floor_mw(omni_pdp(pdp, OmniMethod::max)) *
                         db2lin(6.0));
            std::vector<double> tx_power(pdp.tx_azimuths_deg.size(), 0.0);
            std::vector<double> rx_power(pdp.rx_azimuths_deg.size(), 0.0);
            for (std::size_t t = 0; t < tx_power.size(); ++t)
                for (std::size_t r = 0; r < rx_power.size(); ++r) {
                    tx_power[t] += spectrum[t][r];
                    rx_power[r] += spectrum[t][r];
                }
            AngularStats tx_stats{std::nan(""), std::nan("")};
            AngularStats rx_stats{std::nan(""), std::nan("")};
            try {
                tx_stats = angular_stats(pdp.tx_azimuths_deg, tx_power);
                rx_stats = angular_stats(pdp.rx_azimuths_deg, rx_power);
            } catch (const std::invalid_argument &) {
            }
            out << pdp.snapshot_index << ',' << dspread << ','
                << tx_stats.mean_angle_deg << ',' << tx_stats.angular_spread_deg
                << ',' << rx_stats.mean_angle_deg << ','
                << rx_stats.angular_spread_deg << '\n';
        }
    }

    if (config.want_doppler) {
        PairSelection selection;
        selection.mode = PairSelection::Mode::per_bin_max;
        const DelayDopplerSpectrum dd =
            delay_doppler(recording, calibration, selection, config.burst_index);
        auto out = open_output(config, "doppler.csv");
        out << "delay_ns,doppler_hz,power_dbm\n";
        for (std::size_t l = 0; l < dd.delay_s.size(); ++l)
            for (std::size_t k = 0; k < dd.doppler_hz.size(); ++k)
                out << dd.delay_s[l] * 1e9 << ',' << dd.doppler_hz[k] << ','
                    << safe_dbm(dd.at(l, k)) << '\n';
    }

    std::cout << "analyze: " << pdps.size() << " snapshots processed\n";
}

void cmd_fit_pathloss(const RunConfig &config)
{
    if (config.samples_path.empty())
        throw std::invalid_argument("fit-pathloss requires --samples <csv>");
    std::ifstream in(config.samples_path);
    if (!in)
        throw io_error("cannot open " + config.samples_path);
    std::vector<std::pair<double, double>> points;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double d = 0.0, pl = 0.0;
        if (!(row >> d >> pl)) {
            if (points.empty())
                continue; // tolerate one header line
            throw format_error("malformed sample line in " + config.samples_path +
                               ": " + line);
        }
        points.emplace_back(d, pl);
    }

    PathLossModel model;
    if (config.model == "ci")
        model = PathLossModel::close_in;
    else if (config.model == "abg")
        model = PathLossModel::alpha_beta_gamma;
    else
        throw std::invalid_argument("unknown model '" + config.model +
                                    "' (use ci or abg)");
    const PathLossFit fit = fit_path_loss(points, model, config.carrier_hz);

    auto report = open_output(config, "pathloss_fit.txt");
    report << std::fixed << std::setprecision(4);
    report << "model " << (model == PathLossModel::close_in ? "ci" : "abg") << '\n'
           << "samples " << points.size() << '\n';
    if (model == PathLossModel::close_in)
        report << "exponent_n " << fit.n << '\n'
               << "intercept_db " << fit.intercept_db << '\n';
    else
        report << "alpha " << fit.alpha << '\n'
               << "beta_db " << fit.beta_db << '\n'
               << "gamma " << fit.gamma << '\n';
    report << "shadowing_sigma_db " << fit.shadowing_sigma_db << '\n';
    std::cout << "fit-pathloss: " << (model == PathLossModel::close_in
                                          ? "n = " + std::to_string(fit.n)
                                          : "alpha = " + std::to_string(fit.alpha))
              << ", sigma = " << std::setprecision(3) << fit.shadowing_sigma_db
              << " dB over " << points.size() << " samples\n";
}

void cmd_report(const RunConfig &config)
{
    if (config.input_path.empty())
        throw std::invalid_argument("report requires --in <recording>");
    const SweepRecording recording = read_recording(config.input_path);
    const RecordingHeader &h = recording.header;
    const LinkBudget budget = link_budget(h.rx, h.tx_eirp_dbm, config.rx_gain_dbi);

    auto out = open_output(config, "report.txt");
    out << std::fixed << std::setprecision(4);
    out << "carrier_hz " << h.carrier_hz << '\n'
        << "seed " << h.seed << '\n'
        << "clock_mode "
        << (h.clock.mode == ClockMode::shared
                ? "shared"
                : h.clock.mode == ClockMode::gps_disciplined ? "gps" : "free")
        << '\n'
        << "fractional_offset " << std::scientific << h.clock.fractional_offset
        << std::fixed << '\n'
        << "tx_eirp_dbm " << h.tx_eirp_dbm << '\n'
        << "tx_conducted_dbm " << h.tx_conducted_dbm << '\n'
        << "num_tones " << h.waveform.num_tones << '\n'
        << "beam_pairs " << h.schedule.num_pairs() << '\n'
        << "repetitions_per_pair " << h.schedule.repetitions_per_pair << '\n'
        << "snapshot_time_us " << h.schedule.snapshot_time_s() * 1e6 << '\n'
        << "snapshots_per_burst " << h.schedule.snapshots_per_burst << '\n'
        << "num_bursts " << h.schedule.num_bursts << '\n'
        << "captures " << recording.captures.size() << '\n'
        << "clipping_events " << h.clipping_events << '\n'
        << "codebook_hash_tx " << hex64(h.codebook_hash_tx) << '\n'
        << "codebook_hash_rx " << hex64(h.codebook_hash_rx) << '\n'
        << "scene_hash " << hex64(h.scene_hash) << '\n'
        << "sensitivity_dbm " << budget.sensitivity_dbm << '\n'
        << "eis_dbm " << budget.eis_dbm << '\n'
        << "max_path_loss_db " << budget.max_path_loss_db << '\n'
        << "dynamic_range_db " << budget.dynamic_range_db << '\n';
    out << "agc_gains_db";
    for (std::size_t s = 0; s < recording.captures.size();
         s += std::max<std::size_t>(h.schedule.num_pairs(), 1))
        out << ' ' << recording.captures[s].gain_db;
    out << '\n';
    std::cout << "report: " << recording.captures.size() << " captures, EIRP "
              << h.tx_eirp_dbm << " dBm, dynamic range "
              << budget.dynamic_range_db << " dB\n";
}

namespace {

void add_common_options(CLI::App *cmd, RunConfig &config, std::string &config_path)
{
    cmd->add_option("--config", config_path,
                    "JSON config file (flags override its values)");
    cmd->add_option("--out", config.out_dir, "output directory");
    cmd->add_option("--seed", config.seed, "root RNG seed");
}

} // namespace

int run_cli(int argc, const char *const *argv)
{
    RunConfig config;
    std::string config_path;

    // Apply a config file first so explicit flags override it.
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config")
            config_path = argv[i + 1];
    try {
        if (!config_path.empty())
            load_config_file(config, config_path);

        CLI::App app{"mmsounder: switched-beam mm-wave channel sounder twin"};
        app.require_subcommand(1);

        auto *wf = app.add_subcommand("waveform",
                                      "synthesize and optimize the sounding waveform");
        add_common_options(wf, config, config_path);
        wf->add_option("--tones", config.tones, "number of tones");
        wf->add_option("--spacing", config.tone_spacing_hz, "tone spacing, Hz");
        wf->add_option("--first", config.first_tone_hz, "first tone, Hz");
        wf->add_option("--fs", config.sample_rate_hz, "sample rate, Hz");
        wf->add_flag("--compare-zc", config.compare_zc,
                     "also report the Zadoff-Chu baseline PAPR");

        auto *cb = app.add_subcommand("codebook", "build the quantized beam codebook");
        add_common_options(cb, config, config_path);
        cb->add_option("--az-min", config.az_min_deg, "first steering azimuth, deg");
        cb->add_option("--az-max", config.az_max_deg, "last steering azimuth, deg");
        cb->add_option("--az-step", config.az_step_deg, "steering step, deg");
        cb->add_option("--carrier", config.carrier_hz, "carrier frequency, Hz");

        auto *sim = app.add_subcommand("simulate", "run a sweep over a scenario");
        add_common_options(sim, config, config_path);
        sim->add_option("--scenario", config.scenario, "canned scenario name");
        sim->add_option("--scene", config.scene_file, "scene JSON file");
        sim->add_option("--preset", config.preset,
                        "schedule preset: static-19x19x10 | dynamic-10x10");
        sim->add_option("--clock", config.clock_mode, "clock mode: shared|gps|free");
        sim->add_option("--offset", config.fractional_offset,
                        "fractional frequency offset");
        sim->add_option("--phase-noise", config.phase_noise_std_deg,
                        "per-capture phase jitter std, deg");
        sim->add_option("--walk", config.random_walk_coeff,
                        "random-walk coefficient, deg/sqrt(s)");
        sim->add_option("--eirp", config.eirp_dbm, "TX EIRP, dBm");
        sim->add_option("--ripple", config.ripple_db,
                        "synthetic system magnitude ripple RMS, dB");
        sim->add_option("--phase-ripple", config.phase_rms_deg,
                        "synthetic system phase ripple RMS, deg");
        sim->add_option("--bursts", config.num_bursts, "number of bursts");
        sim->add_option("--snapshots", config.snapshots_per_burst,
                        "snapshots per burst (0: preset default)");
        sim->add_option("--burst-period", config.burst_period_s, "burst period, s");
        sim->add_option("--start", config.start_time_s, "scene time of the sweep start, s");
        sim->add_flag("--no-noise", config.no_noise, "disable thermal noise");

        auto *an = app.add_subcommand("analyze", "post-process a recording");
        add_common_options(an, config, config_path);
        an->add_option("--in", config.input_path, "recording file");
        an->add_option("--cal", config.calibration_path, "calibration file");
        an->add_flag("--pdp", config.want_pdp, "write omni PDP CSV");
        an->add_flag("--pas", config.want_pas, "write power angular spectrum CSV");
        an->add_flag("--mpc", config.want_mpc, "write extracted MPC CSV");
        an->add_flag("--doppler", config.want_doppler, "write delay-Doppler CSV");
        an->add_flag("--spreads", config.want_spreads,
                     "write delay/angular spread CSV");
        an->add_option("--burst", config.burst_index, "burst for --doppler");

        auto *fitpl = app.add_subcommand("fit-pathloss",
                                         "fit a path loss model to samples");
        add_common_options(fitpl, config, config_path);
        fitpl->add_option("--samples", config.samples_path,
                          "CSV of distance_m,path_loss_db");
        fitpl->add_option("--model", config.model, "ci | abg");
        fitpl->add_option("--carrier", config.carrier_hz, "carrier frequency, Hz");

        auto *rep = app.add_subcommand("report", "summarize a recording");
        add_common_options(rep, config, config_path);
        rep->add_option("--in", config.input_path, "recording file");
        rep->add_option("--rx-gain", config.rx_gain_dbi,
                        "RX beam gain for the link budget, dBi");

        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp &e) {
            return app.exit(e);
        } catch (const CLI::ParseError &e) {
            app.exit(e);
            return 2;
        }

        if (app.got_subcommand(wf))
            cmd_waveform(config);
        else if (app.got_subcommand(cb))
            cmd_codebook(config);
        else if (app.got_subcommand(sim))
            cmd_simulate(config);
        else if (app.got_subcommand(an))
            cmd_analyze(config);
        else if (app.got_subcommand(fitpl))
            cmd_fit_pathloss(config);
        else if (app.got_subcommand(rep))
            cmd_report(config);
        return 0;
    } catch (const io_error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const format_error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const nlohmann::json::exception &e) {
        std::cerr << "error: malformed JSON: " << e.what() << '\n';
        return 4;
    } catch (const std::invalid_argument &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

} // namespace mmsounder
