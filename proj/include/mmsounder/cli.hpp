// SPDX-License-Identifier: Apache-2.0
//
// mmsounder - batch command-line front end

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mmsounder {

/*!
 * Everything a subcommand needs, filled from defaults, then an optional JSON
 * config file, then command-line flags (later sources win). Unused fields are
 * ignored by subcommands that do not consume them.
 */
struct RunConfig {
    std::string out_dir = ".";
    std::uint64_t seed = 1;

    // waveform
    int tones = 801;
    double tone_spacing_hz = 500e3;
    double first_tone_hz = 50e6;
    double sample_rate_hz = 1.25e9;
    bool compare_zc = false;

    // codebook
    double az_min_deg = -45.0;
    double az_max_deg = 45.0;
    double az_step_deg = 5.0;

    // simulate
    std::string scenario = "case2_blockage_truck"; // key into scenario_templates()
    std::string scene_file;                        // overrides scenario when set
    std::string preset = "dynamic-10x10";          // or static-19x19x10
    std::string clock_mode = "shared";             // shared|gps|free
    double fractional_offset = 0.0;
    double phase_noise_std_deg = 5.8;
    double random_walk_coeff = 0.5;
    double eirp_dbm = 43.0;
    double ripple_db = 0.0;      // RMS of the synthetic system magnitude ripple
    double phase_rms_deg = 0.0;  // RMS of the synthetic system phase ripple
    std::uint32_t num_bursts = 1;
    std::uint32_t snapshots_per_burst = 0; // 0: preset default
    double burst_period_s = 60e-3;
    double start_time_s = 0.0;
    bool no_noise = false;

    // analyze / report
    std::string input_path;
    std::string calibration_path;
    bool want_pdp = false;
    bool want_pas = false;
    bool want_mpc = false;
    bool want_doppler = false;
    bool want_spreads = false;
    std::uint32_t burst_index = 0;
    double rx_gain_dbi = 19.0; // nominal beam gain used in report link budget

    // fit-pathloss
    std::string samples_path; // CSV of distance_m,path_loss_db
    std::string model = "ci"; // ci|abg
    double carrier_hz = 27.85e9;
};

// Merge a JSON config file into the run configuration (unknown keys rejected).
void load_config_file(RunConfig &config, const std::string &path);

// Subcommand bodies; each writes its outputs under config.out_dir and throws
// on failure (std::invalid_argument, io_error, format_error).
void cmd_waveform(const RunConfig &config);
void cmd_codebook(const RunConfig &config);
void cmd_simulate(const RunConfig &config);
void cmd_analyze(const RunConfig &config);
void cmd_fit_pathloss(const RunConfig &config);
void cmd_report(const RunConfig &config);

/*!
 * Parse argv, dispatch the subcommand, map exceptions to exit codes:
 * 0 success, 2 validation error, 3 I/O error, 4 malformed input file.
 */
int run_cli(int argc, const char *const *argv);

} // namespace mmsounder
