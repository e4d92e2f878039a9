// SPDX-License-Identifier: Apache-2.0
//
// mmsounder - command line driver tests: exit codes, outputs, config handling

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <string>
#include <vector>

#include "mmsounder/cli.hpp"
#include "mmsounder/storage.hpp"
#include "mmsounder/waveform.hpp"

using namespace mmsounder;
namespace fs = std::filesystem;

namespace {

int run(std::initializer_list<const char *> args)
{
    std::vector<const char *> argv = {"mmsounder"};
    argv.insert(argv.end(), args.begin(), args.end());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path fresh_dir(const char *name)
{
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// parse "key value" report lines
std::map<std::string, std::string> read_kv(const fs::path &path)
{
    std::ifstream f(path);
    REQUIRE(f);
    std::map<std::string, std::string> kv;
    std::string key, rest;
    while (f >> key) {
        std::getline(f, rest);
        if (!rest.empty() && rest.front() == ' ')
            rest.erase(0, 1);
        kv[key] = rest;
    }
    return kv;
}

std::size_t line_count(const fs::path &path)
{
    std::ifstream f(path);
    REQUIRE(f);
    std::size_t n = 0;
    std::string line;
    while (std::getline(f, line))
        if (!line.empty())
            ++n;
    return n;
}

std::string slurp(const fs::path &path)
{
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f);
    return std::string(std::istreambuf_iterator<char>(f),
                       std::istreambuf_iterator<char>());
}

} // namespace

TEST_CASE("usage errors exit with status 2", "[cli]")
{
    CHECK(run({}) == 2);
    CHECK(run({"frobnicate"}) == 2);
    CHECK(run({"waveform", "--bogus"}) == 2);
    CHECK(run({"analyze"}) == 2);
    CHECK(run({"fit-pathloss"}) == 2);
    CHECK(run({"simulate", "--scenario", "no_such_scene"}) == 2);
    CHECK(run({"simulate", "--preset", "no-such-preset"}) == 2);
    CHECK(run({"--help"}) == 0);
}

TEST_CASE("missing input files exit with status 3", "[cli]")
{
    CHECK(run({"fit-pathloss", "--samples", "/nonexistent/s.csv"}) == 3);
    CHECK(run({"report", "--in", "/nonexistent/r.bin"}) == 3);
}

TEST_CASE("waveform subcommand writes spec, samples and report", "[cli]")
{
    const auto dir = fresh_dir("mmsounder_cli_wf");
    CHECK(run({"waveform", "--tones", "11", "--compare-zc", "--out",
               dir.c_str()}) == 0);
    CHECK(fs::exists(dir / "waveform_samples.csv"));

    const auto spec = read_waveform_spec((dir / "waveform_spec.txt").string());
    CHECK(spec.num_tones == 11);

    const auto kv = read_kv(dir / "waveform_report.txt");
    CHECK(std::stod(kv.at("zero_phase_papr_db")) ==
          Catch::Approx(10.0 * std::log10(11.0)).margin(5e-4));
    CHECK(std::stod(kv.at("optimized_papr_db")) <=
          std::stod(kv.at("zero_phase_papr_db")) + 1e-9);
    CHECK(kv.count("zadoff_chu_papr_db") == 1);
    CHECK(kv.count("papr_advantage_db") == 1);
    fs::remove_all(dir);
}

TEST_CASE("codebook subcommand writes beams and patterns", "[cli]")
{
    const auto dir = fresh_dir("mmsounder_cli_cb");
    CHECK(run({"codebook", "--az-min", "-10", "--az-max", "10", "--az-step",
               "10", "--out", dir.c_str()}) == 0);
    const auto cb = read_codebook((dir / "codebook.json").string());
    REQUIRE(cb.beams.size() == 3);
    CHECK(cb.beams[1].azimuth_deg == Catch::Approx(0.0));
    CHECK(fs::exists(dir / "codebook_pattern.csv"));
    CHECK(line_count(dir / "codebook_summary.csv") == 4); // header + 3 beams
    fs::remove_all(dir);
}

TEST_CASE("simulate then analyze produces the full product set", "[cli]")
{
    const auto sim = fresh_dir("mmsounder_cli_sim");
    CHECK(run({"simulate", "--scenario", "case2_blockage_truck", "--preset",
               "dynamic-10x10", "--snapshots", "1", "--eirp", "24.6", "--seed",
               "1", "--out", sim.c_str()}) == 0);
    REQUIRE(fs::exists(sim / "recording.bin"));
    REQUIRE(fs::exists(sim / "calibration.cal"));
    REQUIRE(fs::exists(sim / "ground_truth.json"));

    const auto rec = read_recording((sim / "recording.bin").string());
    CHECK(rec.captures.size() == 100); // 10 x 10 pairs, one snapshot
    CHECK(rec.header.schedule.snapshots_per_burst == 1);
    CHECK(rec.header.tx_eirp_dbm == Catch::Approx(24.6));

    const std::string rec_arg = (sim / "recording.bin").string();
    const std::string cal_arg = (sim / "calibration.cal").string();
    CHECK(run({"analyze", "--in", rec_arg.c_str(), "--cal", cal_arg.c_str(),
               "--pdp", "--pas", "--mpc", "--spreads", "--out",
               sim.c_str()}) == 0);
    CHECK(fs::exists(sim / "pdp.csv"));
    CHECK(fs::exists(sim / "pas.csv"));
    CHECK(fs::exists(sim / "spreads.csv"));
    // idle scene: the LOS and the wall reflection, nothing else
    const std::size_t mpc_lines = line_count(sim / "mpc.csv");
    CHECK(mpc_lines >= 3);
    CHECK(mpc_lines <= 6);

    // Doppler needs at least two snapshots per burst
    CHECK(run({"analyze", "--in", rec_arg.c_str(), "--cal", cal_arg.c_str(),
               "--doppler", "--out", sim.c_str()}) == 2);

    const auto rep = fresh_dir("mmsounder_cli_rep");
    CHECK(run({"report", "--in", rec_arg.c_str(), "--out", rep.c_str()}) == 0);
    const auto kv = read_kv(rep / "report.txt");
    CHECK(std::stod(kv.at("sensitivity_dbm")) ==
          Catch::Approx(-82.9794).margin(5e-4));
    CHECK(std::stod(kv.at("dynamic_range_db")) ==
          Catch::Approx(76.9794).margin(5e-4));
    CHECK(kv.at("beam_pairs") == "100");
    CHECK(kv.count("agc_gains_db") == 1);

    fs::remove_all(sim);
    fs::remove_all(rep);
}

TEST_CASE("same seed simulations are byte-identical", "[cli]")
{
    const auto a = fresh_dir("mmsounder_cli_det_a");
    const auto b = fresh_dir("mmsounder_cli_det_b");
    const std::initializer_list<const char *> base = {
        "simulate", "--scenario", "case1_moving_scatterers", "--preset",
        "dynamic-10x10", "--snapshots", "1", "--seed", "42"};
    {
        std::vector<const char *> argv(base);
        argv.insert(argv.end(), {"--out", a.c_str()});
        std::vector<const char *> full = {"mmsounder"};
        full.insert(full.end(), argv.begin(), argv.end());
        CHECK(run_cli(static_cast<int>(full.size()), full.data()) == 0);
    }
    {
        std::vector<const char *> argv(base);
        argv.insert(argv.end(), {"--out", b.c_str()});
        std::vector<const char *> full = {"mmsounder"};
        full.insert(full.end(), argv.begin(), argv.end());
        CHECK(run_cli(static_cast<int>(full.size()), full.data()) == 0);
    }
    CHECK(slurp(a / "recording.bin") == slurp(b / "recording.bin"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("corrupted recording is a data format failure", "[cli]")
{
    const auto dir = fresh_dir("mmsounder_cli_corrupt");
    CHECK(run({"simulate", "--scenario", "case2_blockage_truck", "--preset",
               "dynamic-10x10", "--snapshots", "1", "--out", dir.c_str()}) == 0);
    std::string bytes = slurp(dir / "recording.bin");
    bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x5A);
    {
        std::ofstream f(dir / "broken.bin", std::ios::binary | std::ios::trunc);
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    const std::string in_arg = (dir / "broken.bin").string();
    const std::string cal_arg = (dir / "calibration.cal").string();
    CHECK(run({"analyze", "--in", in_arg.c_str(), "--cal", cal_arg.c_str(),
               "--pdp", "--out", dir.c_str()}) == 4);
    fs::remove_all(dir);
}

TEST_CASE("config files load and flags override them", "[cli]")
{
    const auto dir = fresh_dir("mmsounder_cli_cfg");
    const auto cfg = dir / "run.json";
    {
        std::ofstream f(cfg);
        f << "{\"tones\": 11, \"out\": \"" << dir.string() << "\"}\n";
    }
    CHECK(run({"waveform", "--config", cfg.c_str()}) == 0);
    CHECK(read_waveform_spec((dir / "waveform_spec.txt").string()).num_tones == 11);

    CHECK(run({"waveform", "--config", cfg.c_str(), "--tones", "15"}) == 0);
    CHECK(read_waveform_spec((dir / "waveform_spec.txt").string()).num_tones == 15);

    {
        std::ofstream f(cfg);
        f << "{\"voltage\": 3}\n";
    }
    CHECK(run({"waveform", "--config", cfg.c_str()}) == 2);

    {
        std::ofstream f(cfg);
        f << "{not json at all\n";
    }
    CHECK(run({"waveform", "--config", cfg.c_str()}) == 4);
    fs::remove_all(dir);
}

TEST_CASE("path loss fit runs from a CSV sample file", "[cli]")
{
    const auto dir = fresh_dir("mmsounder_cli_fit");
    const auto csv = dir / "samples.csv";
    const double fspl1 = free_space_path_loss_db(1.0, 27.85e9);
    {
        std::ofstream f(csv);
        f << "distance_m,path_loss_db\n";
        for (double d : {10.0, 50.0, 100.0, 500.0, 1000.0})
            f << d << ',' << fspl1 + 23.0 * std::log10(d) << '\n';
    }
    CHECK(run({"fit-pathloss", "--samples", csv.c_str(), "--model", "ci",
               "--out", dir.c_str()}) == 0);
    const auto kv = read_kv(dir / "pathloss_fit.txt");
    CHECK(kv.at("model") == "ci");
    CHECK(std::stod(kv.at("exponent_n")) == Catch::Approx(2.3).margin(5e-4));
    CHECK(std::stod(kv.at("shadowing_sigma_db")) ==
          Catch::Approx(0.0).margin(5e-4));

    CHECK(run({"fit-pathloss", "--samples", csv.c_str(), "--model", "abg",
               "--out", dir.c_str()}) == 0);
    CHECK(read_kv(dir / "pathloss_fit.txt").count("alpha") == 1);

    CHECK(run({"fit-pathloss", "--samples", csv.c_str(), "--model", "xyz",
               "--out", dir.c_str()}) == 2);

    const auto bad = dir / "bad.csv";
    {
        std::ofstream f(bad);
        f << "10,90\nbogus,stuff\n";
    }
    CHECK(run({"fit-pathloss", "--samples", bad.c_str(), "--out",
               dir.c_str()}) == 4);
    fs::remove_all(dir);
}
