// SPDX-License-Identifier: Apache-2.0
//
// mmsounder - recording file format: "SNDR" little-endian binary with CRC32 trailer

#include "mmsounder/storage.hpp"

#include <cstring>
#include <stdexcept>
#include <vector>

#include "mmsounder/hash.hpp"

#include <json.hpp>

namespace mmsounder {

namespace {

constexpr char k_magic[4] = {'S', 'N', 'D', 'R'};
constexpr std::uint16_t k_version = 1;
// Fixed offsets of the fields finalize() patches: magic(4) + version(2) +
// header_bytes(4), then num_captures(u64) and clipping_events(u32).
constexpr std::size_t k_count_offset = 10;
constexpr std::size_t k_clip_offset = 18;

void put_u16(std::string &b, std::uint16_t v)
{
    b.push_back(static_cast<char>(v & 0xFF));
    b.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string &b, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        b.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string &b, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i)
        b.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::string &b, float v)
{
    std::uint32_t u = 0;
    std::memcpy(&u, &v, sizeof u);
    put_u32(b, u);
}

void put_f64(std::string &b, double v)
{
    std::uint64_t u = 0;
    std::memcpy(&u, &v, sizeof u);
    put_u64(b, u);
}

void patch_u32(std::string &b, std::size_t offset, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        b[offset + static_cast<std::size_t>(i)] =
            static_cast<char>((v >> (8 * i)) & 0xFF);
}

void patch_u64(std::string &b, std::size_t offset, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i)
        b[offset + static_cast<std::size_t>(i)] =
            static_cast<char>((v >> (8 * i)) & 0xFF);
}

// Bounds-checked little-endian reader; failures name the section being read.
struct Cursor {
    const unsigned char *data;
    std::size_t size;
    std::size_t pos = 0;
    const char *section = "header";

    void need(std::size_t n) const
    {
        if (pos + n > size)
            throw integrity_error(std::string("recording truncated in ") + section);
    }
    std::uint16_t u16()
    {
        need(2);
        std::uint16_t v = 0;
        for (int i = 0; i < 2; ++i)
            v = static_cast<std::uint16_t>(v | (static_cast<std::uint16_t>(data[pos + static_cast<std::size_t>(i)]) << (8 * i)));
        pos += 2;
        return v;
    }
    std::uint32_t u32()
    {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(data[pos + static_cast<std::size_t>(i)]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64()
    {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(data[pos + static_cast<std::size_t>(i)]) << (8 * i);
        pos += 8;
        return v;
    }
    float f32()
    {
        const std::uint32_t u = u32();
        float v = 0.0f;
        std::memcpy(&v, &u, sizeof v);
        return v;
    }
    double f64()
    {
        const std::uint64_t u = u64();
        double v = 0.0;
        std::memcpy(&v, &u, sizeof v);
        return v;
    }
};

std::string serialize_header(const RecordingHeader &h)
{
    std::string b;
    b.reserve(256 + 20 * (h.tx_beam_refs.size() + h.rx_beam_refs.size()));
    b.append(k_magic, sizeof k_magic);
    put_u16(b, k_version);
    put_u32(b, 0); // header_bytes, patched below
    put_u64(b, h.num_captures);
    put_u32(b, h.clipping_events);
    put_f64(b, h.carrier_hz);
    put_u64(b, h.seed);
    b.push_back(static_cast<char>(h.clock.mode));
    put_f64(b, h.clock.fractional_offset);
    put_f64(b, h.clock.phase_noise_std_deg);
    put_f64(b, h.clock.random_walk_coeff);
    put_f64(b, h.clock.lo_phase_deg);
    put_u64(b, h.clock.seed);
    put_f64(b, h.rx.noise_figure_db);
    put_f64(b, h.rx.bandwidth_hz);
    put_u32(b, static_cast<std::uint32_t>(h.rx.adc_bits));
    put_f64(b, h.rx.agc_range_db);
    put_f64(b, h.rx.agc_step_db);
    put_f64(b, h.rx.saturation_dbm);
    put_u32(b, static_cast<std::uint32_t>(h.rx.awg_bits));
    put_f64(b, h.rx.agc_backoff_db);
    b.push_back(h.rx.thermal_noise ? 1 : 0);
    put_f64(b, h.tx_eirp_dbm);
    put_f64(b, h.tx_conducted_dbm);
    put_u32(b, static_cast<std::uint32_t>(h.waveform.num_tones));
    put_f64(b, h.waveform.tone_spacing_hz);
    put_f64(b, h.waveform.first_tone_hz);
    put_f64(b, h.waveform.sample_rate_hz);
    put_f64(b, h.schedule.waveform_duration_s);
    put_f64(b, h.schedule.guard_s);
    put_u32(b, h.schedule.repetitions_per_pair);
    put_u32(b, h.schedule.snapshots_per_burst);
    put_f64(b, h.schedule.burst_period_s);
    put_u32(b, h.schedule.num_bursts);
    put_f64(b, h.schedule.start_time_s);
    put_u64(b, h.codebook_hash_tx);
    put_u64(b, h.codebook_hash_rx);
    put_u64(b, h.scene_hash);
    put_u32(b, static_cast<std::uint32_t>(h.tx_beam_refs.size()));
    for (const auto &r : h.tx_beam_refs) {
        put_u32(b, r.index);
        put_f64(b, r.azimuth_deg);
        put_f64(b, r.elevation_deg);
    }
    put_u32(b, static_cast<std::uint32_t>(h.rx_beam_refs.size()));
    for (const auto &r : h.rx_beam_refs) {
        put_u32(b, r.index);
        put_f64(b, r.azimuth_deg);
        put_f64(b, r.elevation_deg);
    }
    patch_u32(b, 6, static_cast<std::uint32_t>(b.size()));
    return b;
}

RecordingHeader parse_header(Cursor &c)
{
    c.section = "header";
    c.need(sizeof k_magic);
    if (std::memcmp(c.data, k_magic, sizeof k_magic) != 0)
        throw format_error("recording: bad magic, not an SNDR file");
    c.pos += sizeof k_magic;
    RecordingHeader h;
    h.version = c.u16();
    if (h.version != k_version)
        throw format_error("recording: unsupported version " +
                           std::to_string(h.version));
    const std::uint32_t header_bytes = c.u32();
    h.num_captures = c.u64();
    h.clipping_events = c.u32();
    h.carrier_hz = c.f64();
    h.seed = c.u64();
    c.need(1);
    const unsigned mode = c.data[c.pos++];
    if (mode > 2)
        throw format_error("recording: unknown clock mode " + std::to_string(mode));
    h.clock.mode = static_cast<ClockMode>(mode);
    h.clock.fractional_offset = c.f64();
    h.clock.phase_noise_std_deg = c.f64();
    h.clock.random_walk_coeff = c.f64();
    h.clock.lo_phase_deg = c.f64();
    h.clock.seed = c.u64();
    h.rx.noise_figure_db = c.f64();
    h.rx.bandwidth_hz = c.f64();
    h.rx.adc_bits = static_cast<int>(c.u32());
    h.rx.agc_range_db = c.f64();
    h.rx.agc_step_db = c.f64();
    h.rx.saturation_dbm = c.f64();
    h.rx.awg_bits = static_cast<int>(c.u32());
    h.rx.agc_backoff_db = c.f64();
    c.need(1);
    h.rx.thermal_noise = c.data[c.pos++] != 0;
    h.tx_eirp_dbm = c.f64();
    h.tx_conducted_dbm = c.f64();
    h.waveform.num_tones = static_cast<int>(c.u32());
    h.waveform.tone_spacing_hz = c.f64();
    h.waveform.first_tone_hz = c.f64();
    h.waveform.sample_rate_hz = c.f64();
    h.schedule.waveform_duration_s = c.f64();
    h.schedule.guard_s = c.f64();
    h.schedule.repetitions_per_pair = c.u32();
    h.schedule.snapshots_per_burst = c.u32();
    h.schedule.burst_period_s = c.f64();
    h.schedule.num_bursts = c.u32();
    h.schedule.start_time_s = c.f64();
    h.codebook_hash_tx = c.u64();
    h.codebook_hash_rx = c.u64();
    h.scene_hash = c.u64();
    const std::uint32_t n_tx = c.u32();
    h.tx_beam_refs.resize(n_tx);
    h.schedule.tx_beams.clear();
    for (auto &r : h.tx_beam_refs) {
        r.index = c.u32();
        r.azimuth_deg = c.f64();
        r.elevation_deg = c.f64();
        h.schedule.tx_beams.push_back(r.index);
    }
    const std::uint32_t n_rx = c.u32();
    h.rx_beam_refs.resize(n_rx);
    h.schedule.rx_beams.clear();
    for (auto &r : h.rx_beam_refs) {
        r.index = c.u32();
        r.azimuth_deg = c.f64();
        r.elevation_deg = c.f64();
        h.schedule.rx_beams.push_back(r.index);
    }
    if (c.pos != header_bytes)
        throw format_error("recording: header size field inconsistent with content");
    return h;
}

std::string serialize_capture(const Capture &cap)
{
    std::string b;
    b.reserve(20 + cap.samples.size() * 8);
    put_u32(b, cap.snapshot_index);
    put_u32(b, cap.pair_index);
    put_f64(b, cap.timestamp_s);
    put_f32(b, cap.gain_db);
    put_u32(b, static_cast<std::uint32_t>(cap.samples.size()));
    for (const auto &s : cap.samples) {
        put_f32(b, s.real());
        put_f32(b, s.imag());
    }
    return b;
}

} // namespace

RecordingWriter::RecordingWriter(const std::string &path,
                                 const RecordingHeader &header)
    : path_(path)
{
    header.waveform.validate();
    if (header.tx_beam_refs.empty() || header.rx_beam_refs.empty())
        throw std::invalid_argument("RecordingWriter: header has empty beam lists");
    expected_samples_ =
        static_cast<std::size_t>(header.schedule.repetitions_per_pair) *
        static_cast<std::size_t>(header.waveform.period_samples());
    clipping_ = header.clipping_events;
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_)
        throw io_error("cannot open recording for writing: " + path);
    header_buf_ = serialize_header(header);
    out_.write(header_buf_.data(), static_cast<std::streamsize>(header_buf_.size()));
    if (!out_)
        throw io_error("write failure on recording header: " + path);
}

RecordingWriter::~RecordingWriter()
{
    try {
        if (!finalized_)
            finalize();
    } catch (...) {
        // Destructor must not throw; an incomplete file fails CRC on read.
    }
}

void RecordingWriter::append(const Capture &capture)
{
    if (finalized_)
        throw std::logic_error("RecordingWriter: append after finalize");
    if (capture.samples.size() != expected_samples_)
        throw std::invalid_argument("RecordingWriter: capture sample count does not match schedule");
    const std::string b = serialize_capture(capture);
    captures_crc_ = crc32(b.data(), b.size(), captures_crc_);
    captures_len_ += b.size();
    out_.write(b.data(), static_cast<std::streamsize>(b.size()));
    if (!out_)
        throw io_error("write failure while appending capture: " + path_);
    ++count_;
}

void RecordingWriter::set_clipping_events(std::uint32_t events)
{
    if (finalized_)
        throw std::logic_error("RecordingWriter: set_clipping_events after finalize");
    clipping_ = events;
}

void RecordingWriter::finalize()
{
    if (finalized_)
        return;
    finalized_ = true;
    patch_u64(header_buf_, k_count_offset, count_);
    patch_u32(header_buf_, k_clip_offset, clipping_);
    out_.seekp(0);
    out_.write(header_buf_.data(), static_cast<std::streamsize>(header_buf_.size()));
    out_.seekp(0, std::ios::end);
    const std::uint32_t header_crc = crc32(header_buf_.data(), header_buf_.size());
    const std::uint32_t total =
        crc32_combine(header_crc, captures_crc_, captures_len_);
    std::string trailer;
    put_u32(trailer, total);
    out_.write(trailer.data(), static_cast<std::streamsize>(trailer.size()));
    out_.flush();
    if (!out_)
        throw io_error("write failure while finalizing recording: " + path_);
    out_.close();
}

void write_recording(const SweepRecording &recording, const std::string &path)
{
    if (recording.header.num_captures != recording.captures.size())
        throw std::invalid_argument("write_recording: header capture count mismatch");
    RecordingWriter writer(path, recording.header);
    for (const auto &cap : recording.captures)
        writer.append(cap);
    writer.set_clipping_events(recording.header.clipping_events);
    writer.finalize();
}

SweepRecording read_recording(const std::string &path)
{
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f)
        throw io_error("cannot open recording: " + path);
    const std::streamsize size = f.tellg();
    f.seekg(0);
    std::vector<unsigned char> bytes(static_cast<std::size_t>(size));
    if (size > 0)
        f.read(reinterpret_cast<char *>(bytes.data()), size);
    if (!f)
        throw io_error("read failure on recording: " + path);

    if (bytes.size() < 4)
        throw integrity_error("recording truncated in header");
    Cursor c{bytes.data(), bytes.size(), 0, "header"};
    // Trailer is not part of the checksummed span; reserve it up front.
    if (bytes.size() < 4 + k_count_offset)
        throw integrity_error("recording truncated in header");
    c.size = bytes.size() - 4;

    SweepRecording rec;
    rec.header = parse_header(c);
    rec.captures.reserve(static_cast<std::size_t>(rec.header.num_captures));
    for (std::uint64_t i = 0; i < rec.header.num_captures; ++i) {
        c.section = "captures";
        Capture cap;
        cap.snapshot_index = c.u32();
        cap.pair_index = c.u32();
        cap.timestamp_s = c.f64();
        cap.gain_db = c.f32();
        const std::uint32_t n = c.u32();
        c.need(static_cast<std::size_t>(n) * 8);
        cap.samples.resize(n);
        for (std::uint32_t k = 0; k < n; ++k) {
            const float re = c.f32();
            const float im = c.f32();
            cap.samples[k] = cfloat(re, im);
        }
        rec.captures.push_back(std::move(cap));
    }
    if (c.pos != c.size)
        throw integrity_error("recording: trailing bytes after last capture");

    c.section = "trailer";
    c.size = bytes.size();
    const std::uint32_t stored_crc = c.u32();
    const std::uint32_t actual_crc = crc32(bytes.data(), bytes.size() - 4);
    if (stored_crc != actual_crc)
        throw integrity_error("recording: CRC32 mismatch in trailer");
    return rec;
}

void write_ground_truth_sidecar(const SweepRecording &recording,
                                const Scene &scene, const std::string &path)
{
    if (scene.content_hash() != recording.header.scene_hash)
        throw std::invalid_argument("ground-truth sidecar: scene does not match recording header");
    const auto &sched = recording.header.schedule;

    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["seed"] = recording.header.seed;
    char hash_hex[19];
    std::snprintf(hash_hex, sizeof hash_hex, "0x%016llx",
                  static_cast<unsigned long long>(recording.header.scene_hash));
    j["scene_hash"] = hash_hex;
    j["scene_name"] = scene.name;
    j["snapshots"] = nlohmann::ordered_json::array();
    const std::uint64_t total_snaps =
        static_cast<std::uint64_t>(sched.num_bursts) * sched.snapshots_per_burst;
    for (std::uint64_t s = 0; s < total_snaps; ++s) {
        const std::uint64_t burst = s / sched.snapshots_per_burst;
        const std::uint64_t within = s % sched.snapshots_per_burst;
        const double t = sched.start_time_s + burst * sched.burst_period_s +
                         within * sched.snapshot_time_s();
        nlohmann::ordered_json snap;
        snap["index"] = s;
        snap["t_s"] = t;
        snap["mpcs"] = nlohmann::ordered_json::array();
        for (const auto &m : snapshot_mpcs(scene, t)) {
            nlohmann::ordered_json mj;
            mj["delay_s"] = m.delay_s;
            mj["dod_azimuth_deg"] = m.dod_azimuth_deg;
            mj["dod_elevation_deg"] = m.dod_elevation_deg;
            mj["doa_azimuth_deg"] = m.doa_azimuth_deg;
            mj["doa_elevation_deg"] = m.doa_elevation_deg;
            mj["gain_re"] = m.complex_gain.real();
            mj["gain_im"] = m.complex_gain.imag();
            mj["doppler_hz"] = m.doppler_hz;
            mj["interaction"] = m.interaction == Interaction::los ? "los"
                                : m.interaction == Interaction::single_bounce
                                    ? "single_bounce"
                                    : "blocked";
            snap["mpcs"].push_back(std::move(mj));
        }
        j["snapshots"].push_back(std::move(snap));
    }
    std::ofstream f(path);
    if (!f)
        throw io_error("cannot open sidecar for writing: " + path);
    f << j.dump(2) << "\n";
    if (!f)
        throw io_error("write failure on sidecar: " + path);
}

} // namespace mmsounder
