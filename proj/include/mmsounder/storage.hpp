// SPDX-License-Identifier: Apache-2.0
//
// mmsounder - recording file format: "SNDR" little-endian binary with CRC32 trailer

#pragma once

#include <cstdint>
#include <fstream>
#include <string>

#include "mmsounder/errors.hpp"
#include "mmsounder/scene.hpp"
#include "mmsounder/sounder.hpp"

namespace mmsounder {

/*!
 * Streaming writer: captures go to disk as they are appended, nothing is
 * buffered beyond the header image.  finalize() patches the capture count
 * and clipping counter into the header and appends a CRC32 of the whole
 * file; the result is byte-identical to a batch write_recording call.
 */
class RecordingWriter {
  public:
    RecordingWriter(const std::string &path, const RecordingHeader &header);
    RecordingWriter(const RecordingWriter &) = delete;
    RecordingWriter &operator=(const RecordingWriter &) = delete;
    ~RecordingWriter();

    void append(const Capture &capture);
    void set_clipping_events(std::uint32_t events);
    void finalize();

  private:
    std::string path_;
    std::ofstream out_;
    std::string header_buf_;
    std::uint32_t captures_crc_ = 0;
    std::uint64_t captures_len_ = 0;
    std::uint64_t count_ = 0;
    std::uint32_t clipping_ = 0;
    std::size_t expected_samples_ = 0;
    bool finalized_ = false;
};

/// Batch write of a complete recording (streams internally).
void write_recording(const SweepRecording &recording, const std::string &path);

/// Read and fully validate a recording.  Throws io_error when the file
/// cannot be opened, format_error for bad magic/version/schema, and
/// integrity_error (a format_error) for truncation or checksum mismatch,
/// naming the failing section.
SweepRecording read_recording(const std::string &path);

/// JSON sidecar with the ground-truth MPC list at each snapshot start time.
/// References the recording's seed and scene hash; throws
/// std::invalid_argument when `scene` does not match the header's hash.
void write_ground_truth_sidecar(const SweepRecording &recording,
                                const Scene &scene, const std::string &path);

} // namespace mmsounder
