// SPDX-License-Identifier: Apache-2.0
//
// mmsounder - error taxonomy shared by file readers/writers and the CLI

#pragma once

#include <stdexcept>
#include <string>

namespace mmsounder {

// Filesystem-level failures: cannot open, write, or stat a path.
struct io_error : std::runtime_error {
    explicit io_error(const std::string &what) : std::runtime_error(what) {}
};

// Structural problems with file content: wrong magic, unsupported version,
// schema violations.
struct format_error : std::runtime_error {
    explicit format_error(const std::string &what) : std::runtime_error(what) {}
};

// Content that parses structurally but fails verification: truncation,
// checksum mismatch.
struct integrity_error : format_error {
    explicit integrity_error(const std::string &what) : format_error(what) {}
};

} // namespace mmsounder
