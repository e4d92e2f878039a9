// SPDX-License-Identifier: Apache-2.0
//
// mmsounder - checksums and deterministic seed derivation

#pragma once

#include <cstddef>
#include <cstdint>

namespace mmsounder {

// CRC-32 (IEEE 802.3, reflected, poly 0xEDB88320). `crc` chains partial runs;
// pass the previous return value to continue a checksum across buffers.
uint32_t crc32(const void *data, size_t len, uint32_t crc = 0);

// CRC of the concatenation A||B given crc(A), crc(B) and len(B). Lets a
// streaming writer patch bytes in A after B has already been checksummed.
uint32_t crc32_combine(uint32_t crc_a, uint32_t crc_b, uint64_t len_b);

// FNV-1a 64-bit, used for content fingerprints of codebooks and scenes.
uint64_t fnv1a64(const void *data, size_t len, uint64_t h = 14695981039346656037ull);

// splitmix64 step; used to derive independent RNG streams from one seed.
uint64_t splitmix64(uint64_t &state);

// Deterministic sub-seed for a named stream, e.g. noise for capture (b,s,p).
uint64_t derive_seed(uint64_t root, uint64_t a, uint64_t b = 0, uint64_t c = 0, uint64_t d = 0);

} // namespace mmsounder
