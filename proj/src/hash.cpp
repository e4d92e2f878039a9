// SPDX-License-Identifier: Apache-2.0
//
// mmsounder - checksums and deterministic seed derivation

#include "mmsounder/hash.hpp"

#include <array>

namespace mmsounder {

namespace {

std::array<uint32_t, 256> make_crc_table()
{
    std::array<uint32_t, 256> t{};
    for (uint32_t i = 0; i < 256; ++i) {
        uint32_t c = i;
        for (int k = 0; k < 8; ++k)
            c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
        t[i] = c;
    }
    return t;
}

const std::array<uint32_t, 256> g_crc_table = make_crc_table();

} // namespace

uint32_t crc32(const void *data, size_t len, uint32_t crc)
{
    const auto *p = static_cast<const unsigned char *>(data);
    uint32_t c = crc ^ 0xFFFFFFFFu;
    for (size_t i = 0; i < len; ++i)
        c = g_crc_table[(c ^ p[i]) & 0xFFu] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

namespace {

// GF(2) linear algebra over the CRC register: combining checksums of
// concatenated streams is multiplication by the len_b-th power of the
// one-zero-byte advance matrix.
uint32_t gf2_matrix_times(const uint32_t *mat, uint32_t vec)
{
    uint32_t sum = 0;
    for (int i = 0; vec != 0; vec >>= 1, ++i)
        if (vec & 1u)
            sum ^= mat[i];
    return sum;
}

void gf2_matrix_square(uint32_t *square, const uint32_t *mat)
{
    for (int n = 0; n < 32; ++n)
        square[n] = gf2_matrix_times(mat, mat[n]);
}

} // namespace

uint32_t crc32_combine(uint32_t crc_a, uint32_t crc_b, uint64_t len_b)
{
    if (len_b == 0)
        return crc_a;
    uint32_t even[32], odd[32];
    odd[0] = 0xEDB88320u; // advance by one bit
    uint32_t row = 1;
    for (int n = 1; n < 32; ++n) {
        odd[n] = row;
        row <<= 1;
    }
    gf2_matrix_square(even, odd); // advance by two bits
    gf2_matrix_square(odd, even); // advance by four bits
    do {
        gf2_matrix_square(even, odd);
        if (len_b & 1u)
            crc_a = gf2_matrix_times(even, crc_a);
        len_b >>= 1;
        if (len_b == 0)
            break;
        gf2_matrix_square(odd, even);
        if (len_b & 1u)
            crc_a = gf2_matrix_times(odd, crc_a);
        len_b >>= 1;
    } while (len_b != 0);
    return crc_a ^ crc_b;
}

uint64_t fnv1a64(const void *data, size_t len, uint64_t h)
{
    const auto *p = static_cast<const unsigned char *>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

uint64_t splitmix64(uint64_t &state)
{
    uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

uint64_t derive_seed(uint64_t root, uint64_t a, uint64_t b, uint64_t c, uint64_t d)
{
    uint64_t s = root;
    uint64_t out = splitmix64(s);
    s ^= a * 0x9E3779B97F4A7C15ull;
    out ^= splitmix64(s);
    s ^= b * 0xC2B2AE3D27D4EB4Full;
    out ^= splitmix64(s);
    s ^= c * 0x165667B19E3779F9ull;
    out ^= splitmix64(s);
    s ^= d * 0x27D4EB2F165667C5ull;
    out ^= splitmix64(s);
    return out;
}

} // namespace mmsounder
