#pragma once

#include <cstddef>
#include <cstdint>

namespace lemma {

// IEEE 802.3 CRC-32 (polynomial 0xEDB88320), as used by PNG and the
// dataset / checkpoint record formats.
uint32_t crc32(const uint8_t* data, size_t len, uint32_t seed = 0);

}  // namespace lemma
