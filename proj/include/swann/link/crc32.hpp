#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace swann::link {

// CRC-32 (reflected 0x04C11DB7, init/xorout 0xFFFFFFFF), the variant whose
// check value over "123456789" is 0xCBF43926.
namespace detail {
inline const std::array<uint32_t, 256>& crc32_table() {
  static const std::array<uint32_t, 256> table = [] {
    std::array<uint32_t, 256> t{};
    for (uint32_t i = 0; i < 256; ++i) {
      uint32_t c = i;
      for (int k = 0; k < 8; ++k)
        c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  return table;
}
}  // namespace detail

inline uint32_t crc32_update(uint32_t crc, const uint8_t* data, size_t len) {
  const auto& t = detail::crc32_table();
  for (size_t i = 0; i < len; ++i)
    crc = t[(crc ^ data[i]) & 0xff] ^ (crc >> 8);
  return crc;
}

inline uint32_t crc32(const uint8_t* data, size_t len) {
  return crc32_update(0xFFFFFFFFu, data, len) ^ 0xFFFFFFFFu;
}

}  // namespace swann::link
