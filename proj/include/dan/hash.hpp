#ifndef DAN_HASH_HPP_
#define DAN_HASH_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace dan {

// FNV-1a 64-bit. Used for content identity (split hygiene, run manifests),
// not for security.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x00000100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::vector<std::uint8_t>& bytes) {
  return fnv1a64(bytes.data(), bytes.size());
}

std::string hex64(std::uint64_t v);

// Hash of a whole file's bytes, hex-encoded. Throws IoError if unreadable.
std::string hash_file(const std::string& path);

}  // namespace dan

#endif  // DAN_HASH_HPP_
