#include "dan/hash.hpp"

#include <cstdio>
#include <fstream>

#include "dan/error.hpp"

namespace dan {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for hashing: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    std::streamsize n = in.gcount();
    if (n > 0) h = fnv1a64(buf, static_cast<std::size_t>(n), h);
  }
  return hex64(h);
}

}  // namespace dan
