#ifndef DAN_CONTAINER_HPP_
#define DAN_CONTAINER_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace dan {

// Record container: magic "DANSYN01", little-endian u32 record count, then
// length-prefixed records, each followed by a CRC32 of its payload.
inline constexpr char kContainerMagic[8] = {'D', 'A', 'N', 'S', 'Y', 'N', '0', '1'};

std::uint32_t crc32(const std::uint8_t* data, std::size_t len);

// Little-endian byte packing helpers for record payloads.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void f64_span(const double* data, std::size_t n);

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  void f64_span(double* out, std::size_t n);
  bool exhausted() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const;
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

void write_container(const std::string& path,
                     const std::vector<std::vector<std::uint8_t>>& records);
// Throws IoError for bad magic, truncation, or a checksum mismatch; the
// message names the failing record.
std::vector<std::vector<std::uint8_t>> read_container(const std::string& path);

}  // namespace dan

#endif  // DAN_CONTAINER_HPP_
