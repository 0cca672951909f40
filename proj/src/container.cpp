#include "dan/container.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "dan/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

namespace dan {

std::uint32_t crc32(const std::uint8_t* data, std::size_t len) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t c = 0xffffffffu;
  for (std::size_t i = 0; i < len; ++i) c = table[(c ^ data[i]) & 0xff] ^ (c >> 8);
  return c ^ 0xffffffffu;
}

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::f64(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  u64(bits);
}

void ByteWriter::f64_span(const double* data, std::size_t n) {
  std::size_t off = bytes_.size();
  bytes_.resize(off + n * 8);
  std::memcpy(bytes_.data() + off, data, n * 8);
}

void ByteReader::need(std::size_t n) const {
  if (pos_ + n > bytes_.size())
    throw IoError("malformed record: truncated payload (need " + std::to_string(n) +
                  " bytes at offset " + std::to_string(pos_) + " of " +
                  std::to_string(bytes_.size()) + ")");
}

std::uint8_t ByteReader::u8() {
  need(1);
  return bytes_[pos_++];
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
  return v;
}

double ByteReader::f64() {
  std::uint64_t bits = u64();
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

void ByteReader::f64_span(double* out, std::size_t n) {
  need(n * 8);
  std::memcpy(out, bytes_.data() + pos_, n * 8);
  pos_ += n * 8;
}

void write_container(const std::string& path,
                     const std::vector<std::vector<std::uint8_t>>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(kContainerMagic, sizeof(kContainerMagic));
  ByteWriter header;
  header.u32(static_cast<std::uint32_t>(records.size()));
  out.write(reinterpret_cast<const char*>(header.bytes().data()),
            static_cast<std::streamsize>(header.bytes().size()));
  for (const auto& rec : records) {
    ByteWriter frame;
    frame.u32(static_cast<std::uint32_t>(rec.size()));
    out.write(reinterpret_cast<const char*>(frame.bytes().data()), 4);
    out.write(reinterpret_cast<const char*>(rec.data()),
              static_cast<std::streamsize>(rec.size()));
    ByteWriter tail;
    tail.u32(crc32(rec.data(), rec.size()));
    out.write(reinterpret_cast<const char*>(tail.bytes().data()), 4);
  }
  if (!out) throw IoError("failed writing container: " + path);
}

std::vector<std::vector<std::uint8_t>> read_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::vector<std::uint8_t> all((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  if (all.size() < sizeof(kContainerMagic) + 4)
    throw IoError("malformed container (too short): " + path);
  if (std::memcmp(all.data(), kContainerMagic, sizeof(kContainerMagic)) != 0)
    throw IoError("bad magic in " + path + " (not a DANSYN01 container)");

  std::size_t pos = sizeof(kContainerMagic);
  auto read_u32 = [&](const char* what) {
    if (pos + 4 > all.size())
      throw IoError("malformed container: truncated " + std::string(what) + " in " + path);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(all[pos++]) << (8 * i);
    return v;
  };

  std::uint32_t count = read_u32("record count");
  std::vector<std::vector<std::uint8_t>> records;
  records.reserve(count);
  for (std::uint32_t r = 0; r < count; ++r) {
    std::uint32_t len = read_u32("record length");
    if (pos + len + 4 > all.size())
      throw IoError("malformed record " + std::to_string(r) + " in " + path +
                    ": truncated");
    std::vector<std::uint8_t> payload(all.begin() + pos, all.begin() + pos + len);
    pos += len;
    std::uint32_t stored = read_u32("record checksum");
    std::uint32_t actual = crc32(payload.data(), payload.size());
    if (stored != actual)
      throw IoError("checksum mismatch in record " + std::to_string(r) + " of " + path);
    records.push_back(std::move(payload));
  }
  if (pos != all.size())
    throw IoError("malformed container: " + std::to_string(all.size() - pos) +
                  " trailing bytes in " + path);
  return records;
}

}  // namespace dan
