#include "cpc/stream.hpp"

#include <istream>
#include <ostream>
#include <string>

namespace cpc {
namespace {

constexpr char kMagic[4] = {'C', 'P', 'C', '1'};

std::size_t byte_width(const BigInt& max_value) {
  std::size_t bytes = 0;
  for (BigInt v = max_value; v > 0; v >>= 8) ++bytes;
  return bytes;
}

void write_big_endian(std::ostream& out, const BigInt& value, std::size_t width) {
  for (std::size_t b = width; b-- > 0;) {
    const BigInt byte = (value >> (8 * b)) & 0xff;
    out.put(static_cast<char>(byte.convert_to<unsigned>()));
  }
}

bool read_byte(std::istream& in, unsigned char& byte) {
  const int c = in.get();
  if (c == std::char_traits<char>::eof()) return false;
  byte = static_cast<unsigned char>(c);
  return true;
}

// Returns false on clean end of input before the first byte.
bool read_varint(std::istream& in, std::uint64_t& value, bool allow_eof) {
  value = 0;
  unsigned shift = 0;
  for (int i = 0; i < 10; ++i) {
    unsigned char byte = 0;
    if (!read_byte(in, byte)) {
      if (i == 0 && allow_eof) return false;
      throw StreamError("truncated varint");
    }
    value |= static_cast<std::uint64_t>(byte & 0x7f) << shift;
    if (!(byte & 0x80)) return true;
    shift += 7;
  }
  throw StreamError("varint too long");
}

BigInt read_big_endian(std::istream& in, std::size_t width) {
  BigInt value = 0;
  for (std::size_t b = 0; b < width; ++b) {
    unsigned char byte = 0;
    if (!read_byte(in, byte)) throw StreamError("truncated record");
    value = (value << 8) | byte;
  }
  return value;
}

}  // namespace

void write_varint(std::ostream& out, std::uint64_t value) {
  do {
    unsigned char byte = value & 0x7f;
    value >>= 7;
    if (value) byte |= 0x80;
    out.put(static_cast<char>(byte));
  } while (value);
}

void write_stream_header(std::ostream& out, const ConcentricCode& code) {
  out.write(kMagic, sizeof(kMagic));
  write_varint(out, static_cast<std::uint64_t>(code.dimension()));
  write_varint(out, code.size());
  write_varint(out, static_cast<std::uint64_t>(to_int(code.variant())));
}

void write_record(std::ostream& out, const EncodedIndex& index, const ConcentricCode& code) {
  const auto& cw = code.subcode(index.sphere);
  const int h = cw.sign_count();
  const BigInt perm_rank = index.rank >> h;
  write_varint(out, index.sphere);
  write_big_endian(out, perm_rank, byte_width(cw.permutation_count() - 1));
  if (h > 0) {
    const std::size_t sign_bytes = static_cast<std::size_t>((h + 7) / 8);
    const BigInt signs = index.rank - (perm_rank << h);
    // Left-align the h sign bits in the byte block.
    write_big_endian(out, signs << (8 * sign_bytes - static_cast<std::size_t>(h)), sign_bytes);
  }
}

std::vector<EncodedIndex> read_stream(std::istream& in, const ConcentricCode& code) {
  std::vector<EncodedIndex> records;
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() == 0) return records;
  if (in.gcount() != 4 || std::string(magic, 4) != std::string(kMagic, 4)) throw StreamError("bad stream magic");
  std::uint64_t n = 0, J = 0, variant = 0;
  read_varint(in, n, false);
  read_varint(in, J, false);
  read_varint(in, variant, false);
  if (n != static_cast<std::uint64_t>(code.dimension()) || J != code.size() ||
      variant != static_cast<std::uint64_t>(to_int(code.variant())))
    throw StreamError("stream header does not match the codebook");

  std::uint64_t sphere = 0;
  while (read_varint(in, sphere, true)) {
    if (sphere >= code.size()) throw StreamError("record " + std::to_string(records.size()) + ": sphere out of range");
    const auto& cw = code.subcode(sphere);
    const BigInt perms = cw.permutation_count();
    BigInt rank = read_big_endian(in, byte_width(perms - 1));
    if (rank >= perms) throw StreamError("record " + std::to_string(records.size()) + ": rank out of range");
    const int h = cw.sign_count();
    if (h > 0) {
      const std::size_t sign_bytes = static_cast<std::size_t>((h + 7) / 8);
      const std::size_t pad = 8 * sign_bytes - static_cast<std::size_t>(h);
      const BigInt block = read_big_endian(in, sign_bytes);
      if (block != ((block >> pad) << pad)) throw StreamError("record " + std::to_string(records.size()) + ": nonzero sign padding");
      rank = (rank << h) | (block >> pad);
    }
    records.push_back({static_cast<std::size_t>(sphere), std::move(rank)});
  }
  return records;
}

}  // namespace cpc
