#pragma once

#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "cpc/codec.hpp"

namespace cpc {

/// Binary stream of encoded vectors.
///
///   header : "CPC1" | varint n | varint J | varint variant
///   record : varint sphere | permutation rank, big-endian, fixed width per sphere
///            | Variant II sign bits packed MSB-first, ceil(h/8) bytes
///
/// Rank widths are the byte lengths of (permutation count - 1), so a record can be
/// parsed from the codebook alone.
class StreamError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_stream_header(std::ostream& out, const ConcentricCode& code);
void write_record(std::ostream& out, const EncodedIndex& index, const ConcentricCode& code);

/// Reads a whole stream. An empty input yields no records.
std::vector<EncodedIndex> read_stream(std::istream& in, const ConcentricCode& code);

void write_varint(std::ostream& out, std::uint64_t value);

}  // namespace cpc
