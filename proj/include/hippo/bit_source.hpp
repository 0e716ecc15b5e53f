#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hippo/core.hpp"

namespace hippo {

/// A reproducible stream of bits standing in for the parameter alpha.
///
/// Three kinds exist: an explicit finite string, an ASCII bit file (finite),
/// and a seeded ChaCha20 keystream (unbounded). Bit i is a pure function of
/// the source identity, so re-reading always gives the same answer. The read
/// position is the only mutable state; a source has a single owner.
class BitSource {
 public:
  enum class Kind { explicit_string, file, seeded };

  static BitSource from_string(const BitString& bits);
  static BitSource from_file(const std::filesystem::path& path);
  static BitSource from_seed(std::uint64_t seed);

  Kind kind() const noexcept { return kind_; }
  /// "explicit:<len>", "file:<path>" or "seed:<n>".
  const std::string& identity() const noexcept { return identity_; }

  /// Bits start .. start+count-1, 1-indexed. Throws SourceExhausted for finite sources.
  BitString read_bits(std::size_t start, std::size_t count);
  /// alpha restricted to its first n bits.
  BitString prefix(std::size_t n) { return read_bits(1, n); }

  /// Reads `count` bits from the current position and advances it.
  BitString next(std::size_t count);
  /// Next unread index (1-based).
  std::size_t position() const noexcept { return position_; }
  void seek(std::size_t position);

 private:
  BitSource(Kind kind, std::string identity) : kind_(kind), identity_(std::move(identity)) {}
  void ensure(std::size_t n);

  Kind kind_;
  std::string identity_;
  std::vector<std::uint8_t> bits_;
  std::uint64_t next_block_ = 0;
  std::vector<unsigned char> key_;
  std::size_t position_ = 1;
};

/// Parses the bit-file format: '0'/'1', whitespace ignored, anything else is a FormatError.
BitString parse_bit_text(std::string_view text);

}  // namespace hippo
