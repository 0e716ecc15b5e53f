#include "hippo/bit_source.hpp"

#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include <sodium.h>

#include "hippo/error.hpp"

namespace hippo {

namespace {

constexpr std::size_t kChunkBlocks = 256;  // 64-byte ChaCha20 blocks per refill
constexpr std::size_t kBlockBytes = 64;

void init_sodium() {
  static const int status = sodium_init();
  if (status < 0) throw Error("libsodium initialisation failed");
}

}  // namespace

BitString parse_bit_text(std::string_view text) {
  std::vector<std::uint8_t> bits;
  bits.reserve(text.size());
  for (char c : text) {
    if (c == '0' || c == '1') {
      bits.push_back(static_cast<std::uint8_t>(c - '0'));
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      throw FormatError(std::string("bit file contains invalid character '") + c + "'");
    }
  }
  return BitString::from_raw(std::move(bits));
}

BitSource BitSource::from_string(const BitString& bits) {
  BitSource s(Kind::explicit_string, "explicit:" + bits.str());
  s.bits_.assign(bits.raw().begin(), bits.raw().end());
  return s;
}

BitSource BitSource::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open bit file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  BitString bits = parse_bit_text(buf.str());
  BitSource s(Kind::file, "file:" + path.string());
  s.bits_.assign(bits.raw().begin(), bits.raw().end());
  return s;
}

BitSource BitSource::from_seed(std::uint64_t seed) {
  init_sodium();
  BitSource s(Kind::seeded, "seed:" + std::to_string(seed));
  std::array<unsigned char, 8> le{};
  for (std::size_t i = 0; i < 8; ++i) le[i] = static_cast<unsigned char>(seed >> (8 * i));
  s.key_.resize(crypto_stream_chacha20_KEYBYTES);
  crypto_generichash(s.key_.data(), s.key_.size(), le.data(), le.size(), nullptr, 0);
  return s;
}

void BitSource::ensure(std::size_t n) {
  if (bits_.size() >= n) return;
  if (kind_ != Kind::seeded)
    throw SourceExhausted(identity_ + " has " + std::to_string(bits_.size()) + " bits, needed " + std::to_string(n));
  const std::array<unsigned char, crypto_stream_chacha20_NONCEBYTES> nonce{};
  std::vector<unsigned char> zeros(kChunkBlocks * kBlockBytes, 0);
  std::vector<unsigned char> stream(zeros.size());
  while (bits_.size() < n) {
    crypto_stream_chacha20_xor_ic(stream.data(), zeros.data(), zeros.size(), nonce.data(), next_block_, key_.data());
    next_block_ += kChunkBlocks;
    bits_.reserve(bits_.size() + stream.size() * 8);
    for (unsigned char byte : stream)
      for (int k = 7; k >= 0; --k) bits_.push_back(static_cast<std::uint8_t>((byte >> k) & 1u));
  }
}

BitString BitSource::read_bits(std::size_t start, std::size_t count) {
  if (start == 0) throw DomainError("bit indices are 1-based");
  if (count == 0) return {};
  ensure(start - 1 + count);
  auto first = bits_.begin() + static_cast<std::ptrdiff_t>(start - 1);
  return BitString::from_raw(std::vector<std::uint8_t>(first, first + static_cast<std::ptrdiff_t>(count)));
}

BitString BitSource::next(std::size_t count) {
  BitString out = read_bits(position_, count);
  position_ += count;
  return out;
}

void BitSource::seek(std::size_t position) {
  if (position == 0) throw DomainError("bit indices are 1-based");
  position_ = position;
}

}  // namespace hippo
