#include "stripefs/bench/digest.hpp"

#include <openssl/evp.h>

#include "stripefs/common/error.hpp"

namespace stripefs::bench {

Sha256::Sha256() : ctx_(EVP_MD_CTX_new()) {
  if (ctx_ == nullptr || EVP_DigestInit_ex(static_cast<EVP_MD_CTX*>(ctx_), EVP_sha256(), nullptr) != 1) {
    raise(Errc::integrity, "cannot initialise SHA-256");
  }
}

Sha256::~Sha256() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

void Sha256::update(ByteView data) {
  if (!data.empty()) EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data.data(), data.size());
}

std::array<std::uint8_t, 32> Sha256::finish() {
  std::array<std::uint8_t, 32> out{};
  unsigned int n = 0;
  EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), out.data(), &n);
  return out;
}

std::array<std::uint8_t, 32> sha256(ByteView data) {
  Sha256 h;
  h.update(data);
  return h.finish();
}

std::string to_hex(std::span<const std::uint8_t> digest) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s;
  for (auto b : digest) {
    s.push_back(kHex[b >> 4]);
    s.push_back(kHex[b & 15]);
  }
  return s;
}

namespace {

// splitmix64 finaliser; each 8-byte word of a stream is hashed from its index.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

void fill_pattern(std::uint64_t seed, std::uint64_t stream, std::uint64_t offset, MutableByteView out) {
  const std::uint64_t key = mix(seed ^ mix(stream));
  std::uint64_t pos = offset;
  for (auto& b : out) {
    const std::uint64_t word = mix(key + pos / 8);
    b = static_cast<std::uint8_t>(word >> (8 * (pos % 8)));
    ++pos;
  }
}

Bytes pattern(std::uint64_t seed, std::uint64_t stream, std::uint64_t offset, std::uint64_t length) {
  Bytes out(length);
  fill_pattern(seed, stream, offset, out);
  return out;
}

}  // namespace stripefs::bench
