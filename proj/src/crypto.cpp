#include "tagchain/crypto.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

namespace tagchain {

const char* to_string(Msg m) {
  return m == Msg::TagValid ? "TAG-VALID" : "TAG-AUTH-ERROR";
}

std::array<std::uint8_t, 8> be_bytes(Word64 a) {
  std::array<std::uint8_t, 8> out;
  store_be64(out.data(), a);
  return out;
}

std::array<std::uint8_t, 16> be_bytes(Word64 a, Word64 b) {
  std::array<std::uint8_t, 16> out;
  store_be64(out.data(), a);
  store_be64(out.data() + 8, b);
  return out;
}

Word64 load_be64(const std::uint8_t* p) {
  Word64 v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | p[i];
  return v;
}

void store_be64(std::uint8_t* p, Word64 v) {
  for (int i = 7; i >= 0; --i) {
    p[i] = static_cast<std::uint8_t>(v & 0xff);
    v >>= 8;
  }
}

namespace {

inline Word64 load_le64(const std::uint8_t* p) {
  Word64 v;
  std::memcpy(&v, p, 8);
  if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap64(v);
  return v;
}

inline void sipround(Word64& v0, Word64& v1, Word64& v2, Word64& v3) {
  v0 += v1;
  v1 = std::rotl(v1, 13);
  v1 ^= v0;
  v0 = std::rotl(v0, 32);
  v2 += v3;
  v3 = std::rotl(v3, 16);
  v3 ^= v2;
  v0 += v3;
  v3 = std::rotl(v3, 21);
  v3 ^= v0;
  v2 += v1;
  v1 = std::rotl(v1, 17);
  v1 ^= v2;
  v2 = std::rotl(v2, 32);
}

// 64-bit protocol key -> 128-bit SipHash key.
inline void expand_key(Word64 key, std::uint8_t out[16]) {
  Word64 k0 = key;
  Word64 k1 = key ^ 0x9e3779b97f4a7c15ULL;
  for (int i = 0; i < 8; ++i) {
    out[i] = static_cast<std::uint8_t>(k0 >> (8 * i));
    out[8 + i] = static_cast<std::uint8_t>(k1 >> (8 * i));
  }
}

constexpr Word64 kFnvOffset = 0xcbf29ce484222325ULL;
constexpr Word64 kFnvPrime = 0x100000001b3ULL;

Word64 weak_digest(std::span<const std::uint8_t> msg) {
  Word64 h = kFnvOffset;
  for (std::uint8_t b : msg) {
    h ^= b;
    h *= kFnvPrime;
  }
  return h;
}

}  // namespace

Word64 siphash24(const std::uint8_t key[16], std::span<const std::uint8_t> msg) {
  Word64 k0 = load_le64(key);
  Word64 k1 = load_le64(key + 8);
  Word64 v0 = k0 ^ 0x736f6d6570736575ULL;
  Word64 v1 = k1 ^ 0x646f72616e646f6dULL;
  Word64 v2 = k0 ^ 0x6c7967656e657261ULL;
  Word64 v3 = k1 ^ 0x7465646279746573ULL;

  const std::size_t n = msg.size();
  const std::size_t full = n & ~std::size_t{7};
  for (std::size_t i = 0; i < full; i += 8) {
    Word64 m = load_le64(msg.data() + i);
    v3 ^= m;
    sipround(v0, v1, v2, v3);
    sipround(v0, v1, v2, v3);
    v0 ^= m;
  }

  Word64 last = Word64(n & 0xff) << 56;
  for (std::size_t i = full; i < n; ++i)
    last |= Word64(msg[i]) << (8 * (i - full));
  v3 ^= last;
  sipround(v0, v1, v2, v3);
  sipround(v0, v1, v2, v3);
  v0 ^= last;

  v2 ^= 0xff;
  sipround(v0, v1, v2, v3);
  sipround(v0, v1, v2, v3);
  sipround(v0, v1, v2, v3);
  sipround(v0, v1, v2, v3);
  return v0 ^ v1 ^ v2 ^ v3;
}

Digest KeyedHash::digest(std::span<const std::uint8_t> message, Word64 key) const {
  if (message.empty()) throw std::invalid_argument("keyed hash: empty message");
  if (algo_ == HashAlgo::TestWeak) return weak_digest(message);
  std::uint8_t k[16];
  expand_key(key, k);
  return siphash24(k, message);
}

Digest KeyedHash::hash(std::span<const std::uint8_t> message, Word64 key,
                       OpCounter& ops) const {
  Digest d = digest(message, key);
  ops.hash_ops += 1;
  return d;
}

Word64 Prng::next(OpCounter& ops) {
  counter_ += 1;
  ops.prng_ops += 1;
  std::uint8_t k[16];
  expand_key(seed_, k);
  auto msg = be_bytes(counter_);
  return siphash24(k, msg);
}

void Prng::restore(Word64 seed, std::uint64_t counter) {
  seed_ = seed;
  counter_ = counter;
}

Digest aggregate(std::span<const Digest> digests) {
  if (digests.empty()) throw std::invalid_argument("aggregate: empty digest list");
  Digest h = 0;
  for (Digest d : digests) h ^= d;
  return h;
}

Msg verify_aggregate(std::span<const VerifyEntry> entries, Digest h,
                     const KeyedHash& hasher, OpCounter& ops) {
  if (entries.empty()) throw std::invalid_argument("verify_aggregate: empty batch");
  Digest acc = 0;
  for (const VerifyEntry& e : entries)
    acc ^= hasher.hash(be_bytes(e.r_t, e.r_r), e.key, ops);
  return acc == h ? Msg::TagValid : Msg::TagAuthError;
}

}  // namespace tagchain
