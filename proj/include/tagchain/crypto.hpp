#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace tagchain {

// Every protocol field (keys, digests, nonces, timestamps) is one 64-bit word.
using Word64 = std::uint64_t;
using Digest = Word64;

inline constexpr unsigned kWordBits = 64;

enum class Msg { TagValid, TagAuthError };
const char* to_string(Msg m);

enum class HashAlgo {
  ReferencePrf,  // SipHash-2-4, 64-bit output
  TestWeak,      // key-independent digest; planted flaw for harness validation
};

// Primitive-operation tally. One keyed hash or one PRNG draw costs one unit;
// both primitives are assumed equally expensive.
struct OpCounter {
  std::uint64_t hash_ops = 0;
  std::uint64_t prng_ops = 0;

  std::uint64_t total() const { return hash_ops + prng_ops; }
  bool operator==(const OpCounter&) const = default;
};

// Fixed-width big-endian encoding; x || y concatenates 8-byte words in
// argument order.
std::array<std::uint8_t, 8> be_bytes(Word64 a);
std::array<std::uint8_t, 16> be_bytes(Word64 a, Word64 b);
Word64 load_be64(const std::uint8_t* p);
void store_be64(std::uint8_t* p, Word64 v);

// SipHash-2-4 with 64-bit output; reference core, validated against the
// official test vectors.
Word64 siphash24(const std::uint8_t key[16], std::span<const std::uint8_t> msg);

// Keyed one-way hash with a pluggable algorithm. Deterministic: equal
// (message, key) pairs always produce equal digests.
class KeyedHash {
 public:
  KeyedHash() = default;
  explicit KeyedHash(HashAlgo algo) : algo_(algo) {}

  // Metered entry point: bumps ops.hash_ops by exactly one.
  Digest hash(std::span<const std::uint8_t> message, Word64 key, OpCounter& ops) const;

  // Unmetered digest, same function. Used where a check shares an already
  // counted budget, and by test oracles.
  Digest digest(std::span<const std::uint8_t> message, Word64 key) const;

  HashAlgo algo() const { return algo_; }

 private:
  HashAlgo algo_ = HashAlgo::ReferencePrf;
};

// Deterministic PRNG: counter mode over the reference keyed hash, seeded per
// tag. Invocation j yields the j-th stream word.
class Prng {
 public:
  Prng() = default;
  explicit Prng(Word64 seed) : seed_(seed) {}

  // Metered: bumps ops.prng_ops by exactly one and advances the counter.
  Word64 next(OpCounter& ops);

  Word64 seed() const { return seed_; }
  std::uint64_t invocations() const { return counter_; }

  // Snapshot/restore support.
  void restore(Word64 seed, std::uint64_t counter);

 private:
  Word64 seed_ = 0;
  std::uint64_t counter_ = 0;
};

// One-time-pad primitive.
constexpr Word64 xor_pad(Word64 a, Word64 b) { return a ^ b; }

// XOR fold; order-independent. Throws std::invalid_argument on an empty list.
Digest aggregate(std::span<const Digest> digests);

struct VerifyEntry {
  Word64 r_t;
  Word64 r_r;
  Word64 key;
};

// Recomputes Hash(r_t || r_r, key) per entry, folds, compares with h.
// A mismatch is a legal outcome (TagAuthError), not an error.
Msg verify_aggregate(std::span<const VerifyEntry> entries, Digest h,
                     const KeyedHash& hasher, OpCounter& ops);

}  // namespace tagchain
