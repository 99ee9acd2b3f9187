#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tagchain/crypto.hpp"
#include "tagchain/tag.hpp"
#include "tagchain/wire.hpp"

namespace tagchain {

// Shared initial logical timestamp; a whole batch of tags starts here.
inline constexpr Word64 kT0 = 0x100;

struct Issuance {
  Word64 t_r = 0;
  Word64 r_r = 0;
  bool operator==(const Issuance&) const = default;
};

struct ServerRecord {
  TagId id = 0;
  Word64 key = 0;
  Word64 t_max = 0;
  // Renewed bound issued but not yet confirmed by a completed session.
  std::optional<Word64> pending_t_max;
  // Last reader timestamp accepted in a completed authentication.
  Word64 t_confirmed = kT0;
  // In-flight session, if any.
  std::optional<Issuance> issued;
  // R_r of the most recent issuance that never completed. A tag that accepted
  // that hello advanced its key once; the ephemeral candidate
  // Hash(key, stale_r_r) recovers it during verification.
  std::optional<Word64> stale_r_r;
  // Scheme 2: expected authentication token under the stored key.
  std::optional<Digest> at_expected;
  // Applied key refreshes; simulator-side diagnostic only.
  std::uint64_t key_version = 0;

  bool operator==(const ServerRecord&) const = default;
};

struct Database {
  std::map<TagId, ServerRecord> records;
  Word64 clock = kT0;
  Prng rng;
  KeyedHash hasher;
  Scheme scheme = Scheme::S1;
  OpCounter ops;  // instrumentation, not protocol state
};

// security_param is the word width; only 64 is supported.
Database setup_server(unsigned security_param, Word64 seed,
                      Scheme scheme = Scheme::S1,
                      HashAlgo algo = HashAlgo::ReferencePrf);

// Registers the tag and returns its initial state. The tag and the record
// start synchronized at t_confirmed == t_cur == kT0.
TagState setup_tag(Database& db, TagId id, Word64 key, Word64 t_max);

// Flow 1 material for a regular session: fresh clock tick, fresh nonce,
// digest keyed by the tag's (effective) bound.
ReaderHello issue_challenge(Database& db, TagId id);

// Flow 1 material for a bound renewal: T_r is the one-time pad turning the
// current bound into one with the next higher leading bit. The server adopts
// the new bound once the tag completes a later session. Idempotent until
// then, so a lost renewal hello can simply be re-issued.
ReaderHello issue_renewal(Database& db, TagId id);

// Scheme 2: tokens the reader should accept from this tag in the upcoming
// session. One entry under the stored key; a second under the ephemeral
// candidate when an unconfirmed issuance exists.
std::vector<Digest> expected_at(Database& db, TagId id);

// Flows 6 and 7: batch verification. session_map pairs each report R_t with
// the tag it came from, in report order. On a matching aggregate every
// involved record advances (key, t_confirmed, pending bound, token); on a
// mismatch nothing changes.
ServerReply verify_batch(Database& db, const BatchReport& report,
                         std::span<const std::pair<TagId, Word64>> session_map);

}  // namespace tagchain
