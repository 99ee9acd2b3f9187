#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "tagchain/crypto.hpp"
#include "tagchain/wire.hpp"

namespace tagchain {

using TagId = std::uint32_t;

// Single-rule protocol deviations used to validate that the experiment
// harness actually detects broken implementations.
enum class Mutant {
  None,
  StaticId,          // constant H_id every session
  NoKeyUpdate,       // key refresh computed but never applied
  LeakyDecoy,        // decoy path skips the padding draw, so it runs faster
  ReusedRt,          // same R_t every session
  NoTimestampCheck,  // accepts stale timestamps
};
const char* to_string(Mutant m);

struct TagState {
  TagId id = 0;
  Scheme scheme = Scheme::S1;
  Word64 key = 0;
  Word64 t_max = 0;
  // Last accepted reader timestamp and the one before it. The previous slot
  // lets a tag that advanced past the server re-pass reader authentication
  // exactly once.
  Word64 t_cur = 0;
  Word64 t_prev = 0;
  Prng prng;
  KeyedHash hasher;
  OpCounter ops;  // lifetime primitive-operation tally
  Mutant mutant = Mutant::None;

  // Mutant plumbing; unused when mutant == None.
  Digest static_h_id = 0;
  std::optional<Word64> pinned_r_t;

  // Number of applied key refreshes; simulator-side diagnostic only.
  std::uint64_t key_version = 0;
};

struct TagOutcome {
  TagResponse response;
  // Whether the real authentication path ran. Observable only inside the
  // simulator; the response itself is indistinguishable from a decoy.
  bool genuine = false;
  std::uint32_t ops_used = 0;
};

// Runs one full session on the tag side: reader authentication with the
// previous-timestamp fallback, threshold renewal, timestamp freshness, the
// response digests, and the key refresh. Every exit arm of a same-length
// session costs the same number of primitive operations.
TagOutcome tag_process(TagState& st, const ReaderHello& hello);

// Same, from raw bytes. Malformed input produces a full-cost decoy.
TagOutcome tag_process_raw(TagState& st, std::span<const std::uint8_t> bytes);

}  // namespace tagchain
