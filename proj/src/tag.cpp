#include "tagchain/tag.hpp"

namespace tagchain {

const char* to_string(Mutant m) {
  switch (m) {
    case Mutant::None: return "none";
    case Mutant::StaticId: return "static-id";
    case Mutant::NoKeyUpdate: return "no-key-update";
    case Mutant::LeakyDecoy: return "leaky-decoy";
    case Mutant::ReusedRt: return "reused-rt";
    case Mutant::NoTimestampCheck: return "no-timestamp-check";
  }
  return "?";
}

namespace {

std::uint32_t ops_since(const TagState& st, const OpCounter& before) {
  return static_cast<std::uint32_t>(st.ops.total() - before.total());
}

// Decoy arm: every field is a fresh PRNG word, plus one padding draw standing
// in for the key refresh, so a decoy costs exactly as many operations as a
// genuine response of the same length.
TagOutcome decoy(TagState& st, const OpCounter& before) {
  TagResponse r;
  r.h_id = st.prng.next(st.ops);
  r.r_t = st.prng.next(st.ops);
  if (st.scheme == Scheme::S2) r.at = st.prng.next(st.ops);
  if (st.mutant != Mutant::LeakyDecoy) st.prng.next(st.ops);
  return TagOutcome{r, false, ops_since(st, before)};
}

}  // namespace

TagOutcome tag_process(TagState& st, const ReaderHello& hello) {
  const OpCounter before = st.ops;

  // Reader authentication. The retry against the previous timestamp shares
  // the budget of the first digest: one metered hash either way.
  Digest expect = st.hasher.hash(be_bytes(st.t_cur, hello.t_r), st.t_max, st.ops);
  bool reader_ok = expect == hello.auth;
  if (!reader_ok && st.t_prev != st.t_cur)
    reader_ok = st.hasher.digest(be_bytes(st.t_prev, hello.t_r), st.t_max) == hello.auth;
  if (!reader_ok) return decoy(st, before);

  // A timestamp beyond the current bound carries a pad for the renewed bound.
  // Whether or not the pad decodes to a larger value, the session ends in a
  // decoy; authentication resumes on the next hello.
  if (hello.t_r > st.t_max) {
    Word64 renewed = xor_pad(hello.t_r, st.t_max);
    if (renewed > st.t_max) st.t_max = renewed;
    return decoy(st, before);
  }

  // Freshness: the timestamp must advance past the last accepted one, no
  // matter which slot authenticated the reader. Anything older is a replay.
  if (st.mutant != Mutant::NoTimestampCheck && hello.t_r <= st.t_cur)
    return decoy(st, before);

  st.t_prev = st.t_cur;
  st.t_cur = hello.t_r;

  Word64 r_t = st.prng.next(st.ops);
  if (st.mutant == Mutant::ReusedRt) {
    if (!st.pinned_r_t) st.pinned_r_t = r_t;
    r_t = *st.pinned_r_t;
  }

  Digest h_id = st.hasher.hash(be_bytes(r_t, hello.r_r), st.key, st.ops);
  if (st.mutant == Mutant::StaticId) h_id = st.static_h_id;

  std::optional<Digest> at;
  if (st.scheme == Scheme::S2)
    at = st.hasher.hash(be_bytes(st.t_max), st.key, st.ops);

  Word64 refreshed = st.hasher.hash(be_bytes(st.key), hello.r_r, st.ops);
  if (st.mutant != Mutant::NoKeyUpdate) {
    st.key = refreshed;
    st.key_version += 1;
  }

  return TagOutcome{TagResponse{h_id, r_t, at}, true, ops_since(st, before)};
}

TagOutcome tag_process_raw(TagState& st, std::span<const std::uint8_t> bytes) {
  if (auto hello = decode_reader_hello(bytes)) return tag_process(st, *hello);
  const OpCounter before = st.ops;
  st.prng.next(st.ops);  // stands in for the authentication digest
  return decoy(st, before);
}

}  // namespace tagchain
