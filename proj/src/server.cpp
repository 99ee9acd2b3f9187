#include "tagchain/server.hpp"

#include <array>
#include <bit>
#include <set>
#include <stdexcept>

namespace tagchain {

namespace {

ServerRecord& must_find(Database& db, TagId id, const char* op) {
  auto it = db.records.find(id);
  if (it == db.records.end())
    throw std::invalid_argument(std::string(op) + ": unknown tag id");
  return it->second;
}

Word64 effective_t_max(const ServerRecord& rec) {
  return rec.pending_t_max.value_or(rec.t_max);
}

// Picks a subset of `vecs` whose XOR equals `target` (GF(2) elimination with
// combination tracking), or nullopt if none exists.
std::optional<std::vector<bool>> solve_xor_subset(const std::vector<Digest>& vecs,
                                                  Digest target) {
  const std::size_t m = vecs.size();
  struct Row {
    Digest v;
    std::vector<bool> mask;
  };
  std::array<std::optional<Row>, kWordBits> basis;
  for (std::size_t i = 0; i < m; ++i) {
    Row r{vecs[i], std::vector<bool>(m, false)};
    r.mask[i] = true;
    while (r.v != 0) {
      int b = kWordBits - 1 - std::countl_zero(r.v);
      if (!basis[b]) {
        basis[b] = std::move(r);
        break;
      }
      r.v ^= basis[b]->v;
      for (std::size_t j = 0; j < m; ++j)
        r.mask[j] = r.mask[j] != basis[b]->mask[j];
    }
  }
  Digest t = target;
  std::vector<bool> pick(m, false);
  while (t != 0) {
    int b = kWordBits - 1 - std::countl_zero(t);
    if (!basis[b]) return std::nullopt;
    t ^= basis[b]->v;
    for (std::size_t j = 0; j < m; ++j)
      pick[j] = pick[j] != basis[b]->mask[j];
  }
  return pick;
}

}  // namespace

Database setup_server(unsigned security_param, Word64 seed, Scheme scheme,
                      HashAlgo algo) {
  if (security_param != kWordBits)
    throw std::invalid_argument("setup_server: only 64-bit words supported");
  Database db;
  db.clock = kT0;
  db.rng = Prng(seed);
  db.hasher = KeyedHash(algo);
  db.scheme = scheme;
  return db;
}

TagState setup_tag(Database& db, TagId id, Word64 key, Word64 t_max) {
  if (db.records.contains(id))
    throw std::invalid_argument("setup_tag: duplicate tag id");
  if (t_max <= db.clock)
    throw std::invalid_argument("setup_tag: t_max must exceed the current clock");

  ServerRecord rec;
  rec.id = id;
  rec.key = key;
  rec.t_max = t_max;
  rec.t_confirmed = kT0;
  if (db.scheme == Scheme::S2)
    rec.at_expected = db.hasher.hash(be_bytes(t_max), key, db.ops);
  db.records.emplace(id, rec);

  TagState st;
  st.id = id;
  st.scheme = db.scheme;
  st.key = key;
  st.t_max = t_max;
  st.t_cur = kT0;
  st.t_prev = kT0;
  st.prng = Prng(db.rng.next(db.ops));
  st.hasher = db.hasher;
  st.static_h_id = db.hasher.digest(be_bytes(0x57a71c1d, Word64{id}), key);
  return st;
}

ReaderHello issue_challenge(Database& db, TagId id) {
  ServerRecord& rec = must_find(db, id, "issue_challenge");
  db.clock += 1;
  ReaderHello hello;
  hello.t_r = db.clock;
  hello.r_r = db.rng.next(db.ops);
  hello.auth = db.hasher.hash(be_bytes(rec.t_confirmed, hello.t_r),
                              effective_t_max(rec), db.ops);
  if (rec.issued) rec.stale_r_r = rec.issued->r_r;
  rec.issued = Issuance{hello.t_r, hello.r_r};
  return hello;
}

ReaderHello issue_renewal(Database& db, TagId id) {
  ServerRecord& rec = must_find(db, id, "issue_renewal");
  const Word64 base = rec.t_max;
  const int msb = std::bit_width(base) - 1;
  if (msb >= static_cast<int>(kWordBits) - 1)
    throw std::runtime_error("issue_renewal: bound already uses the top bit");
  const Word64 t_max_new = base | (Word64{1} << (msb + 1));

  ReaderHello hello;
  hello.t_r = xor_pad(t_max_new, base);
  hello.r_r = db.rng.next(db.ops);
  hello.auth = db.hasher.hash(be_bytes(rec.t_confirmed, hello.t_r), base, db.ops);
  rec.pending_t_max = t_max_new;
  if (db.scheme == Scheme::S2)
    rec.at_expected = db.hasher.hash(be_bytes(t_max_new), rec.key, db.ops);
  return hello;
}

std::vector<Digest> expected_at(Database& db, TagId id) {
  ServerRecord& rec = must_find(db, id, "expected_at");
  const Word64 tmax = effective_t_max(rec);
  std::vector<Digest> out;
  out.push_back(db.hasher.hash(be_bytes(tmax), rec.key, db.ops));
  if (rec.stale_r_r) {
    Word64 ek = db.hasher.hash(be_bytes(rec.key), *rec.stale_r_r, db.ops);
    out.push_back(db.hasher.hash(be_bytes(tmax), ek, db.ops));
  }
  return out;
}

ServerReply verify_batch(Database& db, const BatchReport& report,
                         std::span<const std::pair<TagId, Word64>> session_map) {
  if (report.r_t_list.empty())
    throw std::invalid_argument("verify_batch: empty report");
  if (session_map.size() != report.r_t_list.size())
    throw std::invalid_argument("verify_batch: session map size mismatch");

  struct Entry {
    ServerRecord* rec;
    Word64 r_t;
    Word64 r_r;
    Digest stored;
    std::optional<Digest> eph;
    Word64 eph_key = 0;
    bool use_eph = false;
  };
  std::vector<Entry> entries;
  entries.reserve(session_map.size());
  std::set<TagId> ids;
  for (std::size_t i = 0; i < session_map.size(); ++i) {
    const auto& [id, r_t] = session_map[i];
    if (r_t != report.r_t_list[i])
      throw std::invalid_argument("verify_batch: session map does not match report");
    if (!ids.insert(id).second)
      throw std::invalid_argument("verify_batch: duplicate tag id in batch");
    ServerRecord& rec = must_find(db, id, "verify_batch");
    if (!rec.issued)
      throw std::invalid_argument("verify_batch: no in-flight session for tag");

    Entry e{&rec, r_t, rec.issued->r_r, 0, std::nullopt};
    e.stored = db.hasher.hash(be_bytes(r_t, e.r_r), rec.key, db.ops);
    if (rec.stale_r_r) {
      e.eph_key = db.hasher.hash(be_bytes(rec.key), *rec.stale_r_r, db.ops);
      e.eph = db.hasher.hash(be_bytes(r_t, e.r_r), e.eph_key, db.ops);
    }
    entries.push_back(e);
  }

  Digest acc = 0;
  for (const Entry& e : entries) acc ^= e.stored;
  const Digest target = acc ^ report.h;

  // Decide which tags answered under their advanced key: find the subset of
  // ephemeral/stored digest differences whose XOR closes the gap.
  std::vector<std::size_t> idx;
  std::vector<Digest> diffs;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].eph && *entries[i].eph != entries[i].stored) {
      idx.push_back(i);
      diffs.push_back(*entries[i].eph ^ entries[i].stored);
    }
  }
  const auto pick = solve_xor_subset(diffs, target);
  if (!pick) return ServerReply{Msg::TagAuthError, {}};
  for (std::size_t j = 0; j < idx.size(); ++j) entries[idx[j]].use_eph = (*pick)[j];

  ServerReply reply{Msg::TagValid, {}};
  for (Entry& e : entries) {
    ServerRecord& rec = *e.rec;
    const Word64 base = e.use_eph ? e.eph_key : rec.key;
    rec.key = db.hasher.hash(be_bytes(base), e.r_r, db.ops);
    rec.key_version += e.use_eph ? 2 : 1;
    rec.t_confirmed = rec.issued->t_r;
    rec.issued.reset();
    rec.stale_r_r.reset();
    if (rec.pending_t_max) {
      rec.t_max = *rec.pending_t_max;
      rec.pending_t_max.reset();
    }
    if (db.scheme == Scheme::S2) {
      rec.at_expected = db.hasher.hash(be_bytes(rec.t_max), rec.key, db.ops);
      reply.at_next.push_back(*rec.at_expected);
    }
  }
  return reply;
}

}  // namespace tagchain
