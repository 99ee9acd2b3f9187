#include "tagchain/snapshot.hpp"

#include <cstdio>
#include <stdexcept>

namespace tagchain {

namespace {

Scheme scheme_from(const std::string& s) {
  if (s == "scheme1") return Scheme::S1;
  if (s == "scheme2") return Scheme::S2;
  throw std::invalid_argument("snapshot: unknown scheme " + s);
}

const char* algo_name(HashAlgo a) {
  return a == HashAlgo::ReferencePrf ? "reference-prf" : "test-weak";
}

HashAlgo algo_from(const std::string& s) {
  if (s == "reference-prf") return HashAlgo::ReferencePrf;
  if (s == "test-weak") return HashAlgo::TestWeak;
  throw std::invalid_argument("snapshot: unknown algo " + s);
}

Mutant mutant_from(const std::string& s) {
  for (Mutant m : {Mutant::None, Mutant::StaticId, Mutant::NoKeyUpdate,
                   Mutant::LeakyDecoy, Mutant::ReusedRt, Mutant::NoTimestampCheck})
    if (s == to_string(m)) return m;
  throw std::invalid_argument("snapshot: unknown mutant " + s);
}

}  // namespace

std::string word_hex(Word64 v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Word64 parse_word_hex(const std::string& s) {
  if (s.size() != 16) throw std::invalid_argument("snapshot: bad word hex " + s);
  return std::stoull(s, nullptr, 16);
}

nlohmann::ordered_json snapshot_tag(const TagState& st) {
  nlohmann::ordered_json j;
  j["id"] = st.id;
  j["scheme"] = to_string(st.scheme);
  j["algo"] = algo_name(st.hasher.algo());
  j["mutant"] = to_string(st.mutant);
  j["key"] = word_hex(st.key);
  j["t_max"] = word_hex(st.t_max);
  j["t_cur"] = word_hex(st.t_cur);
  j["t_prev"] = word_hex(st.t_prev);
  j["prng_seed"] = word_hex(st.prng.seed());
  j["prng_counter"] = st.prng.invocations();
  j["key_version"] = st.key_version;
  j["static_h_id"] = word_hex(st.static_h_id);
  if (st.pinned_r_t) j["pinned_r_t"] = word_hex(*st.pinned_r_t);
  return j;
}

TagState restore_tag(const nlohmann::json& j) {
  TagState st;
  st.id = j.at("id").get<TagId>();
  st.scheme = scheme_from(j.at("scheme").get<std::string>());
  st.hasher = KeyedHash(algo_from(j.at("algo").get<std::string>()));
  st.mutant = mutant_from(j.at("mutant").get<std::string>());
  st.key = parse_word_hex(j.at("key").get<std::string>());
  st.t_max = parse_word_hex(j.at("t_max").get<std::string>());
  st.t_cur = parse_word_hex(j.at("t_cur").get<std::string>());
  st.t_prev = parse_word_hex(j.at("t_prev").get<std::string>());
  st.prng.restore(parse_word_hex(j.at("prng_seed").get<std::string>()),
                  j.at("prng_counter").get<std::uint64_t>());
  st.key_version = j.at("key_version").get<std::uint64_t>();
  st.static_h_id = parse_word_hex(j.at("static_h_id").get<std::string>());
  if (j.contains("pinned_r_t"))
    st.pinned_r_t = parse_word_hex(j.at("pinned_r_t").get<std::string>());
  return st;
}

nlohmann::ordered_json snapshot_db(const Database& db) {
  nlohmann::ordered_json j;
  j["scheme"] = to_string(db.scheme);
  j["algo"] = algo_name(db.hasher.algo());
  j["clock"] = word_hex(db.clock);
  j["rng_seed"] = word_hex(db.rng.seed());
  j["rng_counter"] = db.rng.invocations();
  auto records = nlohmann::ordered_json::array();
  for (const auto& [id, rec] : db.records) {
    nlohmann::ordered_json r;
    r["id"] = id;
    r["key"] = word_hex(rec.key);
    r["t_max"] = word_hex(rec.t_max);
    if (rec.pending_t_max) r["pending_t_max"] = word_hex(*rec.pending_t_max);
    r["t_confirmed"] = word_hex(rec.t_confirmed);
    if (rec.issued) {
      r["issued_t_r"] = word_hex(rec.issued->t_r);
      r["issued_r_r"] = word_hex(rec.issued->r_r);
    }
    if (rec.stale_r_r) r["stale_r_r"] = word_hex(*rec.stale_r_r);
    if (rec.at_expected) r["at_expected"] = word_hex(*rec.at_expected);
    r["key_version"] = rec.key_version;
    records.push_back(std::move(r));
  }
  j["records"] = std::move(records);
  return j;
}

Database restore_db(const nlohmann::json& j) {
  Database db;
  db.scheme = scheme_from(j.at("scheme").get<std::string>());
  db.hasher = KeyedHash(algo_from(j.at("algo").get<std::string>()));
  db.clock = parse_word_hex(j.at("clock").get<std::string>());
  db.rng.restore(parse_word_hex(j.at("rng_seed").get<std::string>()),
                 j.at("rng_counter").get<std::uint64_t>());
  for (const auto& r : j.at("records")) {
    ServerRecord rec;
    rec.id = r.at("id").get<TagId>();
    rec.key = parse_word_hex(r.at("key").get<std::string>());
    rec.t_max = parse_word_hex(r.at("t_max").get<std::string>());
    if (r.contains("pending_t_max"))
      rec.pending_t_max = parse_word_hex(r.at("pending_t_max").get<std::string>());
    rec.t_confirmed = parse_word_hex(r.at("t_confirmed").get<std::string>());
    if (r.contains("issued_t_r"))
      rec.issued = Issuance{parse_word_hex(r.at("issued_t_r").get<std::string>()),
                            parse_word_hex(r.at("issued_r_r").get<std::string>())};
    if (r.contains("stale_r_r"))
      rec.stale_r_r = parse_word_hex(r.at("stale_r_r").get<std::string>());
    if (r.contains("at_expected"))
      rec.at_expected = parse_word_hex(r.at("at_expected").get<std::string>());
    rec.key_version = r.at("key_version").get<std::uint64_t>();
    db.records.emplace(rec.id, rec);
  }
  return db;
}

}  // namespace tagchain
