#pragma once

#include <json.hpp>

#include <string>

#include "tagchain/server.hpp"
#include "tagchain/tag.hpp"

namespace tagchain {

// State serialization for checkpointing and state-freeze assertions. Covers
// protocol state plus PRNG positions; operation meters are instrumentation
// and deliberately not part of a snapshot.

std::string word_hex(Word64 v);
Word64 parse_word_hex(const std::string& s);

nlohmann::ordered_json snapshot_tag(const TagState& st);
TagState restore_tag(const nlohmann::json& j);

nlohmann::ordered_json snapshot_db(const Database& db);
Database restore_db(const nlohmann::json& j);

}  // namespace tagchain
