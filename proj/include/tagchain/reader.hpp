#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tagchain/server.hpp"
#include "tagchain/tag.hpp"
#include "tagchain/wire.hpp"

namespace tagchain {

enum class ExclusionReason { DuplicateRt, AtMismatch };
const char* to_string(ExclusionReason r);

struct BatchDecision {
  std::vector<std::pair<TagId, TagResponse>> marked;
  std::vector<std::pair<TagId, ExclusionReason>> excluded;
};

struct ReaderState {
  Scheme scheme = Scheme::S1;
  // Every R_t ever accepted; a repeat is a replay and is never marked again.
  std::set<Word64> seen_r_t;
  // Scheme 2: tokens currently acceptable per tag. Usually one entry; two
  // when the server knows the tag may have advanced past it.
  std::map<TagId, std::vector<Digest>> at_table;
  std::map<TagId, ReaderHello> pending;
  std::vector<TagId> batch_order;
  BatchDecision decision;
  std::vector<std::string> warnings;
};

// Opens a session batch: one server-issued hello per id. Resets any previous
// batch bookkeeping and, under Scheme 2, refreshes the token table from the
// server.
std::vector<std::pair<TagId, ReaderHello>> open_batch(ReaderState& reader,
                                                      Database& db,
                                                      std::span<const TagId> ids);

// Files one tag response: nullopt means marked for aggregation, otherwise
// the exclusion reason. Requires an open hello for the id.
std::optional<ExclusionReason> collect(ReaderState& reader, TagId id,
                                       const TagResponse& resp);

// Aggregates the marked responses into the flow-5 report.
BatchReport close_batch(ReaderState& reader, const BatchDecision& decision);

// (id, R_t) pairs aligned with the report built from this decision.
std::vector<std::pair<TagId, Word64>> session_map(const BatchDecision& decision);

// Applies the flow-7 reply: under Scheme 2 a TAG-VALID reply installs the
// refreshed token per marked tag.
void apply_reply(ReaderState& reader, const ServerReply& reply);

}  // namespace tagchain
