#include "tagchain/reader.hpp"

#include <algorithm>
#include <stdexcept>

namespace tagchain {

const char* to_string(ExclusionReason r) {
  return r == ExclusionReason::DuplicateRt ? "duplicate-rt" : "at-mismatch";
}

std::vector<std::pair<TagId, ReaderHello>> open_batch(ReaderState& reader,
                                                      Database& db,
                                                      std::span<const TagId> ids) {
  if (ids.empty()) throw std::invalid_argument("open_batch: no ids");
  reader.scheme = db.scheme;
  reader.pending.clear();
  reader.batch_order.clear();
  reader.decision = BatchDecision{};

  std::vector<std::pair<TagId, ReaderHello>> out;
  out.reserve(ids.size());
  for (TagId id : ids) {
    if (reader.pending.contains(id))
      throw std::invalid_argument("open_batch: duplicate id");
    ReaderHello hello = issue_challenge(db, id);
    if (db.scheme == Scheme::S2) reader.at_table[id] = expected_at(db, id);
    reader.pending.emplace(id, hello);
    reader.batch_order.push_back(id);
    out.emplace_back(id, hello);
  }
  return out;
}

std::optional<ExclusionReason> collect(ReaderState& reader, TagId id,
                                       const TagResponse& resp) {
  if (!reader.pending.contains(id))
    throw std::invalid_argument("collect: no open hello for id");

  if (reader.seen_r_t.contains(resp.r_t)) {
    reader.decision.excluded.emplace_back(id, ExclusionReason::DuplicateRt);
    return ExclusionReason::DuplicateRt;
  }
  if (reader.scheme == Scheme::S2) {
    const auto it = reader.at_table.find(id);
    const bool token_ok =
        resp.at && it != reader.at_table.end() &&
        std::find(it->second.begin(), it->second.end(), *resp.at) != it->second.end();
    if (!token_ok) {
      reader.decision.excluded.emplace_back(id, ExclusionReason::AtMismatch);
      return ExclusionReason::AtMismatch;
    }
  }
  reader.seen_r_t.insert(resp.r_t);
  reader.decision.marked.emplace_back(id, resp);
  return std::nullopt;
}

BatchReport close_batch(ReaderState& reader, const BatchDecision& decision) {
  if (decision.marked.empty())
    throw std::invalid_argument("close_batch: nothing marked, empty batch");
  BatchReport report;
  std::vector<Digest> digests;
  digests.reserve(decision.marked.size());
  for (const auto& [id, resp] : decision.marked) {
    (void)id;
    digests.push_back(resp.h_id);
    report.r_t_list.push_back(resp.r_t);
  }
  report.h = aggregate(digests);
  reader.pending.clear();
  return report;
}

std::vector<std::pair<TagId, Word64>> session_map(const BatchDecision& decision) {
  std::vector<std::pair<TagId, Word64>> out;
  out.reserve(decision.marked.size());
  for (const auto& [id, resp] : decision.marked) out.emplace_back(id, resp.r_t);
  return out;
}

void apply_reply(ReaderState& reader, const ServerReply& reply) {
  if (reader.scheme == Scheme::S1) {
    if (!reply.at_next.empty())
      reader.warnings.push_back("reply carried tokens; ignored under scheme1");
    return;
  }
  if (reply.msg != Msg::TagValid) return;
  if (reply.at_next.size() != reader.decision.marked.size()) {
    reader.warnings.push_back("reply token count does not match marked tags");
  }
  const std::size_t n = std::min(reply.at_next.size(), reader.decision.marked.size());
  for (std::size_t i = 0; i < n; ++i)
    reader.at_table[reader.decision.marked[i].first] = {reply.at_next[i]};
}

}  // namespace tagchain
