#include "tagchain/simnet.hpp"

#include <json.hpp>

#include <stdexcept>

namespace tagchain {

const char* to_string(ChannelName c) {
  switch (c) {
    case ChannelName::ReaderToTag: return "reader-to-tag";
    case ChannelName::TagToReader: return "tag-to-reader";
    case ChannelName::ReaderToServer: return "reader-to-server";
    case ChannelName::ServerToReader: return "server-to-reader";
  }
  return "?";
}

namespace {

const char* to_string(HookDecision::Action a) {
  using A = HookDecision::Action;
  switch (a) {
    case A::Pass: return "pass";
    case A::Drop: return "drop";
    case A::Replay: return "replay";
    case A::Modify: return "modify";
    case A::Inject: return "inject";
    case A::Observe: return "observe";
  }
  return "?";
}

std::string hex(std::span<const std::uint8_t> bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

void add_ops(Transcript& t, const std::string& entity, const OpCounter& before,
             const OpCounter& after) {
  OpCounter& slot = t.op_counts[entity];
  slot.hash_ops += after.hash_ops - before.hash_ops;
  slot.prng_ops += after.prng_ops - before.prng_ops;
}

}  // namespace

double Transcript::total_time_ms() const {
  double t = 0.0;
  for (const auto& e : events) t += e.time_ms;
  return t;
}

std::size_t Transcript::total_bits() const {
  std::size_t n = 0;
  for (const auto& e : events) n += e.bits;
  return n;
}

std::size_t Transcript::bits_on(ChannelName c) const {
  std::size_t n = 0;
  for (const auto& e : events)
    if (e.channel == c) n += e.bits;
  return n;
}

std::string Transcript::to_jsonl() const {
  std::string out;
  for (const auto& e : events) {
    nlohmann::ordered_json j;
    j["seq"] = e.seq;
    j["channel"] = tagchain::to_string(e.channel);
    j["bits"] = e.bits;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", e.time_ms);
    j["time_ms"] = buf;
    j["kind"] = e.kind;
    j["payload_hex"] = hex(e.payload);
    j["hook_action"] = e.hook_action;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::optional<std::vector<std::uint8_t>> deliver(Channel& channel,
                                                 std::span<const std::uint8_t> payload,
                                                 const std::string& kind,
                                                 Transcript& transcript) {
  TranscriptEvent ev;
  ev.seq = transcript.events.size();
  ev.channel = channel.name;
  ev.kind = kind;
  ev.payload.assign(payload.begin(), payload.end());
  ev.hook_action = "pass";

  HookDecision d;
  if (channel.interposer) d = channel.interposer(ev, transcript);
  ev.hook_action = to_string(d.action);

  using A = HookDecision::Action;
  switch (d.action) {
    case A::Pass:
    case A::Observe:
      break;
    case A::Drop:
      ev.delivered = false;
      break;
    case A::Modify:
      for (std::size_t i = 0; i < ev.payload.size() && i < d.xor_mask.size(); ++i)
        ev.payload[i] ^= d.xor_mask[i];
      break;
    case A::Replay:
      if (d.replay_seq >= transcript.events.size())
        throw std::invalid_argument("deliver: replay of an unrecorded event");
      ev.payload = transcript.events[d.replay_seq].payload;
      break;
    case A::Inject:
      ev.payload = d.inject;
      break;
  }

  ev.bits = ev.payload.size() * 8;
  ev.time_ms = ev.bits * 1000.0 / channel.rate_bps;
  transcript.events.push_back(ev);
  if (!ev.delivered) return std::nullopt;
  return transcript.events.back().payload;
}

World make_world(const WorldConfig& cfg) {
  World w;
  w.scheme = cfg.scheme;
  w.db = setup_server(kWordBits, cfg.seed, cfg.scheme, cfg.algo);
  w.reader.scheme = cfg.scheme;
  for (TagId id = 1; id <= cfg.n_tags; ++id) {
    const Word64 key = w.db.rng.next(w.db.ops);
    TagState st = setup_tag(w.db, id, key, cfg.t_max);
    st.mutant = cfg.mutant;
    if (cfg.scheme == Scheme::S2) w.reader.at_table[id] = expected_at(w.db, id);
    w.tags.emplace(id, std::move(st));
  }
  w.channels = {
      Channel{ChannelName::ReaderToTag, kRateReaderToTag, nullptr},
      Channel{ChannelName::TagToReader, kRateTagToReader, nullptr},
      Channel{ChannelName::ReaderToServer, kRateReaderToServer, nullptr},
      Channel{ChannelName::ServerToReader, kRateServerToReader, nullptr},
  };
  return w;
}

SessionResult run_session(World& world, std::span<const TagId> ids) {
  SessionResult result;
  auto& t = world.transcript;

  const OpCounter server_before = world.db.ops;
  auto hellos = open_batch(world.reader, world.db, ids);

  for (auto& [id, hello] : hellos) {
    auto it = world.tags.find(id);
    if (it == world.tags.end()) throw std::invalid_argument("run_session: unknown tag");
    TagState& tag = it->second;

    auto outbound = encode(hello);
    auto arrived = deliver(world.channels[0], outbound, "reader-hello", t);
    if (!arrived) continue;

    const OpCounter tag_before = tag.ops;
    TagOutcome outcome = tag_process_raw(tag, *arrived);
    add_ops(t, "tag:" + std::to_string(id), tag_before, tag.ops);

    auto back = deliver(world.channels[1], encode(outcome.response), "tag-response", t);
    if (!back) continue;

    if (auto resp = decode_tag_response(*back, world.scheme)) {
      collect(world.reader, id, *resp);
    } else {
      world.reader.warnings.push_back("unparseable tag response discarded");
    }
  }

  result.decision = world.reader.decision;
  if (result.decision.marked.empty() && result.decision.excluded.empty()) {
    add_ops(t, "server", server_before, world.db.ops);
    return result;  // nothing reached the reader; no report to file
  }

  BatchReport report = close_batch(world.reader, world.reader.decision);
  auto map = session_map(world.reader.decision);

  auto report_bytes = deliver(world.channels[2], encode(report), "batch-report", t);
  if (!report_bytes) {
    add_ops(t, "server", server_before, world.db.ops);
    return result;
  }

  ServerReply reply;
  if (auto decoded = decode_batch_report(*report_bytes)) {
    try {
      reply = verify_batch(world.db, *decoded, map);
    } catch (const std::invalid_argument&) {
      // A report inconsistent with the issuance bookkeeping (tampered in
      // flight) is rejected outright.
      reply = ServerReply{Msg::TagAuthError, {}};
    }
  } else {
    reply = ServerReply{Msg::TagAuthError, {}};
  }
  result.server_msg = reply.msg;
  add_ops(t, "server", server_before, world.db.ops);

  auto reply_bytes = deliver(world.channels[3], encode(reply), "server-reply", t);
  if (!reply_bytes) return result;

  if (auto decoded = decode_server_reply(*reply_bytes, world.scheme)) {
    apply_reply(world.reader, *decoded);
    result.reader_msg = decoded->msg;
  } else {
    world.reader.warnings.push_back("unparseable server reply discarded");
  }
  return result;
}

void run_renewal(World& world, TagId id) {
  auto it = world.tags.find(id);
  if (it == world.tags.end()) throw std::invalid_argument("run_renewal: unknown tag");
  auto& t = world.transcript;

  const OpCounter server_before = world.db.ops;
  ReaderHello hello = issue_renewal(world.db, id);

  auto arrived = deliver(world.channels[0], encode(hello), "reader-hello", t);
  if (arrived) {
    TagState& tag = it->second;
    const OpCounter tag_before = tag.ops;
    TagOutcome outcome = tag_process_raw(tag, *arrived);
    add_ops(t, "tag:" + std::to_string(id), tag_before, tag.ops);
    deliver(world.channels[1], encode(outcome.response), "tag-response", t);
  }
  if (world.scheme == Scheme::S2)
    world.reader.at_table[id] = expected_at(world.db, id);
  add_ops(t, "server", server_before, world.db.ops);
}

}  // namespace tagchain
