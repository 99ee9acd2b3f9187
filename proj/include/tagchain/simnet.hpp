#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tagchain/reader.hpp"
#include "tagchain/server.hpp"
#include "tagchain/tag.hpp"
#include "tagchain/wire.hpp"

namespace tagchain {

enum class ChannelName : unsigned {
  ReaderToTag = 0,
  TagToReader = 1,
  ReaderToServer = 2,
  ServerToReader = 3,
};
const char* to_string(ChannelName c);

// Air-interface and back-haul rates used for simulated transfer times.
inline constexpr double kRateReaderToTag = 126000.0;
inline constexpr double kRateTagToReader = 640000.0;
inline constexpr double kRateReaderToServer = 20000.0;
inline constexpr double kRateServerToReader = 20000.0;

struct TranscriptEvent {
  std::size_t seq = 0;
  ChannelName channel = ChannelName::ReaderToTag;
  std::size_t bits = 0;
  double time_ms = 0.0;
  std::string kind;  // reader-hello | tag-response | batch-report | server-reply
  std::vector<std::uint8_t> payload;  // what went over the air (post-hook)
  std::string hook_action;            // pass | drop | replay | modify | inject | observe
  bool delivered = true;
};

struct Transcript {
  std::vector<TranscriptEvent> events;
  // Accumulated primitive-operation deltas per entity ("tag:<id>", "server").
  std::map<std::string, OpCounter> op_counts;

  double total_time_ms() const;
  std::size_t total_bits() const;
  std::size_t bits_on(ChannelName c) const;
  std::string to_jsonl() const;
};

struct HookDecision {
  enum class Action { Pass, Drop, Replay, Modify, Inject, Observe };
  Action action = Action::Pass;
  std::size_t replay_seq = 0;          // Replay: reuse that event's payload
  std::vector<std::uint8_t> xor_mask;  // Modify: XORed over the payload
  std::vector<std::uint8_t> inject;    // Inject: substitute payload
};

// Consulted before delivery with the would-be event and the history so far.
// Must be deterministic.
using AdversaryHook =
    std::function<HookDecision(const TranscriptEvent& pending, const Transcript& history)>;

struct Channel {
  ChannelName name = ChannelName::ReaderToTag;
  double rate_bps = 1.0;
  AdversaryHook interposer;  // empty means pass-through
};

// Sends payload over the channel, applying the interposer and appending one
// transcript event. Returns the delivered bytes, or nothing when dropped.
std::optional<std::vector<std::uint8_t>> deliver(Channel& channel,
                                                 std::span<const std::uint8_t> payload,
                                                 const std::string& kind,
                                                 Transcript& transcript);

struct WorldConfig {
  Word64 seed = 1;
  std::uint32_t n_tags = 1;
  Scheme scheme = Scheme::S1;
  HashAlgo algo = HashAlgo::ReferencePrf;
  Mutant mutant = Mutant::None;
  Word64 t_max = Word64{1} << 40;
};

struct World {
  Scheme scheme = Scheme::S1;
  Database db;
  ReaderState reader;
  std::map<TagId, TagState> tags;
  std::array<Channel, 4> channels;
  Transcript transcript;
};

// Fully provisioned deterministic world: server, reader, n synchronized tags
// with ids 1..n, pass-through channels at the default rates.
World make_world(const WorldConfig& cfg);

struct SessionResult {
  // What the server decided; absent when the report never reached it.
  std::optional<Msg> server_msg;
  // What came back to the reader; absent when the reply was lost.
  std::optional<Msg> reader_msg;
  BatchDecision decision;
};

// One complete batch session over the given ids, end to end through the
// channels. All-excluded batches propagate the reader's empty-batch error;
// a batch where nothing arrived at all returns with no message.
SessionResult run_session(World& world, std::span<const TagId> ids);

// One renewal round trip for the tag: pad hello out, decoy back, reader token
// table refreshed under Scheme 2. The tag applies the new bound; the server
// adopts it after the tag's next completed session.
void run_renewal(World& world, TagId id);

}  // namespace tagchain
