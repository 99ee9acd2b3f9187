#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tagchain/crypto.hpp"

namespace tagchain {

enum class Scheme { S1, S2 };
const char* to_string(Scheme s);

// Flow 1, reader -> tag: T_r || R_r || Hash(T_prev || T_r, T_max).
// Always 3 words (24 bytes).
struct ReaderHello {
  Word64 t_r = 0;
  Word64 r_r = 0;
  Digest auth = 0;

  bool operator==(const ReaderHello&) const = default;
};

// Flow 3, tag -> reader: H_id || R_t, plus the partial-authentication token
// under Scheme 2. 2 or 3 words.
struct TagResponse {
  Digest h_id = 0;
  Word64 r_t = 0;
  std::optional<Digest> at;

  bool operator==(const TagResponse&) const = default;
};

// Flow 5, reader -> server: H || R_t^1 || ... || R_t^n. (n+1) words.
struct BatchReport {
  Digest h = 0;
  std::vector<Word64> r_t_list;

  bool operator==(const BatchReport&) const = default;
};

// Flow 7, server -> reader: MSG, plus one refreshed token per verified tag
// under Scheme 2.
struct ServerReply {
  Msg msg = Msg::TagAuthError;
  std::vector<Digest> at_next;

  bool operator==(const ServerReply&) const = default;
};

std::vector<std::uint8_t> encode(const ReaderHello& m);
std::vector<std::uint8_t> encode(const TagResponse& m);
std::vector<std::uint8_t> encode(const BatchReport& m);
std::vector<std::uint8_t> encode(const ServerReply& m);

// Decoders return nullopt on any length or field violation; adversarial
// inputs must never abort the process.
std::optional<ReaderHello> decode_reader_hello(std::span<const std::uint8_t> bytes);
std::optional<TagResponse> decode_tag_response(std::span<const std::uint8_t> bytes, Scheme s);
std::optional<BatchReport> decode_batch_report(std::span<const std::uint8_t> bytes);
std::optional<ServerReply> decode_server_reply(std::span<const std::uint8_t> bytes, Scheme s);

}  // namespace tagchain
