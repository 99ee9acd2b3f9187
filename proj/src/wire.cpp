#include "tagchain/wire.hpp"

namespace tagchain {

const char* to_string(Scheme s) { return s == Scheme::S1 ? "scheme1" : "scheme2"; }

namespace {

void put_word(std::vector<std::uint8_t>& out, Word64 v) {
  std::uint8_t buf[8];
  store_be64(buf, v);
  out.insert(out.end(), buf, buf + 8);
}

Word64 word_at(std::span<const std::uint8_t> bytes, std::size_t i) {
  return load_be64(bytes.data() + 8 * i);
}

bool word_aligned(std::span<const std::uint8_t> bytes, std::size_t min_words) {
  return bytes.size() % 8 == 0 && bytes.size() >= 8 * min_words;
}

}  // namespace

std::vector<std::uint8_t> encode(const ReaderHello& m) {
  std::vector<std::uint8_t> out;
  out.reserve(24);
  put_word(out, m.t_r);
  put_word(out, m.r_r);
  put_word(out, m.auth);
  return out;
}

std::vector<std::uint8_t> encode(const TagResponse& m) {
  std::vector<std::uint8_t> out;
  out.reserve(m.at ? 24 : 16);
  put_word(out, m.h_id);
  put_word(out, m.r_t);
  if (m.at) put_word(out, *m.at);
  return out;
}

std::vector<std::uint8_t> encode(const BatchReport& m) {
  std::vector<std::uint8_t> out;
  out.reserve(8 * (1 + m.r_t_list.size()));
  put_word(out, m.h);
  for (Word64 r : m.r_t_list) put_word(out, r);
  return out;
}

std::vector<std::uint8_t> encode(const ServerReply& m) {
  std::vector<std::uint8_t> out;
  out.reserve(8 * (1 + m.at_next.size()));
  put_word(out, m.msg == Msg::TagValid ? 1 : 0);
  for (Digest d : m.at_next) put_word(out, d);
  return out;
}

std::optional<ReaderHello> decode_reader_hello(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != 24) return std::nullopt;
  return ReaderHello{word_at(bytes, 0), word_at(bytes, 1), word_at(bytes, 2)};
}

std::optional<TagResponse> decode_tag_response(std::span<const std::uint8_t> bytes, Scheme s) {
  const std::size_t want = s == Scheme::S2 ? 24 : 16;
  if (bytes.size() != want) return std::nullopt;
  TagResponse r{word_at(bytes, 0), word_at(bytes, 1), std::nullopt};
  if (s == Scheme::S2) r.at = word_at(bytes, 2);
  return r;
}

std::optional<BatchReport> decode_batch_report(std::span<const std::uint8_t> bytes) {
  if (!word_aligned(bytes, 2)) return std::nullopt;
  BatchReport rep;
  rep.h = word_at(bytes, 0);
  const std::size_t n = bytes.size() / 8 - 1;
  rep.r_t_list.reserve(n);
  for (std::size_t i = 0; i < n; ++i) rep.r_t_list.push_back(word_at(bytes, i + 1));
  return rep;
}

std::optional<ServerReply> decode_server_reply(std::span<const std::uint8_t> bytes, Scheme s) {
  if (!word_aligned(bytes, 1)) return std::nullopt;
  Word64 code = word_at(bytes, 0);
  if (code > 1) return std::nullopt;
  ServerReply rep;
  rep.msg = code == 1 ? Msg::TagValid : Msg::TagAuthError;
  const std::size_t n = bytes.size() / 8 - 1;
  if (s == Scheme::S1 && n != 0) return std::nullopt;
  rep.at_next.reserve(n);
  for (std::size_t i = 0; i < n; ++i) rep.at_next.push_back(word_at(bytes, i + 1));
  return rep;
}

}  // namespace tagchain
