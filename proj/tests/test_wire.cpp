#include <doctest.h>

#include <vector>

#include "tagchain/wire.hpp"

using namespace tagchain;

TEST_SUITE("wire") {

TEST_CASE("reader hello is three words and round-trips") {
  const ReaderHello m{0x0102030405060708ULL, 0x1111222233334444ULL,
                      0xDEADBEEFCAFEBABEULL};
  const auto bytes = encode(m);
  REQUIRE(bytes.size() == 24);
  CHECK(bytes.size() * 8 == 192);

  const auto back = decode_reader_hello(bytes);
  REQUIRE(back.has_value());
  CHECK(*back == m);

  auto shorter = bytes;
  shorter.pop_back();
  CHECK_FALSE(decode_reader_hello(shorter).has_value());
  auto longer = bytes;
  longer.push_back(0);
  CHECK_FALSE(decode_reader_hello(longer).has_value());
  CHECK_FALSE(decode_reader_hello({}).has_value());
}

TEST_CASE("tag response is two words, three with the token") {
  const TagResponse bare{0xAAAA, 0xBBBB, std::nullopt};
  const auto b1 = encode(bare);
  REQUIRE(b1.size() == 16);
  const auto back1 = decode_tag_response(b1, Scheme::S1);
  REQUIRE(back1.has_value());
  CHECK(*back1 == bare);

  const TagResponse tok{0xAAAA, 0xBBBB, 0xCCCC};
  const auto b2 = encode(tok);
  REQUIRE(b2.size() == 24);
  const auto back2 = decode_tag_response(b2, Scheme::S2);
  REQUIRE(back2.has_value());
  CHECK(*back2 == tok);

  // Length must match the scheme in force.
  CHECK_FALSE(decode_tag_response(b1, Scheme::S2).has_value());
  CHECK_FALSE(decode_tag_response(b2, Scheme::S1).has_value());
  CHECK_FALSE(decode_tag_response({}, Scheme::S1).has_value());
}

TEST_CASE("batch report carries the fold plus one nonce per tag") {
  BatchReport r;
  r.h = 0x123456789ABCDEF0ULL;
  r.r_t_list = {1, 2, 3};
  const auto bytes = encode(r);
  REQUIRE(bytes.size() == (r.r_t_list.size() + 1) * 8);

  const auto back = decode_batch_report(bytes);
  REQUIRE(back.has_value());
  CHECK(*back == r);

  // A report with no nonces at all is not a report.
  CHECK_FALSE(decode_batch_report(std::vector<std::uint8_t>(8, 0)).has_value());
  // Misaligned lengths are rejected.
  auto odd = bytes;
  odd.pop_back();
  CHECK_FALSE(decode_batch_report(odd).has_value());
  odd = bytes;
  odd.push_back(0);
  CHECK_FALSE(decode_batch_report(odd).has_value());
}

TEST_CASE("server reply carries the verdict, plus tokens under scheme2") {
  const ServerReply ok{Msg::TagValid, {}};
  const auto b1 = encode(ok);
  REQUIRE(b1.size() == 8);
  const auto back1 = decode_server_reply(b1, Scheme::S1);
  REQUIRE(back1.has_value());
  CHECK(*back1 == ok);

  const ServerReply tokens{Msg::TagValid, {0x1111, 0x2222}};
  const auto b2 = encode(tokens);
  REQUIRE(b2.size() == 24);
  const auto back2 = decode_server_reply(b2, Scheme::S2);
  REQUIRE(back2.has_value());
  CHECK(*back2 == tokens);

  // Scheme 1 replies never carry tokens.
  CHECK_FALSE(decode_server_reply(b2, Scheme::S1).has_value());

  // The verdict word has exactly two legal values.
  auto bogus = b1;
  bogus[7] = 2;
  CHECK_FALSE(decode_server_reply(bogus, Scheme::S1).has_value());
  CHECK_FALSE(decode_server_reply({}, Scheme::S1).has_value());

  const ServerReply err{Msg::TagAuthError, {}};
  const auto b3 = encode(err);
  const auto back3 = decode_server_reply(b3, Scheme::S2);
  REQUIRE(back3.has_value());
  CHECK(back3->msg == Msg::TagAuthError);
}

}  // TEST_SUITE
