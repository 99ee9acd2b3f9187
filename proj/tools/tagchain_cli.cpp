#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include <unistd.h>

#include "tagchain/costmodel.hpp"
#include "tagchain/experiments.hpp"
#include "tagchain/simnet.hpp"
#include "tagchain/snapshot.hpp"

namespace {

using namespace tagchain;

Word64 default_seed() {
  if (const char* env = std::getenv("TAGCHAIN_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 0);
    if (end != env && *end == '\0') return static_cast<Word64>(v);
  }
  return 1;
}

const std::map<std::string, Scheme> kSchemeNames{{"s1", Scheme::S1},
                                                 {"s2", Scheme::S2}};
const std::map<std::string, Mutant> kMutantNames{
    {"none", Mutant::None},
    {"static_id", Mutant::StaticId},
    {"no_key_update", Mutant::NoKeyUpdate},
    {"leaky_decoy", Mutant::LeakyDecoy},
    {"reused_rt", Mutant::ReusedRt},
    {"no_timestamp_check", Mutant::NoTimestampCheck}};
const std::map<std::string, HashAlgo> kAlgoNames{
    {"reference", HashAlgo::ReferencePrf}, {"weak", HashAlgo::TestWeak}};

AdversaryHook drop_once(std::string kind) {
  auto fired = std::make_shared<bool>(false);
  return [kind = std::move(kind), fired](const TranscriptEvent& pending,
                                         const Transcript&) {
    HookDecision d;
    if (!*fired && pending.kind == kind) {
      *fired = true;
      d.action = HookDecision::Action::Drop;
    }
    return d;
  };
}

AdversaryHook flip_once(std::string kind) {
  auto fired = std::make_shared<bool>(false);
  return [kind = std::move(kind), fired](const TranscriptEvent& pending,
                                         const Transcript&) {
    HookDecision d;
    if (!*fired && pending.kind == kind) {
      *fired = true;
      d.action = HookDecision::Action::Modify;
      d.xor_mask = {0x01};
    }
    return d;
  };
}

void install_hook(World& world, const std::string& name) {
  if (name == "none") return;
  ChannelName channel;
  std::string kind;
  bool flip = false;
  if (name == "drop-hello") {
    channel = ChannelName::ReaderToTag;
    kind = "reader-hello";
  } else if (name == "drop-response") {
    channel = ChannelName::TagToReader;
    kind = "tag-response";
  } else if (name == "drop-report") {
    channel = ChannelName::ReaderToServer;
    kind = "batch-report";
  } else if (name == "drop-reply") {
    channel = ChannelName::ServerToReader;
    kind = "server-reply";
  } else if (name == "flip-report") {
    channel = ChannelName::ReaderToServer;
    kind = "batch-report";
    flip = true;
  } else {
    throw std::invalid_argument("unknown hook: " + name);
  }
  world.channels[static_cast<unsigned>(channel)].interposer =
      flip ? flip_once(kind) : drop_once(kind);
}

int cmd_simulate(Scheme scheme, std::uint32_t tags, std::uint32_t sessions,
                 Word64 seed, const std::string& hook,
                 const std::string& output) {
  WorldConfig wc;
  wc.seed = seed;
  wc.n_tags = tags;
  wc.scheme = scheme;
  World world = make_world(wc);
  install_hook(world, hook);

  std::vector<TagId> ids(tags);
  std::iota(ids.begin(), ids.end(), TagId{1});

  bool all_valid = true;
  for (std::uint32_t s = 1; s <= sessions; ++s) {
    nlohmann::ordered_json line;
    line["session"] = s;
    try {
      const SessionResult r = run_session(world, ids);
      line["server_msg"] = r.server_msg ? to_string(*r.server_msg) : "none";
      line["reader_msg"] = r.reader_msg ? to_string(*r.reader_msg) : "none";
      line["marked"] = r.decision.marked.size();
      line["excluded"] = r.decision.excluded.size();
      if (!(r.server_msg && *r.server_msg == Msg::TagValid)) all_valid = false;
    } catch (const std::invalid_argument& e) {
      line["error"] = e.what();
      all_valid = false;
    }
    std::cout << line.dump() << "\n";
  }

  if (!output.empty()) {
    std::ofstream f(output, std::ios::binary | std::ios::trunc);
    if (!f) {
      std::cerr << "cannot open " << output << " for writing\n";
      return 2;
    }
    f << world.transcript.to_jsonl();
  }
  return all_valid ? 0 : 1;
}

int cmd_experiment(const std::string& name, const ExperimentConfig& cfg,
                   bool reveal_refresh) {
  if (name == "desync") {
    const DesyncReport d = measure_desync(cfg.scheme, cfg.seed, cfg.algo);
    std::cout << d.to_json().dump() << "\n";
    std::cout << "(" << d.desync_s << ", " << d.desync_t << ", " << d.resync_s
              << ", " << d.resync_t << ") "
              << (d.synchronizable ? "synchronizable" : "not-synchronizable")
              << "\n";
    return d.synchronizable ? 0 : 1;
  }

  std::vector<ExperimentReport> reports;
  if (name == "forward") {
    reports.push_back(run_forward_security(cfg));
  } else if (name == "backward") {
    reports.push_back(run_backward_security(cfg, reveal_refresh));
  } else if (name == "tracking1") {
    reports.push_back(run_tracking(TrackingVariant::Exp1, cfg));
  } else if (name == "tracking2") {
    reports.push_back(run_tracking(TrackingVariant::Exp2, cfg));
  } else if (name == "cloning") {
    reports.push_back(
        run_cloning(cfg, CloningMode::Passive, CloningStrategy::TranscriptReplayer));
    reports.push_back(
        run_cloning(cfg, CloningMode::Passive, CloningStrategy::RandomForger));
    reports.push_back(
        run_cloning(cfg, CloningMode::Active, CloningStrategy::CrossCorrupt));
    reports.push_back(
        run_cloning(cfg, CloningMode::Passive, CloningStrategy::WeakHashForger));
  } else if (name == "replay") {
    reports.push_back(run_replay(cfg));
  } else if (name == "timing") {
    reports.push_back(run_timing(cfg));
  } else {
    std::cerr << "unknown experiment: " << name << "\n";
    return 2;
  }

  bool all_pass = true;
  for (const auto& r : reports) {
    std::cout << r.to_json().dump() << "\n";
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 1;
}

int cmd_cost(Scheme scheme, std::size_t tags, bool aggregate) {
  const CostParams params;
  const SessionTime st = session_time(scheme, params);
  const TransferCost tc = reader_server_bits(tags, aggregate, params);

  nlohmann::ordered_json j;
  j["scheme"] = to_string(scheme);
  j["session_ms"]["tag_compute"] = st.tag_compute_ms;
  j["session_ms"]["t2r"] = st.t2r_ms;
  j["session_ms"]["r2t"] = st.r2t_ms;
  j["session_ms"]["total"] = st.total_ms();
  j["session_ms"]["total_reported"] = st.total_reported_ms();
  j["reader_server"]["tags"] = tags;
  j["reader_server"]["aggregated"] = aggregate;
  j["reader_server"]["bits"] = tc.bits;
  j["reader_server"]["seconds"] = tc.seconds;
  std::cout << j.dump() << "\n";

  const auto rows = cost_table(params);
  nlohmann::ordered_json t;
  t["table"] = nlohmann::ordered_json::array();
  for (const auto& row : rows)
    t["table"].push_back({{"metric", row.metric},
                          {"scheme1", row.scheme1},
                          {"scheme2", row.scheme2}});
  std::cout << t.dump() << "\n";

  if (isatty(fileno(stdout))) {
    std::printf("\n%-28s %-14s %s\n", "metric", "scheme 1", "scheme 2");
    for (const auto& row : rows)
      std::printf("%-28s %-14s %s\n", row.metric.c_str(), row.scheme1.c_str(),
                  row.scheme2.c_str());
  }
  return 0;
}

int cmd_regen_golden() {
  const KeyedHash reference;
  const KeyedHash weak(HashAlgo::TestWeak);
  nlohmann::ordered_json j;
  j["comment"] =
      "Reference digests for the keyed-hash and PRNG cores. Messages are "
      "big-endian 64-bit words concatenated in order; the 64-bit key expands "
      "to a 128-bit SipHash-2-4 key as k0 = key, k1 = key XOR "
      "9e3779b97f4a7c15 (little-endian byte order). Values were produced by "
      "an independent implementation and are frozen here.";

  struct Case {
    std::vector<Word64> words;
    Word64 key;
  };
  const std::vector<Case> cases{
      {{1, 2}, 5},
      {{0xDEADBEEFULL, 0xCAFEBABEULL}, 0x1234},
      {{0xFFFFFFFFFFFFFFFFULL}, 0},
      {{0x0123456789ABCDEFULL, 0xFEDCBA9876543210ULL}, 0xA5A5A5A5A5A5A5A5ULL}};
  j["keyed_hash"] = nlohmann::ordered_json::array();
  for (const auto& c : cases) {
    std::vector<std::uint8_t> msg;
    for (Word64 w : c.words) {
      const auto b = be_bytes(w);
      msg.insert(msg.end(), b.begin(), b.end());
    }
    nlohmann::ordered_json entry;
    entry["message_words"] = nlohmann::ordered_json::array();
    for (Word64 w : c.words) entry["message_words"].push_back(word_hex(w));
    entry["key"] = word_hex(c.key);
    entry["digest"] = word_hex(reference.digest(msg, c.key));
    j["keyed_hash"].push_back(entry);
  }

  Prng prng(0x2A);
  OpCounter sink;
  j["prng"]["seed"] = word_hex(0x2A);
  j["prng"]["stream"] = nlohmann::ordered_json::array();
  for (int i = 0; i < 3; ++i) j["prng"]["stream"].push_back(word_hex(prng.next(sink)));

  const std::vector<std::vector<Word64>> weak_cases{{1, 2}, {0xDEADBEEFULL}};
  j["weak_hash"] = nlohmann::ordered_json::array();
  for (const auto& words : weak_cases) {
    std::vector<std::uint8_t> msg;
    for (Word64 w : words) {
      const auto b = be_bytes(w);
      msg.insert(msg.end(), b.begin(), b.end());
    }
    nlohmann::ordered_json entry;
    entry["message_words"] = nlohmann::ordered_json::array();
    for (Word64 w : words) entry["message_words"].push_back(word_hex(w));
    entry["digest"] = word_hex(weak.digest(msg, 0));
    j["weak_hash"].push_back(entry);
  }

  std::uint8_t key16[16];
  for (int i = 0; i < 16; ++i) key16[i] = static_cast<std::uint8_t>(i);
  std::vector<std::uint8_t> msg;
  j["siphash24_reference_vectors"]["key"] = "000102030405060708090a0b0c0d0e0f";
  j["siphash24_reference_vectors"]["messages"] =
      "byte strings 00, 00 01, 00 01 02, ... of increasing length";
  j["siphash24_reference_vectors"]["digests"] = nlohmann::ordered_json::array();
  for (std::uint8_t len = 0; len < 8; ++len) {
    j["siphash24_reference_vectors"]["digests"].push_back(
        word_hex(siphash24(key16, msg)));
    msg.push_back(len);
  }

  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch-mode RFID mutual-authentication simulator"};
  app.require_subcommand(1);
  app.set_config("--config");

  Scheme scheme = Scheme::S2;
  std::uint32_t tags = 1;
  std::uint32_t sessions = 1;
  Word64 seed = default_seed();
  std::string hook = "none";
  std::string output;
  std::string experiment_name;
  HashAlgo algo = HashAlgo::ReferencePrf;
  Mutant mutant = Mutant::None;
  std::size_t trials = 10000;
  unsigned threads = 1;
  bool reveal_refresh = false;
  bool no_aggregate = false;

  auto* sim = app.add_subcommand("simulate", "Run honest batch sessions end to end");
  sim->add_option("--scheme", scheme, "Protocol variant")
      ->transform(CLI::CheckedTransformer(kSchemeNames, CLI::ignore_case));
  sim->add_option("--tags", tags, "Tags per batch")->check(CLI::Range(1u, 100000u));
  sim->add_option("--sessions", sessions, "Sessions to run")
      ->check(CLI::Range(1u, 1000000u));
  sim->add_option("--seed", seed, "World seed (TAGCHAIN_SEED fallback)");
  sim->add_option("--hook", hook, "Adversary program")
      ->check(CLI::IsMember({"none", "drop-hello", "drop-response", "drop-report",
                             "drop-reply", "flip-report"}));
  sim->add_option("--output", output, "Write the channel transcript here (JSON lines)");

  auto* exp = app.add_subcommand("experiment", "Run a security experiment");
  exp->add_option("name", experiment_name, "Experiment name")
      ->required()
      ->check(CLI::IsMember({"forward", "backward", "tracking1", "tracking2",
                             "cloning", "replay", "timing", "desync"}));
  exp->add_option("--trials", trials, "Trial count");
  exp->add_option("--seed", seed, "Experiment seed (TAGCHAIN_SEED fallback)");
  exp->add_option("--scheme", scheme, "Protocol variant")
      ->transform(CLI::CheckedTransformer(kSchemeNames, CLI::ignore_case));
  exp->add_option("--mutant", mutant, "Planted protocol flaw")
      ->transform(CLI::CheckedTransformer(kMutantNames, CLI::ignore_case));
  exp->add_option("--algo", algo, "Hash core")
      ->transform(CLI::CheckedTransformer(kAlgoNames, CLI::ignore_case));
  exp->add_option("--threads", threads, "Worker threads")
      ->check(CLI::Range(1u, 256u));
  exp->add_flag("--reveal-refresh", reveal_refresh,
                "Backward-security control run: hand the distinguisher the "
                "refresh transcript");

  auto* cost = app.add_subcommand("cost", "Report the quantitative cost model");
  cost->add_option("--scheme", scheme, "Protocol variant")
      ->transform(CLI::CheckedTransformer(kSchemeNames, CLI::ignore_case));
  cost->add_option("--tags", tags, "Batch size n")->check(CLI::Range(1u, 100000u));
  cost->add_flag("--no-aggregate", no_aggregate,
                 "Cost the per-tag digest transfer instead of the aggregate");

  auto* regen =
      app.add_subcommand("regen-golden", "Print the frozen reference digests");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed())
      return cmd_simulate(scheme, tags, sessions, seed, hook, output);
    if (exp->parsed()) {
      ExperimentConfig cfg;
      cfg.seed = seed;
      cfg.trials = trials;
      cfg.scheme = scheme;
      cfg.algo = algo;
      cfg.mutant = mutant;
      cfg.threads = threads;
      return cmd_experiment(experiment_name, cfg, reveal_refresh);
    }
    if (cost->parsed()) {
      if (cost->count("--tags") == 0) tags = 200;
      return cmd_cost(scheme, tags, !no_aggregate);
    }
    if (regen->parsed()) return cmd_regen_golden();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
