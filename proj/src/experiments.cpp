#include "tagchain/experiments.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <thread>

namespace tagchain {

namespace {

constexpr Word64 kSaltWorld = 0x1a2b3c4d5e6f7081ULL;
constexpr Word64 kSaltCoin = 0x9f8e7d6c5b4a3921ULL;
constexpr Word64 kSaltLoop = 0x417e9b02c6d8f135ULL;

Word64 derive(Word64 a, Word64 b, Word64 salt) {
  return KeyedHash().digest(be_bytes(a, b), salt);
}

// Deterministic per-trial randomness, independent of run partitioning.
struct Rng {
  Prng p;
  OpCounter sink;
  explicit Rng(Word64 seed) : p(seed) {}
  Word64 next() { return p.next(sink); }
  bool coin() { return (next() & 1) != 0; }
};

WorldConfig trial_world(const ExperimentConfig& cfg, Word64 trial, std::uint32_t n_tags) {
  WorldConfig wc;
  wc.seed = derive(cfg.seed, trial, kSaltWorld);
  wc.n_tags = n_tags;
  wc.scheme = cfg.scheme;
  wc.algo = cfg.algo;
  wc.mutant = cfg.mutant;
  return wc;
}

struct Tally {
  std::size_t wins = 0;
  std::map<std::string, std::size_t> detail;
};

Tally run_trials(const ExperimentConfig& cfg,
                 const std::function<void(std::size_t, Tally&)>& trial) {
  const unsigned nthreads = std::max(1u, cfg.threads);
  if (nthreads == 1) {
    Tally t;
    for (std::size_t i = 0; i < cfg.trials; ++i) trial(i, t);
    return t;
  }
  std::vector<Tally> parts(nthreads);
  std::vector<std::thread> workers;
  workers.reserve(nthreads);
  for (unsigned w = 0; w < nthreads; ++w)
    workers.emplace_back([&, w] {
      for (std::size_t i = w; i < cfg.trials; i += nthreads) trial(i, parts[w]);
    });
  for (auto& th : workers) th.join();
  Tally out;
  for (const auto& p : parts) {
    out.wins += p.wins;
    for (const auto& [k, v] : p.detail) out.detail[k] += v;
  }
  return out;
}

enum class Compare { Below, Above, ExactZero, ZeroWins };

const char* to_string(Compare c) {
  switch (c) {
    case Compare::Below: return "below";
    case Compare::Above: return "above";
    case Compare::ExactZero: return "exact-zero";
    case Compare::ZeroWins: return "zero-wins";
  }
  return "?";
}

ExperimentReport make_report(std::string name, const ExperimentConfig& cfg,
                             const Tally& t, bool guessing, double threshold,
                             Compare cmp) {
  ExperimentReport r;
  r.name = std::move(name);
  r.trials = cfg.trials;
  r.wins = t.wins;
  const double p = cfg.trials ? static_cast<double>(t.wins) / cfg.trials : 0.0;
  r.advantage = guessing ? std::abs(p - 0.5) : p;
  r.ci95 = 1.96 * std::sqrt(std::max(p * (1.0 - p), 0.0) /
                            std::max<std::size_t>(cfg.trials, 1));
  r.threshold = threshold;
  r.comparison = to_string(cmp);
  switch (cmp) {
    case Compare::Below: r.pass = r.advantage < threshold; break;
    case Compare::Above: r.pass = r.advantage > threshold; break;
    case Compare::ExactZero: r.pass = r.advantage == 0.0; break;
    case Compare::ZeroWins: r.pass = t.wins == 0; break;
  }
  r.detail = t.detail;
  return r;
}

void require_trials(const ExperimentConfig& cfg, std::size_t minimum) {
  if (cfg.trials < minimum)
    throw std::invalid_argument("experiment: too few trials (need >= " +
                                std::to_string(minimum) + ")");
}

void randomize_secret_fields(Rng& rng, ReaderHello& h, TagResponse& r) {
  h.r_r = rng.next();
  h.auth = rng.next();
  r.h_id = rng.next();
  r.r_t = rng.next();
  if (r.at) r.at = rng.next();
}

}  // namespace

nlohmann::ordered_json ExperimentReport::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["trials"] = trials;
  j["wins"] = wins;
  j["advantage"] = advantage;
  j["ci95"] = ci95;
  j["threshold"] = threshold;
  j["comparison"] = comparison;
  j["pass"] = pass;
  j["verdict"] = verdict();
  if (!detail.empty()) j["detail"] = detail;
  return j;
}

nlohmann::ordered_json DesyncReport::to_json() const {
  nlohmann::ordered_json j;
  j["desync_s"] = desync_s;
  j["desync_t"] = desync_t;
  j["resync_s"] = resync_s;
  j["resync_t"] = resync_t;
  j["verdict"] = synchronizable ? "synchronizable" : "not-synchronizable";
  return j;
}

OracleContext::OracleContext(const WorldConfig& cfg)
    : world_(make_world(cfg)), next_id_(cfg.n_tags + 1) {}

TagId OracleContext::create_tag() {
  const TagId id = next_id_++;
  const Word64 key = world_.db.rng.next(world_.db.ops);
  TagState st = setup_tag(world_.db, id, key, Word64{1} << 40);
  if (!world_.tags.empty()) st.mutant = world_.tags.begin()->second.mutant;
  if (world_.scheme == Scheme::S2)
    world_.reader.at_table[id] = expected_at(world_.db, id);
  world_.tags.emplace(id, std::move(st));
  return id;
}

OracleContext::Corruption OracleContext::corrupt(TagId id) {
  const TagState& st = world_.tags.at(id);
  corrupted_.insert(id);
  return Corruption{st.key, st.t_max, st.t_cur, st.t_prev};
}

ReaderHello OracleContext::launch(TagId id) {
  const std::array<TagId, 1> ids{id};
  auto hellos = open_batch(world_.reader, world_.db, ids);
  return hellos.front().second;
}

TagOutcome OracleContext::send_tag(TagId id, const ReaderHello& hello) {
  return tag_process(world_.tags.at(id), hello);
}

std::optional<ExclusionReason> OracleContext::send_reader(TagId id,
                                                          const TagResponse& resp) {
  return collect(world_.reader, id, resp);
}

std::optional<Msg> OracleContext::finish() {
  const BatchDecision decision = world_.reader.decision;
  if (decision.marked.empty()) {
    world_.reader.pending.clear();
    world_.reader.decision = BatchDecision{};
    return std::nullopt;
  }
  BatchReport report = close_batch(world_.reader, decision);
  ServerReply reply = verify_batch(world_.db, report, session_map(decision));
  apply_reply(world_.reader, reply);
  return reply.msg;
}

OracleContext::Recorded OracleContext::execute(TagId id) {
  Recorded rec;
  rec.hello = launch(id);
  TagOutcome out = send_tag(id, rec.hello);
  rec.response = out.response;
  rec.genuine = out.genuine;
  rec.tag_ops = out.ops_used;
  send_reader(id, rec.response);
  rec.msg = finish();
  return rec;
}

OracleContext::TimingSample OracleContext::tr(TagId id, bool success,
                                              const CostParams& params) {
  TimingSample s;
  if (success) {
    Recorded rec = execute(id);
    s.tag_time_ms = rec.tag_ops * params.hash_ms;
    s.response_bits = encode(rec.response).size() * 8;
    return s;
  }
  ReaderHello h = launch(id);
  h.auth ^= 1;
  TagOutcome out = send_tag(id, h);
  s.tag_time_ms = out.ops_used * params.hash_ms;
  s.response_bits = encode(out.response).size() * 8;
  world_.reader.pending.clear();
  world_.reader.decision = BatchDecision{};
  return s;
}

ExperimentReport run_forward_security(const ExperimentConfig& cfg) {
  require_trials(cfg, 100);
  Tally t = run_trials(cfg, [&cfg](std::size_t i, Tally& tally) {
    OracleContext ctx(trial_world(cfg, i, 2));
    Rng rng(derive(cfg.seed, i, kSaltCoin));
    ctx.execute(2);  // unrelated traffic in the same world
    const auto past = ctx.execute(1);
    ctx.execute(1);
    const auto secrets = ctx.corrupt(1);

    const bool real = rng.coin();
    ReaderHello h = past.hello;
    TagResponse r = past.response;
    if (!real) randomize_secret_fields(rng, h, r);

    // Key-chain extender: the transcript is declared real iff it verifies
    // under a key reachable from the corrupted one.
    const KeyedHash& H = ctx.world().db.hasher;
    const bool hit =
        r.h_id == H.digest(be_bytes(r.r_t, h.r_r), secrets.key) ||
        r.h_id == H.digest(be_bytes(r.r_t, h.r_r),
                           H.digest(be_bytes(secrets.key), h.r_r));
    if (hit == real) tally.wins += 1;
  });
  if (cfg.mutant == Mutant::NoKeyUpdate)
    return make_report("forward-security", cfg, t, true, 0.4, Compare::Above);
  return make_report("forward-security", cfg, t, true, 0.05, Compare::Below);
}

ExperimentReport run_backward_security(const ExperimentConfig& cfg,
                                       bool reveal_refresh) {
  require_trials(cfg, 100);
  Tally t = run_trials(cfg, [&cfg, reveal_refresh](std::size_t i, Tally& tally) {
    OracleContext ctx(trial_world(cfg, i, 2));
    Rng rng(derive(cfg.seed, i, kSaltCoin));
    ctx.execute(1);
    const auto secrets = ctx.corrupt(1);
    // The refresh session: its R_r is withheld from the distinguisher unless
    // the restriction is deliberately lifted.
    const auto refresh = ctx.execute(1);
    const auto chal = ctx.execute(1);

    const bool real = rng.coin();
    ReaderHello h = chal.hello;
    TagResponse r = chal.response;
    if (!real) randomize_secret_fields(rng, h, r);

    const KeyedHash& H = ctx.world().db.hasher;
    bool hit = r.h_id == H.digest(be_bytes(r.r_t, h.r_r), secrets.key);
    if (reveal_refresh) {
      const Word64 refreshed =
          H.digest(be_bytes(secrets.key), refresh.hello.r_r);
      hit = hit || r.h_id == H.digest(be_bytes(r.r_t, h.r_r), refreshed);
    }
    if (hit == real) tally.wins += 1;
  });
  std::string name =
      reveal_refresh ? "backward-security-control" : "backward-security";
  if (reveal_refresh)
    return make_report(std::move(name), cfg, t, true, 0.4, Compare::Above);
  if (cfg.mutant == Mutant::NoKeyUpdate)
    return make_report(std::move(name), cfg, t, true, 0.4, Compare::Above);
  return make_report(std::move(name), cfg, t, true, 0.05, Compare::Below);
}

ExperimentReport run_tracking(TrackingVariant variant, const ExperimentConfig& cfg) {
  require_trials(cfg, 100);
  const bool exp1 = variant == TrackingVariant::Exp1;
  Tally t = run_trials(cfg, [&cfg, exp1](std::size_t i, Tally& tally) {
    Rng rng(derive(cfg.seed, i, kSaltCoin));
    if (exp1) {
      // Two candidate tags; the challenge continues as one of them.
      OracleContext ctx(trial_world(cfg, i, 2));
      const auto p1 = ctx.execute(1);
      const auto p2 = ctx.execute(2);
      const bool b = rng.coin();
      const auto chal = ctx.execute(b ? 2 : 1);

      int guess = -1;
      const auto matches = [&](const OracleContext::Recorded& profile) {
        return chal.response.h_id == profile.response.h_id ||
               chal.response.r_t == profile.response.r_t;
      };
      if (matches(p2)) guess = 1;
      else if (matches(p1)) guess = 0;
      if (guess < 0) guess = rng.coin() ? 1 : 0;
      if (guess == (b ? 1 : 0)) tally.wins += 1;
      return;
    }
    // Real-or-random continuation of one tag's transcript stream.
    OracleContext ctx(trial_world(cfg, i, 1));
    const auto profile = ctx.execute(1);
    const bool real = rng.coin();
    const auto next = ctx.execute(1);
    TagResponse shown = next.response;
    if (!real) {
      shown.h_id = rng.next();
      shown.r_t = rng.next();
      if (shown.at) shown.at = rng.next();
    }
    const bool linked = shown.h_id == profile.response.h_id ||
                        shown.r_t == profile.response.r_t ||
                        (shown.at && profile.response.at &&
                         *shown.at == *profile.response.at);
    if (linked == real) tally.wins += 1;
  });
  std::string name = exp1 ? "tracking-exp1" : "tracking-exp2";
  if (cfg.mutant == Mutant::StaticId || cfg.mutant == Mutant::ReusedRt)
    return make_report(std::move(name), cfg, t, true, 0.45, Compare::Above);
  return make_report(std::move(name), cfg, t, true, 0.05, Compare::Below);
}

const char* to_string(CloningStrategy s) {
  switch (s) {
    case CloningStrategy::TranscriptReplayer: return "transcript-replayer";
    case CloningStrategy::RandomForger: return "random-forger";
    case CloningStrategy::CrossCorrupt: return "cross-corrupt";
    case CloningStrategy::WeakHashForger: return "weak-hash-forger";
  }
  return "?";
}

ExperimentReport run_cloning(const ExperimentConfig& cfg, CloningMode mode,
                             CloningStrategy strategy) {
  require_trials(cfg, 1);
  if (mode == CloningMode::Passive && strategy == CloningStrategy::CrossCorrupt)
    throw std::invalid_argument("cloning: cross-corrupt needs the active mode");

  Tally t = run_trials(cfg, [&cfg, strategy](std::size_t i, Tally& tally) {
    OracleContext ctx(trial_world(cfg, i, 2));
    Rng rng(derive(cfg.seed, i, kSaltCoin));
    const TagId victim = 1;
    const KeyedHash& H = ctx.world().db.hasher;

    TagResponse forged;
    switch (strategy) {
      case CloningStrategy::TranscriptReplayer: {
        const auto rec = ctx.execute(victim);
        ctx.launch(victim);
        forged = rec.response;
        break;
      }
      case CloningStrategy::RandomForger: {
        ctx.launch(victim);
        forged = TagResponse{rng.next(), rng.next(), std::nullopt};
        if (cfg.scheme == Scheme::S2) forged.at = rng.next();
        break;
      }
      case CloningStrategy::CrossCorrupt: {
        const auto stolen = ctx.corrupt(2);
        const ReaderHello hello = ctx.launch(victim);
        const Word64 r_t = rng.next();
        forged = TagResponse{H.digest(be_bytes(r_t, hello.r_r), stolen.key), r_t,
                             std::nullopt};
        if (cfg.scheme == Scheme::S2)
          forged.at = H.digest(be_bytes(stolen.t_max), stolen.key);
        break;
      }
      case CloningStrategy::WeakHashForger: {
        const ReaderHello hello = ctx.launch(victim);
        const Word64 r_t = rng.next();
        const KeyedHash weak(HashAlgo::TestWeak);
        forged = TagResponse{weak.digest(be_bytes(r_t, hello.r_r), 0), r_t,
                             std::nullopt};
        if (cfg.scheme == Scheme::S2) forged.at = rng.next();
        break;
      }
    }
    ctx.send_reader(victim, forged);
    const auto msg = ctx.finish();
    const bool accepted = msg && *msg == Msg::TagValid;
    if (accepted && !ctx.corrupted().contains(victim)) tally.wins += 1;
  });

  std::string name = std::string("cloning-") + to_string(strategy);
  if (strategy == CloningStrategy::WeakHashForger && cfg.algo == HashAlgo::TestWeak &&
      cfg.scheme == Scheme::S1)
    return make_report(std::move(name), cfg, t, false, 0.9, Compare::Above);
  return make_report(std::move(name), cfg, t, false, 0.0, Compare::ZeroWins);
}

ExperimentReport run_replay(const ExperimentConfig& cfg) {
  require_trials(cfg, 1);
  Tally t = run_trials(cfg, [&cfg](std::size_t i, Tally& tally) {
    OracleContext ctx(trial_world(cfg, i, 1));
    const auto rec = ctx.execute(1);

    // Replay the tag's old response into a fresh session.
    ctx.launch(1);
    const auto decision = ctx.send_reader(1, rec.response);
    const auto msg = ctx.finish();
    const bool response_accepted = !decision && msg && *msg == Msg::TagValid;

    // Replay the reader's old hello straight at the tag.
    const TagOutcome out = ctx.send_tag(1, rec.hello);
    const bool hello_accepted = out.genuine;

    if (response_accepted) tally.detail["replayed-response-accepted"] += 1;
    if (hello_accepted) tally.detail["replayed-hello-accepted"] += 1;
    if (response_accepted || hello_accepted) tally.wins += 1;
  });
  if (cfg.mutant == Mutant::NoTimestampCheck)
    return make_report("replay", cfg, t, false, 0.0, Compare::Above);
  return make_report("replay", cfg, t, false, 0.0, Compare::ZeroWins);
}

ExperimentReport run_timing(const ExperimentConfig& cfg) {
  require_trials(cfg, 2);
  ExperimentConfig even = cfg;
  even.trials = cfg.trials - (cfg.trials % 2);  // balanced challenger coin
  Tally t = run_trials(even, [&even](std::size_t i, Tally& tally) {
    OracleContext ctx(trial_world(even, i, 1));
    const bool success = (i % 2) == 0;
    const auto ref_s = ctx.tr(1, true);
    const auto ref_f = ctx.tr(1, false);
    const auto chal = ctx.tr(1, success);

    bool guess_success = true;
    if (ref_s.tag_time_ms != ref_f.tag_time_ms) {
      const double ds = std::abs(chal.tag_time_ms - ref_s.tag_time_ms);
      const double df = std::abs(chal.tag_time_ms - ref_f.tag_time_ms);
      guess_success = ds <= df;
    }
    if (guess_success == success) tally.wins += 1;
  });
  if (cfg.mutant == Mutant::LeakyDecoy)
    return make_report("timing", even, t, true, 0.45, Compare::Above);
  return make_report("timing", even, t, true, 0.0, Compare::ExactZero);
}

namespace {

AdversaryHook drop_first(std::string kind) {
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

int resync_loop(Scheme scheme, Word64 seed, HashAlgo algo, bool tag_side) {
  for (int ct = 1; ct <= 3; ++ct) {
    WorldConfig wc;
    wc.seed = derive(seed, static_cast<Word64>(ct) + (tag_side ? 0 : 100), kSaltLoop);
    wc.n_tags = 1;
    wc.scheme = scheme;
    wc.algo = algo;
    World w = make_world(wc);
    for (int k = 0; k < ct; ++k) {
      if (tag_side) {
        // Forced tag update: the hello arrives, everything after is blocked.
        const ReaderHello h = issue_challenge(w.db, 1);
        tag_process(w.tags.at(1), h);
      } else {
        // Forced server update with no tag involvement.
        ServerRecord& rec = w.db.records.at(1);
        rec.key = w.db.hasher.hash(be_bytes(rec.key), w.db.rng.next(w.db.ops), w.db.ops);
        rec.key_version += 1;
      }
    }
    bool ok = false;
    try {
      const std::array<TagId, 1> ids{1};
      const SessionResult r = run_session(w, ids);
      ok = r.server_msg && *r.server_msg == Msg::TagValid;
    } catch (const std::invalid_argument&) {
      ok = false;  // every response excluded: authentication did not happen
    }
    if (!ok) return ct - 1;
  }
  return 3;
}

}  // namespace

DesyncReport measure_desync(Scheme scheme, Word64 seed, HashAlgo algo) {
  DesyncReport rep;

  const std::array<std::pair<ChannelName, const char*>, 4> flows{{
      {ChannelName::ReaderToTag, "reader-hello"},
      {ChannelName::TagToReader, "tag-response"},
      {ChannelName::ReaderToServer, "batch-report"},
      {ChannelName::ServerToReader, "server-reply"},
  }};
  for (const auto& [channel, kind] : flows) {
    WorldConfig wc;
    wc.seed = derive(seed, static_cast<Word64>(channel), kSaltLoop);
    wc.n_tags = 1;
    wc.scheme = scheme;
    wc.algo = algo;
    World w = make_world(wc);
    w.channels[static_cast<unsigned>(channel)].interposer = drop_first(kind);
    try {
      const std::array<TagId, 1> ids{1};
      run_session(w, ids);
    } catch (const std::invalid_argument&) {
    }
    const auto tag_v = static_cast<long>(w.tags.at(1).key_version);
    const auto srv_v = static_cast<long>(w.db.records.at(1).key_version);
    rep.desync_s = std::max(rep.desync_s, static_cast<int>(std::max(tag_v - srv_v, 0L)));
    rep.desync_t = std::max(rep.desync_t, static_cast<int>(std::max(srv_v - tag_v, 0L)));
  }

  rep.resync_s = resync_loop(scheme, seed, algo, true);
  rep.resync_t = resync_loop(scheme, seed, algo, false);
  rep.synchronizable =
      rep.desync_s <= rep.resync_s && rep.desync_t <= rep.resync_t;
  return rep;
}

}  // namespace tagchain
