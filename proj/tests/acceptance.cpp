#include <doctest.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tagchain/costmodel.hpp"
#include "tagchain/experiments.hpp"
#include "tagchain/reader.hpp"
#include "tagchain/server.hpp"
#include "tagchain/simnet.hpp"
#include "tagchain/snapshot.hpp"
#include "tagchain/tag.hpp"
#include "tagchain/wire.hpp"

namespace {

using namespace tagchain;

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

std::string fmt(const char* f, ...) {
  char buf[768];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

void verdict_line(bool ok, const char* name, const std::string& numbers) {
  std::printf("[%s] %s (%s)\n", ok ? "PASS" : "FAIL", name, numbers.c_str());
  std::fflush(stdout);
}

ExperimentConfig game_config(std::size_t trials, Scheme scheme, Mutant mutant,
                             Word64 seed) {
  ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.trials = trials;
  cfg.scheme = scheme;
  cfg.mutant = mutant;
  cfg.threads = 4;
  return cfg;
}

bool session_valid(const SessionResult& r) {
  return r.server_msg && *r.server_msg == Msg::TagValid;
}

}  // namespace

TEST_CASE("cost reproduction") {
  Stopwatch sw;
  const SessionTime st = session_time(Scheme::S2);
  const TransferCost agg = reader_server_bits(200, true);
  const TransferCost raw = reader_server_bits(200, false);
  const double savings = 1.0 - double(agg.bits) / double(raw.bits);

  const bool c_tag = std::fabs(st.tag_compute_ms - 1.65) < 0.005;
  const bool c_t2r = std::fabs(st.t2r_ms - 0.30) < 0.005;
  const bool c_r2t = std::fabs(st.r2t_ms - 1.52) < 0.005;
  const bool c_total = std::fabs(st.total_reported_ms() - 3.50) <= 0.01;
  const bool c_bits = agg.bits == 12864 && raw.bits == 25600;
  const bool c_secs = std::fabs(agg.seconds - 0.6432) < 1e-9 &&
                      std::fabs(raw.seconds - 1.28) < 1e-9;
  const bool c_save = savings > 0.49 && savings < 0.51;
  const double elapsed = sw.seconds();
  const bool c_time = elapsed < 1.0;

  const bool ok =
      c_tag && c_t2r && c_r2t && c_total && c_bits && c_secs && c_save && c_time;
  verdict_line(ok, "cost reproduction",
               fmt("tag=%.2fms t2r=%.2fms r2t=%.4fms total=%.1fms agg=%zub/%."
                   "4fs raw=%zub/%.2fs savings=%.1f%% %.2fs",
                   st.tag_compute_ms, st.t2r_ms, st.r2t_ms,
                   st.total_reported_ms(), agg.bits, agg.seconds, raw.bits,
                   raw.seconds, savings * 100.0, elapsed));
  CHECK(c_tag);
  CHECK(c_t2r);
  CHECK(c_r2t);
  CHECK(c_total);
  CHECK(c_bits);
  CHECK(c_secs);
  CHECK(c_save);
  CHECK(c_time);
}

TEST_CASE("performance table consistency") {
  Stopwatch sw;
  const CostFigures f = measured_cost_figures();
  const bool c_ops = f.tag_ops_s1 == 4 && f.tag_ops_s2 == 5;
  const bool c_flows = f.tag_flows == 2;
  const bool c_mem = f.tag_memory_bits == 192;
  const bool c_t2r = f.t2r_bits_s1 == 2 * kWordBits && f.t2r_bits_s2 == 3 * kWordBits;
  const bool c_r2t = f.r2t_bits == 3 * kWordBits;
  const bool c_r2s = f.r2s_n_coeff == 1 && f.r2s_const_words == 1;
  const bool c_slots = f.s2r_slots_s1 == 3 && f.s2r_slots_s2 == 4;

  const auto rows = cost_table();
  auto cell = [&](const std::string& metric, bool s2) -> std::string {
    for (const auto& r : rows)
      if (r.metric == metric) return s2 ? r.scheme2 : r.scheme1;
    return "<missing>";
  };
  const bool c_rows = cell("Tag computation", false) == "4 Hash" &&
                      cell("Tag computation", true) == "5 Hash" &&
                      cell("Message flows (tag)", false) == "2" &&
                      cell("Tag memory", false) == "192 bit" &&
                      cell("Tag memory", true) == "192 bit" &&
                      cell("T->R comm", false) == "2b" &&
                      cell("T->R comm", true) == "3b" &&
                      cell("R->T comm", false) == "3b" &&
                      cell("R->S comm", false) == "(n+1)b" &&
                      cell("S->R comm", false) == "3b" &&
                      cell("S->R comm", true) == "4b";
  const double elapsed = sw.seconds();
  const bool c_time = elapsed < 1.0;

  const bool ok = c_ops && c_flows && c_mem && c_t2r && c_r2t && c_r2s &&
                  c_slots && c_rows && c_time;
  verdict_line(ok, "performance table consistency",
               fmt("ops=%u/%u flows=%u mem=%ubit t2r=%zu/%zubit r2t=%zubit "
                   "r2s=(%un+%u)w rows=%s %.2fs",
                   f.tag_ops_s1, f.tag_ops_s2, f.tag_flows, f.tag_memory_bits,
                   f.t2r_bits_s1, f.t2r_bits_s2, f.r2t_bits, f.r2s_n_coeff,
                   f.r2s_const_words, c_rows ? "match" : "drift", elapsed));
  CHECK(c_ops);
  CHECK(c_flows);
  CHECK(c_mem);
  CHECK(c_t2r);
  CHECK(c_r2t);
  CHECK(c_r2s);
  CHECK(c_slots);
  CHECK(c_rows);
  CHECK(c_time);
}

TEST_CASE("honest completeness") {
  Stopwatch sw;
  std::size_t sessions_run = 0;
  std::size_t sessions_valid = 0;
  bool keys_ok = true;
  std::set<std::uint32_t> sizes;

  for (int i = 0; i < 100; ++i) {
    WorldConfig wc;
    wc.seed = 0xACCE5500u + static_cast<Word64>(i);
    wc.n_tags = static_cast<std::uint32_t>(i % 64) + 1;
    wc.scheme = (i % 2 == 0) ? Scheme::S1 : Scheme::S2;
    sizes.insert(wc.n_tags);

    World world = make_world(wc);
    std::vector<TagId> ids(wc.n_tags);
    std::iota(ids.begin(), ids.end(), TagId{1});

    for (int s = 0; s < 2; ++s) {
      ++sessions_run;
      try {
        const SessionResult r = run_session(world, ids);
        if (session_valid(r) && r.reader_msg && *r.reader_msg == Msg::TagValid)
          ++sessions_valid;
      } catch (const std::exception&) {
      }
    }
    for (const auto& [id, tag] : world.tags) {
      const ServerRecord& rec = world.db.records.at(id);
      keys_ok = keys_ok && tag.key == rec.key &&
                tag.key_version == rec.key_version;
    }
  }
  const bool c_all = sessions_run == 200 && sessions_valid == 200;
  const bool c_cover = sizes.size() == 64;
  const double elapsed = sw.seconds();
  const bool c_time = elapsed < 30.0;

  const bool ok = c_all && c_cover && keys_ok && c_time;
  verdict_line(ok, "honest completeness",
               fmt("valid=%zu/%zu batch-sizes=%zu keys=%s %.2fs",
                   sessions_valid, sessions_run, sizes.size(),
                   keys_ok ? "synchronized" : "diverged", elapsed));
  CHECK(c_all);
  CHECK(c_cover);
  CHECK(keys_ok);
  CHECK(c_time);
}

TEST_CASE("desynchronization bounds") {
  Stopwatch sw;
  bool ok_bounds = true;
  bool ok_sync = true;
  std::string nums;
  for (Scheme scheme : {Scheme::S1, Scheme::S2}) {
    const DesyncReport d = measure_desync(scheme, 0xDE57);
    ok_bounds = ok_bounds && d.desync_s == 1 && d.desync_t == 0 &&
                d.resync_s == 1 && d.resync_t == 0;
    ok_sync = ok_sync && d.synchronizable;
    nums += fmt("%s=(%d,%d,%d,%d) ", scheme == Scheme::S1 ? "s1" : "s2",
                d.desync_s, d.desync_t, d.resync_s, d.resync_t);
  }
  const double elapsed = sw.seconds();
  const bool c_time = elapsed < 5.0;

  const bool ok = ok_bounds && ok_sync && c_time;
  verdict_line(ok, "desynchronization bounds",
               nums + fmt("%s %.2fs",
                          ok_sync ? "synchronizable" : "not-synchronizable",
                          elapsed));
  CHECK(ok_bounds);
  CHECK(ok_sync);
  CHECK(c_time);
}

TEST_CASE("timing indistinguishability") {
  Stopwatch sw;
  bool ops_ok = true;
  bool size_ok = true;
  bool honest_ok = true;
  std::size_t challenges = 0;

  for (Scheme scheme : {Scheme::S1, Scheme::S2}) {
    WorldConfig wc;
    wc.seed = 0x71417;
    wc.n_tags = 1;
    wc.scheme = scheme;
    World world = make_world(wc);
    const std::vector<TagId> ids{1};
    TagState& tag = world.tags.at(1);
    Prng noise(0xBADC0FFE);
    OpCounter sink;
    const std::uint64_t expect = scheme == Scheme::S1 ? 4 : 5;
    const std::size_t expect_bits = (scheme == Scheme::S1 ? 2 : 3) * kWordBits;

    for (int i = 0; i < 10000; ++i) {
      const std::uint64_t before = tag.ops.total();
      if (i % 2 == 0) {
        const std::size_t first = world.transcript.events.size();
        const SessionResult r = run_session(world, ids);
        honest_ok = honest_ok && session_valid(r);
        for (std::size_t k = first; k < world.transcript.events.size(); ++k) {
          const auto& e = world.transcript.events[k];
          if (e.kind == "tag-response") size_ok = size_ok && e.bits == expect_bits;
        }
      } else {
        ReaderHello h;
        h.t_r = tag.t_cur + 1 + (noise.next(sink) >> 40);
        h.r_r = noise.next(sink);
        h.auth = noise.next(sink);
        const TagOutcome out = tag_process(tag, h);
        ops_ok = ops_ok && !out.genuine;
        size_ok = size_ok && encode(out.response).size() * 8 == expect_bits;
      }
      ops_ok = ops_ok && (tag.ops.total() - before) == expect;
      ++challenges;
    }
  }

  const ExperimentReport rep =
      run_timing(game_config(10000, Scheme::S2, Mutant::None, 0x7141));
  const bool c_adv = rep.advantage == 0.0 && rep.pass;
  const double elapsed = sw.seconds();
  const bool c_time = elapsed < 10.0;

  const bool ok = ops_ok && size_ok && honest_ok && c_adv && c_time;
  verdict_line(ok, "timing indistinguishability",
               fmt("challenges=%zu op-counts=%s sizes=%s advantage=%.4f %.2fs",
                   challenges, ops_ok ? "uniform" : "leak",
                   size_ok ? "uniform" : "leak", rep.advantage, elapsed));
  CHECK(ops_ok);
  CHECK(size_ok);
  CHECK(honest_ok);
  CHECK(c_adv);
  CHECK(c_time);
}

TEST_CASE("replay and cloning resistance") {
  Stopwatch sw;
  const ExperimentReport rep =
      run_replay(game_config(10000, Scheme::S2, Mutant::None, 0x5EAF00D));
  const bool c_replay = rep.wins == 0 && rep.pass && rep.detail.empty();

  const ExperimentReport forger =
      run_cloning(game_config(100000, Scheme::S2, Mutant::None, 0xC10E),
                  CloningMode::Passive, CloningStrategy::RandomForger);
  const ExperimentReport replayer =
      run_cloning(game_config(10000, Scheme::S2, Mutant::None, 0xC10F),
                  CloningMode::Passive, CloningStrategy::TranscriptReplayer);
  const bool c_clone = forger.wins == 0 && forger.pass && replayer.wins == 0 &&
                       replayer.pass;
  const double elapsed = sw.seconds();
  const bool c_time = elapsed < 60.0;

  const bool ok = c_replay && c_clone && c_time;
  verdict_line(ok, "replay and cloning resistance",
               fmt("replay=%zu/%zu forger=%zu/%zu replayer=%zu/%zu %.2fs",
                   rep.wins, rep.trials, forger.wins, forger.trials,
                   replayer.wins, replayer.trials, elapsed));
  CHECK(c_replay);
  CHECK(c_clone);
  CHECK(c_time);
}

TEST_CASE("distinguisher soundness and power") {
  Stopwatch sw;
  bool sound_ok = true;
  double worst = 0.0;
  for (Scheme scheme : {Scheme::S1, Scheme::S2}) {
    const ExperimentReport games[] = {
        run_forward_security(game_config(10000, scheme, Mutant::None, 0xD15C0)),
        run_backward_security(game_config(10000, scheme, Mutant::None, 0xD15C1),
                              false),
        run_tracking(TrackingVariant::Exp1,
                     game_config(10000, scheme, Mutant::None, 0xD15C2)),
        run_tracking(TrackingVariant::Exp2,
                     game_config(10000, scheme, Mutant::None, 0xD15C3)),
    };
    for (const auto& g : games) {
      sound_ok = sound_ok && g.pass && g.advantage < 0.05;
      worst = std::max(worst, g.advantage);
    }
  }

  const ExperimentReport p_static = run_tracking(
      TrackingVariant::Exp1,
      game_config(10000, Scheme::S2, Mutant::StaticId, 0xF10A));
  const ExperimentReport p_noupd = run_forward_security(
      game_config(10000, Scheme::S2, Mutant::NoKeyUpdate, 0xF10B));
  const ExperimentReport p_leaky =
      run_timing(game_config(10000, Scheme::S2, Mutant::LeakyDecoy, 0xF10C));
  const ExperimentReport p_replay = run_replay(
      game_config(10000, Scheme::S2, Mutant::NoTimestampCheck, 0xF10D));

  const bool c_static = p_static.pass && p_static.advantage > 0.45;
  const bool c_noupd = p_noupd.pass && p_noupd.advantage > 0.4;
  const bool c_leaky =
      p_leaky.pass && p_leaky.advantage >= 0.45 && p_leaky.advantage <= 0.55;
  const bool c_replay = p_replay.pass && p_replay.wins > 0;
  const double elapsed = sw.seconds();
  const bool c_time = elapsed < 300.0;

  const bool ok = sound_ok && c_static && c_noupd && c_leaky && c_replay && c_time;
  verdict_line(ok, "distinguisher soundness and power",
               fmt("real-worst=%.4f static-id=%.4f no-key-update=%.4f "
                   "leaky-decoy=%.4f replay-wins=%zu %.2fs",
                   worst, p_static.advantage, p_noupd.advantage,
                   p_leaky.advantage, p_replay.wins, elapsed));
  CHECK(sound_ok);
  CHECK(c_static);
  CHECK(c_noupd);
  CHECK(c_leaky);
  CHECK(c_replay);
  CHECK(c_time);
}

TEST_CASE("aggregate verification equals per-entry oracle") {
  Stopwatch sw;
  bool agree_ok = true;
  bool honest_ok = true;
  std::size_t variants = 0;

  for (Scheme scheme : {Scheme::S1, Scheme::S2}) {
    for (unsigned n = 1; n <= 8; ++n) {
      Database db = setup_server(kWordBits, 0xA66E + n, scheme);
      std::map<TagId, TagState> tags;
      for (TagId id = 1; id <= n; ++id) {
        const Word64 key = db.rng.next(db.ops);
        tags.emplace(id, setup_tag(db, id, key, Word64{1} << 40));
      }

      std::vector<std::pair<TagId, Word64>> map;
      std::vector<Word64> r_t_list;
      Digest fold = 0;
      for (TagId id = 1; id <= n; ++id) {
        const ReaderHello lost = issue_challenge(db, id);
        if (id % 2 == 1) REQUIRE(tag_process(tags.at(id), lost).genuine);
        const ReaderHello hello = issue_challenge(db, id);
        const TagOutcome out = tag_process(tags.at(id), hello);
        REQUIRE(out.genuine);
        map.emplace_back(id, out.response.r_t);
        r_t_list.push_back(out.response.r_t);
        fold ^= out.response.h_id;
      }
      const auto baseline = snapshot_db(db);

      std::vector<std::array<Digest, 2>> cand(n);
      for (unsigned i = 0; i < n; ++i) {
        const ServerRecord& rec = db.records.at(map[i].first);
        const Word64 r_r = rec.issued->r_r;
        cand[i][0] = db.hasher.digest(be_bytes(map[i].second, r_r), rec.key);
        const Word64 ek = db.hasher.digest(be_bytes(rec.key), *rec.stale_r_r);
        cand[i][1] = db.hasher.digest(be_bytes(map[i].second, r_r), ek);
      }
      auto oracle = [&](Digest target) {
        for (std::uint32_t pick = 0; pick < (1u << n); ++pick) {
          Digest acc = 0;
          for (unsigned i = 0; i < n; ++i) acc ^= cand[i][(pick >> i) & 1u];
          if (acc == target) return Msg::TagValid;
        }
        return Msg::TagAuthError;
      };

      std::vector<Digest> reports{fold};
      Prng masks(0xF1A6 + n);
      OpCounter sink;
      for (unsigned e = 0; e < n; ++e) {
        reports.push_back(fold ^ (Word64{1} << (e * 7 % kWordBits)));
        reports.push_back(fold ^ (Word64{1} << (kWordBits - 1)));
        reports.push_back(fold ^ masks.next(sink));
      }

      for (std::size_t v = 0; v < reports.size(); ++v) {
        Database fresh = restore_db(baseline);
        BatchReport rep;
        rep.r_t_list = r_t_list;
        rep.h = reports[v];
        const Msg got = verify_batch(fresh, rep, map).msg;
        const Msg want = oracle(reports[v]);
        agree_ok = agree_ok && got == want;
        if (v == 0) honest_ok = honest_ok && got == Msg::TagValid;
        ++variants;
      }
    }
  }
  const double elapsed = sw.seconds();
  const bool c_time = elapsed < 10.0;

  const bool ok = agree_ok && honest_ok && c_time;
  verdict_line(ok, "aggregate verification equals per-entry oracle",
               fmt("variants=%zu agreement=%s honest=%s %.2fs", variants,
                   agree_ok ? "exact" : "divergent",
                   honest_ok ? "accepted" : "rejected", elapsed));
  CHECK(agree_ok);
  CHECK(honest_ok);
  CHECK(c_time);
}

TEST_CASE("threshold renewal recovery") {
  Stopwatch sw;

  Database db = setup_server(kWordBits, 0x9E11, Scheme::S1);
  setup_tag(db, 1, 0x5EED, Word64{1} << 40);
  Prng draws(0x7A57E);
  OpCounter sink;
  bool inv_ok = true;
  for (int i = 0; i < 10000; ++i) {
    const Word64 bound = (draws.next(sink) >> 2) | 0x8000;
    ServerRecord& rec = db.records.at(1);
    rec.t_max = bound;
    rec.pending_t_max.reset();
    const ReaderHello hello = issue_renewal(db, 1);
    inv_ok = inv_ok && hello.t_r > bound && xor_pad(hello.t_r, bound) > bound;
  }

  bool e2e_ok = true;
  int failed_at = 0;
  for (Scheme scheme : {Scheme::S1, Scheme::S2}) {
    WorldConfig wc;
    wc.seed = 0x57AC;
    wc.n_tags = 1;
    wc.scheme = scheme;
    wc.t_max = 0x110;
    World world = make_world(wc);
    const std::vector<TagId> ids{1};

    failed_at = 0;
    for (int s = 1; s <= 32 && failed_at == 0; ++s) {
      try {
        if (!session_valid(run_session(world, ids))) failed_at = s;
      } catch (const std::invalid_argument&) {
        failed_at = s;
      }
    }
    e2e_ok = e2e_ok && failed_at == 17;

    run_renewal(world, 1);
    const TagState& tag = world.tags.at(1);
    e2e_ok = e2e_ok && tag.t_max == 0x310;

    bool recovered = false;
    try {
      recovered = session_valid(run_session(world, ids));
    } catch (const std::invalid_argument&) {
    }
    const ServerRecord& rec = world.db.records.at(1);
    e2e_ok = e2e_ok && recovered && rec.t_max == 0x310 &&
             !rec.pending_t_max && tag.key == rec.key &&
             tag.key_version == rec.key_version;
  }
  const double elapsed = sw.seconds();
  const bool c_time = elapsed < 5.0;

  const bool ok = inv_ok && e2e_ok && c_time;
  verdict_line(ok, "threshold renewal recovery",
               fmt("pad-invariants=%s sweep=10000 fail-at=%d recovered=%s "
                   "bound=0x110->0x310 %.2fs",
                   inv_ok ? "hold" : "violated", failed_at,
                   e2e_ok ? "yes" : "no", elapsed));
  CHECK(inv_ok);
  CHECK(e2e_ok);
  CHECK(c_time);
}
