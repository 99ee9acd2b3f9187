#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tagchain/costmodel.hpp"
#include "tagchain/simnet.hpp"

namespace tagchain {

struct ExperimentConfig {
  Word64 seed = 1;
  std::size_t trials = 10000;
  Scheme scheme = Scheme::S2;
  HashAlgo algo = HashAlgo::ReferencePrf;
  Mutant mutant = Mutant::None;
  unsigned threads = 1;
};

struct ExperimentReport {
  std::string name;
  std::size_t trials = 0;
  std::size_t wins = 0;
  // |win rate - 1/2| for guessing games, plain win rate for attack games.
  double advantage = 0.0;
  double ci95 = 0.0;
  double threshold = 0.0;
  // "below" = advantage must stay under threshold (soundness),
  // "above" = advantage must exceed it (mutant power / control runs).
  std::string comparison = "below";
  bool pass = false;
  std::map<std::string, std::size_t> detail;

  std::string verdict() const { return pass ? "PASS" : "FAIL"; }
  nlohmann::ordered_json to_json() const;
};

// Adversary-facing handle on one world: the oracle set the games run on.
class OracleContext {
 public:
  explicit OracleContext(const WorldConfig& cfg);

  // Registers one more synchronized tag and returns its id.
  TagId create_tag();

  struct Corruption {
    Word64 key = 0;
    Word64 t_max = 0;
    Word64 t_cur = 0;
    Word64 t_prev = 0;
  };
  // Full secret readout; the tag is marked corrupted permanently.
  Corruption corrupt(TagId id);
  const std::set<TagId>& corrupted() const { return corrupted_; }

  // Opens a single-tag session and returns the hello the reader would send.
  ReaderHello launch(TagId id);
  // Delivers any hello (honest or forged) straight to the tag.
  TagOutcome send_tag(TagId id, const ReaderHello& hello);
  // Files a response (honest or forged) with the reader for the open session.
  std::optional<ExclusionReason> send_reader(TagId id, const TagResponse& resp);
  // Closes the batch, verifies at the server, applies the reply. Nothing
  // marked means no message at all.
  std::optional<Msg> finish();

  struct Recorded {
    ReaderHello hello;
    TagResponse response;
    std::optional<Msg> msg;
    bool genuine = false;
    std::uint32_t tag_ops = 0;
  };
  // One complete honest session with the tag.
  Recorded execute(TagId id);

  struct TimingSample {
    double tag_time_ms = 0.0;
    std::size_t response_bits = 0;
  };
  // Timing oracle: a success session (full honest round) or a failure session
  // (hello with a corrupted digest); reports the tag's simulated compute time.
  TimingSample tr(TagId id, bool success, const CostParams& params = {});

  World& world() { return world_; }

 private:
  World world_;
  std::set<TagId> corrupted_;
  TagId next_id_;
};

ExperimentReport run_forward_security(const ExperimentConfig& cfg);
// reveal_refresh lifts the transcript-withholding restriction (control run
// demonstrating that the restriction is what provides the security).
ExperimentReport run_backward_security(const ExperimentConfig& cfg,
                                       bool reveal_refresh = false);

enum class TrackingVariant { Exp1, Exp2 };
ExperimentReport run_tracking(TrackingVariant variant, const ExperimentConfig& cfg);

enum class CloningMode { Passive, Active };
enum class CloningStrategy { TranscriptReplayer, RandomForger, CrossCorrupt, WeakHashForger };
const char* to_string(CloningStrategy s);
ExperimentReport run_cloning(const ExperimentConfig& cfg, CloningMode mode,
                             CloningStrategy strategy);

ExperimentReport run_replay(const ExperimentConfig& cfg);
ExperimentReport run_timing(const ExperimentConfig& cfg);

struct DesyncReport {
  int desync_s = 0;
  int desync_t = 0;
  int resync_s = 0;
  int resync_t = 0;
  bool synchronizable = false;
  nlohmann::ordered_json to_json() const;
};
DesyncReport measure_desync(Scheme scheme, Word64 seed,
                            HashAlgo algo = HashAlgo::ReferencePrf);

}  // namespace tagchain
