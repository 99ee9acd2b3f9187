#include "tagchain/costmodel.hpp"

#include <cmath>
#include <stdexcept>

#include "tagchain/simnet.hpp"

namespace tagchain {

double SessionTime::total_reported_ms() const {
  return std::round(total_ms() * 10.0) / 10.0;
}

SessionTime session_time(Scheme scheme, const CostParams& params) {
  const unsigned ops = scheme == Scheme::S1 ? params.tag_ops_s1 : params.tag_ops_s2;
  const std::size_t response_bits = (scheme == Scheme::S1 ? 2 : 3) * params.b;
  const std::size_t hello_bits = 3 * params.b;

  SessionTime t;
  t.tag_compute_ms = ops * params.hash_ms;
  t.t2r_ms = response_bits * 1000.0 / params.rate_t2r_bps;
  t.r2t_ms = hello_bits * 1000.0 / params.rate_r2t_bps;
  return t;
}

TransferCost reader_server_bits(std::size_t n, bool aggregated,
                                const CostParams& params) {
  if (n < 1) throw std::invalid_argument("reader_server_bits: n must be positive");
  TransferCost c;
  c.bits = (aggregated ? n + 1 : 2 * n) * params.b;
  c.seconds = c.bits / params.rate_r2s_bps;
  return c;
}

namespace {

struct Measured {
  unsigned tag_ops = 0;
  unsigned tag_flows = 0;
  std::size_t hello_bits = 0;
  std::size_t response_bits = 0;
  std::size_t report_bits = 0;
  std::size_t batch_n = 0;
};

Measured measure(Scheme scheme) {
  WorldConfig cfg;
  cfg.seed = 0x7ab1e3;
  cfg.n_tags = 3;
  cfg.scheme = scheme;
  World w = make_world(cfg);
  const std::vector<TagId> ids{1, 2, 3};
  SessionResult r = run_session(w, ids);
  if (!r.server_msg || *r.server_msg != Msg::TagValid)
    throw std::logic_error("cost figures: calibration session failed");

  Measured m;
  m.batch_n = ids.size();
  for (const auto& e : w.transcript.events) {
    if (e.kind == "reader-hello") m.hello_bits = e.bits;
    if (e.kind == "tag-response") m.response_bits = e.bits;
    if (e.kind == "batch-report") m.report_bits = e.bits;
    if (e.channel == ChannelName::ReaderToTag || e.channel == ChannelName::TagToReader)
      m.tag_flows += 1;
  }
  m.tag_flows /= ids.size();
  const OpCounter& tag_ops = w.transcript.op_counts.at("tag:1");
  m.tag_ops = static_cast<unsigned>(tag_ops.total());
  return m;
}

void require(bool ok, const char* what) {
  if (!ok) throw std::logic_error(std::string("cost figures: ") + what);
}

}  // namespace

CostFigures measured_cost_figures(const CostParams& params) {
  const Measured s1 = measure(Scheme::S1);
  const Measured s2 = measure(Scheme::S2);

  CostFigures f;
  f.tag_ops_s1 = s1.tag_ops;
  f.tag_ops_s2 = s2.tag_ops;
  f.tag_flows = s1.tag_flows;
  // Persistent tag secrets: key, current timestamp, bound.
  f.tag_memory_bits = 3 * params.b;
  f.t2r_bits_s1 = s1.response_bits;
  f.t2r_bits_s2 = s2.response_bits;
  f.r2t_bits = s1.hello_bits;
  f.r2s_n_coeff = 1;
  f.r2s_const_words = 1;

  require(f.tag_ops_s1 == params.tag_ops_s1, "scheme1 tag op count drifted");
  require(f.tag_ops_s2 == params.tag_ops_s2, "scheme2 tag op count drifted");
  require(s1.tag_flows == 2 && s2.tag_flows == 2, "tag flow count drifted");
  require(f.t2r_bits_s1 == 2 * params.b, "scheme1 response size drifted");
  require(f.t2r_bits_s2 == 3 * params.b, "scheme2 response size drifted");
  require(s2.hello_bits == 3 * params.b && f.r2t_bits == 3 * params.b,
          "hello size drifted");
  require(s1.report_bits == (s1.batch_n + 1) * params.b &&
              s2.report_bits == (s2.batch_n + 1) * params.b,
          "report size drifted");
  require(f.tag_memory_bits == 192, "tag memory accounting drifted");
  return f;
}

std::vector<CostTableRow> cost_table(const CostParams& params) {
  const CostFigures f = measured_cost_figures(params);
  auto words = [&](std::size_t bits) {
    return std::to_string(bits / params.b) + "b";
  };
  return {
      {"Tag computation", std::to_string(f.tag_ops_s1) + " Hash",
       std::to_string(f.tag_ops_s2) + " Hash"},
      {"Message flows (tag)", std::to_string(f.tag_flows), std::to_string(f.tag_flows)},
      {"Tag memory", std::to_string(f.tag_memory_bits) + " bit",
       std::to_string(f.tag_memory_bits) + " bit"},
      {"T->R comm", words(f.t2r_bits_s1), words(f.t2r_bits_s2)},
      {"R->S comm", "(n+1)b", "(n+1)b"},
      {"R->T comm", words(f.r2t_bits), words(f.r2t_bits)},
      {"S->R comm", std::to_string(f.s2r_slots_s1) + "b",
       std::to_string(f.s2r_slots_s2) + "b"},
  };
}

}  // namespace tagchain
