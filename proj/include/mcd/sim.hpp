#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "mcd/config.hpp"
#include "mcd/core.hpp"
#include "mcd/server.hpp"
#include "mcd/trace.hpp"

namespace mcd {

// Per-MT outcome sample.
struct MtSample {
  std::uint32_t client = 0;
  TxnId txn = 0;
  bool write = false;
  bool completed = false;
  Tick created = 0;
  Tick committed = 0;
  double rt = 0;         // ticks; fresh adds check_count * check_cost
  double pc_listen = 0;
  double pc_check = 0;
  double pc_tx = 0;
  double pc_total = 0;   // respects include_tx_in_pc
  std::uint64_t rereads = 0;
  std::uint64_t restarts = 0;
  std::uint64_t validations = 0;
  std::uint64_t rejections = 0;
};

// Per-cycle accounting on one channel. For fresh, a "cycle" is one cyclic pass
// and retx_units counts interrupt retransmissions (their id headers included).
struct CycleSample {
  std::uint32_t channel = 0;
  Cycle cycle = 0;
  Tick start = 0;
  Tick end = 0;  // busy ticks = end - start, every tick carries one unit
  std::uint64_t control_units = 0;
  std::uint64_t payload_units = 0;
  std::uint64_t retx_units = 0;
  std::uint64_t n_priority = 0;
  bool complete = true;  // false for a pass cut off by the horizon
};

// A state the serializability oracle may match committed read sets against:
// a frame build, a pass start, an interrupt service start, or (fresh) the
// database state published by an update's queued retransmission.
struct BoundaryMarker {
  Tick tick = 0;
  std::uint64_t seq = 0;
  std::uint32_t channel = 0;
  Cycle cycle = 0;
};

struct CommitRecord {
  TxnId txn = 0;
  std::uint32_t client = 0;
  bool write = false;
  bool local = false;
  Tick commit_tick = 0;
  std::uint64_t commit_seq = 0;
  std::map<ItemId, Observation> observed;
  std::map<ItemId, std::uint64_t> writes;
};

struct RunResult {
  SimConfig config;
  std::vector<MtSample> mts;
  std::vector<CycleSample> cycles;
  std::vector<BoundaryMarker> boundaries;
  std::vector<CommitRecord> commits;
  std::vector<std::vector<HistEntry>> history;  // per item id
  std::vector<TraceRecord> trace;               // populated when record_trace
  std::uint64_t final_tick = 0;
  std::uint64_t incomplete_mts = 0;
};

// Deterministic single-threaded discrete-event run. Identical config + seed
// gives an identical RunResult, byte for byte once serialized.
RunResult run(const SimConfig& cfg);

// --- serializability oracle ---
//
// Independent of the protocol code paths: replays the update history against
// the recorded boundary markers and brute-force searches, for every committed
// MT, one boundary snapshot matching all its observed values; committed writes
// must be exact +1 version bumps in history order.
struct CounterexampleMT {
  TxnId txn = 0;
  std::string detail;
};
struct OracleVerdict {
  bool pass = true;
  std::vector<CounterexampleMT> counterexamples;
};
OracleVerdict serializability_oracle(const RunResult& result);

}  // namespace mcd
