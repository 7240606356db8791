#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "mcd/core.hpp"
#include "mcd/rng.hpp"
#include "mcd/types.hpp"

namespace mcd {

// Energy prices, all in abstract power units.
struct EnergyCosts {
  double listen = 1.0;  // per awake tick
  double check = 0.1;   // per decision check
  double tx = 5.0;      // per backchannel message sent
  bool include_tx = true;
};

// Per-client accumulator. Components only ever grow; total is their sum
// (tx excluded from pc when include_tx is off, but still tracked).
struct EnergyMeter {
  double listen_units = 0;
  double check_units = 0;
  double tx_units = 0;

  double total(const EnergyCosts& costs) const {
    return listen_units + check_units + (costs.include_tx ? tx_units : 0.0);
  }
};

void charge_listen(EnergyMeter& m, Tick ticks, const EnergyCosts& costs);
void charge_checks(EnergyMeter& m, std::uint64_t n, const EnergyCosts& costs);
void charge_tx(EnergyMeter& m, const EnergyCosts& costs);

struct WorkloadConfig {
  std::uint32_t n_items = 0;
  std::uint32_t rs_min = 1;
  std::uint32_t rs_max = 2;
  double write_prob = 0.0;
  double zipf_theta = 0.0;            // 0 = uniform item popularity
  std::vector<ItemId> fixed_rs;       // overrides random selection when non-empty
};

// Draws a read set (and, with write_prob, a non-empty write subset) from the
// client's workload stream. Deterministic per stream state.
MobileTransaction generate_mt(Rng& rng, const ZipfSampler& zipf, const WorkloadConfig& cfg,
                              TxnId txn_id, Tick now);

// One wireless client. The engine owns scheduling; this is the per-client
// state the protocol steps act on.
struct WcState {
  std::uint32_t client_id = 0;
  std::optional<MobileTransaction> mt;
  EnergyMeter meter;

  // Indexed protocols: what is still unread this phase, and the freshest
  // per-item update stamp seen in any decoded control structure.
  std::set<ItemId> needed;
  std::map<ItemId, Cycle> stamp_view;

  // Fresh: continuous-listening bookkeeping.
  Tick awake_since = 0;
  std::uint64_t checks = 0;

  // Per-MT counters.
  std::uint64_t rereads = 0;
  std::uint64_t restarts = 0;
  std::uint64_t validations = 0;
  std::uint64_t rejections = 0;

  // Meter snapshot at MT start, for the per-MT power decomposition.
  EnergyMeter mt_baseline;
};

// Resets per-MT fields and installs a freshly generated transaction.
void begin_mt(WcState& wc, MobileTransaction mt);

// Records one observation (value + stamp + channel) and refreshes the
// write-set version the client intends to install.
void record_observation(MobileTransaction& mt, ItemId id, std::uint64_t value, Cycle stamp,
                        std::uint32_t channel);

}  // namespace mcd
