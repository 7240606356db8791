#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcd/client.hpp"
#include "mcd/protocol.hpp"
#include "mcd/types.hpp"

#include <json.hpp>

namespace mcd {

enum class ArrivalMode {
  StartOnce,  // every client starts one MT at tick 0
  PerCycle,   // every idle client starts an MT at each cycle start (channel 0 cadence)
  Poisson,    // per-client exponential inter-arrival, rate MTs per cycle length
};
ArrivalMode arrival_mode_from_name(std::string_view name);
std::string_view to_string(ArrivalMode m);

struct SimConfig {
  // required
  ProtocolId protocol = ProtocolId::Mcd;
  std::uint32_t n_items = 0;
  std::uint64_t seed = 0;

  // broadcast shape
  std::uint32_t item_size = 16;             // payload units per item
  std::vector<std::uint32_t> item_sizes;    // optional per-item override
  std::uint32_t n_channels = 1;
  std::uint32_t items_per_cycle = 0;        // 0 = every item of the group each cycle
  std::uint32_t header_units = 2;
  std::uint32_t entry_units = 2;
  std::uint32_t cell_bits = 1;
  std::uint32_t unit_bits = 32;

  // workload
  std::uint32_t n_clients = 4;
  double update_rate = 0.0;   // per-item per-cycle Bernoulli
  double write_prob = 0.0;
  std::uint32_t rs_min = 1;
  std::uint32_t rs_max = 2;
  double zipf_theta = 0.0;
  std::vector<ItemId> fixed_rs;
  ArrivalMode arrival_mode = ArrivalMode::StartOnce;
  double poisson_rate = 1.0;  // MTs per nominal cycle length, Poisson mode only

  // costs and latencies
  double p_listen = 1.0;
  double check_cost = 0.1;    // energy per decision check; also fresh's per-check RT penalty
  double p_tx = 5.0;
  bool include_tx_in_pc = true;
  Tick backchannel_latency = 10;
  Tick validation_ticks = 1;
  double lock_timeout_cycles = 2.0;  // of the nominal cycle length

  // run shape
  std::uint64_t horizon_cycles = 50;
  bool single_tuner = false;
  bool record_trace = false;

  FrameLayout frame_layout() const { return {header_units, entry_units}; }
  OverheadConfig overhead_config() const {
    return {header_units, entry_units, cell_bits, unit_bits};
  }
  EnergyCosts energy_costs() const { return {p_listen, check_cost, p_tx, include_tx_in_pc}; }
  std::uint32_t size_of(ItemId id) const {
    return item_sizes.empty() ? item_size : item_sizes[id];
  }
  // header + control + full-group payload on the widest channel; used for the
  // lock-wait timeout and Poisson arrival spacing.
  Tick nominal_cycle_ticks() const;
};

// Parses and validates; unknown keys are rejected by name. Fields not present
// take the defaults above.
SimConfig parse_config(const nlohmann::json& j);
SimConfig load_config_file(const std::string& path);

// Full round-trip echo, defaults included, for run manifests.
nlohmann::json config_to_json(const SimConfig& cfg);

void validate(const SimConfig& cfg);  // throws ConfigError

}  // namespace mcd
