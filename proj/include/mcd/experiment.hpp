#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcd/config.hpp"
#include "mcd/metrics.hpp"

#include <json.hpp>

namespace mcd {

// A sweep: base config x protocols x seeds x one swept parameter.
struct ExperimentSpec {
  std::string name;  // preset name or "custom"
  SimConfig base;
  std::vector<ProtocolId> protocols;
  std::vector<std::uint64_t> seeds;
  std::string sweep_param;             // empty = single point
  std::vector<double> sweep_values;
};

// Named presets for the response-time / power / overhead experiments:
//   fig2 - decision-check cost sweep, response time
//   fig3 - item size sweep, power consumption
//   fig4 - item size sweep, space overhead per cycle
//   fig5 - singleton read-set placement sweep, power by item position
ExperimentSpec make_preset(const std::string& name);  // throws ConfigError
std::vector<std::string> preset_names();

// Applies one swept parameter by name; throws ConfigError for unknown params.
// Supported: item_size, check_cost, update_rate, write_prob, n_items,
// n_clients, items_per_cycle, rs_min, rs_max, backchannel_latency,
// fixed_rs_item (replaces fixed_rs with one id).
void apply_sweep_param(SimConfig& cfg, const std::string& param, double value);

struct SweepRow {
  ProtocolId protocol;
  std::uint64_t seed = 0;
  double sweep_value = 0;
  Aggregate agg;
};

struct SweepOutput {
  ExperimentSpec spec;
  std::vector<SweepRow> rows;
  std::vector<MtSample> samples;               // raw per-MT samples, run-tagged
  std::vector<std::string> sample_tags;        // parallel to samples: "protocol,seed,value"
};

// Runs every (protocol, seed, value) point, checking accounting on each run.
SweepOutput run_experiment(const ExperimentSpec& spec);

// Writes summary.csv, samples.csv, plot_<col>.dat series files, and
// manifest.json (echoed config + column documentation) into out_dir.
void write_outputs(const SweepOutput& out, const std::string& out_dir);

// The summary.csv column order; report parsing depends on it.
std::vector<std::string> summary_columns();

}  // namespace mcd
