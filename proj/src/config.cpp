#include "mcd/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace mcd {

ArrivalMode arrival_mode_from_name(std::string_view name) {
  if (name == "start_once") return ArrivalMode::StartOnce;
  if (name == "per_cycle") return ArrivalMode::PerCycle;
  if (name == "poisson") return ArrivalMode::Poisson;
  throw ConfigError("arrival_mode", "unknown mode \"" + std::string(name) +
                                        "\" (expected start_once|per_cycle|poisson)");
}

std::string_view to_string(ArrivalMode m) {
  switch (m) {
    case ArrivalMode::StartOnce: return "start_once";
    case ArrivalMode::PerCycle: return "per_cycle";
    case ArrivalMode::Poisson: return "poisson";
  }
  return "?";
}

Tick SimConfig::nominal_cycle_ticks() const {
  // Widest channel: ids are assigned round-robin, channel 0 is never smaller.
  std::uint64_t payload = 0;
  std::uint64_t group_items = 0;
  for (ItemId id = 0; id < n_items; id += n_channels) {
    payload += size_of(id);
    ++group_items;
  }
  const std::uint64_t in_cycle =
      items_per_cycle == 0 ? group_items : std::min<std::uint64_t>(items_per_cycle, group_items);
  std::uint64_t control = control_overhead(protocol, in_cycle, n_items, overhead_config());
  if (protocol == ProtocolId::Fresh) {
    // pass = per-item id headers + payloads
    return group_items + payload;
  }
  // Approximation under subset dissemination (payload of a full group); exact
  // when every item rides every cycle, which is the default.
  if (items_per_cycle != 0 && in_cycle < group_items) {
    std::uint64_t avg_size = group_items == 0 ? 0 : payload / std::max<std::uint64_t>(1, group_items);
    payload = in_cycle * std::max<std::uint64_t>(1, avg_size);
  }
  return control + payload;
}

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "protocol",      "n_items",          "seed",
      "item_size",     "item_sizes",       "n_channels",
      "items_per_cycle", "header_units",   "entry_units",
      "cell_bits",     "unit_bits",        "n_clients",
      "update_rate",   "write_prob",       "rs_min",
      "rs_max",        "zipf_theta",       "fixed_rs",
      "arrival_mode",  "poisson_rate",     "p_listen",
      "check_cost",    "p_tx",             "include_tx_in_pc",
      "backchannel_latency", "validation_ticks", "lock_timeout_cycles",
      "horizon_cycles", "single_tuner",    "record_trace",
  };
  return keys;
}

template <typename T>
void get(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(key, "wrong type");
  }
}

}  // namespace

SimConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config", "top level must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known_keys().count(key)) throw ConfigError(key, "unknown configuration key");
  for (const char* req : {"protocol", "n_items", "seed"})
    if (!j.contains(req)) throw ConfigError(req, "required key missing");

  SimConfig cfg;
  std::string protocol_name;
  get(j, "protocol", protocol_name);
  cfg.protocol = protocol_from_name(protocol_name);
  get(j, "n_items", cfg.n_items);
  get(j, "seed", cfg.seed);
  get(j, "item_size", cfg.item_size);
  get(j, "item_sizes", cfg.item_sizes);
  get(j, "n_channels", cfg.n_channels);
  get(j, "items_per_cycle", cfg.items_per_cycle);
  get(j, "header_units", cfg.header_units);
  get(j, "entry_units", cfg.entry_units);
  get(j, "cell_bits", cfg.cell_bits);
  get(j, "unit_bits", cfg.unit_bits);
  get(j, "n_clients", cfg.n_clients);
  get(j, "update_rate", cfg.update_rate);
  get(j, "write_prob", cfg.write_prob);
  get(j, "rs_min", cfg.rs_min);
  get(j, "rs_max", cfg.rs_max);
  get(j, "zipf_theta", cfg.zipf_theta);
  get(j, "fixed_rs", cfg.fixed_rs);
  if (j.contains("arrival_mode")) {
    std::string mode;
    get(j, "arrival_mode", mode);
    cfg.arrival_mode = arrival_mode_from_name(mode);
  }
  get(j, "poisson_rate", cfg.poisson_rate);
  get(j, "p_listen", cfg.p_listen);
  get(j, "check_cost", cfg.check_cost);
  get(j, "p_tx", cfg.p_tx);
  get(j, "include_tx_in_pc", cfg.include_tx_in_pc);
  get(j, "backchannel_latency", cfg.backchannel_latency);
  get(j, "validation_ticks", cfg.validation_ticks);
  get(j, "lock_timeout_cycles", cfg.lock_timeout_cycles);
  get(j, "horizon_cycles", cfg.horizon_cycles);
  get(j, "single_tuner", cfg.single_tuner);
  get(j, "record_trace", cfg.record_trace);

  validate(cfg);
  return cfg;
}

SimConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

void validate(const SimConfig& cfg) {
  if (cfg.n_items == 0) throw ConfigError("n_items", "must be positive");
  if (!cfg.item_sizes.empty() && cfg.item_sizes.size() != cfg.n_items)
    throw ConfigError("item_sizes", "must list exactly n_items sizes");
  if (cfg.item_sizes.empty() && cfg.item_size == 0)
    throw ConfigError("item_size", "must be positive");
  for (std::uint32_t s : cfg.item_sizes)
    if (s == 0) throw ConfigError("item_sizes", "sizes must be positive");
  if (cfg.n_channels == 0) throw ConfigError("n_channels", "must be positive");
  if (cfg.n_channels > cfg.n_items)
    throw ConfigError("n_channels", "more channels than items");
  if (cfg.n_clients == 0) throw ConfigError("n_clients", "must be positive");
  if (cfg.update_rate < 0 || cfg.update_rate > 1)
    throw ConfigError("update_rate", "must be in [0, 1]");
  if (cfg.write_prob < 0 || cfg.write_prob > 1)
    throw ConfigError("write_prob", "must be in [0, 1]");
  if (cfg.rs_min == 0) throw ConfigError("rs_min", "must be positive");
  if (cfg.rs_max < cfg.rs_min) throw ConfigError("rs_max", "smaller than rs_min");
  if (cfg.rs_max > cfg.n_items) throw ConfigError("rs_max", "larger than n_items");
  if (cfg.zipf_theta < 0) throw ConfigError("zipf_theta", "must be non-negative");
  for (ItemId id : cfg.fixed_rs)
    if (id >= cfg.n_items) throw ConfigError("fixed_rs", "item id out of range");
  if (cfg.arrival_mode == ArrivalMode::Poisson && cfg.poisson_rate <= 0)
    throw ConfigError("poisson_rate", "must be positive in poisson mode");
  if (cfg.p_listen < 0) throw ConfigError("p_listen", "must be non-negative");
  if (cfg.check_cost < 0) throw ConfigError("check_cost", "must be non-negative");
  if (cfg.p_tx < 0) throw ConfigError("p_tx", "must be non-negative");
  if (cfg.header_units == 0) throw ConfigError("header_units", "must be positive");
  if (cfg.entry_units == 0) throw ConfigError("entry_units", "must be positive");
  if (cfg.cell_bits == 0) throw ConfigError("cell_bits", "must be positive");
  if (cfg.unit_bits == 0) throw ConfigError("unit_bits", "must be positive");
  if (cfg.validation_ticks == 0) throw ConfigError("validation_ticks", "must be positive");
  if (cfg.lock_timeout_cycles <= 0)
    throw ConfigError("lock_timeout_cycles", "must be positive");
  if (cfg.horizon_cycles == 0) throw ConfigError("horizon_cycles", "must be positive");
  if (cfg.protocol == ProtocolId::Fresh && cfg.write_prob > 0)
    throw ConfigError("write_prob", "fresh supports read-only users only");
  if (cfg.protocol == ProtocolId::Fresh && cfg.items_per_cycle != 0)
    throw ConfigError("items_per_cycle", "fresh broadcasts full cyclic passes");
}

nlohmann::json config_to_json(const SimConfig& cfg) {
  nlohmann::json j;
  j["protocol"] = std::string(to_string(cfg.protocol));
  j["n_items"] = cfg.n_items;
  j["seed"] = cfg.seed;
  j["item_size"] = cfg.item_size;
  j["item_sizes"] = cfg.item_sizes;
  j["n_channels"] = cfg.n_channels;
  j["items_per_cycle"] = cfg.items_per_cycle;
  j["header_units"] = cfg.header_units;
  j["entry_units"] = cfg.entry_units;
  j["cell_bits"] = cfg.cell_bits;
  j["unit_bits"] = cfg.unit_bits;
  j["n_clients"] = cfg.n_clients;
  j["update_rate"] = cfg.update_rate;
  j["write_prob"] = cfg.write_prob;
  j["rs_min"] = cfg.rs_min;
  j["rs_max"] = cfg.rs_max;
  j["zipf_theta"] = cfg.zipf_theta;
  j["fixed_rs"] = cfg.fixed_rs;
  j["arrival_mode"] = std::string(to_string(cfg.arrival_mode));
  j["poisson_rate"] = cfg.poisson_rate;
  j["p_listen"] = cfg.p_listen;
  j["check_cost"] = cfg.check_cost;
  j["p_tx"] = cfg.p_tx;
  j["include_tx_in_pc"] = cfg.include_tx_in_pc;
  j["backchannel_latency"] = cfg.backchannel_latency;
  j["validation_ticks"] = cfg.validation_ticks;
  j["lock_timeout_cycles"] = cfg.lock_timeout_cycles;
  j["horizon_cycles"] = cfg.horizon_cycles;
  j["single_tuner"] = cfg.single_tuner;
  j["record_trace"] = cfg.record_trace;
  return j;
}

}  // namespace mcd
