#include "mcd/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "mcd/sim.hpp"

namespace mcd {

namespace {

SimConfig preset_base() {
  SimConfig cfg;
  cfg.n_items = 100;
  cfg.n_channels = 1;
  cfg.seed = 1;
  return cfg;
}

}  // namespace

ExperimentSpec make_preset(const std::string& name) {
  ExperimentSpec spec;
  spec.name = name;
  spec.protocols = {ProtocolId::Mcd, ProtocolId::Fresh, ProtocolId::NxN,
                    ProtocolId::Perfect};
  spec.base = preset_base();
  if (name == "fig2") {
    // Response time as the per-item decision check gets more expensive.
    spec.base.item_size = 8;
    spec.base.n_clients = 20;
    spec.base.rs_min = 1;
    spec.base.rs_max = 3;
    spec.base.update_rate = 0.05;
    spec.base.arrival_mode = ArrivalMode::PerCycle;
    spec.base.horizon_cycles = 30;
    spec.seeds = {1, 2, 3};
    spec.sweep_param = "check_cost";
    spec.sweep_values = {0, 0.5, 1, 2, 4};
  } else if (name == "fig3" || name == "fig4") {
    // Power (fig3) and control overhead (fig4) as items get bigger.
    spec.base.n_clients = 20;
    spec.base.rs_min = 2;
    spec.base.rs_max = 4;
    spec.base.update_rate = 0.2;
    spec.base.arrival_mode = ArrivalMode::PerCycle;
    spec.base.horizon_cycles = 30;
    spec.seeds = {1, 2, 3};
    spec.sweep_param = "item_size";
    spec.sweep_values = {16, 64, 256, 1024};
  } else if (name == "fig5") {
    // Power by the position of a singleton read set in the cycle.
    spec.base.item_size = 64;
    spec.base.n_clients = 10;
    spec.base.update_rate = 0;
    spec.base.arrival_mode = ArrivalMode::StartOnce;
    spec.base.horizon_cycles = 3;
    spec.seeds = {1, 2};
    spec.sweep_param = "fixed_rs_item";
    spec.sweep_values = {0, 9, 24, 49, 99};
  } else {
    throw ConfigError("preset", "unknown preset \"" + name +
                                    "\" (expected fig2|fig3|fig4|fig5)");
  }
  return spec;
}

std::vector<std::string> preset_names() { return {"fig2", "fig3", "fig4", "fig5"}; }

void apply_sweep_param(SimConfig& cfg, const std::string& param, double value) {
  const auto as_u32 = [&]() -> std::uint32_t {
    if (value < 0 || value != std::floor(value))
      throw ConfigError(param, "expects a non-negative integer value");
    return static_cast<std::uint32_t>(value);
  };
  if (param == "item_size") {
    cfg.item_size = as_u32();
    cfg.item_sizes.clear();
  } else if (param == "check_cost") {
    if (value < 0) throw ConfigError(param, "must be non-negative");
    cfg.check_cost = value;
  } else if (param == "update_rate") {
    cfg.update_rate = value;
  } else if (param == "write_prob") {
    cfg.write_prob = value;
  } else if (param == "n_items") {
    cfg.n_items = as_u32();
  } else if (param == "n_clients") {
    cfg.n_clients = as_u32();
  } else if (param == "items_per_cycle") {
    cfg.items_per_cycle = as_u32();
  } else if (param == "rs_min") {
    cfg.rs_min = as_u32();
  } else if (param == "rs_max") {
    cfg.rs_max = as_u32();
  } else if (param == "backchannel_latency") {
    cfg.backchannel_latency = as_u32();
  } else if (param == "fixed_rs_item") {
    cfg.fixed_rs = {as_u32()};
  } else {
    throw ConfigError(param, "unknown sweep parameter");
  }
}

SweepOutput run_experiment(const ExperimentSpec& spec) {
  SweepOutput out;
  out.spec = spec;
  std::vector<double> values = spec.sweep_values;
  if (spec.sweep_param.empty() || values.empty()) values = {0};

  for (double v : values) {
    for (ProtocolId p : spec.protocols) {
      for (std::uint64_t seed : spec.seeds) {
        SimConfig cfg = spec.base;
        cfg.protocol = p;
        cfg.seed = seed;
        if (!spec.sweep_param.empty()) apply_sweep_param(cfg, spec.sweep_param, v);
        const RunResult r = run(cfg);
        check_accounting(r);
        out.rows.push_back({p, seed, v, aggregate(r)});
        char tag[96];
        std::snprintf(tag, sizeof tag, "%s,%llu,%.6f",
                      std::string(to_string(p)).c_str(),
                      static_cast<unsigned long long>(seed), v);
        for (const MtSample& s : r.mts) {
          out.samples.push_back(s);
          out.sample_tags.emplace_back(tag);
        }
      }
    }
  }
  return out;
}

namespace {

std::string fmt(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

void append_agg(std::string& line, const Aggregate& a) {
  line += fmt(a.rt_mean) + "," + fmt(a.rt_p95) + "," + fmt(a.pc_mean) + "," +
          fmt(a.pc_listen) + "," + fmt(a.pc_check) + "," + fmt(a.pc_tx) + "," +
          fmt(a.so_per_cycle) + "," + fmt(a.so_control) + "," + fmt(a.so_retx) + "," +
          fmt(a.payload_per_cycle) + "," + fmt(a.cycle_len_mean) + "," +
          std::to_string(a.commits) + "," + std::to_string(a.rejections) + "," +
          std::to_string(a.rereads) + "," + std::to_string(a.restarts) + "," +
          std::to_string(a.n_samples) + "," + std::to_string(a.incomplete);
}

}  // namespace

std::vector<std::string> summary_columns() {
  return {"protocol",     "seed",       "sweep_param", "sweep_value",
          "rt_mean",      "rt_p95",     "pc_mean",     "pc_listen",
          "pc_check",     "pc_tx",      "so_per_cycle", "so_control",
          "so_retx",      "payload_per_cycle", "cycle_len_mean", "commits",
          "rejections",   "rereads",    "restarts",    "n_samples",
          "incomplete"};
}

void write_outputs(const SweepOutput& out, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string param =
      out.spec.sweep_param.empty() ? "none" : out.spec.sweep_param;

  {
    std::ofstream f(fs::path(out_dir) / "summary.csv", std::ios::binary);
    if (!f) throw SimError("cannot write summary.csv in " + out_dir);
    std::string header;
    for (const std::string& c : summary_columns()) {
      if (!header.empty()) header += ',';
      header += c;
    }
    f << header << '\n';
    for (const SweepRow& r : out.rows) {
      std::string line = std::string(to_string(r.protocol)) + "," +
                         std::to_string(r.seed) + "," + param + "," +
                         fmt(r.sweep_value) + ",";
      append_agg(line, r.agg);
      f << line << '\n';
    }
  }

  {
    std::ofstream f(fs::path(out_dir) / "samples.csv", std::ios::binary);
    if (!f) throw SimError("cannot write samples.csv in " + out_dir);
    f << "protocol,seed,sweep_value,client,txn,write,completed,created,committed,"
         "rt,pc_listen,pc_check,pc_tx,pc_total,rereads,restarts,validations,"
         "rejections\n";
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
      const MtSample& s = out.samples[i];
      f << out.sample_tags[i] << ',' << s.client << ',' << s.txn << ','
        << (s.write ? 1 : 0) << ',' << (s.completed ? 1 : 0) << ',' << s.created
        << ',' << s.committed << ',' << fmt(s.rt) << ',' << fmt(s.pc_listen) << ','
        << fmt(s.pc_check) << ',' << fmt(s.pc_tx) << ',' << fmt(s.pc_total) << ','
        << s.rereads << ',' << s.restarts << ',' << s.validations << ','
        << s.rejections << '\n';
    }
  }

  // Seed-averaged series per protocol, one file per headline metric.
  const std::vector<std::pair<std::string, double Aggregate::*>> plot_cols = {
      {"rt_mean", &Aggregate::rt_mean},
      {"rt_p95", &Aggregate::rt_p95},
      {"pc_mean", &Aggregate::pc_mean},
      {"so_per_cycle", &Aggregate::so_per_cycle},
  };
  for (const auto& [col, member] : plot_cols) {
    std::ofstream f(fs::path(out_dir) / ("plot_" + col + ".dat"), std::ios::binary);
    if (!f) throw SimError("cannot write plot file in " + out_dir);
    f << "# " << param;
    for (ProtocolId p : out.spec.protocols) f << ' ' << to_string(p);
    f << '\n';
    std::set<double> values;
    for (const SweepRow& r : out.rows) values.insert(r.sweep_value);
    for (double v : values) {
      f << fmt(v);
      for (ProtocolId p : out.spec.protocols) {
        double sum = 0;
        std::uint64_t n = 0;
        for (const SweepRow& r : out.rows)
          if (r.protocol == p && r.sweep_value == v) {
            sum += r.agg.*member;
            ++n;
          }
        f << ' ' << fmt(n ? sum / static_cast<double>(n) : 0.0);
      }
      f << '\n';
    }
  }

  {
    nlohmann::json m;
    m["name"] = out.spec.name;
    m["sweep_param"] = param;
    m["sweep_values"] = out.spec.sweep_values;
    m["seeds"] = out.spec.seeds;
    std::vector<std::string> protos;
    for (ProtocolId p : out.spec.protocols) protos.emplace_back(to_string(p));
    m["protocols"] = protos;
    m["base"] = config_to_json(out.spec.base);
    m["columns"] = summary_columns();
    std::ofstream f(fs::path(out_dir) / "manifest.json", std::ios::binary);
    if (!f) throw SimError("cannot write manifest.json in " + out_dir);
    f << m.dump(2) << '\n';
  }
}

}  // namespace mcd
