#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcd/experiment.hpp"
#include "mcd/report.hpp"
#include "mcd/server.hpp"
#include "mcd/sim.hpp"
#include "mcd/trace.hpp"

namespace {

// Indexed-control listen cost per cycle for a config: what a client pays to
// hear the index on the widest channel. Used as the WithinFactor offset.
double index_cost_units(const mcd::SimConfig& cfg) {
  const auto ch_of = mcd::assign_channels(cfg.n_items, cfg.n_channels);
  std::vector<std::size_t> group_size(cfg.n_channels, 0);
  for (std::uint32_t ch : ch_of) ++group_size[ch];
  std::size_t widest = 0;
  for (std::size_t g : group_size) widest = std::max(widest, g);
  std::size_t per_cycle = widest;
  if (cfg.items_per_cycle > 0)
    per_cycle = std::min<std::size_t>(cfg.items_per_cycle, widest);
  return static_cast<double>(mcd::control_overhead(
      mcd::ProtocolId::Mcd, per_cycle, cfg.n_items, cfg.overhead_config()));
}

mcd::ProtocolId protocol_from_name(const std::string& s) {
  if (s == "mcd") return mcd::ProtocolId::Mcd;
  if (s == "fresh") return mcd::ProtocolId::Fresh;
  if (s == "nxn") return mcd::ProtocolId::NxN;
  if (s == "perfect") return mcd::ProtocolId::Perfect;
  throw mcd::ConfigError("protocols", "unknown protocol \"" + s + "\"");
}

void print_rows(const mcd::SweepOutput& out) {
  std::printf("%-8s %6s %12s %12s %12s %12s %8s %8s\n", "protocol", "seed",
              "value", "rt_mean", "pc_mean", "so/cycle", "commits", "reject");
  for (const mcd::SweepRow& r : out.rows)
    std::printf("%-8s %6llu %12.3f %12.3f %12.3f %12.3f %8llu %8llu\n",
                std::string(mcd::to_string(r.protocol)).c_str(),
                static_cast<unsigned long long>(r.seed), r.sweep_value,
                r.agg.rt_mean, r.agg.pc_mean, r.agg.so_per_cycle,
                static_cast<unsigned long long>(r.agg.commits),
                static_cast<unsigned long long>(r.agg.rejections));
}

int cmd_run(const std::string& config_path, std::uint64_t seed, bool seed_set,
            const std::string& out_dir) {
  mcd::SimConfig cfg = mcd::load_config_file(config_path);
  if (seed_set) cfg.seed = seed;
  mcd::ExperimentSpec spec;
  spec.name = "custom";
  spec.base = cfg;
  spec.protocols = {cfg.protocol};
  spec.seeds = {cfg.seed};
  const mcd::SweepOutput out = mcd::run_experiment(spec);
  mcd::write_outputs(out, out_dir);
  print_rows(out);
  std::printf("wrote %s\n", out_dir.c_str());
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& preset,
              const std::string& param, const std::vector<double>& values,
              const std::vector<std::uint64_t>& seeds,
              const std::vector<std::string>& protocols,
              const std::string& out_dir) {
  mcd::ExperimentSpec spec;
  if (!preset.empty()) {
    spec = mcd::make_preset(preset);
    if (!config_path.empty()) spec.base = mcd::load_config_file(config_path);
  } else {
    if (config_path.empty())
      throw mcd::ConfigError("sweep", "--config is required without --preset");
    if (param.empty() || values.empty())
      throw mcd::ConfigError("sweep",
                             "--param and --values are required without --preset");
    spec.name = "custom";
    spec.base = mcd::load_config_file(config_path);
    spec.sweep_param = param;
    spec.sweep_values = values;
    spec.protocols = {mcd::ProtocolId::Mcd, mcd::ProtocolId::Fresh,
                      mcd::ProtocolId::NxN, mcd::ProtocolId::Perfect};
    spec.seeds = {spec.base.seed};
  }
  if (!seeds.empty()) spec.seeds = seeds;
  if (!protocols.empty()) {
    spec.protocols.clear();
    for (const std::string& p : protocols)
      spec.protocols.push_back(protocol_from_name(p));
  }
  const mcd::SweepOutput out = mcd::run_experiment(spec);
  mcd::write_outputs(out, out_dir);
  print_rows(out);
  std::printf("wrote %s\n", out_dir.c_str());
  return 0;
}

int cmd_report(const std::string& in_dir, const std::string& assert_path) {
  namespace fs = std::filesystem;
  const std::vector<mcd::ReportRow> rows =
      mcd::load_summary_csv((fs::path(in_dir) / "summary.csv").string());

  std::vector<mcd::TrendAssertion> assertions;
  const fs::path manifest_path = fs::path(in_dir) / "manifest.json";
  std::string preset = "custom";
  if (fs::exists(manifest_path)) {
    std::ifstream f(manifest_path);
    nlohmann::json m;
    f >> m;
    preset = m.value("name", "custom");
    const auto names = mcd::preset_names();
    if (std::find(names.begin(), names.end(), preset) != names.end()) {
      const mcd::SimConfig base = mcd::parse_config(m.at("base"));
      assertions = mcd::builtin_suite(preset, index_cost_units(base));
    }
  }
  if (!assert_path.empty()) {
    const auto user = mcd::load_assertions(assert_path);
    assertions.insert(assertions.end(), user.begin(), user.end());
  }
  if (assertions.empty())
    throw mcd::ConfigError(
        "report", "no assertions: output is not a named preset and no --assert "
                  "file was given");

  const std::vector<mcd::AssertionResult> results =
      mcd::evaluate(assertions, rows);
  bool all_pass = true;
  for (const mcd::AssertionResult& r : results) {
    std::printf("%s %s: %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.c_str());
    all_pass = all_pass && r.pass;
  }
  std::printf("%zu/%zu assertions passed (%s)\n",
              static_cast<std::size_t>(
                  std::count_if(results.begin(), results.end(),
                                [](const auto& r) { return r.pass; })),
              results.size(), preset.c_str());
  return all_pass ? 0 : 1;
}

int cmd_trace(const std::string& config_path, std::uint64_t seed, bool seed_set,
              const std::string& out_path) {
  mcd::SimConfig cfg = mcd::load_config_file(config_path);
  if (seed_set) cfg.seed = seed;
  cfg.record_trace = true;
  const mcd::RunResult r = mcd::run(cfg);
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw mcd::SimError("cannot write " + out_path);
  mcd::write_jsonl(f, r.trace);
  std::printf("wrote %zu trace records to %s (final tick %llu)\n",
              r.trace.size(), out_path.c_str(),
              static_cast<unsigned long long>(r.final_tick));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-channel broadcast dissemination simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", out_file, in_dir, assert_path;
  std::string preset, param;
  std::vector<double> values;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> protocols;
  std::uint64_t seed = 0;

  CLI::App* c_run = app.add_subcommand("run", "run one configuration");
  c_run->add_option("--config", config_path, "config JSON file")->required();
  CLI::Option* run_seed = c_run->add_option("--seed", seed, "seed override");
  c_run->add_option("--out", out_dir, "output directory (default: out)");

  CLI::App* c_sweep = app.add_subcommand("sweep", "run a parameter sweep");
  c_sweep->add_option("--config", config_path, "base config JSON file");
  c_sweep->add_option("--preset", preset, "fig2|fig3|fig4|fig5");
  c_sweep->add_option("--param", param, "swept parameter name");
  c_sweep->add_option("--values", values, "swept values")->delimiter(',');
  c_sweep->add_option("--seeds", seeds, "seed list")->delimiter(',');
  c_sweep->add_option("--protocols", protocols, "protocol list")->delimiter(',');
  c_sweep->add_option("--out", out_dir, "output directory (default: out)");

  CLI::App* c_report = app.add_subcommand("report", "evaluate trend assertions");
  c_report->add_option("--in", in_dir, "sweep output directory")->required();
  c_report->add_option("--assert", assert_path, "extra assertions JSON file");

  CLI::App* c_trace = app.add_subcommand("trace", "dump the full event trace");
  c_trace->add_option("--config", config_path, "config JSON file")->required();
  CLI::Option* trace_seed = c_trace->add_option("--seed", seed, "seed override");
  c_trace->add_option("--out", out_file, "trace output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (c_run->parsed())
      return cmd_run(config_path, seed, run_seed->count() > 0, out_dir);
    if (c_sweep->parsed())
      return cmd_sweep(config_path, preset, param, values, seeds, protocols,
                       out_dir);
    if (c_report->parsed()) return cmd_report(in_dir, assert_path);
    if (c_trace->parsed())
      return cmd_trace(config_path, seed, trace_seed->count() > 0, out_file);
  } catch (const mcd::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
