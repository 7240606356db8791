#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "mcd/experiment.hpp"
#include "mcd/metrics.hpp"
#include "mcd/report.hpp"
#include "mcd/sim.hpp"
#include "mcd/trace.hpp"

using namespace mcd;

namespace {

SimConfig small_cfg(ProtocolId p, std::uint64_t seed) {
  SimConfig cfg;
  cfg.protocol = p;
  cfg.n_items = 8;
  cfg.item_size = 4;
  cfg.n_clients = 4;
  cfg.rs_min = 1;
  cfg.rs_max = 3;
  cfg.write_prob = p == ProtocolId::Fresh ? 0.0 : 0.3;
  cfg.update_rate = 0.3;
  cfg.arrival_mode = ArrivalMode::PerCycle;
  cfg.horizon_cycles = 20;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("identical configs replay to identical traces and samples") {
  for (auto p : {ProtocolId::Mcd, ProtocolId::Fresh, ProtocolId::NxN, ProtocolId::Perfect}) {
    SimConfig cfg = small_cfg(p, 11);
    cfg.record_trace = true;
    RunResult a = run(cfg);
    RunResult b = run(cfg);
    CHECK(to_jsonl(a.trace) == to_jsonl(b.trace));
    CHECK(a.final_tick == b.final_tick);
    REQUIRE(a.mts.size() == b.mts.size());
    for (std::size_t i = 0; i < a.mts.size(); ++i) {
      CHECK(a.mts[i].rt == b.mts[i].rt);
      CHECK(a.mts[i].pc_total == b.mts[i].pc_total);
    }
  }
}

TEST_CASE("a quiet database never rejects anybody") {
  for (auto p : {ProtocolId::Mcd, ProtocolId::Fresh, ProtocolId::NxN, ProtocolId::Perfect}) {
    SimConfig cfg = small_cfg(p, 3);
    cfg.update_rate = 0.0;
    cfg.write_prob = 0.0;
    RunResult r = run(cfg);
    Aggregate agg = aggregate(r);
    CHECK(agg.rejections == 0);
    CHECK(agg.rereads == 0);
    CHECK(agg.restarts == 0);
    CHECK(agg.commits > 0);
    check_accounting(r);
    CHECK(serializability_oracle(r).pass);
  }
}

TEST_CASE("runs satisfy accounting and serializability on several seeds") {
  for (auto p : {ProtocolId::Mcd, ProtocolId::Fresh, ProtocolId::NxN, ProtocolId::Perfect}) {
    for (std::uint64_t seed : {1, 2, 3}) {
      RunResult r = run(small_cfg(p, seed));
      check_accounting(r);
      OracleVerdict v = serializability_oracle(r);
      INFO("protocol ", to_string(p), " seed ", seed);
      CHECK(v.pass);
    }
  }
}

TEST_CASE("the oracle rejects a doctored commit") {
  RunResult r = run(small_cfg(ProtocolId::Mcd, 5));
  REQUIRE_FALSE(r.commits.empty());
  REQUIRE(serializability_oracle(r).pass);

  RunResult bad = r;
  auto& obs = bad.commits.front().observed;
  REQUIRE_FALSE(obs.empty());
  obs.begin()->second.value = 10'000'000;  // beyond any history
  OracleVerdict v = serializability_oracle(bad);
  CHECK_FALSE(v.pass);
  REQUIRE_FALSE(v.counterexamples.empty());
  CHECK(v.counterexamples[0].txn == bad.commits.front().txn);
}

TEST_CASE("the oracle rejects a forged write version") {
  RunResult r = run(small_cfg(ProtocolId::Mcd, 7));
  std::size_t k = r.commits.size();
  for (std::size_t i = 0; i < r.commits.size(); ++i)
    if (!r.commits[i].writes.empty()) {
      k = i;
      break;
    }
  REQUIRE(k < r.commits.size());  // wp 0.3 produces writers on this seed

  RunResult bad = r;
  bad.commits[k].writes.begin()->second += 1;
  CHECK_FALSE(serializability_oracle(bad).pass);
}

TEST_CASE("perfect pays exactly the read-set payload and zero overhead") {
  SimConfig cfg;
  cfg.protocol = ProtocolId::Perfect;
  cfg.n_items = 10;
  cfg.item_size = 7;
  cfg.n_clients = 5;
  cfg.fixed_rs = {3};
  cfg.arrival_mode = ArrivalMode::StartOnce;
  cfg.horizon_cycles = 3;
  cfg.seed = 2;
  RunResult r = run(cfg);
  REQUIRE(r.mts.size() == 5);
  for (const MtSample& s : r.mts) {
    CHECK(s.completed);
    CHECK(s.pc_total == doctest::Approx(7.0));
    CHECK(s.pc_check == doctest::Approx(0.0));
  }
  for (const CycleSample& c : r.cycles) {
    CHECK(c.control_units == 0);
    CHECK(c.retx_units == 0);
  }
}

TEST_CASE("per-cycle busy ticks decompose into control, payload, and retx") {
  for (auto p : {ProtocolId::Mcd, ProtocolId::Fresh, ProtocolId::NxN}) {
    RunResult r = run(small_cfg(p, 13));
    for (const CycleSample& c : r.cycles) {
      if (!c.complete) continue;
      CHECK(c.end - c.start == c.control_units + c.payload_units + c.retx_units);
    }
  }
}

TEST_CASE("two channels split the catalog and still serialize") {
  SimConfig cfg = small_cfg(ProtocolId::Mcd, 17);
  cfg.n_items = 9;
  cfg.n_channels = 2;
  cfg.rs_min = 2;
  cfg.rs_max = 4;  // read sets regularly straddle both channels
  RunResult r = run(cfg);
  check_accounting(r);
  CHECK(serializability_oracle(r).pass);

  std::set<std::uint32_t> channels;
  for (const CycleSample& c : r.cycles) channels.insert(c.channel);
  CHECK(channels == std::set<std::uint32_t>{0, 1});

  // Multi-channel read-only observations cannot commit locally.
  std::uint64_t validations = 0;
  for (const MtSample& s : r.mts) validations += s.validations;
  CHECK(validations > 0);
}

TEST_CASE("a single-tuner client still completes and serializes") {
  SimConfig cfg = small_cfg(ProtocolId::Mcd, 19);
  cfg.n_items = 9;
  cfg.n_channels = 3;
  cfg.rs_min = 2;
  cfg.rs_max = 3;
  cfg.single_tuner = true;
  RunResult r = run(cfg);
  check_accounting(r);
  CHECK(serializability_oracle(r).pass);
  Aggregate agg = aggregate(r);
  CHECK(agg.commits > 0);
}

TEST_CASE("poisson arrivals produce work and stay deterministic") {
  SimConfig cfg = small_cfg(ProtocolId::Mcd, 23);
  cfg.arrival_mode = ArrivalMode::Poisson;
  cfg.poisson_rate = 1.5;
  RunResult a = run(cfg);
  RunResult b = run(cfg);
  CHECK(aggregate(a).commits == aggregate(b).commits);
  CHECK(aggregate(a).commits > 0);
  CHECK(serializability_oracle(a).pass);
}

TEST_CASE("fresh restarts on mid-read updates and charges decision checks") {
  SimConfig cfg = small_cfg(ProtocolId::Fresh, 29);
  cfg.update_rate = 0.5;
  cfg.rs_min = 2;
  cfg.rs_max = 3;
  RunResult r = run(cfg);
  Aggregate agg = aggregate(r);
  CHECK(agg.restarts > 0);
  CHECK(agg.pc_check > 0);
  CHECK(serializability_oracle(r).pass);

  // The decision cost enters fresh response time but never event timing.
  SimConfig pricier = cfg;
  pricier.check_cost = 2.0;
  Aggregate agg2 = aggregate(run(pricier));
  CHECK(agg2.rt_mean > agg.rt_mean);
  CHECK(agg2.commits == agg.commits);
}

TEST_CASE("indexed rejections trigger partial rereads, nxn triggers restarts") {
  std::uint64_t mcd_rereads = 0, mcd_restarts = 0, nxn_restarts = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Aggregate m = aggregate(run(small_cfg(ProtocolId::Mcd, seed)));
    mcd_rereads += m.rereads;
    mcd_restarts += m.restarts;
    nxn_restarts += aggregate(run(small_cfg(ProtocolId::NxN, seed))).restarts;
  }
  CHECK(mcd_rereads > 0);
  CHECK(mcd_restarts == 0);
  CHECK(nxn_restarts > 0);
}

TEST_CASE("nearest-rank percentile") {
  std::vector<double> xs{5, 1, 3, 2, 4};
  CHECK(percentile(xs, 50) == 3);
  CHECK(percentile(xs, 100) == 5);
  CHECK(percentile(xs, 1) == 1);
  CHECK(percentile(xs, 95) == 5);
  CHECK_THROWS_AS(percentile(xs, 0), SimError);
  CHECK(percentile({}, 50) == 0);  // no completed samples
}

TEST_CASE("sweeps enumerate protocol x seed x value and round-trip through CSV") {
  ExperimentSpec spec;
  spec.name = "custom";
  spec.base = small_cfg(ProtocolId::Mcd, 1);
  spec.base.write_prob = 0;  // keep the base valid for fresh too
  spec.protocols = {ProtocolId::Mcd, ProtocolId::Perfect};
  spec.seeds = {1, 2, 3};
  spec.sweep_param = "item_size";
  spec.sweep_values = {4, 8};
  SweepOutput out = run_experiment(spec);
  CHECK(out.rows.size() == 12);  // 2 values * 2 protocols * 3 seeds
  CHECK(out.samples.size() == out.sample_tags.size());

  namespace fs = std::filesystem;
  const std::string dir = (fs::temp_directory_path() / "sweep_roundtrip").string();
  fs::remove_all(dir);
  write_outputs(out, dir);

  auto rows = load_summary_csv(dir + "/summary.csv");
  REQUIRE(rows.size() == 12);
  CHECK(rows[0].cols.count("rt_mean") == 1);
  CHECK(rows[0].cols.count("so_per_cycle") == 1);

  std::set<std::string> protos;
  std::set<double> values;
  for (const auto& r : rows) {
    protos.insert(r.protocol);
    values.insert(r.sweep_value);
  }
  CHECK(protos == std::set<std::string>{"mcd", "perfect"});
  CHECK(values == std::set<double>{4, 8});

  CHECK(fs::exists(dir + "/samples.csv"));
  CHECK(fs::exists(dir + "/plot_pc_mean.dat"));
  CHECK(fs::exists(dir + "/manifest.json"));
}

TEST_CASE("unknown sweep parameters are rejected by name") {
  SimConfig cfg = small_cfg(ProtocolId::Mcd, 1);
  CHECK_THROWS_AS(apply_sweep_param(cfg, "warp_factor", 9), ConfigError);
  apply_sweep_param(cfg, "fixed_rs_item", 5);
  CHECK(cfg.fixed_rs == std::vector<ItemId>{5});
}

TEST_CASE("trend assertions check direction, flatness, dominance, and fit") {
  std::vector<ReportRow> rows;
  for (std::uint64_t seed : {1, 2}) {
    for (double v : {1.0, 2.0, 3.0}) {
      ReportRow up{"mcd", seed, v, {{"m", 10 * v + (seed == 1 ? -0.5 : 0.5)}}};
      rows.push_back(up);
      ReportRow flat{"perfect", seed, v, {{"m", 5.0}}};
      rows.push_back(flat);
    }
  }
  using K = TrendAssertion::Kind;
  auto res = evaluate(
      {
          {K::Increasing, "up", "m", "", "mcd", "", 0, 0, 0, 0},
          {K::Constant, "flat", "m", "", "perfect", "", 0.01, 0, 0, 0},
          {K::Constant, "not-flat", "m", "", "mcd", "", 0.01, 0, 0, 0},
          {K::Dominates, "above", "m", "", "mcd", "perfect", 0, 0, 0, 0},
          {K::LinearFit, "line", "m", "", "mcd", "", 0, 0, 0, 0.999},
          {K::WithinFactor, "bounded", "m", "", "perfect", "mcd", 0, 1.0, 0, 0},
          {K::WithinFactor, "too-tight", "m", "", "perfect", "mcd", 0, 0.4, 0, 0},
          {K::Increasing, "missing", "m", "", "fresh", "", 0, 0, 0, 0},
      },
      rows);
  REQUIRE(res.size() == 8);
  CHECK(res[0].pass);        // strictly increasing seed-average
  CHECK(res[1].pass);        // constant series
  CHECK_FALSE(res[2].pass);  // rising series is not constant
  CHECK(res[3].pass);        // 10v vs 5
  CHECK(res[4].pass);        // exact line after seed averaging
  CHECK(res[5].pass);        // 5 <= 1.0 * 10v everywhere
  CHECK_FALSE(res[6].pass);  // 5 > 0.4 * 10 at v=1
  CHECK_FALSE(res[7].pass);  // no such protocol in the data
  CHECK(res[7].detail.find("fresh") != std::string::npos);
}
