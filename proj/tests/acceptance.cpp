// Acceptance gate: nine end-to-end checks, one printed verdict line each.
// Everything here drives the public API the way the CLI does; tolerances are
// pinned in-line and in the built-in assertion suite.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mcd/experiment.hpp"
#include "mcd/metrics.hpp"
#include "mcd/report.hpp"
#include "mcd/rng.hpp"
#include "mcd/server.hpp"
#include "mcd/sim.hpp"
#include "mcd/trace.hpp"

using namespace mcd;

namespace {

void verdict(int n, bool ok, const char* label) {
  std::printf("criterion %d %s - %s\n", n, ok ? "PASS" : "FAIL", label);
}

// Runs a preset end to end (simulate -> CSV -> parse -> assert), the same
// path `sweep` + `report` take, and returns whether every assertion passed.
bool preset_assertions_pass(const std::string& preset, std::string& detail) {
  const ExperimentSpec spec = make_preset(preset);
  const SweepOutput out = run_experiment(spec);

  namespace fs = std::filesystem;
  const std::string dir = (fs::temp_directory_path() / ("accept_" + preset)).string();
  fs::remove_all(dir);
  write_outputs(out, dir);

  const auto rows = load_summary_csv(dir + "/summary.csv");
  const double index_cost = static_cast<double>(control_overhead(
      ProtocolId::Mcd, spec.base.n_items, spec.base.n_items,
      spec.base.overhead_config()));
  const auto results = evaluate(builtin_suite(preset, index_cost), rows);

  bool all = true;
  std::ostringstream os;
  for (const AssertionResult& r : results) {
    all = all && r.pass;
    os << (r.pass ? "  ok  " : "  FAIL") << ' ' << r.name << ": " << r.detail << '\n';
  }
  detail = os.str();
  return all;
}

// The randomized-sweep configuration the serializability and re-read
// criteria run on.
SimConfig oracle_cfg(ProtocolId p, std::uint64_t seed) {
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

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("1: response time vs decision-check cost") {
  std::string detail;
  const bool ok = preset_assertions_pass("fig2", detail);
  CHECK(ok);
  if (!ok) std::printf("%s", detail.c_str());
  verdict(1, ok, "fresh rt_mean strictly increasing over check-cost sweep; mcd/nxn/perfect flat within 1%");
}

TEST_CASE("2: power consumption vs item size") {
  std::string detail;
  const bool ok = preset_assertions_pass("fig3", detail);
  CHECK(ok);
  if (!ok) std::printf("%s", detail.c_str());
  verdict(2, ok, "pc_mean rises with item size for all protocols; mcd-perfect gap constant within 5%; fresh above mcd");
}

TEST_CASE("3: space overhead vs item size") {
  std::string detail;
  const bool ok = preset_assertions_pass("fig4", detail);
  CHECK(ok);
  if (!ok) std::printf("%s", detail.c_str());
  verdict(3, ok, "mcd so_per_cycle below nxn and below fresh retx overhead; nxn so fraction of cycle strictly decreasing");
}

TEST_CASE("4: power consumption vs read-item position") {
  std::string detail;
  const bool ok = preset_assertions_pass("fig5", detail);
  CHECK(ok);
  if (!ok) std::printf("%s", detail.c_str());
  verdict(4, ok, "fresh pc linear in item position (r2 >= 0.99); mcd <= 1.10 x perfect + index cost; nxn above mcd");
}

TEST_CASE("5: serializability oracle over 100 random seeds") {
  std::uint64_t counterexamples = 0, commits = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    for (auto p : {ProtocolId::Mcd, ProtocolId::Fresh, ProtocolId::NxN,
                   ProtocolId::Perfect}) {
      const RunResult r = run(oracle_cfg(p, seed));
      commits += r.commits.size();
      const OracleVerdict v = serializability_oracle(r);
      if (!v.pass) {
        counterexamples += v.counterexamples.size();
        for (const auto& c : v.counterexamples)
          MESSAGE("seed " << seed << " " << to_string(p) << " txn " << c.txn
                          << ": " << c.detail);
      }
    }
  }
  const bool ok = counterexamples == 0 && commits > 0;
  CHECK(counterexamples == 0);
  CHECK(commits > 0);
  verdict(5, ok, "every committed transaction matches a broadcast-boundary snapshot (400 runs, zero counterexamples)");
}

TEST_CASE("6: rejected transactions re-read exactly the stale items, pushed first") {
  struct Audit {
    std::set<ItemId> stale;
    std::uint64_t flagged_reads = 0;
    bool bad_item = false;
  };

  std::uint64_t audits_closed = 0, rejections_seen = 0;
  std::uint64_t mcd_restarts = 0, nxn_restarts = 0;
  bool reread_counts_ok = true, head_of_schedule_ok = true;

  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    SimConfig cfg = oracle_cfg(ProtocolId::Mcd, seed);
    cfg.record_trace = true;
    const RunResult r = run(cfg);
    const auto ch_of = assign_channels(cfg.n_items, cfg.n_channels);
    for (const MtSample& s : r.mts) mcd_restarts += s.restarts;

    std::map<std::uint32_t, Audit> open;  // client -> audit in progress
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
      const TraceRecord& rec = r.trace[i];
      switch (rec.kind) {
        case TraceKind::ValidateDone: {
          if (rec.flag || rec.items.empty()) break;
          // The server queues the reported stale items the moment it rejects,
          // so each must ride at the head of the next cycle built on its
          // channel (priority region = first `a` schedule entries).
          for (ItemId id : rec.items) {
            for (std::size_t j = i + 1; j < r.trace.size(); ++j) {
              const TraceRecord& c = r.trace[j];
              if (c.kind != TraceKind::CycleStart || c.channel != ch_of[id])
                continue;
              const auto head_end =
                  c.items.begin() + static_cast<std::ptrdiff_t>(c.a);
              if (std::find(c.items.begin(), head_end, id) == head_end)
                head_of_schedule_ok = false;
              break;  // only the first cycle after the rejection counts
            }
            // no later cycle start: the horizon ended the run first
          }
          break;
        }
        case TraceKind::Reread: {
          ++rejections_seen;
          Audit a;
          a.stale.insert(rec.items.begin(), rec.items.end());
          open[rec.client] = std::move(a);
          break;
        }
        case TraceKind::Read: {
          auto it = open.find(rec.client);
          if (it == open.end()) break;
          if (!rec.flag) break;
          ++it->second.flagged_reads;
          if (!it->second.stale.count(rec.item)) it->second.bad_item = true;
          break;
        }
        case TraceKind::ValidateSent: {
          auto it = open.find(rec.client);
          if (it == open.end()) break;
          if (it->second.flagged_reads != it->second.stale.size() ||
              it->second.bad_item)
            reread_counts_ok = false;
          ++audits_closed;
          open.erase(it);
          break;
        }
        default:
          break;
      }
    }
  }
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const RunResult r = run(oracle_cfg(ProtocolId::NxN, seed));
    for (const MtSample& s : r.mts) nxn_restarts += s.restarts;
  }

  const bool ok = rejections_seen > 0 && audits_closed > 0 && reread_counts_ok &&
                  head_of_schedule_ok && mcd_restarts == 0 && nxn_restarts > 0;
  CHECK(rejections_seen > 0);
  CHECK(audits_closed > 0);
  CHECK(reread_counts_ok);
  CHECK(head_of_schedule_ok);
  CHECK(mcd_restarts == 0);
  CHECK(nxn_restarts > 0);
  verdict(6, ok, "every rejection re-reads exactly the stale set, stale items lead the next cycle; zero full restarts (nxn restarts instead)");
}

TEST_CASE("7: lock safety and FIFO grants") {
  // The table checks compatibility invariants after every mutation and any
  // violation throws, so the 600 simulation runs above already sweep it on
  // every tick. Here: adversarial traffic against an independent FIFO replay.
  struct ModelReq {
    TxnId txn;
    std::set<ItemId> shared, exclusive;
  };
  std::vector<ModelReq> queue;
  std::map<TxnId, ModelReq> holders;
  auto compatible = [&](const ModelReq& r) {
    for (const auto& [t, h] : holders) {
      (void)t;
      for (ItemId x : r.exclusive)
        if (h.exclusive.count(x) || h.shared.count(x)) return false;
      for (ItemId s : r.shared)
        if (h.exclusive.count(s)) return false;
    }
    return true;
  };
  auto drain = [&]() {
    std::vector<TxnId> granted;
    while (!queue.empty() && compatible(queue.front())) {
      granted.push_back(queue.front().txn);
      holders[queue.front().txn] = queue.front();
      queue.erase(queue.begin());
    }
    return granted;
  };

  bool ok = true;
  for (std::uint64_t seed = 101; seed <= 104; ++seed) {
    Rng rng(seed, 78, 0);
    LockTable lt;
    queue.clear();
    holders.clear();
    std::vector<TxnId> active;
    TxnId next_txn = 1;
    for (int op = 0; op < 500 && ok; ++op) {
      if (rng.below(3) == 0 || active.empty()) {
        ModelReq r;
        r.txn = next_txn++;
        for (std::uint64_t k = rng.range(1, 3); k > 0; --k) {
          const ItemId id = static_cast<ItemId>(rng.below(5));
          if (rng.bernoulli(0.5)) {
            r.shared.erase(id);
            r.exclusive.insert(id);
          } else if (!r.exclusive.count(id)) {
            r.shared.insert(id);
          }
        }
        if (r.shared.empty() && r.exclusive.empty()) r.shared.insert(0);
        const bool model_granted = [&] {
          if (queue.empty() && compatible(r)) {
            holders[r.txn] = r;
            return true;
          }
          queue.push_back(r);
          return false;
        }();
        const auto got =
            lt.acquire(r.txn, {r.shared.begin(), r.shared.end()},
                       {r.exclusive.begin(), r.exclusive.end()}, op);
        ok = ok && (got == LockTable::Acquire::Granted) == model_granted;
        active.push_back(r.txn);
      } else {
        const std::size_t pick = rng.below(active.size());
        const TxnId victim = active[pick];
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(pick));
        std::vector<TxnId> want, got;
        if (lt.holds(victim)) {
          holders.erase(victim);
          want = drain();
          got = lt.release(victim);
        } else {
          for (auto it = queue.begin(); it != queue.end(); ++it)
            if (it->txn == victim) {
              queue.erase(it);
              break;
            }
          want = drain();
          got = lt.cancel(victim);
        }
        ok = ok && want == got;
      }
      lt.check_invariants();
      ok = ok && lt.queue_depth() == queue.size();
    }
  }
  CHECK(ok);
  verdict(7, ok, "no conflicting lock grants on any tick; grant order matches the FIFO queue-replay model");
}

TEST_CASE("8: byte-identical reruns") {
  namespace fs = std::filesystem;
  const ExperimentSpec spec = make_preset("fig5");
  const std::string d1 = (fs::temp_directory_path() / "accept_det1").string();
  const std::string d2 = (fs::temp_directory_path() / "accept_det2").string();
  fs::remove_all(d1);
  fs::remove_all(d2);
  write_outputs(run_experiment(spec), d1);
  write_outputs(run_experiment(spec), d2);

  bool ok = true;
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(d1)) {
    ++files;
    const std::string name = entry.path().filename().string();
    if (slurp(entry.path().string()) != slurp((fs::path(d2) / name).string()))
      ok = false;
  }
  ok = ok && files >= 4;  // summary, samples, plots, manifest

  SimConfig cfg = oracle_cfg(ProtocolId::Mcd, 42);
  cfg.record_trace = true;
  ok = ok && to_jsonl(run(cfg).trace) == to_jsonl(run(cfg).trace);

  CHECK(ok);
  verdict(8, ok, "identical config and seed give byte-identical CSV, plot, manifest, and trace output");
}

TEST_CASE("9: accounting identities") {
  bool busy_ok = true, pc_ok = true;
  for (std::uint64_t seed : {1, 2, 3}) {
    for (auto p : {ProtocolId::Mcd, ProtocolId::Fresh, ProtocolId::NxN,
                   ProtocolId::Perfect}) {
      SimConfig cfg = oracle_cfg(p, seed);
      const RunResult r = run(cfg);
      check_accounting(r);  // throws on any violation
      for (const CycleSample& c : r.cycles)
        if (c.complete &&
            c.end - c.start != c.control_units + c.payload_units + c.retx_units)
          busy_ok = false;
      for (const MtSample& s : r.mts) {
        const double parts = s.pc_listen + s.pc_check + s.pc_tx;
        if (std::abs(parts - s.pc_total) > 1e-9 * std::max(1.0, parts))
          pc_ok = false;
      }
    }
  }

  // Zero-overhead baseline: nothing on air beyond payload, and a read-only
  // client pays exactly its read-set payload.
  bool perfect_ok = true;
  std::uint64_t checked_mts = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    SimConfig cfg = oracle_cfg(ProtocolId::Perfect, seed);
    cfg.write_prob = 0.0;
    cfg.record_trace = true;
    const RunResult r = run(cfg);
    std::map<TxnId, std::size_t> rs_size;
    for (const TraceRecord& rec : r.trace)
      if (rec.kind == TraceKind::MtArrival) rs_size[rec.txn] = rec.items.size();
    for (const CycleSample& c : r.cycles)
      if (c.control_units != 0 || c.retx_units != 0) perfect_ok = false;
    for (const MtSample& s : r.mts) {
      if (!s.completed) continue;
      ++checked_mts;
      const double expect = static_cast<double>(rs_size.at(s.txn)) * cfg.item_size;
      if (std::abs(s.pc_total - expect) > 1e-9) perfect_ok = false;
    }
  }

  const bool ok = busy_ok && pc_ok && perfect_ok && checked_mts > 0;
  CHECK(busy_ok);
  CHECK(pc_ok);
  CHECK(perfect_ok);
  CHECK(checked_mts > 0);
  verdict(9, ok, "busy ticks = control + payload + retx per cycle; pc = listen + check + tx per client; perfect pays payload only");
}
