#include "mcd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mcd {

double percentile(std::vector<double> xs, double p) {
  if (p <= 0 || p > 100) throw SimError("percentile: p out of (0, 100]");
  if (xs.empty()) return 0;  // aggregate() over a run with no completed MTs
  std::sort(xs.begin(), xs.end());
  const std::size_t rank = static_cast<std::size_t>(std::ceil(p / 100.0 * xs.size()));
  return xs[rank == 0 ? 0 : rank - 1];
}

Aggregate aggregate(const RunResult& result) {
  Aggregate agg;
  std::vector<double> rts;
  for (const MtSample& mt : result.mts) {
    if (!mt.completed) continue;
    ++agg.n_samples;
    rts.push_back(mt.rt);
    agg.rt_mean += mt.rt;
    agg.pc_mean += mt.pc_total;
    agg.pc_listen += mt.pc_listen;
    agg.pc_check += mt.pc_check;
    agg.pc_tx += mt.pc_tx;
    agg.rereads += mt.rereads;
    agg.restarts += mt.restarts;
    agg.rejections += mt.rejections;
  }
  agg.commits = agg.n_samples;
  agg.incomplete = result.incomplete_mts;
  if (agg.n_samples) {
    const double n = static_cast<double>(agg.n_samples);
    agg.rt_mean /= n;
    agg.pc_mean /= n;
    agg.pc_listen /= n;
    agg.pc_check /= n;
    agg.pc_tx /= n;
    agg.rt_p95 = percentile(std::move(rts), 95);
  }

  std::uint64_t control = 0, payload = 0, retx = 0, complete_cycles = 0, busy = 0;
  for (const CycleSample& c : result.cycles) {
    if (!c.complete) continue;
    ++complete_cycles;
    control += c.control_units;
    payload += c.payload_units;
    retx += c.retx_units;
    busy += c.end - c.start;
  }
  if (complete_cycles) {
    const double n = static_cast<double>(complete_cycles);
    agg.so_control = control / n;
    agg.so_retx = retx / n;
    agg.so_per_cycle = (control + retx) / n;
    agg.payload_per_cycle = payload / n;
    agg.cycle_len_mean = busy / n;
  }
  return agg;
}

void check_accounting(const RunResult& result) {
  for (const CycleSample& c : result.cycles) {
    if (!c.complete) continue;
    const std::uint64_t busy = c.end - c.start;
    const std::uint64_t units = c.control_units + c.payload_units + c.retx_units;
    if (busy != units)
      throw SimError("accounting: channel " + std::to_string(c.channel) + " cycle " +
                     std::to_string(c.cycle) + " spans " + std::to_string(busy) +
                     " ticks but carries " + std::to_string(units) + " units");
  }
  const EnergyCosts costs = result.config.energy_costs();
  for (const MtSample& mt : result.mts) {
    if (mt.pc_listen < 0 || mt.pc_check < 0 || mt.pc_tx < 0)
      throw SimError("accounting: txn " + std::to_string(mt.txn) +
                     " has a negative energy component");
    double expect = mt.pc_listen + mt.pc_check;
    if (costs.include_tx) expect += mt.pc_tx;
    if (std::abs(expect - mt.pc_total) > 1e-9 * std::max(1.0, std::abs(expect)))
      throw SimError("accounting: txn " + std::to_string(mt.txn) +
                     " energy components do not sum to pc_total");
  }
}

}  // namespace mcd
