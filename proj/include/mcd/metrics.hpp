#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcd/sim.hpp"

namespace mcd {

// Aggregates over one run. so_per_cycle = control units plus fresh interrupt
// retransmission units per complete cycle; the two addends are also reported
// separately.
struct Aggregate {
  double rt_mean = 0;
  double rt_p95 = 0;
  double pc_mean = 0;
  double pc_listen = 0;
  double pc_check = 0;
  double pc_tx = 0;
  double so_per_cycle = 0;
  double so_control = 0;
  double so_retx = 0;
  double payload_per_cycle = 0;
  double cycle_len_mean = 0;
  std::uint64_t commits = 0;
  std::uint64_t rejections = 0;
  std::uint64_t rereads = 0;
  std::uint64_t restarts = 0;
  std::uint64_t n_samples = 0;
  std::uint64_t incomplete = 0;
};

Aggregate aggregate(const RunResult& result);

// Nearest-rank percentile over a copy of xs; p in (0, 100].
double percentile(std::vector<double> xs, double p);

// Accounting identities every run must satisfy:
//   per complete cycle: control + payload + retx units == busy ticks
//   per MT: pc_total == listen + check (+ tx when included)
//   energy components non-negative
// Throws SimError naming the first violation.
void check_accounting(const RunResult& result);

}  // namespace mcd
