#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mcd/types.hpp"

namespace mcd {

enum class TraceKind : std::uint8_t {
  CycleStart,   // channel, cycle, items = schedule, a = n_priority, value = control units
  PassStart,    // fresh: channel, cycle(=pass number)
  Update,       // item, value, cycle
  Retx,         // fresh interrupt service start: channel, item, value
  MtArrival,    // client, txn, items = read set, items2 = write set
  Read,         // client, txn, item, value, a = stamp, flag = reread
  Check,        // fresh decision check: client, txn, item
  CommitLocal,  // client, txn
  ValidateSent, // client, txn
  ValidateDone, // txn, flag = committed, items = stale ids
  ResultRecv,   // client, txn, flag = committed
  Reread,       // client, txn, items = pending stale set
  Restart,      // client, txn, a = restart count so far
  Timeout,      // txn lock-wait timeout at the CP
};

const char* to_string(TraceKind k);

// One flat record type for every event; unused fields stay zero/empty. Kept
// lean because audits and the serializability oracle replay these by the
// thousand.
struct TraceRecord {
  TraceKind kind{};
  Tick tick = 0;
  std::uint64_t seq = 0;
  std::uint32_t channel = 0;
  std::uint32_t client = 0;
  TxnId txn = 0;
  ItemId item = 0;
  std::uint64_t value = 0;
  Cycle cycle = 0;
  std::uint64_t a = 0;
  bool flag = false;
  std::vector<ItemId> items;
  std::vector<ItemId> items2;
};

// One JSON object per line, keys in lexicographic order; byte-stable for a
// given record sequence.
void write_jsonl(std::ostream& os, const std::vector<TraceRecord>& trace);
std::string to_jsonl(const std::vector<TraceRecord>& trace);

}  // namespace mcd
