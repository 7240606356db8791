#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "mcd/core.hpp"
#include "mcd/server.hpp"
#include "mcd/types.hpp"

namespace mcd {

// The four dissemination strategies under comparison.
//   Mcd     - indexed frames, stale items re-pushed first next cycle, partial re-read
//   Fresh   - no control info; continuous listening; updates interrupt the broadcast
//   NxN     - n x n conflict matrix at the head of every cycle; conflicts restart the MT
//   Perfect - zero-overhead oracle baseline; clients wake exactly for their payload
enum class ProtocolId { Mcd, Fresh, NxN, Perfect };

ProtocolId protocol_from_name(std::string_view name);  // throws ConfigError
std::string_view to_string(ProtocolId p);

struct OverheadConfig {
  std::uint32_t header_units = 2;
  std::uint32_t entry_units = 2;
  std::uint32_t cell_bits = 1;
  std::uint32_t unit_bits = 32;
};

// ceil(n^2 * cell_bits / unit_bits)
std::uint64_t nxn_matrix_units(std::uint64_t n, const OverheadConfig& cfg);

// Control units one cycle carries on air. Mcd counts header + index entries;
// NxN counts header + matrix; Fresh and Perfect carry no control structure
// (fresh interrupt retransmissions are accounted as payload overhead).
std::uint64_t control_overhead(ProtocolId p, std::uint64_t items_in_cycle,
                               std::uint64_t n_database, const OverheadConfig& cfg);

// Conflict matrix broadcast at the head of an nxn cycle. cell(i,j) encodes
// "item i was updated in a cycle strictly after item j's last dissemination
// before this cycle" (diagonal forced to 0). update_stamp carries the builder's
// per-item update cycles: the cells are derived from it, and the client-side
// staleness decision reads it so that it matches the indexed protocols' test
// decision-for-decision.
struct NxnMatrix {
  std::uint64_t n = 0;
  std::uint64_t size_units = 0;
  std::vector<bool> cells;           // row-major n*n
  std::vector<Cycle> update_stamp;   // per item id
  bool cell(std::uint64_t i, std::uint64_t j) const { return cells[i * n + j]; }
};

// Snapshot the matrix from the database before the frame build stamps
// dissemination cycles for the new cycle.
NxnMatrix nxn_build_matrix(const CpDatabase& db, const OverheadConfig& cfg);

// Commit-side test once the read set is fully observed: true = no conflict.
// False means the MT must restart from scratch (observations cleared).
bool nxn_client_decide(const NxnMatrix& matrix, const MobileTransaction& mt);

// Cycle schedule for the indexed protocols: priority items first (stale items
// the CP wants re-pushed, drained FIFO and deduplicated), then items updated
// since their last dissemination, then round-robin fill up to `capacity`.
// rr_cursor persists across cycles. Returns the schedule plus the count of
// leading priority items.
struct CycleSchedule {
  std::vector<ItemId> items;
  std::size_t n_priority = 0;
};
CycleSchedule mcd_schedule_cycle(const CpDatabase& db, std::deque<ItemId>& priority,
                                 std::span<const ItemId> group, std::size_t capacity,
                                 std::size_t& rr_cursor);

// Interrupting broadcaster for fresh: cyclic passes over the group in id
// order; an update queues a retransmission that preempts the pass at the next
// item boundary (FIFO). pass_start marks the transmission that begins a new
// cyclic pass.
class FreshBroadcaster {
 public:
  explicit FreshBroadcaster(std::vector<ItemId> group);

  void on_update(ItemId id);

  struct Tx {
    ItemId id = 0;
    bool retx = false;
    bool pass_start = false;
  };
  Tx next();

  std::size_t pending_retx() const { return retx_.size(); }

 private:
  std::vector<ItemId> group_;
  std::size_t cursor_ = 0;
  std::deque<ItemId> retx_;
};

// --- client-side steps ---

// Tune/listen plan for one cycle: which scheduled items to wake for, given
// what the MT still needs. Entries come back in transmission order.
struct ItemListen {
  ItemId id = 0;
  std::uint32_t offset = 0;  // payload units from payload start
  std::uint32_t size = 0;
};
std::vector<ItemListen> plan_item_listens(const CycleFrame& frame,
                                          const std::set<ItemId>& needed);

// Decision once every needed item has been observed (indexed protocols).
enum class MtDecision {
  Wait,            // consistency not decidable yet (an item is unknown to the index view)
  CommitLocal,     // read-only, single-channel observations, all stamps match
  SendValidation,  // write set present, stale reads, or multi-channel observations
};
MtDecision mcd_client_decide(const MobileTransaction& mt,
                             const std::map<ItemId, Cycle>& stamp_view);

// Per-item step for a continuously listening fresh client. Call with the value
// carried by an item transmission the client just finished hearing.
enum class FreshStep {
  Ignore,    // not in the read set
  Record,    // observation stored (or unchanged value re-heard)
  Restart,   // newer version of an already-read item: drop everything, start over
  Complete,  // this read filled the read set
};
FreshStep fresh_client_on_item(const MobileTransaction& mt, ItemId id, std::uint64_t value);

}  // namespace mcd
