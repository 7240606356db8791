#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "mcd/types.hpp"

namespace mcd {

// One database item as the server and broadcast frames see it. Values are
// plain version counters: +1 per committed update, starting at 0.
struct DataItem {
  ItemId id = 0;
  std::uint32_t size = 1;             // payload transmission units
  std::uint64_t value = 0;            // equals number of updates applied so far
  Cycle last_updated_cycle = 0;       // cycle the latest update landed in; 0 = never
  Cycle last_disseminated_cycle = 0;  // cycle of the latest broadcast; 0 = never
};

// Control-structure sizing, in abstract transmission units.
struct FrameLayout {
  std::uint32_t header_units = 2;
  std::uint32_t entry_units = 2;
};

// Per-item control info carried at the head of a cycle frame.
struct IndexEntry {
  ItemId item_id = 0;
  std::uint32_t offset = 0;  // payload units from the start of the payload region
  std::uint32_t size = 0;
  Cycle last_updated_cycle = 0;
  bool updated_flag = false;  // == (last_updated_cycle > dissemination cycle before this one)
};

// One broadcast cycle on one channel: header, index, then concatenated payloads.
struct CycleFrame {
  std::uint32_t channel = 0;
  Cycle cycle = 0;
  std::vector<IndexEntry> index;
  std::uint32_t payload_length = 0;
  FrameLayout layout;

  std::uint32_t control_units() const {
    return layout.header_units +
           static_cast<std::uint32_t>(index.size()) * layout.entry_units;
  }
  std::uint32_t length_units() const { return control_units() + payload_length; }
};

enum class MtState {
  Pending,     // generated, not yet listening
  Listening,   // tuning and reading
  Validating,  // sent to the CP, awaiting the confirmation
  Rereading,   // rejected; re-listening only the stale items
  Committed,
  Aborted,
};
const char* to_string(MtState s);

// What a client remembers about one read: the value, the update-cycle stamp the
// index reported alongside it, and the channel it was read from.
struct Observation {
  std::uint64_t value = 0;
  Cycle update_cycle = 0;
  std::uint32_t channel = 0;
};

// A mobile transaction at a wireless client. write_set values hold the version
// the client intends to install (observed value + 1, filled as reads land).
struct MobileTransaction {
  TxnId txn_id = 0;
  std::vector<ItemId> read_set;                  // sorted, unique
  std::map<ItemId, std::uint64_t> write_set;     // subset of read_set
  std::map<ItemId, Observation> observed;
  MtState state = MtState::Pending;
  Tick created_tick = 0;
  Tick committed_tick = 0;
};

bool is_read_only(const MobileTransaction& mt);

// Outcome of the client-side consistency test: an observation is stale when the
// index now reports a different update cycle, unknown when the index view has
// no entry for it (consistency cannot be decided yet).
struct ConsistencyReport {
  bool consistent = true;
  std::set<ItemId> stale_items;
  std::set<ItemId> unknown_items;
};

// Builds the frame for `schedule` (item ids into `items`, which is indexed by
// id), computes prefix-sum payload offsets, then stamps last_disseminated_cycle
// on every scheduled item. Throws SimError on duplicate or out-of-range ids.
CycleFrame build_cycle_frame(std::span<DataItem> items, std::span<const ItemId> schedule,
                             std::uint32_t channel, Cycle cycle, FrameLayout layout);

// Absent is a normal outcome: the item simply is not in this cycle.
std::optional<IndexEntry> locate_item(const CycleFrame& frame, ItemId id);

// index_view maps item id -> update-cycle stamp the index currently reports.
ConsistencyReport check_consistency(const MobileTransaction& mt,
                                    const std::map<ItemId, Cycle>& index_view);

}  // namespace mcd
