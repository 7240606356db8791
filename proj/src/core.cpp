#include "mcd/core.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace mcd {

const char* to_string(MtState s) {
  switch (s) {
    case MtState::Pending: return "pending";
    case MtState::Listening: return "listening";
    case MtState::Validating: return "validating";
    case MtState::Rereading: return "rereading";
    case MtState::Committed: return "committed";
    case MtState::Aborted: return "aborted";
  }
  return "?";
}

bool is_read_only(const MobileTransaction& mt) { return mt.write_set.empty(); }

CycleFrame build_cycle_frame(std::span<DataItem> items, std::span<const ItemId> schedule,
                             std::uint32_t channel, Cycle cycle, FrameLayout layout) {
  CycleFrame frame;
  frame.channel = channel;
  frame.cycle = cycle;
  frame.layout = layout;
  frame.index.reserve(schedule.size());

  std::set<ItemId> seen;
  std::uint32_t offset = 0;
  for (ItemId id : schedule) {
    if (id >= items.size())
      throw SimError("build_cycle_frame: item id " + std::to_string(id) + " out of range");
    if (!seen.insert(id).second)
      throw SimError("build_cycle_frame: duplicate item id " + std::to_string(id) +
                     " in schedule");
    const DataItem& item = items[id];
    IndexEntry e;
    e.item_id = id;
    e.offset = offset;
    e.size = item.size;
    e.last_updated_cycle = item.last_updated_cycle;
    e.updated_flag = item.last_updated_cycle > item.last_disseminated_cycle;
    frame.index.push_back(e);
    offset += item.size;
  }
  frame.payload_length = offset;

  // The frame is now fixed; record the dissemination.
  for (ItemId id : schedule) items[id].last_disseminated_cycle = cycle;
  return frame;
}

std::optional<IndexEntry> locate_item(const CycleFrame& frame, ItemId id) {
  for (const IndexEntry& e : frame.index)
    if (e.item_id == id) return e;
  return std::nullopt;
}

ConsistencyReport check_consistency(const MobileTransaction& mt,
                                    const std::map<ItemId, Cycle>& index_view) {
  ConsistencyReport report;
  for (const auto& [id, obs] : mt.observed) {
    auto it = index_view.find(id);
    if (it == index_view.end())
      report.unknown_items.insert(id);
    else if (it->second != obs.update_cycle)
      report.stale_items.insert(id);
  }
  report.consistent = report.stale_items.empty() && report.unknown_items.empty();
  return report;
}

}  // namespace mcd
