#include "mcd/protocol.hpp"

#include <algorithm>
#include <string>

namespace mcd {

ProtocolId protocol_from_name(std::string_view name) {
  if (name == "mcd") return ProtocolId::Mcd;
  if (name == "fresh") return ProtocolId::Fresh;
  if (name == "nxn") return ProtocolId::NxN;
  if (name == "perfect") return ProtocolId::Perfect;
  throw ConfigError("protocol", "unknown protocol \"" + std::string(name) +
                                    "\" (expected mcd|fresh|nxn|perfect)");
}

std::string_view to_string(ProtocolId p) {
  switch (p) {
    case ProtocolId::Mcd: return "mcd";
    case ProtocolId::Fresh: return "fresh";
    case ProtocolId::NxN: return "nxn";
    case ProtocolId::Perfect: return "perfect";
  }
  return "?";
}

std::uint64_t nxn_matrix_units(std::uint64_t n, const OverheadConfig& cfg) {
  if (cfg.unit_bits == 0) throw SimError("nxn_matrix_units: unit_bits == 0");
  const std::uint64_t bits = n * n * cfg.cell_bits;
  return (bits + cfg.unit_bits - 1) / cfg.unit_bits;
}

std::uint64_t control_overhead(ProtocolId p, std::uint64_t items_in_cycle,
                               std::uint64_t n_database, const OverheadConfig& cfg) {
  switch (p) {
    case ProtocolId::Mcd:
      return cfg.header_units + items_in_cycle * cfg.entry_units;
    case ProtocolId::NxN:
      return cfg.header_units + nxn_matrix_units(n_database, cfg);
    case ProtocolId::Fresh:
    case ProtocolId::Perfect:
      return 0;
  }
  return 0;
}

NxnMatrix nxn_build_matrix(const CpDatabase& db, const OverheadConfig& cfg) {
  NxnMatrix m;
  m.n = db.size();
  m.size_units = nxn_matrix_units(m.n, cfg);
  m.cells.assign(m.n * m.n, false);
  m.update_stamp.resize(m.n);
  for (std::uint64_t i = 0; i < m.n; ++i)
    m.update_stamp[i] = db.item(static_cast<ItemId>(i)).last_updated_cycle;
  for (std::uint64_t i = 0; i < m.n; ++i) {
    const Cycle updated = m.update_stamp[i];
    if (updated == 0) continue;  // never updated: row stays clear
    for (std::uint64_t j = 0; j < m.n; ++j) {
      if (i == j) continue;
      const Cycle disseminated = db.item(static_cast<ItemId>(j)).last_disseminated_cycle;
      m.cells[i * m.n + j] = updated > disseminated;
    }
  }
  return m;
}

bool nxn_client_decide(const NxnMatrix& matrix, const MobileTransaction& mt) {
  for (const auto& [id, obs] : mt.observed) {
    if (id >= matrix.n) throw SimError("nxn_client_decide: item beyond matrix");
    if (matrix.update_stamp[id] != obs.update_cycle) return false;
  }
  return true;
}

CycleSchedule mcd_schedule_cycle(const CpDatabase& db, std::deque<ItemId>& priority,
                                 std::span<const ItemId> group, std::size_t capacity,
                                 std::size_t& rr_cursor) {
  if (group.empty()) throw SimError("mcd_schedule_cycle: empty channel group");
  CycleSchedule out;
  std::set<ItemId> taken;

  // Stale items the CP wants pushed again go first, FIFO, deduplicated.
  while (!priority.empty()) {
    const ItemId id = priority.front();
    priority.pop_front();
    if (taken.insert(id).second) out.items.push_back(id);
  }
  out.n_priority = out.items.size();

  // Everything updated since its last dissemination rides this cycle.
  for (ItemId id : group)
    if (db.dirty(id) && taken.insert(id).second) out.items.push_back(id);

  // Round-robin fill to capacity.
  const std::size_t cap = std::max(capacity, out.items.size());
  std::size_t inspected = 0;
  while (out.items.size() < cap && inspected < group.size()) {
    const ItemId id = group[rr_cursor % group.size()];
    ++rr_cursor;
    ++inspected;
    if (taken.insert(id).second) out.items.push_back(id);
  }
  return out;
}

FreshBroadcaster::FreshBroadcaster(std::vector<ItemId> group) : group_(std::move(group)) {
  if (group_.empty()) throw SimError("FreshBroadcaster: empty group");
}

void FreshBroadcaster::on_update(ItemId id) { retx_.push_back(id); }

FreshBroadcaster::Tx FreshBroadcaster::next() {
  if (!retx_.empty()) {
    const ItemId id = retx_.front();
    retx_.pop_front();
    return {id, /*retx=*/true, /*pass_start=*/false};
  }
  const bool pass_start = cursor_ == 0;
  const ItemId id = group_[cursor_];
  cursor_ = (cursor_ + 1) % group_.size();
  return {id, false, pass_start};
}

std::vector<ItemListen> plan_item_listens(const CycleFrame& frame,
                                          const std::set<ItemId>& needed) {
  std::vector<ItemListen> plan;
  for (const IndexEntry& e : frame.index)
    if (needed.count(e.item_id)) plan.push_back({e.item_id, e.offset, e.size});
  return plan;  // index order == transmission order
}

MtDecision mcd_client_decide(const MobileTransaction& mt,
                             const std::map<ItemId, Cycle>& stamp_view) {
  ConsistencyReport report = check_consistency(mt, stamp_view);
  if (!report.unknown_items.empty()) return MtDecision::Wait;
  if (!report.stale_items.empty()) return MtDecision::SendValidation;
  if (!is_read_only(mt)) return MtDecision::SendValidation;
  // Read-only and consistent: local commit is sound only when the whole
  // observation set came from one channel's frame stream.
  std::uint32_t channel = 0;
  bool first = true;
  for (const auto& [id, obs] : mt.observed) {
    if (first) {
      channel = obs.channel;
      first = false;
    } else if (obs.channel != channel) {
      return MtDecision::SendValidation;
    }
  }
  return MtDecision::CommitLocal;
}

FreshStep fresh_client_on_item(const MobileTransaction& mt, ItemId id, std::uint64_t value) {
  const bool in_rs =
      std::binary_search(mt.read_set.begin(), mt.read_set.end(), id);
  if (!in_rs) return FreshStep::Ignore;
  auto it = mt.observed.find(id);
  if (it != mt.observed.end()) {
    if (it->second.value != value) return FreshStep::Restart;
    return FreshStep::Record;  // same version re-heard
  }
  return mt.observed.size() + 1 == mt.read_set.size() ? FreshStep::Complete
                                                      : FreshStep::Record;
}

}  // namespace mcd
