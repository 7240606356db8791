#include "mcd/server.hpp"

#include <algorithm>
#include <string>

namespace mcd {

CpDatabase::CpDatabase(std::vector<DataItem> items) : items_(std::move(items)) {
  for (std::size_t i = 0; i < items_.size(); ++i)
    if (items_[i].id != i)
      throw SimError("CpDatabase: item at position " + std::to_string(i) + " has id " +
                     std::to_string(items_[i].id));
  dirty_.assign(items_.size(), 0);
  history_.resize(items_.size());
}

const DataItem& CpDatabase::item(ItemId id) const {
  if (id >= items_.size()) throw SimError("CpDatabase: unknown item " + std::to_string(id));
  return items_[id];
}

DataItem& CpDatabase::item(ItemId id) {
  if (id >= items_.size()) throw SimError("CpDatabase: unknown item " + std::to_string(id));
  return items_[id];
}

void CpDatabase::apply_update(ItemId id, Cycle cycle, Tick tick, std::uint64_t seq,
                              TxnId writer, std::optional<std::uint64_t> forced_value) {
  DataItem& it = item(id);
  const std::uint64_t next = it.value + 1;
  if (forced_value && *forced_value != next)
    throw SimError("apply_update: item " + std::to_string(id) + " expects value " +
                   std::to_string(next) + ", got " + std::to_string(*forced_value));
  it.value = next;
  it.last_updated_cycle = cycle;
  dirty_[id] = 1;
  history_[id].push_back({cycle, tick, seq, next, writer});
}

bool CpDatabase::dirty(ItemId id) const {
  if (id >= dirty_.size()) throw SimError("CpDatabase: unknown item " + std::to_string(id));
  return dirty_[id] != 0;
}

void CpDatabase::clear_dirty(ItemId id) { dirty_[id] = 0; }

std::vector<std::uint32_t> assign_channels(std::size_t n_items, std::uint32_t n_channels) {
  if (n_channels == 0) throw SimError("assign_channels: zero channels");
  std::vector<std::uint32_t> out(n_items);
  for (std::size_t i = 0; i < n_items; ++i)
    out[i] = static_cast<std::uint32_t>(i % n_channels);
  return out;
}

// --- LockTable ---

bool LockTable::waiting(TxnId txn) const {
  return std::any_of(queue_.begin(), queue_.end(),
                     [&](const Request& r) { return r.txn == txn; });
}

std::optional<Tick> LockTable::enqueued_at(TxnId txn) const {
  for (const Request& r : queue_)
    if (r.txn == txn) return r.enqueued;
  return std::nullopt;
}

bool LockTable::compatible(const Request& r) const {
  for (ItemId id : r.exclusive) {
    auto it = locks_.find(id);
    if (it != locks_.end() && (it->second.x_holder || !it->second.s_holders.empty()))
      return false;
  }
  for (ItemId id : r.shared) {
    auto it = locks_.find(id);
    if (it != locks_.end() && it->second.x_holder) return false;
  }
  return true;
}

void LockTable::install(const Request& r) {
  for (ItemId id : r.exclusive) locks_[id].x_holder = r.txn;
  for (ItemId id : r.shared) locks_[id].s_holders.insert(r.txn);
  holders_[r.txn] = r;
}

LockTable::Acquire LockTable::acquire(TxnId txn, std::vector<ItemId> shared,
                                      std::vector<ItemId> exclusive, Tick now) {
  if (holds(txn) || waiting(txn))
    throw SimError("LockTable: txn " + std::to_string(txn) + " already holds or waits");
  for (ItemId id : exclusive)
    if (std::find(shared.begin(), shared.end(), id) != shared.end())
      throw SimError("LockTable: item " + std::to_string(id) + " requested S and X");

  Request r{txn, std::move(shared), std::move(exclusive), now};
  // Strict FIFO: never overtake existing waiters, even when compatible.
  if (queue_.empty() && compatible(r)) {
    install(r);
    check_invariants();
    return Acquire::Granted;
  }
  queue_.push_back(std::move(r));
  return Acquire::Queued;
}

std::vector<TxnId> LockTable::release(TxnId txn) {
  auto held = holders_.find(txn);
  if (held == holders_.end())
    throw SimError("LockTable: release by non-holder " + std::to_string(txn));
  for (ItemId id : held->second.exclusive) {
    locks_[id].x_holder.reset();
    if (locks_[id].s_holders.empty()) locks_.erase(id);
  }
  for (ItemId id : held->second.shared) {
    locks_[id].s_holders.erase(txn);
    if (!locks_[id].x_holder && locks_[id].s_holders.empty()) locks_.erase(id);
  }
  holders_.erase(held);

  std::vector<TxnId> granted;
  while (!queue_.empty() && compatible(queue_.front())) {
    install(queue_.front());
    granted.push_back(queue_.front().txn);
    queue_.pop_front();
  }
  check_invariants();
  return granted;
}

std::vector<TxnId> LockTable::cancel(TxnId txn) {
  auto it = std::find_if(queue_.begin(), queue_.end(),
                         [&](const Request& r) { return r.txn == txn; });
  if (it == queue_.end())
    throw SimError("LockTable: cancel of non-waiting txn " + std::to_string(txn));
  queue_.erase(it);
  // A cancelled head may have been the only thing blocking the rest.
  std::vector<TxnId> granted;
  while (!queue_.empty() && compatible(queue_.front())) {
    install(queue_.front());
    granted.push_back(queue_.front().txn);
    queue_.pop_front();
  }
  check_invariants();
  return granted;
}

void LockTable::check_invariants() const {
  for (const auto& [id, l] : locks_) {
    if (l.x_holder && !l.s_holders.empty())
      throw SimError("lock invariant: item " + std::to_string(id) + " has X and S holders");
    if (l.x_holder && l.s_holders.count(*l.x_holder))
      throw SimError("lock invariant: item " + std::to_string(id) + " double-held");
  }
}

// --- validation ---

ValidationOutcome validate_and_commit(CpDatabase& db, const MobileTransaction& mt,
                                      const std::function<Cycle(ItemId)>& item_cycle,
                                      Tick now, std::uint64_t& seq) {
  ValidationOutcome out;
  for (const auto& [id, obs] : mt.observed) {
    const DataItem& it = db.item(id);
    if (it.value != obs.value)
      out.stale.push_back({id, it.value, it.last_updated_cycle});
  }
  if (!out.stale.empty()) return out;

  out.committed = true;
  for (const auto& [id, new_value] : mt.write_set)
    db.apply_update(id, item_cycle(id), now, seq++, mt.txn_id, new_value);
  return out;
}

void apply_local_update(CpDatabase& db, ItemId id, Cycle cycle, Tick now, std::uint64_t& seq) {
  db.apply_update(id, cycle, now, seq++, /*writer=*/0);
}

}  // namespace mcd
