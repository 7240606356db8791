#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "mcd/core.hpp"
#include "mcd/types.hpp"

namespace mcd {

// Append-only record of one applied update. seq is the global event sequence
// number at apply time; it totally orders history against cycle boundaries.
struct HistEntry {
  Cycle cycle = 0;
  Tick tick = 0;
  std::uint64_t seq = 0;
  std::uint64_t value = 0;
  TxnId writer = 0;  // 0 = server-local update, else the committing transaction
};

// The central point's authoritative database.
class CpDatabase {
 public:
  explicit CpDatabase(std::vector<DataItem> items);

  std::size_t size() const { return items_.size(); }
  const DataItem& item(ItemId id) const;
  DataItem& item(ItemId id);
  std::span<DataItem> items() { return items_; }

  // value += 1 (or := forced_value, which must equal value + 1), stamps
  // last_updated_cycle, marks the item dirty, appends history.
  void apply_update(ItemId id, Cycle cycle, Tick tick, std::uint64_t seq, TxnId writer,
                    std::optional<std::uint64_t> forced_value = std::nullopt);

  // Dirty = updated since it was last placed in a frame schedule.
  bool dirty(ItemId id) const;
  void clear_dirty(ItemId id);

  const std::vector<std::vector<HistEntry>>& history() const { return history_; }

 private:
  std::vector<DataItem> items_;
  std::vector<std::uint8_t> dirty_;
  std::vector<std::vector<HistEntry>> history_;
};

// item id -> channel, round-robin by id. Every id maps to exactly one channel.
std::vector<std::uint32_t> assign_channels(std::size_t n_items, std::uint32_t n_channels);

enum class LockMode { Shared, Exclusive };

// All-or-nothing S/X lock table with one global FIFO wait queue. A request
// either acquires every lock it asked for or holds nothing; waiters never
// overtake (a newcomer queues whenever the queue is non-empty), which rules
// out hold-and-wait deadlocks entirely.
class LockTable {
 public:
  enum class Acquire { Granted, Queued };

  // shared/exclusive must be disjoint id sets. Throws SimError if txn already
  // holds or waits.
  Acquire acquire(TxnId txn, std::vector<ItemId> shared, std::vector<ItemId> exclusive,
                  Tick now);

  // Frees txn's holds, then grants queued requests from the head while they
  // fit. Returns the txns granted, in queue order.
  std::vector<TxnId> release(TxnId txn);

  // Removes a waiting request (lock-wait timeout), then grants whatever the
  // shorter queue now admits. Throws SimError if txn was not queued.
  std::vector<TxnId> cancel(TxnId txn);

  bool holds(TxnId txn) const { return holders_.count(txn) != 0; }
  bool waiting(TxnId txn) const;
  std::optional<Tick> enqueued_at(TxnId txn) const;
  std::size_t queue_depth() const { return queue_.size(); }

  // Compatibility invariant: at most one X holder per item, never X alongside S.
  // Throws SimError on violation; called after every mutation.
  void check_invariants() const;

  struct ItemLock {
    std::optional<TxnId> x_holder;
    std::set<TxnId> s_holders;
  };
  const std::map<ItemId, ItemLock>& locks() const { return locks_; }

 private:
  struct Request {
    TxnId txn;
    std::vector<ItemId> shared;
    std::vector<ItemId> exclusive;
    Tick enqueued;
  };

  bool compatible(const Request& r) const;
  void install(const Request& r);

  std::map<ItemId, ItemLock> locks_;
  std::deque<Request> queue_;
  std::map<TxnId, Request> holders_;
};

// What the CP reports back for one rejected item: the fresh value and its
// update cycle, so the client knows what to re-read.
struct StaleItem {
  ItemId id = 0;
  std::uint64_t fresh_value = 0;
  Cycle fresh_cycle = 0;
};

struct ValidationOutcome {
  bool committed = false;
  std::vector<StaleItem> stale;  // empty iff committed
};

// Backward validation under already-held locks: every observed value must equal
// the database's current value; on success the write set is applied (version
// bump per item, update-cycle stamps, dirty marks, history append). seq is
// advanced once per applied write. item_cycle(id) supplies the in-progress
// cycle of the item's channel for stamping.
ValidationOutcome validate_and_commit(CpDatabase& db, const MobileTransaction& mt,
                                      const std::function<Cycle(ItemId)>& item_cycle,
                                      Tick now, std::uint64_t& seq);

// Server-local update transaction: version bump on one item. Throws SimError
// for an unknown id.
void apply_local_update(CpDatabase& db, ItemId id, Cycle cycle, Tick now, std::uint64_t& seq);

}  // namespace mcd
