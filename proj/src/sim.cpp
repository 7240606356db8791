#include "mcd/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "mcd/client.hpp"
#include "mcd/protocol.hpp"
#include "mcd/rng.hpp"

namespace mcd {

namespace {

// Server-local update transactions get ids far above any client txn so the two
// spaces never collide in the lock table or the history.
constexpr TxnId kUpdateTxnBase = 1'000'000'000'000ull;

enum class EvKind : std::uint8_t {
  CycleStart,       // a = channel
  ControlEnd,       // a = channel, b = cycle
  ItemSlotEnd,      // a = channel, b = schedule slot
  FreshTxEnd,       // a = channel
  UpdateCommit,     // a = item
  MtArrival,        // a = client
  ValidationArrive, // a = txn, b = attempt
  ValidationFinish, // a = txn
  LockTimeout,      // a = txn, b = attempt
  ResultArrive,     // a = txn
};

struct Event {
  Tick tick = 0;
  std::uint64_t ord = 0;  // insertion order; ties on tick resolve FIFO
  EvKind kind{};
  std::uint64_t a = 0;
  std::uint64_t b = 0;
};

struct EventAfter {
  bool operator()(const Event& x, const Event& y) const {
    return std::tie(x.tick, x.ord) > std::tie(y.tick, y.ord);
  }
};

struct ChannelState {
  std::uint32_t id = 0;
  std::vector<ItemId> group;  // item ids on this channel, ascending
  std::size_t rr_cursor = 0;
  Cycle cycle = 0;  // in-progress cycle number; 0 before the first start
  bool done = false;
  std::deque<ItemId> priority;  // stale items to re-push at the next head

  // Indexed protocols: the cycle currently on air.
  CycleFrame frame;
  std::vector<std::uint64_t> frame_value;  // payload snapshot, by schedule slot
  NxnMatrix matrix;
  std::uint64_t air_control = 0;  // control units actually transmitted

  // Continuous broadcaster state.
  std::optional<FreshBroadcaster> fresh;
  struct CurTx {
    ItemId id = 0;
    std::uint64_t value = 0;
    Tick start = 0;
    bool retx = false;
  };
  CurTx cur_tx;
  std::uint64_t nominal_len = 0;  // pass units without interrupts
  std::size_t sample_idx = 0;     // open CycleSample row

  Rng update_rng;
};

struct ClientCtl {
  Rng workload;
  Rng arrivals;
  std::map<std::uint32_t, std::set<ItemId>> plan;  // channel -> items to wake for
};

struct PendingResult {
  bool committed = false;
  std::vector<ItemId> stale;
};

std::vector<DataItem> make_items(const SimConfig& cfg) {
  std::vector<DataItem> items(cfg.n_items);
  for (ItemId i = 0; i < cfg.n_items; ++i) items[i] = {i, cfg.size_of(i), 0, 0, 0};
  return items;
}

class Engine {
 public:
  explicit Engine(const SimConfig& cfg)
      : cfg_(cfg),
        proto_(cfg.protocol),
        layout_(cfg.frame_layout()),
        ocfg_(cfg.overhead_config()),
        costs_(cfg.energy_costs()),
        db_(make_items(cfg)),
        ch_of_(assign_channels(cfg.n_items, cfg.n_channels)),
        zipf_(cfg.n_items, cfg.zipf_theta),
        trace_on_(cfg.record_trace) {
    wcfg_ = {cfg.n_items, cfg.rs_min,     cfg.rs_max,
             cfg.write_prob, cfg.zipf_theta, cfg.fixed_rs};
    nominal_ = cfg.nominal_cycle_ticks();
    timeout_ticks_ = std::max<Tick>(
        1, static_cast<Tick>(std::llround(cfg.lock_timeout_cycles *
                                          static_cast<double>(nominal_))));

    chans_.resize(cfg.n_channels);
    for (std::uint32_t ch = 0; ch < cfg.n_channels; ++ch) {
      ChannelState& cs = chans_[ch];
      cs.id = ch;
      for (ItemId i = 0; i < cfg.n_items; ++i)
        if (ch_of_[i] == ch) cs.group.push_back(i);
      cs.update_rng = make_stream(cfg.seed, RngPurpose::Updates, ch);
      for (ItemId i : cs.group) cs.nominal_len += 1 + cfg.size_of(i);
      if (proto_ == ProtocolId::Fresh) cs.fresh.emplace(cs.group);
    }

    wcs_.resize(cfg.n_clients);
    ctls_.resize(cfg.n_clients);
    for (std::uint32_t ci = 0; ci < cfg.n_clients; ++ci) {
      wcs_[ci].client_id = ci;
      ctls_[ci].workload = make_stream(cfg.seed, RngPurpose::Workload, ci);
      ctls_[ci].arrivals = make_stream(cfg.seed, RngPurpose::Arrivals, ci);
    }

    res_.config = cfg;
  }

  RunResult run() {
    for (std::uint32_t ch = 0; ch < cfg_.n_channels; ++ch)
      push(0, EvKind::CycleStart, ch);
    if (cfg_.arrival_mode == ArrivalMode::StartOnce) {
      for (std::uint32_t ci = 0; ci < cfg_.n_clients; ++ci)
        push(0, EvKind::MtArrival, ci);
    } else if (cfg_.arrival_mode == ArrivalMode::Poisson) {
      for (std::uint32_t ci = 0; ci < cfg_.n_clients; ++ci)
        push(poisson_gap(ci), EvKind::MtArrival, ci);
    }

    while (!queue_.empty()) {
      const Event ev = queue_.top();
      queue_.pop();
      res_.final_tick = std::max(res_.final_tick, ev.tick);
      dispatch(ev);
    }

    // Clients cut off by the horizon: account their energy, mark incomplete.
    for (std::uint32_t ci = 0; ci < cfg_.n_clients; ++ci) {
      WcState& wc = wcs_[ci];
      if (!wc.mt) continue;
      if (proto_ == ProtocolId::Fresh && wc.mt->state == MtState::Listening)
        charge_listen(wc.meter, res_.final_tick - wc.awake_since, costs_);
      finalize_sample(ci, res_.final_tick, /*completed=*/false);
      wc.mt.reset();
    }
    res_.history = db_.history();
    return std::move(res_);
  }

 private:
  // --- plumbing ---

  void push(Tick tick, EvKind kind, std::uint64_t a, std::uint64_t b = 0) {
    queue_.push({tick, ord_++, kind, a, b});
  }

  TraceRecord tr(TraceKind kind, Tick tick) const {
    TraceRecord r;
    r.kind = kind;
    r.tick = tick;
    r.seq = seq_;
    return r;
  }

  bool all_done() const {
    return std::all_of(chans_.begin(), chans_.end(),
                       [](const ChannelState& c) { return c.done; });
  }

  Tick poisson_gap(std::uint32_t ci) {
    const double u = ctls_[ci].arrivals.next_double();
    const double mean = static_cast<double>(nominal_) / cfg_.poisson_rate;
    return std::max<Tick>(1, static_cast<Tick>(std::llround(-std::log(1.0 - u) * mean)));
  }

  Cycle item_cycle(ItemId id) const { return chans_[ch_of_[id]].cycle; }

  void dispatch(const Event& ev) {
    switch (ev.kind) {
      case EvKind::CycleStart:
        if (proto_ == ProtocolId::Fresh)
          fresh_boundary(chans_[ev.a], ev.tick);
        else
          handle_cycle_start(ev);
        return;
      case EvKind::ControlEnd: handle_control_end(ev); return;
      case EvKind::ItemSlotEnd: handle_item_slot_end(ev); return;
      case EvKind::FreshTxEnd: handle_fresh_tx_end(ev); return;
      case EvKind::UpdateCommit: handle_update(ev); return;
      case EvKind::MtArrival: handle_arrival(ev); return;
      case EvKind::ValidationArrive: handle_validation_arrive(ev); return;
      case EvKind::ValidationFinish: handle_validation_finish(ev); return;
      case EvKind::LockTimeout: handle_lock_timeout(ev); return;
      case EvKind::ResultArrive: handle_result(ev); return;
    }
  }

  // --- broadcast: indexed protocols ---

  void handle_cycle_start(const Event& ev) {
    ChannelState& cs = chans_[ev.a];
    if (cs.done) return;
    const Cycle c = cs.cycle + 1;
    if (c > cfg_.horizon_cycles) {
      cs.done = true;
      return;
    }
    cs.cycle = c;
    const Tick t = ev.tick;

    const std::size_t capacity =
        cfg_.items_per_cycle == 0 ? cs.group.size() : cfg_.items_per_cycle;
    CycleSchedule sched;
    if (proto_ == ProtocolId::NxN) {
      // Plain round-robin: the matrix protocol re-broadcasts nothing early.
      std::set<ItemId> taken;
      const std::size_t cap = std::min(capacity, cs.group.size());
      for (std::size_t inspected = 0;
           sched.items.size() < cap && inspected < cs.group.size(); ++inspected) {
        const ItemId id = cs.group[cs.rr_cursor % cs.group.size()];
        ++cs.rr_cursor;
        if (taken.insert(id).second) sched.items.push_back(id);
      }
    } else {
      sched = mcd_schedule_cycle(db_, cs.priority, cs.group, capacity, cs.rr_cursor);
    }

    // Matrix snapshot must precede the frame build: building stamps
    // last_disseminated_cycle, which the cells compare against.
    if (proto_ == ProtocolId::NxN) cs.matrix = nxn_build_matrix(db_, ocfg_);
    cs.frame = build_cycle_frame(db_.items(), sched.items, cs.id, c, layout_);
    for (ItemId id : sched.items) db_.clear_dirty(id);
    cs.frame_value.clear();
    for (const IndexEntry& e : cs.frame.index)
      cs.frame_value.push_back(db_.item(e.item_id).value);
    cs.air_control =
        control_overhead(proto_, sched.items.size(), cfg_.n_items, ocfg_);

    res_.boundaries.push_back({t, seq_++, cs.id, c});
    if (trace_on_) {
      TraceRecord r = tr(TraceKind::CycleStart, t);
      r.channel = cs.id;
      r.cycle = c;
      r.items = sched.items;
      r.a = sched.n_priority;
      r.value = cs.air_control;
      res_.trace.push_back(std::move(r));
    }

    const Tick end = t + cs.air_control + cs.frame.payload_length;
    res_.cycles.push_back({cs.id, c, t, end, cs.air_control, cs.frame.payload_length,
                           0, sched.n_priority, true});

    for (ItemId id : cs.group)
      if (cs.update_rng.bernoulli(cfg_.update_rate))
        push(t + cs.update_rng.below(end - t), EvKind::UpdateCommit, id);

    if (cfg_.arrival_mode == ArrivalMode::PerCycle && cs.id == 0)
      for (std::uint32_t ci = 0; ci < cfg_.n_clients; ++ci)
        if (!wcs_[ci].mt) push(t, EvKind::MtArrival, ci);

    push(t + cs.air_control, EvKind::ControlEnd, cs.id, c);
    const Tick pstart = t + cs.air_control;
    for (std::size_t j = 0; j < cs.frame.index.size(); ++j)
      push(pstart + cs.frame.index[j].offset + cs.frame.index[j].size,
           EvKind::ItemSlotEnd, cs.id, j);
    push(end, EvKind::CycleStart, cs.id);
  }

  // Does this client tune this channel's control this cycle?
  bool listens_channel(std::uint32_t ci, std::uint32_t ch) const {
    const WcState& wc = wcs_[ci];
    if (!wc.mt) return false;
    const MtState st = wc.mt->state;
    if (st != MtState::Listening && st != MtState::Rereading) return false;
    if (wc.needed.empty()) return false;
    if (cfg_.single_tuner) {
      std::uint32_t target = ch_of_[*wc.needed.begin()];
      for (ItemId id : wc.needed) target = std::min(target, ch_of_[id]);
      return ch == target;
    }
    for (ItemId id : wc.needed)
      if (ch_of_[id] == ch) return true;
    return false;
  }

  void handle_control_end(const Event& ev) {
    ChannelState& cs = chans_[ev.a];
    if (cs.cycle != ev.b) throw SimError("control end out of step with its cycle");
    for (std::uint32_t ci = 0; ci < cfg_.n_clients; ++ci) {
      WcState& wc = wcs_[ci];
      ClientCtl& ctl = ctls_[ci];
      ctl.plan[cs.id].clear();
      if (!listens_channel(ci, cs.id)) continue;
      if (cs.air_control) charge_listen(wc.meter, cs.air_control, costs_);
      if (proto_ == ProtocolId::NxN) {
        for (ItemId i = 0; i < cfg_.n_items; ++i)
          wc.stamp_view[i] = cs.matrix.update_stamp[i];
      } else {
        for (const IndexEntry& e : cs.frame.index)
          wc.stamp_view[e.item_id] = e.last_updated_cycle;
      }
      for (const ItemListen& pl : plan_item_listens(cs.frame, wc.needed))
        ctl.plan[cs.id].insert(pl.id);
    }
  }

  void handle_item_slot_end(const Event& ev) {
    ChannelState& cs = chans_[ev.a];
    const IndexEntry& e = cs.frame.index[ev.b];
    const Tick t = ev.tick;
    for (std::uint32_t ci = 0; ci < cfg_.n_clients; ++ci) {
      WcState& wc = wcs_[ci];
      if (!wc.mt) continue;
      const MtState st = wc.mt->state;
      if (st != MtState::Listening && st != MtState::Rereading) continue;
      if (!ctls_[ci].plan[cs.id].count(e.item_id)) continue;
      if (!wc.needed.count(e.item_id)) continue;

      charge_listen(wc.meter, e.size, costs_);
      const bool rereading = st == MtState::Rereading;
      record_observation(*wc.mt, e.item_id, cs.frame_value[ev.b],
                         e.last_updated_cycle, cs.id);
      wc.needed.erase(e.item_id);
      if (rereading) ++wc.rereads;
      if (trace_on_) {
        TraceRecord r = tr(TraceKind::Read, t);
        r.channel = cs.id;
        r.client = ci;
        r.txn = wc.mt->txn_id;
        r.item = e.item_id;
        r.value = cs.frame_value[ev.b];
        r.a = e.last_updated_cycle;
        r.flag = rereading;
        res_.trace.push_back(std::move(r));
      }
      if (wc.needed.empty()) decide(ci, t);
    }
  }

  // --- broadcast: continuous protocol ---

  void fresh_boundary(ChannelState& cs, Tick t) {
    if (cs.done) return;
    const FreshBroadcaster::Tx tx = cs.fresh->next();
    if (tx.pass_start) {
      if (cs.cycle >= 1) {
        CycleSample& row = res_.cycles[cs.sample_idx];
        row.end = t;
        row.complete = true;
      }
      const Cycle c = cs.cycle + 1;
      if (c > cfg_.horizon_cycles) {
        cs.done = true;
        return;
      }
      cs.cycle = c;
      res_.boundaries.push_back({t, seq_++, cs.id, c});
      if (trace_on_) {
        TraceRecord r = tr(TraceKind::PassStart, t);
        r.channel = cs.id;
        r.cycle = c;
        res_.trace.push_back(std::move(r));
      }
      cs.sample_idx = res_.cycles.size();
      res_.cycles.push_back({cs.id, c, t, t, 0, 0, 0, 0, false});

      // Update instants are drawn over the interrupt-free pass span; service
      // only stretches the pass, so every instant lands inside it.
      for (ItemId id : cs.group)
        if (cs.update_rng.bernoulli(cfg_.update_rate))
          push(t + cs.update_rng.below(cs.nominal_len), EvKind::UpdateCommit, id);

      if (cfg_.arrival_mode == ArrivalMode::PerCycle && cs.id == 0)
        for (std::uint32_t ci = 0; ci < cfg_.n_clients; ++ci)
          if (!wcs_[ci].mt) push(t, EvKind::MtArrival, ci);
    } else if (tx.retx) {
      res_.boundaries.push_back({t, seq_++, cs.id, cs.cycle});
      if (trace_on_) {
        TraceRecord r = tr(TraceKind::Retx, t);
        r.channel = cs.id;
        r.item = tx.id;
        r.value = db_.item(tx.id).value;
        res_.trace.push_back(std::move(r));
      }
    }

    cs.cur_tx = {tx.id, db_.item(tx.id).value, t, tx.retx};
    const std::uint64_t len = 1 + cfg_.size_of(tx.id);
    CycleSample& row = res_.cycles[cs.sample_idx];
    (tx.retx ? row.retx_units : row.payload_units) += len;
    push(t + len, EvKind::FreshTxEnd, cs.id);
  }

  void handle_fresh_tx_end(const Event& ev) {
    ChannelState& cs = chans_[ev.a];
    const ChannelState::CurTx tx = cs.cur_tx;
    const Tick t = ev.tick;
    for (std::uint32_t ci = 0; ci < cfg_.n_clients; ++ci) {
      WcState& wc = wcs_[ci];
      if (!wc.mt || wc.mt->state != MtState::Listening) continue;
      if (wc.mt->created_tick > tx.start) continue;  // missed the id header

      ++wc.checks;
      charge_checks(wc.meter, 1, costs_);
      if (trace_on_) {
        TraceRecord r = tr(TraceKind::Check, t);
        r.channel = cs.id;
        r.client = ci;
        r.txn = wc.mt->txn_id;
        r.item = tx.id;
        res_.trace.push_back(std::move(r));
      }

      switch (fresh_client_on_item(*wc.mt, tx.id, tx.value)) {
        case FreshStep::Ignore:
          break;
        case FreshStep::Record:
          if (!wc.mt->observed.count(tx.id)) fresh_record(ci, cs.id, tx, t);
          break;
        case FreshStep::Restart: {
          ++wc.restarts;
          wc.mt->observed.clear();
          wc.needed.clear();
          wc.needed.insert(wc.mt->read_set.begin(), wc.mt->read_set.end());
          if (trace_on_) {
            TraceRecord r = tr(TraceKind::Restart, t);
            r.client = ci;
            r.txn = wc.mt->txn_id;
            r.a = wc.restarts;
            res_.trace.push_back(std::move(r));
          }
          // The interrupting transmission itself is a valid first read — and
          // for a one-item read set it is also the last.
          fresh_record(ci, cs.id, tx, t);
          if (wc.needed.empty()) fresh_commit(ci, t);
          break;
        }
        case FreshStep::Complete:
          fresh_record(ci, cs.id, tx, t);
          fresh_commit(ci, t);
          break;
      }
    }
    fresh_boundary(cs, t);
  }

  void fresh_record(std::uint32_t ci, std::uint32_t ch, const ChannelState::CurTx& tx,
                    Tick t) {
    WcState& wc = wcs_[ci];
    record_observation(*wc.mt, tx.id, tx.value, /*stamp=*/0, ch);
    wc.needed.erase(tx.id);
    if (trace_on_) {
      TraceRecord r = tr(TraceKind::Read, t);
      r.channel = ch;
      r.client = ci;
      r.txn = wc.mt->txn_id;
      r.item = tx.id;
      r.value = tx.value;
      res_.trace.push_back(std::move(r));
    }
  }

  void fresh_commit(std::uint32_t ci, Tick t) {
    WcState& wc = wcs_[ci];
    charge_listen(wc.meter, t - wc.awake_since, costs_);
    wc.mt->state = MtState::Committed;
    wc.mt->committed_tick = t;
    res_.commits.push_back(
        {wc.mt->txn_id, ci, false, true, t, seq_++, wc.mt->observed, {}});
    if (trace_on_) {
      TraceRecord r = tr(TraceKind::CommitLocal, t);
      r.client = ci;
      r.txn = wc.mt->txn_id;
      res_.trace.push_back(std::move(r));
    }
    finalize_sample(ci, t, /*completed=*/true);
    wc.mt.reset();
  }

  // --- server-local updates ---

  void handle_update(const Event& ev) {
    const ItemId item = static_cast<ItemId>(ev.a);
    const TxnId ut = kUpdateTxnBase + update_n_++;
    if (locks_.acquire(ut, {}, {item}, ev.tick) == LockTable::Acquire::Granted) {
      apply_update_now(item, ev.tick);
      process_grants(locks_.release(ut), ev.tick);
    } else {
      pending_update_[ut] = item;  // applied the moment the X lock grants
    }
  }

  void apply_update_now(ItemId item, Tick t) {
    ChannelState& cs = chans_[ch_of_[item]];
    apply_local_update(db_, item, cs.cycle, t, seq_);
    if (trace_on_) {
      TraceRecord r = tr(TraceKind::Update, t);
      r.item = item;
      r.value = db_.item(item).value;
      r.cycle = cs.cycle;
      res_.trace.push_back(std::move(r));
    }
    if (cs.fresh) {
      cs.fresh->on_update(item);
      // Every update is rebroadcast verbatim, so each post-update state is a
      // published snapshot: a reader completing off a queued retransmission
      // serializes here, not at the next transmission boundary.
      res_.boundaries.push_back({t, seq_++, cs.id, cs.cycle});
    }
  }

  void process_grants(std::vector<TxnId> granted, Tick t) {
    std::deque<TxnId> q(granted.begin(), granted.end());
    while (!q.empty()) {
      const TxnId g = q.front();
      q.pop_front();
      auto pu = pending_update_.find(g);
      if (pu != pending_update_.end()) {
        const ItemId item = pu->second;
        pending_update_.erase(pu);
        apply_update_now(item, t);
        const auto more = locks_.release(g);
        q.insert(q.end(), more.begin(), more.end());
      } else {
        push(t + cfg_.validation_ticks, EvKind::ValidationFinish, g);
      }
    }
  }

  // --- client arrivals and decisions ---

  void handle_arrival(const Event& ev) {
    const auto ci = static_cast<std::uint32_t>(ev.a);
    if (cfg_.arrival_mode == ArrivalMode::Poisson && !all_done())
      push(ev.tick + poisson_gap(ci), EvKind::MtArrival, ci);
    WcState& wc = wcs_[ci];
    if (wc.mt) return;   // busy: this arrival is lost
    if (all_done()) return;

    const TxnId txn = next_txn_++;
    MobileTransaction mt = generate_mt(ctls_[ci].workload, zipf_, wcfg_, txn, ev.tick);
    txn_client_[txn] = ci;
    if (trace_on_) {
      TraceRecord r = tr(TraceKind::MtArrival, ev.tick);
      r.client = ci;
      r.txn = txn;
      r.items = mt.read_set;
      for (const auto& [id, v] : mt.write_set) r.items2.push_back(id);
      res_.trace.push_back(std::move(r));
    }
    begin_mt(wc, std::move(mt));
    ctls_[ci].plan.clear();
  }

  void decide(std::uint32_t ci, Tick t) {
    WcState& wc = wcs_[ci];
    MobileTransaction& mt = *wc.mt;
    if (!wc.needed.empty()) return;
    if (mt.state == MtState::Rereading) {
      // The stale set was re-read in full; straight back to the validator.
      send_validation(ci, t);
      return;
    }
    if (mt.state != MtState::Listening) return;
    if (proto_ == ProtocolId::NxN) {
      const ConsistencyReport rep = check_consistency(mt, wc.stamp_view);
      if (!rep.unknown_items.empty()) return;
      if (!rep.stale_items.empty()) {
        nxn_restart(ci, t);
        return;
      }
    }
    switch (mcd_client_decide(mt, wc.stamp_view)) {
      case MtDecision::Wait: return;
      case MtDecision::CommitLocal: local_commit(ci, t); return;
      case MtDecision::SendValidation: send_validation(ci, t); return;
    }
  }

  void nxn_restart(std::uint32_t ci, Tick t) {
    WcState& wc = wcs_[ci];
    MobileTransaction& mt = *wc.mt;
    ++wc.restarts;
    mt.observed.clear();
    wc.needed.clear();
    wc.needed.insert(mt.read_set.begin(), mt.read_set.end());
    mt.state = MtState::Listening;
    if (trace_on_) {
      TraceRecord r = tr(TraceKind::Restart, t);
      r.client = ci;
      r.txn = mt.txn_id;
      r.a = wc.restarts;
      res_.trace.push_back(std::move(r));
    }
  }

  void local_commit(std::uint32_t ci, Tick t) {
    WcState& wc = wcs_[ci];
    MobileTransaction& mt = *wc.mt;
    mt.state = MtState::Committed;
    mt.committed_tick = t;
    res_.commits.push_back({mt.txn_id, ci, false, true, t, seq_++, mt.observed, {}});
    if (trace_on_) {
      TraceRecord r = tr(TraceKind::CommitLocal, t);
      r.client = ci;
      r.txn = mt.txn_id;
      res_.trace.push_back(std::move(r));
    }
    finalize_sample(ci, t, /*completed=*/true);
    ctls_[ci].plan.clear();
    wc.mt.reset();
  }

  void send_validation(std::uint32_t ci, Tick t) {
    WcState& wc = wcs_[ci];
    MobileTransaction& mt = *wc.mt;
    mt.state = MtState::Validating;
    ++wc.validations;
    charge_tx(wc.meter, costs_);
    if (trace_on_) {
      TraceRecord r = tr(TraceKind::ValidateSent, t);
      r.client = ci;
      r.txn = mt.txn_id;
      res_.trace.push_back(std::move(r));
    }
    push(t + cfg_.backchannel_latency, EvKind::ValidationArrive, mt.txn_id,
         wc.validations);
  }

  // --- the central point ---

  void handle_validation_arrive(const Event& ev) {
    const TxnId txn = ev.a;
    const std::uint32_t ci = txn_client_.at(txn);
    if (!wcs_[ci].mt || wcs_[ci].mt->txn_id != txn)
      throw SimError("validation request from a stale transaction");
    const MobileTransaction& mt = *wcs_[ci].mt;
    std::vector<ItemId> shared, exclusive;
    for (const auto& [id, obs] : mt.observed)
      if (!mt.write_set.count(id)) shared.push_back(id);
    for (const auto& [id, v] : mt.write_set) exclusive.push_back(id);

    if (locks_.acquire(txn, std::move(shared), std::move(exclusive), ev.tick) ==
        LockTable::Acquire::Granted)
      push(ev.tick + cfg_.validation_ticks, EvKind::ValidationFinish, txn);
    else
      push(ev.tick + timeout_ticks_, EvKind::LockTimeout, txn, ev.b);
  }

  void handle_validation_finish(const Event& ev) {
    const TxnId txn = ev.a;
    const std::uint32_t ci = txn_client_.at(txn);
    WcState& wc = wcs_[ci];
    if (!wc.mt || wc.mt->txn_id != txn || wc.mt->state != MtState::Validating)
      throw SimError("validation finish for a transaction not validating");
    MobileTransaction& mt = *wc.mt;
    const Tick t = ev.tick;

    const std::uint64_t commit_seq = seq_;
    const ValidationOutcome out = validate_and_commit(
        db_, mt, [this](ItemId id) { return item_cycle(id); }, t, seq_);

    PendingResult pr;
    pr.committed = out.committed;
    if (out.committed) {
      res_.commits.push_back({txn, ci, !mt.write_set.empty(), false, t, commit_seq,
                              mt.observed, mt.write_set});
    } else {
      for (const StaleItem& s : out.stale) pr.stale.push_back(s.id);
      if (proto_ != ProtocolId::NxN)
        for (ItemId id : pr.stale) chans_[ch_of_[id]].priority.push_back(id);
    }
    if (trace_on_) {
      TraceRecord r = tr(TraceKind::ValidateDone, t);
      r.txn = txn;
      r.flag = out.committed;
      r.items = pr.stale;
      res_.trace.push_back(std::move(r));
    }
    pending_result_[txn] = std::move(pr);
    push(t + cfg_.backchannel_latency, EvKind::ResultArrive, txn);
    process_grants(locks_.release(txn), t);
  }

  void handle_lock_timeout(const Event& ev) {
    const TxnId txn = ev.a;
    const std::uint32_t ci = txn_client_.at(txn);
    WcState& wc = wcs_[ci];
    // Stale once the request was granted, answered, or re-sent.
    if (!wc.mt || wc.mt->txn_id != txn || wc.validations != ev.b ||
        !locks_.waiting(txn))
      return;
    const Tick t = ev.tick;
    const auto granted = locks_.cancel(txn);
    if (trace_on_) {
      TraceRecord r = tr(TraceKind::Timeout, t);
      r.txn = txn;
      res_.trace.push_back(std::move(r));
    }
    // Conservative rejection: treat the whole observation set as suspect.
    PendingResult pr;
    for (const auto& [id, obs] : wc.mt->observed) pr.stale.push_back(id);
    if (proto_ != ProtocolId::NxN)
      for (ItemId id : pr.stale) chans_[ch_of_[id]].priority.push_back(id);
    pending_result_[txn] = std::move(pr);
    push(t + cfg_.backchannel_latency, EvKind::ResultArrive, txn);
    process_grants(granted, t);
  }

  void handle_result(const Event& ev) {
    const TxnId txn = ev.a;
    const std::uint32_t ci = txn_client_.at(txn);
    WcState& wc = wcs_[ci];
    if (!wc.mt || wc.mt->txn_id != txn)
      throw SimError("validation result for a stale transaction");
    MobileTransaction& mt = *wc.mt;
    const Tick t = ev.tick;
    auto node = pending_result_.extract(txn);
    if (node.empty()) throw SimError("validation result without an outcome");
    const PendingResult pr = std::move(node.mapped());

    if (trace_on_) {
      TraceRecord r = tr(TraceKind::ResultRecv, t);
      r.client = ci;
      r.txn = txn;
      r.flag = pr.committed;
      res_.trace.push_back(std::move(r));
    }

    if (pr.committed) {
      mt.state = MtState::Committed;
      mt.committed_tick = t;
      finalize_sample(ci, t, /*completed=*/true);
      ctls_[ci].plan.clear();
      wc.mt.reset();
      return;
    }

    ++wc.rejections;
    if (proto_ == ProtocolId::NxN) {
      nxn_restart(ci, t);
      return;
    }
    mt.state = MtState::Rereading;
    wc.needed.clear();
    wc.needed.insert(pr.stale.begin(), pr.stale.end());
    if (trace_on_) {
      TraceRecord r = tr(TraceKind::Reread, t);
      r.client = ci;
      r.txn = txn;
      r.items = pr.stale;
      res_.trace.push_back(std::move(r));
    }
  }

  // --- samples ---

  void finalize_sample(std::uint32_t ci, Tick t, bool completed) {
    WcState& wc = wcs_[ci];
    const MobileTransaction& mt = *wc.mt;
    MtSample s;
    s.client = ci;
    s.txn = mt.txn_id;
    s.write = !mt.write_set.empty();
    s.completed = completed;
    s.created = mt.created_tick;
    s.committed = completed ? t : 0;
    double rt = completed ? static_cast<double>(t - mt.created_tick) : 0.0;
    if (completed && proto_ == ProtocolId::Fresh)
      rt += static_cast<double>(wc.checks) * cfg_.check_cost;
    s.rt = rt;
    s.pc_listen = wc.meter.listen_units - wc.mt_baseline.listen_units;
    s.pc_check = wc.meter.check_units - wc.mt_baseline.check_units;
    s.pc_tx = wc.meter.tx_units - wc.mt_baseline.tx_units;
    s.pc_total = s.pc_listen + s.pc_check + (cfg_.include_tx_in_pc ? s.pc_tx : 0.0);
    s.rereads = wc.rereads;
    s.restarts = wc.restarts;
    s.validations = wc.validations;
    s.rejections = wc.rejections;
    res_.mts.push_back(std::move(s));
    if (!completed) ++res_.incomplete_mts;
  }

  SimConfig cfg_;
  ProtocolId proto_;
  FrameLayout layout_;
  OverheadConfig ocfg_;
  EnergyCosts costs_;
  CpDatabase db_;
  std::vector<std::uint32_t> ch_of_;
  ZipfSampler zipf_;
  WorkloadConfig wcfg_;
  bool trace_on_ = false;
  Tick nominal_ = 0;
  Tick timeout_ticks_ = 0;

  std::vector<ChannelState> chans_;
  std::vector<WcState> wcs_;
  std::vector<ClientCtl> ctls_;
  LockTable locks_;

  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  std::uint64_t ord_ = 0;
  std::uint64_t seq_ = 1;
  TxnId next_txn_ = 1;
  std::uint64_t update_n_ = 0;
  std::map<TxnId, ItemId> pending_update_;
  std::map<TxnId, PendingResult> pending_result_;
  std::map<TxnId, std::uint32_t> txn_client_;

  RunResult res_;
};

}  // namespace

RunResult run(const SimConfig& cfg) {
  validate(cfg);
  return Engine(cfg).run();
}

// --- serializability oracle ---

OracleVerdict serializability_oracle(const RunResult& result) {
  OracleVerdict v;
  const auto& hist = result.history;

  // Version counters move in +1 steps with globally unique, increasing seqs.
  std::vector<std::vector<std::uint64_t>> seq_of(hist.size());
  for (std::size_t i = 0; i < hist.size(); ++i) {
    std::uint64_t prev_seq = 0;
    for (std::size_t k = 0; k < hist[i].size(); ++k) {
      const HistEntry& e = hist[i][k];
      if (e.value != k + 1)
        v.counterexamples.push_back(
            {e.writer, "history of item " + std::to_string(i) + " jumps to value " +
                           std::to_string(e.value) + " at step " + std::to_string(k + 1)});
      if (e.seq <= prev_seq)
        v.counterexamples.push_back(
            {e.writer, "history of item " + std::to_string(i) + " is not seq-ordered"});
      prev_seq = e.seq;
      seq_of[i].push_back(e.seq);
    }
  }

  // Value of item i once every update with seq < s has been replayed.
  const auto value_at = [&](ItemId i, std::uint64_t s) -> std::uint64_t {
    const auto& xs = seq_of[i];
    return static_cast<std::uint64_t>(
        std::lower_bound(xs.begin(), xs.end(), s) - xs.begin());
  };

  for (const CommitRecord& c : result.commits) {
    bool matched = c.observed.empty();
    for (const BoundaryMarker& b : result.boundaries) {
      if (matched) break;
      if (b.seq > c.commit_seq) continue;  // reads cannot see past their commit
      bool all = true;
      for (const auto& [id, obs] : c.observed)
        if (value_at(id, b.seq) != obs.value) {
          all = false;
          break;
        }
      matched = all;
    }
    if (!matched)
      v.counterexamples.push_back(
          {c.txn, "no broadcast-boundary snapshot matches the committed read set"});

    for (const auto& [id, val] : c.writes) {
      std::size_t mine = 0;
      bool value_ok = false;
      for (const HistEntry& e : hist[id])
        if (e.writer == c.txn) {
          ++mine;
          value_ok = e.value == val;
        }
      if (mine != 1 || !value_ok)
        v.counterexamples.push_back(
            {c.txn, "write to item " + std::to_string(id) +
                        " is not a single exact version bump in history"});
      auto obs = c.observed.find(id);
      if (obs == c.observed.end() || obs->second.value + 1 != val)
        v.counterexamples.push_back(
            {c.txn, "installed version of item " + std::to_string(id) +
                        " does not extend the observed version"});
    }
  }

  v.pass = v.counterexamples.empty();
  return v;
}

}  // namespace mcd
