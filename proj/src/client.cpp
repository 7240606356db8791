#include "mcd/client.hpp"

#include <algorithm>

namespace mcd {

void charge_listen(EnergyMeter& m, Tick ticks, const EnergyCosts& costs) {
  m.listen_units += static_cast<double>(ticks) * costs.listen;
}

void charge_checks(EnergyMeter& m, std::uint64_t n, const EnergyCosts& costs) {
  m.check_units += static_cast<double>(n) * costs.check;
}

void charge_tx(EnergyMeter& m, const EnergyCosts& costs) { m.tx_units += costs.tx; }

MobileTransaction generate_mt(Rng& rng, const ZipfSampler& zipf, const WorkloadConfig& cfg,
                              TxnId txn_id, Tick now) {
  if (cfg.n_items == 0) throw SimError("generate_mt: empty database");
  MobileTransaction mt;
  mt.txn_id = txn_id;
  mt.created_tick = now;
  mt.state = MtState::Pending;

  if (!cfg.fixed_rs.empty()) {
    mt.read_set = cfg.fixed_rs;
  } else {
    const std::uint32_t upper = std::min(cfg.rs_max, cfg.n_items);
    const std::uint32_t k =
        static_cast<std::uint32_t>(rng.range(cfg.rs_min, std::max(cfg.rs_min, upper)));
    std::set<ItemId> picked;
    while (picked.size() < k)
      picked.insert(static_cast<ItemId>(zipf.sample(rng)));
    mt.read_set.assign(picked.begin(), picked.end());
  }
  std::sort(mt.read_set.begin(), mt.read_set.end());
  mt.read_set.erase(std::unique(mt.read_set.begin(), mt.read_set.end()), mt.read_set.end());

  if (cfg.write_prob > 0 && rng.bernoulli(cfg.write_prob)) {
    // Non-empty write subset of the read set; values filled as reads land.
    const std::uint64_t k = rng.range(1, mt.read_set.size());
    std::vector<ItemId> pool = mt.read_set;
    for (std::uint64_t i = 0; i < k; ++i) {
      const std::uint64_t j = rng.below(pool.size());
      mt.write_set.emplace(pool[j], 0);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(j));
    }
  }
  return mt;
}

void begin_mt(WcState& wc, MobileTransaction mt) {
  wc.needed.clear();
  wc.needed.insert(mt.read_set.begin(), mt.read_set.end());
  wc.stamp_view.clear();
  wc.checks = 0;
  wc.awake_since = mt.created_tick;
  wc.rereads = 0;
  wc.restarts = 0;
  wc.validations = 0;
  wc.rejections = 0;
  wc.mt_baseline = wc.meter;
  mt.state = MtState::Listening;
  wc.mt = std::move(mt);
}

void record_observation(MobileTransaction& mt, ItemId id, std::uint64_t value, Cycle stamp,
                        std::uint32_t channel) {
  mt.observed[id] = {value, stamp, channel};
  auto ws = mt.write_set.find(id);
  if (ws != mt.write_set.end()) ws->second = value + 1;
}

}  // namespace mcd
