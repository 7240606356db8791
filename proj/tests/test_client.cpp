#include <doctest.h>

#include <algorithm>
#include <set>

#include "mcd/client.hpp"
#include "mcd/rng.hpp"

using namespace mcd;

TEST_CASE("energy charges are cost-weighted") {
  EnergyCosts costs{2.0, 0.5, 7.0, true};
  EnergyMeter m;
  charge_listen(m, 10, costs);
  charge_checks(m, 4, costs);
  charge_tx(m, costs);
  CHECK(m.listen_units == doctest::Approx(20.0));
  CHECK(m.check_units == doctest::Approx(2.0));
  CHECK(m.tx_units == doctest::Approx(7.0));
  CHECK(m.total(costs) == doctest::Approx(29.0));

  costs.include_tx = false;
  CHECK(m.total(costs) == doctest::Approx(22.0));
}

TEST_CASE("generated transactions respect the workload shape") {
  WorkloadConfig cfg;
  cfg.n_items = 20;
  cfg.rs_min = 2;
  cfg.rs_max = 5;
  cfg.write_prob = 0.5;

  Rng rng(9, static_cast<std::uint64_t>(RngPurpose::Workload), 0);
  ZipfSampler zipf(cfg.n_items, cfg.zipf_theta);

  std::uint64_t writers = 0;
  for (TxnId txn = 1; txn <= 200; ++txn) {
    MobileTransaction mt = generate_mt(rng, zipf, cfg, txn, /*now=*/txn * 3);
    CHECK(mt.txn_id == txn);
    CHECK(mt.created_tick == txn * 3);
    CHECK(mt.state == MtState::Pending);

    CHECK(mt.read_set.size() >= 2);
    CHECK(mt.read_set.size() <= 5);
    CHECK(std::is_sorted(mt.read_set.begin(), mt.read_set.end()));
    CHECK(std::adjacent_find(mt.read_set.begin(), mt.read_set.end()) ==
          mt.read_set.end());
    for (ItemId id : mt.read_set) CHECK(id < 20);

    for (const auto& [id, v] : mt.write_set) {
      CHECK(std::binary_search(mt.read_set.begin(), mt.read_set.end(), id));
      CHECK(v == 0);  // version filled in by record_observation later
    }
    if (!mt.write_set.empty()) {
      ++writers;
      CHECK(mt.write_set.size() >= 1);
      CHECK(mt.write_set.size() <= mt.read_set.size());
    }
  }
  CHECK(writers > 40);   // write_prob 0.5 over 200 draws
  CHECK(writers < 160);
}

TEST_CASE("identical workload streams generate identical transactions") {
  WorkloadConfig cfg;
  cfg.n_items = 12;
  cfg.rs_min = 1;
  cfg.rs_max = 4;
  cfg.write_prob = 0.3;

  Rng a(5, static_cast<std::uint64_t>(RngPurpose::Workload), 3);
  Rng b(5, static_cast<std::uint64_t>(RngPurpose::Workload), 3);
  ZipfSampler zipf(cfg.n_items, 0.0);
  for (TxnId t = 1; t < 50; ++t) {
    MobileTransaction x = generate_mt(a, zipf, cfg, t, 0);
    MobileTransaction y = generate_mt(b, zipf, cfg, t, 0);
    CHECK(x.read_set == y.read_set);
    CHECK(x.write_set == y.write_set);
  }
}

TEST_CASE("a fixed read set overrides random selection") {
  WorkloadConfig cfg;
  cfg.n_items = 50;
  cfg.fixed_rs = {24};
  cfg.write_prob = 0.0;

  Rng rng(1, 2, 0);
  ZipfSampler zipf(cfg.n_items, 0.0);
  for (TxnId t = 1; t < 5; ++t) {
    MobileTransaction mt = generate_mt(rng, zipf, cfg, t, 0);
    CHECK(mt.read_set == std::vector<ItemId>{24});
    CHECK(mt.write_set.empty());
  }
}

TEST_CASE("skewed popularity favors low item ids") {
  WorkloadConfig cfg;
  cfg.n_items = 10;
  cfg.rs_min = 1;
  cfg.rs_max = 1;
  cfg.zipf_theta = 0.95;

  Rng rng(3, 2, 1);
  ZipfSampler zipf(cfg.n_items, cfg.zipf_theta);
  std::uint64_t head = 0, tail = 0;
  for (TxnId t = 1; t <= 2000; ++t) {
    MobileTransaction mt = generate_mt(rng, zipf, cfg, t, 0);
    if (mt.read_set[0] == 0) ++head;
    if (mt.read_set[0] == 9) ++tail;
  }
  CHECK(head > 3 * tail);
}

TEST_CASE("starting a transaction resets per-phase state") {
  WcState wc;
  wc.client_id = 2;
  wc.needed = {1, 2};
  wc.stamp_view[1] = 5;
  wc.checks = 10;
  wc.rereads = 3;
  wc.meter.listen_units = 40;

  MobileTransaction mt;
  mt.txn_id = 7;
  mt.read_set = {3, 5};
  mt.created_tick = 99;
  begin_mt(wc, mt);

  REQUIRE(wc.mt.has_value());
  CHECK(wc.mt->state == MtState::Listening);
  CHECK(wc.needed == std::set<ItemId>{3, 5});
  CHECK(wc.stamp_view.empty());
  CHECK(wc.checks == 0);
  CHECK(wc.rereads == 0);
  CHECK(wc.awake_since == 99);
  CHECK(wc.mt_baseline.listen_units == doctest::Approx(40.0));
}

TEST_CASE("recording an observation refreshes the intended write version") {
  MobileTransaction mt;
  mt.read_set = {4};
  mt.write_set[4] = 0;
  record_observation(mt, 4, /*value=*/6, /*stamp=*/3, /*channel=*/1);
  CHECK(mt.observed.at(4).value == 6);
  CHECK(mt.observed.at(4).update_cycle == 3);
  CHECK(mt.observed.at(4).channel == 1);
  CHECK(mt.write_set.at(4) == 7);
}
