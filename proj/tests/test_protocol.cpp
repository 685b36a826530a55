#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "eprqkd/errors.hpp"
#include "eprqkd/protocol.hpp"

using namespace eprqkd;

namespace {

struct Hop {
  HopStreams streams;
  Adversary eve;
  PairLedger ledger;
};

Hop start(std::size_t n, AttackStrategy attack, std::uint64_t seed = 1) {
  HopStreams s = HopStreams::for_hop(RandomSource(seed, 0), 1);
  auto ledger = alice_prepare(n, s.sender);
  return {std::move(s), Adversary(attack), std::move(ledger)};
}

AttackStrategy attack_of(AttackKind k) {
  AttackStrategy a;
  a.kind = k;
  return a;
}

bool is_product_state(const TwoQubitState& s) {
  for (unsigned a = 0; a < 2; ++a)
    for (unsigned b = 0; b < 2; ++b) {
      if (std::abs(std::abs(inner_product(TwoQubitState::basis(bit_of(a), bit_of(b)), s)) - 1.0) < 1e-12) {
        return true;
      }
    }
  return false;
}

CheckPolicy policy(double fraction, double threshold = 0.02, std::size_t min_sample = 16) {
  return {fraction, min_sample, threshold};
}

}  // namespace

TEST_CASE("alice_prepare") {
  RandomSource rng(42, Stream::alice);
  SUBCASE("structure") {
    const auto ledger = alice_prepare(4, rng);
    REQUIRE(ledger.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(ledger[i].index == i);
      CHECK(std::abs(ledger[i].carrier.norm_squared() - 1.0) < 1e-12);
      CHECK(ledger[i].carrier == make_bell_state(ledger[i].prepared));
      CHECK(ledger[i].disposition == Disposition::prepared);
    }
    CHECK_NOTHROW(validate_ledger(ledger));
  }
  SUBCASE("single pair stays with the sender") {
    const auto ledger = alice_prepare(1, rng);
    REQUIRE(ledger.size() == 1);
    CHECK(ledger[0].custody[0] == Holder::sender);
    CHECK(ledger[0].custody[1] == Holder::sender);
  }
  SUBCASE("zero pairs is a configuration error") {
    CHECK_THROWS_AS(alice_prepare(0, rng), ConfigError);
  }
  SUBCASE("labels are uniform") {
    // 3 sigma of a 1/4 proportion at n = 1e5 is 0.0041, well inside 0.01.
    const auto ledger = alice_prepare(100'000, rng);
    std::array<int, 4> counts{};
    for (const auto& r : ledger.records()) ++counts[code_of(r.prepared)];
    for (int c : counts) CHECK(std::abs(c / 1e5 - 0.25) < 0.01);
  }
}

TEST_CASE("check sample size") {
  CHECK(policy(0.25).sample_size(100) == 25);
  CHECK(policy(0.25).sample_size(64) == 16);
  CHECK(policy(0.25).sample_size(40) == 16);   // floor of 16
  CHECK(policy(0.25).sample_size(10) == 10);   // capped at what exists
  CHECK(policy(0.1, 0.02, 0).sample_size(30) == 3);
  CHECK(policy(0.25, 0.02, 0).sample_size(75) == 19);
  CHECK_THROWS_AS(policy(0.0).validate(), ConfigError);
  CHECK_THROWS_AS(policy(1.0).validate(), ConfigError);
  CHECK_THROWS_AS(policy(0.5, 1.5).validate(), ConfigError);
}

TEST_CASE("transmit_first_sequence") {
  SUBCASE("identity channel") {
    auto h = start(50, attack_of(AttackKind::none));
    const auto before = h.ledger.records();
    const auto receipt = transmit_first_sequence(h.ledger, h.eve, h.streams.eve);
    CHECK(receipt.sent == 50);
    CHECK(receipt.received == 50);
    for (std::size_t i = 0; i < 50; ++i) {
      CHECK(h.ledger[i].custody[0] == Holder::sender);
      CHECK(h.ledger[i].custody[1] == Holder::receiver);
      CHECK(h.ledger[i].carrier == before[i].carrier);
      CHECK(h.ledger[i].disposition == Disposition::in_flight_1);
    }
    CHECK(h.eve.state().empty());
  }
  SUBCASE("measure-resend collapses every pair") {
    auto h = start(50, attack_of(AttackKind::measure_resend));
    transmit_first_sequence(h.ledger, h.eve, h.streams.eve);
    for (const auto& r : h.ledger.records()) {
      CHECK(r.custody[1] == Holder::receiver);
      CHECK(is_product_state(r.carrier));
    }
  }
  SUBCASE("opaque with certain destruction leaves Bob nothing") {
    auto a = attack_of(AttackKind::opaque);
    a.destroy_probability = 1.0;
    auto h = start(50, a);
    const auto receipt = transmit_first_sequence(h.ledger, h.eve, h.streams.eve);
    CHECK(receipt.received == 0);
    CHECK(h.ledger.count(Disposition::dropped) == 50);
    CHECK_THROWS_AS(first_check(h.ledger, policy(0.25), h.streams.receiver, h.streams.sender),
                    ConfigError);
  }
  SUBCASE("cannot be sent twice") {
    auto h = start(5, attack_of(AttackKind::none));
    transmit_first_sequence(h.ledger, h.eve, h.streams.eve);
    CHECK_THROWS_AS(transmit_first_sequence(h.ledger, h.eve, h.streams.eve), ProtocolOrderError);
  }
}

TEST_CASE("first_check") {
  SUBCASE("clean channel never mismatches") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto h = start(200, attack_of(AttackKind::none), seed);
      transmit_first_sequence(h.ledger, h.eve, h.streams.eve);
      const auto r = first_check(h.ledger, policy(0.25), h.streams.receiver, h.streams.sender);
      CHECK(r.mismatches == 0);
      CHECK(r.error_rate == 0.0);
      CHECK(r.passed);
      CHECK(r.sample_indices.size() == 50);
      CHECK(h.ledger.count(Disposition::checked_1) == 50);
      CHECK(std::is_sorted(r.sample_indices.begin(), r.sample_indices.end()));
    }
  }
  SUBCASE("measure-resend is invisible here") {
    auto h = start(4000, attack_of(AttackKind::measure_resend));
    transmit_first_sequence(h.ledger, h.eve, h.streams.eve);
    const auto r = first_check(h.ledger, policy(0.25), h.streams.receiver, h.streams.sender);
    CHECK(r.error_rate == 0.0);
  }
  SUBCASE("fake pairs mismatch half the time") {
    auto h = start(4000, attack_of(AttackKind::fake_epr));
    transmit_first_sequence(h.ledger, h.eve, h.streams.eve);
    const auto r = first_check(h.ledger, policy(0.25), h.streams.receiver, h.streams.sender);
    REQUIRE(r.sample_indices.size() == 1000);
    CHECK(std::abs(r.error_rate - 0.5) < 0.05);
    CHECK_FALSE(r.passed);
  }
  SUBCASE("out of order") {
    auto h = start(10, attack_of(AttackKind::none));
    CHECK_THROWS_AS(first_check(h.ledger, policy(0.25), h.streams.receiver, h.streams.sender),
                    ProtocolOrderError);
  }
}

TEST_CASE("second transmission and decoding") {
  SUBCASE("clean: Bob holds whole pairs and decodes Alice's labels") {
    auto h = start(300, attack_of(AttackKind::none));
    transmit_first_sequence(h.ledger, h.eve, h.streams.eve);
    first_check(h.ledger, policy(0.25), h.streams.receiver, h.streams.sender);
    transmit_second_sequence(h.ledger, h.eve, h.streams.eve);
    for (const auto& r : h.ledger.records()) {
      if (r.disposition != Disposition::in_flight_2) continue;
      CHECK(r.custody[0] == Holder::receiver);
      CHECK(r.custody[1] == Holder::receiver);
    }
    bob_decode(h.ledger, h.streams.receiver);
    for (const auto& r : h.ledger.records()) {
      if (r.disposition == Disposition::checked_1) {
        CHECK_FALSE(r.decoded.has_value());
        continue;
      }
      REQUIRE(r.decoded.has_value());
      CHECK(*r.decoded == r.prepared);
    }
  }
  SUBCASE("a failed first check blocks the second sequence") {
    auto h = start(400, attack_of(AttackKind::fake_epr));
    transmit_first_sequence(h.ledger, h.eve, h.streams.eve);
    const auto r = first_check(h.ledger, policy(0.25), h.streams.receiver, h.streams.sender);
    REQUIRE_FALSE(r.passed);
    CHECK_THROWS_AS(transmit_second_sequence(h.ledger, h.eve, h.streams.eve), ProtocolOrderError);
    CHECK_NOTHROW(transmit_second_sequence(h.ledger, h.eve, h.streams.eve,
                                           OrderPolicy::continue_after_failure));
    // Eve now holds both genuine halves of every pair she intercepted.
    for (const auto& rec : h.ledger.records()) {
      if (rec.disposition != Disposition::in_flight_2) continue;
      CHECK(rec.custody[0] == Holder::eve);
      CHECK(rec.custody[1] == Holder::eve);
    }
  }
  SUBCASE("decoding requires the second sequence") {
    auto h = start(50, attack_of(AttackKind::none));
    transmit_first_sequence(h.ledger, h.eve, h.streams.eve);
    first_check(h.ledger, policy(0.25), h.streams.receiver, h.streams.sender);
    CHECK_THROWS_AS(bob_decode(h.ledger, h.streams.receiver), ProtocolOrderError);
  }
  SUBCASE("measure-resend on psi1 decodes to psi1 or psi2 evenly") {
    std::vector<BellLabel> labels(20'000, BellLabel::psi1);
    HopStreams s = HopStreams::for_hop(RandomSource(8, 0), 1);
    auto ledger = prepare_pairs(labels);
    Adversary eve(attack_of(AttackKind::measure_resend));
    transmit_first_sequence(ledger, eve, s.eve);
    first_check(ledger, policy(0.25), s.receiver, s.sender);
    transmit_second_sequence(ledger, eve, s.eve);
    bob_decode(ledger, s.receiver);
    std::array<int, 4> counts{};
    int decoded = 0;
    for (const auto& r : ledger.records()) {
      if (!r.decoded) continue;
      ++decoded;
      ++counts[code_of(*r.decoded)];
    }
    CHECK(counts[2] == 0);
    CHECK(counts[3] == 0);
    CHECK(std::abs(counts[0] / double(decoded) - 0.5) < 0.02);
  }
  SUBCASE("measure-resend keeps every decoded label in its parity class") {
    auto h = start(5000, attack_of(AttackKind::measure_resend), 17);
    transmit_first_sequence(h.ledger, h.eve, h.streams.eve);
    first_check(h.ledger, policy(0.25), h.streams.receiver, h.streams.sender);
    transmit_second_sequence(h.ledger, h.eve, h.streams.eve);
    bob_decode(h.ledger, h.streams.receiver);
    for (const auto& r : h.ledger.records()) {
      if (r.decoded) CHECK(parity_class(*r.decoded) == parity_class(r.prepared));
    }
  }
}

TEST_CASE("second_check error rates") {
  auto run_to_second = [](AttackKind k, std::size_t n, OrderPolicy order) {
    auto h = start(n, attack_of(k), 23);
    transmit_first_sequence(h.ledger, h.eve, h.streams.eve);
    first_check(h.ledger, policy(0.25), h.streams.receiver, h.streams.sender);
    transmit_second_sequence(h.ledger, h.eve, h.streams.eve, order);
    bob_decode(h.ledger, h.streams.receiver);
    // 4000 pairs -> 3000 decoded -> sample of 1000.
    return std::pair{second_check(h.ledger, policy(1.0 / 3.0), h.streams.receiver), std::move(h)};
  };
  SUBCASE("clean") {
    auto [r, h] = run_to_second(AttackKind::none, 4000, OrderPolicy::strict);
    CHECK(r.error_rate == 0.0);
    CHECK(r.passed);
    CHECK(h.ledger.count(Disposition::key) == 2000);
  }
  SUBCASE("measure-resend") {
    auto [r, h] = run_to_second(AttackKind::measure_resend, 4000, OrderPolicy::strict);
    REQUIRE(r.sample_indices.size() == 1000);
    CHECK(std::abs(r.error_rate - 0.5) < 0.05);
    CHECK_FALSE(r.passed);
    CHECK(h.ledger.count(Disposition::key) == 0);
    CHECK_THROWS_AS(extract_key(h.ledger), ProtocolOrderError);
  }
  SUBCASE("fake-EPR continued past the first check") {
    // Bob decodes Eve's psi1 pairs; Alice's labels are uniform, so a
    // mismatch occurs unless Alice also chose psi1: probability 3/4.
    auto [r, h] = run_to_second(AttackKind::fake_epr, 4000, OrderPolicy::continue_after_failure);
    REQUIRE(r.sample_indices.size() == 1000);
    CHECK(std::abs(r.error_rate - 0.75) < 0.05);
  }
}

TEST_CASE("extract_key") {
  SUBCASE("codes are 00 01 10 11") {
    KeyMaterial k;
    append_code(k, BellLabel::psi1, 0);
    append_code(k, BellLabel::psi3, 1);
    append_code(k, BellLabel::psi4, 2);
    CHECK(k.to_string() == "001011");
    CHECK(k.source_indices == std::vector<std::size_t>{0, 1, 2});
  }
  SUBCASE("key bits follow the kept pairs in ledger order") {
    std::vector<BellLabel> labels;
    for (int i = 0; i < 40; ++i) labels.push_back(kAllBellLabels[(i * 7 + 3) % 4]);
    HopStreams s = HopStreams::for_hop(RandomSource(3, 0), 1);
    auto ledger = prepare_pairs(labels);
    Adversary eve(attack_of(AttackKind::none));
    transmit_first_sequence(ledger, eve, s.eve);
    first_check(ledger, policy(0.1, 0.02, 0), s.receiver, s.sender);
    transmit_second_sequence(ledger, eve, s.eve);
    bob_decode(ledger, s.receiver);
    second_check(ledger, policy(0.1, 0.02, 0), s.receiver);
    const auto keys = extract_key(ledger);
    CHECK(keys.agree());
    CHECK(keys.sender.bits.size() == 2 * keys.sender.source_indices.size());
    std::string expected;
    for (std::size_t i : keys.sender.source_indices) {
      const auto c = code_of(labels[i]);
      expected += (c & 2) ? '1' : '0';
      expected += (c & 1) ? '1' : '0';
    }
    CHECK(keys.receiver.to_string() == expected);
    CHECK(std::is_sorted(keys.sender.source_indices.begin(), keys.sender.source_indices.end()));
  }
  SUBCASE("before the checks") {
    auto h = start(20, attack_of(AttackKind::none));
    CHECK_THROWS_AS(extract_key(h.ledger), ProtocolOrderError);
  }
}

TEST_CASE("run_protocol outcomes") {
  ProtocolConfig cfg;
  cfg.pairs = 2000;
  SUBCASE("no attack") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto r = run_protocol(cfg, RandomSource(seed, 0));
      CHECK_FALSE(r.aborted());
      REQUIRE(r.keys);
      CHECK(r.keys->agree());
      CHECK(r.ledger.first_report()->error_rate == 0.0);
      CHECK(r.ledger.second_report()->error_rate == 0.0);
      CHECK(key_efficiency(r).value() == 1.0);
    }
  }
  SUBCASE("measure-resend passes check one and fails check two") {
    cfg.attack.kind = AttackKind::measure_resend;
    cfg.second_check.threshold = 0.05;
    const auto r = run_protocol(cfg, RandomSource(1, 0));
    CHECK(r.ledger.first_report()->passed);
    CHECK_FALSE(r.ledger.second_report()->passed);
    CHECK(r.abort_reason == AbortReason::second_check_failed);
    CHECK_FALSE(r.keys);
  }
  SUBCASE("fake-EPR is stopped at check one") {
    cfg.attack.kind = AttackKind::fake_epr;
    const auto r = run_protocol(cfg, RandomSource(1, 0));
    CHECK(r.abort_reason == AbortReason::first_check_failed);
    CHECK_FALSE(r.second_receipt);
    CHECK(r.ledger.phase() == Phase::aborted);
  }
  SUBCASE("opaque losses stall the run") {
    cfg.attack.kind = AttackKind::opaque;
    cfg.attack.destroy_probability = 0.3;
    const auto r = run_protocol(cfg, RandomSource(1, 0));
    CHECK(r.abort_reason == AbortReason::stalled_first_transmission);
    CHECK_FALSE(r.ledger.first_report());
  }
  SUBCASE("invalid configuration") {
    cfg.pairs = 0;
    CHECK_THROWS_AS(run_protocol(cfg, RandomSource(1, 0)), ConfigError);
  }
}

TEST_CASE("fake-EPR detection with a 20-pair first check") {
  // Per-pair miss probability 1/2, so a run escapes with probability 2^-20.
  ProtocolConfig cfg;
  cfg.pairs = 80;
  cfg.first_check = {0.25, 16, 0.02};
  cfg.attack.kind = AttackKind::fake_epr;
  int detected = 0;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const auto r = run_protocol(cfg, RandomSource(seed, 0));
    REQUIRE(r.ledger.first_report()->sample_indices.size() == 20);
    detected += r.abort_reason == AbortReason::first_check_failed;
  }
  CHECK(detected == 2000);
}

TEST_CASE("ledger invariants hold for every attack") {
  for (AttackKind k : {AttackKind::none, AttackKind::measure_resend, AttackKind::fake_epr,
                       AttackKind::opaque}) {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
      ProtocolConfig cfg;
      cfg.pairs = 150 + seed * 13;
      cfg.attack.kind = k;
      cfg.attack.destroy_probability = 0.1;
      cfg.loss_tolerance = k == AttackKind::opaque ? 0.5 : 0.0;
      cfg.continuation_mode = seed % 2 == 1;
      const auto r = run_protocol(cfg, RandomSource(seed, 0));
      CAPTURE(to_string(k));
      CHECK_NOTHROW(validate_ledger(r.ledger));

      const auto& l = r.ledger;
      CHECK(l.count(Disposition::checked_1) + l.count(Disposition::checked_2) +
                l.count(Disposition::key) + l.count(Disposition::dropped) ==
            l.size());

      std::set<std::size_t> sampled;
      if (l.first_report()) sampled.insert(l.first_report()->sample_indices.begin(),
                                           l.first_report()->sample_indices.end());
      if (l.second_report()) sampled.insert(l.second_report()->sample_indices.begin(),
                                            l.second_report()->sample_indices.end());
      if (r.keys) {
        const auto& idx = r.keys->sender.source_indices;
        CHECK(std::is_sorted(idx.begin(), idx.end()));
        CHECK(std::adjacent_find(idx.begin(), idx.end()) == idx.end());
        CHECK(idx == r.keys->receiver.source_indices);
        for (std::size_t i : idx) CHECK(sampled.count(i) == 0);
      }
      if (k == AttackKind::none) {
        REQUIRE(r.keys);
        CHECK(r.keys->agree());
      }
    }
  }
}

TEST_CASE("transcript replays bit for bit and follows protocol order") {
  ProtocolConfig cfg;
  cfg.pairs = 120;
  cfg.attack.kind = AttackKind::measure_resend;
  cfg.second_check.threshold = 1.0;
  Transcript a(true, 4);
  Transcript b(true, 4);
  run_protocol(cfg, RandomSource(99, 0), &a);
  run_protocol(cfg, RandomSource(99, 0), &b);
  CHECK(a.to_jsonl() == b.to_jsonl());
  REQUIRE(!a.events().empty());

  int last_step = 0;
  for (const auto& e : a.events()) {
    CHECK(e.step >= last_step);
    last_step = e.step;
    CHECK(e.trial == 4);
  }
  CHECK(a.events().front().event == "prepare");
  CHECK(a.events().back().event == "commit");

  // Round trip through the line format.
  const auto text = a.to_jsonl();
  const auto first_line = text.substr(0, text.find('\n'));
  const auto parsed = parse_transcript_line(first_line);
  CHECK(parsed.actor == "alice");
  CHECK(parsed.step == 1);
  CHECK_THROWS_AS(parse_transcript_line("{not json"), ValidationError);

  Transcript off(false);
  run_protocol(cfg, RandomSource(99, 0), &off);
  CHECK(off.events().empty());
}

TEST_CASE("three-party relay") {
  std::array<ProtocolConfig, 2> cfg;
  cfg[0].pairs = 100;
  SUBCASE("clean chain gives one common key") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto r = run_multiparty(cfg, RandomSource(seed, 0));
      REQUIRE(r.hops.size() == 2);
      REQUIRE(r.common_key);
      CHECK(r.common_key->identical());
      CHECK(r.common_key->alice == r.common_key->bob);
      // Bookkeeping identity: two bits per hop-2 key pair.
      CHECK(r.common_key->alice.bits.size() == 2 * r.hops[1].ledger.count(Disposition::key));
      CHECK(r.hops[1].ledger.size() == r.hops[0].ledger.count(Disposition::key));
      // Hop 1: 100 -> 25 checked -> 75 -> 19 checked -> 56 pairs.
      CHECK(r.hops[0].ledger.count(Disposition::key) == 56);
      // Hop 2: 56 -> 16 -> 40 -> 16 -> 24 pairs.
      CHECK(r.hops[1].ledger.count(Disposition::key) == 24);
      for (std::size_t origin : r.common_key->alice.source_indices) {
        CHECK(r.hops[0].ledger[origin].disposition == Disposition::key);
      }
    }
  }
  SUBCASE("measure-resend on the relay hop kills the common key") {
    cfg[0].pairs = 2000;
    cfg[1].attack.kind = AttackKind::measure_resend;
    const auto r = run_multiparty(cfg, RandomSource(5, 0));
    REQUIRE(r.hops.size() == 2);
    CHECK_FALSE(r.hops[0].aborted());
    CHECK(r.hops[1].abort_reason == AbortReason::second_check_failed);
    CHECK_FALSE(r.common_key);
  }
  SUBCASE("abort on hop one stops the chain") {
    cfg[0].attack.kind = AttackKind::fake_epr;
    const auto r = run_multiparty(cfg, RandomSource(5, 0));
    CHECK(r.hops.size() == 1);
    CHECK_FALSE(r.common_key);
  }
}
