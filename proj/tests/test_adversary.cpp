#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "eprqkd/adversary.hpp"
#include "eprqkd/analysis.hpp"
#include "eprqkd/errors.hpp"
#include "eprqkd/protocol.hpp"

using namespace eprqkd;

namespace {

std::vector<Signal> second_halves(std::span<const BellLabel> labels) {
  std::vector<Signal> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Signal s;
    s.index = i;
    s.half = Half::second;
    s.carrier = make_bell_state(labels[i]);
    out.push_back(s);
  }
  return out;
}

std::vector<BellLabel> cycle_labels(std::size_t n) {
  std::vector<BellLabel> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back(kAllBellLabels[i % 4]);
  return labels;
}

AttackStrategy attack_of(AttackKind k) {
  AttackStrategy a;
  a.kind = k;
  return a;
}

double eve_mutual_information(const HopResult& r) {
  const auto table = eve_information(r.adversary, r.ledger);
  REQUIRE(table);
  return analysis::mutual_information(table->to_distribution());
}

EveObservation::Kind kind_from_name(const std::string& name) {
  for (auto k : {EveObservation::Kind::z_bit, EveObservation::Kind::bell_outcome,
                 EveObservation::Kind::fake_prepared, EveObservation::Kind::destroyed}) {
    if (to_string(k) == name) return k;
  }
  FAIL("unknown observation kind " << name);
  return EveObservation::Kind::z_bit;
}

}  // namespace

TEST_CASE("attack names") {
  for (AttackKind k : {AttackKind::none, AttackKind::measure_resend, AttackKind::fake_epr,
                       AttackKind::opaque}) {
    CHECK(attack_kind_from_string(to_string(k)) == k);
  }
  CHECK(to_string(AttackKind::measure_resend) == "measure-resend");
  CHECK_THROWS_AS(attack_kind_from_string("photon-splitting"), ConfigError);

  auto bad = attack_of(AttackKind::opaque);
  bad.destroy_probability = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.destroy_probability = -0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("no attack leaves the channel untouched") {
  const auto labels = cycle_labels(16);
  auto signals = second_halves(labels);
  const auto before = signals;
  Adversary eve(attack_of(AttackKind::none));
  RandomSource rng(1, Stream::eve);
  eve.interpose(Transmission::first, signals, rng);
  eve.interpose(Transmission::second, signals, rng);
  for (std::size_t i = 0; i < signals.size(); ++i) {
    CHECK(signals[i].carrier == before[i].carrier);
    CHECK(signals[i].fate == Fate::delivered);
    CHECK_FALSE(signals[i].substitute);
  }
  CHECK(eve.state().empty());
  CHECK(eve.observation_alphabet() == 0);
}

TEST_CASE("measure-resend") {
  SUBCASE("collapses psi1 onto |00> or |11> with equal frequency") {
    std::vector<BellLabel> labels(20'000, BellLabel::psi1);
    auto signals = second_halves(labels);
    Adversary eve(attack_of(AttackKind::measure_resend));
    RandomSource rng(2, Stream::eve);
    eve.interpose(Transmission::first, signals, rng);
    int ones = 0;
    for (const auto& s : signals) {
      const auto b = *eve.observation_symbol(s.index);
      ones += b;
      const auto expected = TwoQubitState::basis(bit_of(b), bit_of(b));
      CHECK(std::abs(std::abs(inner_product(expected, s.carrier)) - 1.0) < 1e-12);
      CHECK(s.fate == Fate::delivered);
    }
    CHECK(std::abs(ones / 20'000.0 - 0.5) < 3.0 * std::sqrt(0.25 / 20'000.0));
    CHECK(eve.state().measurement_log.size() == signals.size());
  }
  SUBCASE("never moves a pair out of its parity class") {
    // Exact: after collapse all Bell weight stays in the prepared class.
    RandomSource rng(3, Stream::eve);
    for (BellLabel l : kAllBellLabels) {
      for (int i = 0; i < 50; ++i) {
        std::vector<BellLabel> one{l};
        auto signals = second_halves(one);
        Adversary eve(attack_of(AttackKind::measure_resend));
        eve.interpose(Transmission::first, signals, rng);
        const auto p = bell_overlap_probabilities(signals[0].carrier);
        double same_class = 0.0;
        for (BellLabel k : kAllBellLabels) {
          if (parity_class(k) == parity_class(l)) same_class += p[code_of(k)];
        }
        CHECK(same_class == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(p[code_of(l)] == doctest::Approx(0.5).epsilon(1e-12));
      }
    }
  }
  SUBCASE("second sequence is left alone unless asked") {
    const auto labels = cycle_labels(8);
    auto signals = second_halves(labels);
    for (auto& s : signals) s.half = Half::first;
    const auto before = signals;
    Adversary eve(attack_of(AttackKind::measure_resend));
    RandomSource rng(4, Stream::eve);
    eve.interpose(Transmission::second, signals, rng);
    for (std::size_t i = 0; i < signals.size(); ++i) CHECK(signals[i].carrier == before[i].carrier);
    CHECK(eve.state().measurement_log.empty());
  }
}

TEST_CASE("fake-EPR substitution") {
  SUBCASE("first-check mismatch probability is exactly one half for every fake label") {
    // Alice Z-measures her genuine half, Bob Z-measures Eve's half. The two
    // pairs are independent, so the joint is a product of marginals.
    for (BellLabel genuine : kAllBellLabels) {
      for (BellLabel fake : kAllBellLabels) {
        const auto pa = z_probabilities(make_bell_state(genuine), Half::first);
        const auto pb = z_probabilities(make_bell_state(fake), Half::second);
        double mismatch = 0.0;
        for (unsigned a = 0; a < 2; ++a)
          for (unsigned b = 0; b < 2; ++b) {
            if ((bit_of(a) ^ bit_of(b)) != parity_class(genuine)) mismatch += pa[a] * pb[b];
          }
        CHECK(mismatch == doctest::Approx(0.5).epsilon(1e-15));
      }
    }
  }
  SUBCASE("empirical first-check rate for every fake label") {
    for (BellLabel fake : kAllBellLabels) {
      ProtocolConfig cfg;
      cfg.pairs = 8000;
      cfg.attack.kind = AttackKind::fake_epr;
      cfg.attack.fake_label = fake;
      const auto r = run_protocol(cfg, RandomSource(10 + code_of(fake), 0));
      const auto& check = *r.ledger.first_report();
      const double sigma = std::sqrt(0.25 / check.sample_indices.size());
      CHECK(std::abs(check.error_rate - 0.5) < 3.0 * sigma);
    }
  }
  SUBCASE("Eve keeps the genuine half and forwards her own") {
    const auto labels = cycle_labels(12);
    auto signals = second_halves(labels);
    Adversary eve(attack_of(AttackKind::fake_epr));
    RandomSource rng(5, Stream::eve);
    eve.interpose(Transmission::first, signals, rng);
    for (std::size_t i = 0; i < signals.size(); ++i) {
      CHECK(signals[i].fate == Fate::substituted);
      REQUIRE(signals[i].substitute);
      CHECK(*signals[i].substitute == make_bell_state(BellLabel::psi1));
      CHECK(signals[i].carrier == make_bell_state(labels[i]));
    }
    CHECK(eve.state().captured_halves.size() == 12);
  }
  SUBCASE("with both genuine halves she reads Alice's labels exactly") {
    ProtocolConfig cfg;
    cfg.pairs = 400;
    cfg.attack.kind = AttackKind::fake_epr;
    cfg.continuation_mode = true;
    const auto r = run_protocol(cfg, RandomSource(6, 0));
    const auto& inferred = r.adversary.state().inferred_key;
    CHECK(inferred.size() == 300);  // every pair not consumed by check one
    for (const auto& [index, label] : inferred) CHECK(label == r.ledger[index].prepared);
  }
  SUBCASE("uniform fake labels") {
    auto a = attack_of(AttackKind::fake_epr);
    a.fake_label_uniform = true;
    std::vector<BellLabel> labels(4000, BellLabel::psi1);
    auto signals = second_halves(labels);
    Adversary eve(a);
    RandomSource rng(7, Stream::eve);
    eve.interpose(Transmission::first, signals, rng);
    std::array<int, 4> counts{};
    for (const auto& s : signals) {
      const auto p = bell_overlap_probabilities(*s.substitute);
      for (unsigned k = 0; k < 4; ++k) counts[k] += p[k] > 0.5;
    }
    for (int c : counts) CHECK(std::abs(c / 4000.0 - 0.25) < 0.03);
  }
}

TEST_CASE("opaque attack") {
  SUBCASE("receipt fraction tracks 1 - p") {
    for (double p : {0.0, 0.1, 0.3, 0.7}) {
      std::vector<BellLabel> labels(10'000, BellLabel::psi2);
      auto signals = second_halves(labels);
      auto a = attack_of(AttackKind::opaque);
      a.destroy_probability = p;
      Adversary eve(a);
      RandomSource rng(8, Stream::eve);
      eve.interpose(Transmission::first, signals, rng);
      int received = 0;
      for (const auto& s : signals) received += s.fate == Fate::delivered;
      const double sigma = std::sqrt(p * (1.0 - p) / 10'000.0);
      CHECK(std::abs(received / 10'000.0 - (1.0 - p)) <= 3.0 * sigma + 1e-12);
      CHECK(eve.state().measurement_log.size() == std::size_t(10'000 - received));
    }
  }
  SUBCASE("survivors are untouched") {
    const auto labels = cycle_labels(200);
    auto signals = second_halves(labels);
    auto a = attack_of(AttackKind::opaque);
    a.destroy_probability = 0.5;
    Adversary eve(a);
    RandomSource rng(9, Stream::eve);
    eve.interpose(Transmission::first, signals, rng);
    for (std::size_t i = 0; i < signals.size(); ++i) {
      if (signals[i].fate == Fate::delivered) CHECK(signals[i].carrier == make_bell_state(labels[i]));
    }
  }
}

TEST_CASE("Eve's knowledge comes only from her own log") {
  for (AttackKind k : {AttackKind::measure_resend, AttackKind::fake_epr, AttackKind::opaque}) {
    for (bool both : {false, true}) {
      auto a = attack_of(k);
      a.measure_second_sequence = both;
      a.destroy_probability = 0.2;
      ProtocolConfig cfg;
      cfg.pairs = 200;
      cfg.attack = a;
      cfg.loss_tolerance = 1.0;
      cfg.continuation_mode = true;
      cfg.second_check.threshold = 1.0;
      Transcript t(true);
      const auto r = run_protocol(cfg, RandomSource(12, 0), &t);
      CAPTURE(to_string(k));

      // Same signals, same stream: identical log.
      const auto again = run_protocol(cfg, RandomSource(12, 0));
      const auto& log = r.adversary.state().measurement_log;
      const auto& log2 = again.adversary.state().measurement_log;
      REQUIRE(log.size() == log2.size());
      for (std::size_t i = 0; i < log.size(); ++i) {
        CHECK(log[i].index == log2[i].index);
        CHECK(log[i].value == log2[i].value);
      }

      // Rebuild the log from the transcript alone and derive the symbols.
      std::vector<EveObservation> from_transcript;
      for (const auto& e : t.events()) {
        if (e.actor != "eve") continue;
        const auto transmission = static_cast<Transmission>(e.payload.at("transmission").get<int>());
        for (const auto& o : e.payload.at("observations")) {
          from_transcript.push_back({o.at(0).get<std::size_t>(), transmission,
                                     kind_from_name(o.at(1).get<std::string>()),
                                     o.at(2).get<std::uint8_t>()});
        }
      }
      CHECK(from_transcript.size() == log.size());
      const auto symbols = symbols_from_log(a, from_transcript);
      for (std::size_t i = 0; i < r.ledger.size(); ++i) {
        const auto direct = r.adversary.observation_symbol(i);
        const auto it = symbols.find(i);
        CHECK(direct.has_value() == (it != symbols.end()));
        if (direct && it != symbols.end()) CHECK(*direct == it->second);
      }
    }
  }
}

TEST_CASE("information Eve gains per attack") {
  ProtocolConfig cfg;
  cfg.pairs = 20'000;
  cfg.continuation_mode = true;
  cfg.second_check.threshold = 1.0;
  SUBCASE("fake-EPR: all of it") {
    cfg.attack.kind = AttackKind::fake_epr;
    const auto r = run_protocol(cfg, RandomSource(20, 0));
    CHECK(std::abs(eve_mutual_information(r) - 2.0) < 0.02);
  }
  SUBCASE("measure-resend on one sequence: nothing") {
    cfg.attack.kind = AttackKind::measure_resend;
    const auto r = run_protocol(cfg, RandomSource(21, 0));
    CHECK(eve_mutual_information(r) < 0.02);
  }
  SUBCASE("measure-resend on both sequences: the parity class") {
    cfg.attack.kind = AttackKind::measure_resend;
    cfg.attack.measure_second_sequence = true;
    const auto r = run_protocol(cfg, RandomSource(22, 0));
    CHECK(std::abs(eve_mutual_information(r) - 1.0) < 0.02);
  }
  SUBCASE("no attack: nothing to score") {
    const auto r = run_protocol(cfg, RandomSource(23, 0));
    CHECK(eve_mutual_information(r) == doctest::Approx(0.0));
  }
}
