#include "eprqkd/adversary.hpp"

#include <string>

#include "eprqkd/errors.hpp"

namespace eprqkd {

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::none: return "none";
    case AttackKind::measure_resend: return "measure-resend";
    case AttackKind::fake_epr: return "fake-epr";
    case AttackKind::opaque: return "opaque";
  }
  throw InternalError("unknown attack kind");
}

AttackKind attack_kind_from_string(std::string_view name) {
  for (auto k : {AttackKind::none, AttackKind::measure_resend, AttackKind::fake_epr,
                 AttackKind::opaque}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown attack: " + std::string(name));
}

std::string_view to_string(EveObservation::Kind kind) {
  switch (kind) {
    case EveObservation::Kind::z_bit: return "z_bit";
    case EveObservation::Kind::bell_outcome: return "bell_outcome";
    case EveObservation::Kind::fake_prepared: return "fake_prepared";
    case EveObservation::Kind::destroyed: return "destroyed";
  }
  throw InternalError("unknown observation kind");
}

void AttackStrategy::validate() const {
  if (!(destroy_probability >= 0.0 && destroy_probability <= 1.0)) {
    throw ConfigError("destroy probability must lie in [0, 1]");
  }
}

Adversary::Adversary(AttackStrategy strategy) : strategy_(strategy) { strategy_.validate(); }

void Adversary::interpose(Transmission transmission, std::span<Signal> signals,
                          RandomSource& rng) {
  for (Signal& s : signals) {
    switch (strategy_.kind) {
      case AttackKind::none: break;
      case AttackKind::measure_resend: measure_resend(transmission, s, rng); break;
      case AttackKind::fake_epr: fake_epr(transmission, s, rng); break;
      case AttackKind::opaque: opaque(transmission, s, rng); break;
    }
  }
  symbols_ = symbols_from_log(strategy_, eve_.measurement_log);
}

void Adversary::measure_resend(Transmission transmission, Signal& s, RandomSource& rng) {
  if (transmission == Transmission::second && !strategy_.measure_second_sequence) return;
  auto m = measure_qubit_z(s.carrier, s.half, rng);
  s.carrier = m.post_state;
  s.fate = Fate::delivered;
  eve_.measurement_log.push_back(
      {s.index, transmission, EveObservation::Kind::z_bit, to_int(m.outcome)});
}

void Adversary::fake_epr(Transmission transmission, Signal& s, RandomSource& rng) {
  if (transmission == Transmission::first) {
    const BellLabel fake = strategy_.fake_label_uniform
                               ? static_cast<BellLabel>(rng.uniform_index(4))
                               : strategy_.fake_label;
    s.substitute = make_bell_state(fake);
    s.fate = Fate::substituted;
    eve_.captured_halves.push_back({s.index, s.half});
    eve_.measurement_log.push_back(
        {s.index, transmission, EveObservation::Kind::fake_prepared, code_of(fake)});
    return;
  }

  // Second pass: she already holds the partner of this particle, so taking
  // this one completes the genuine pair. Her fake partner goes on to Bob.
  if (!s.substitute) return;
  s.fate = Fate::substituted;
  eve_.captured_halves.push_back({s.index, s.half});
  auto m = measure_bell_basis(s.carrier, rng);
  s.carrier = m.post_state;
  eve_.measurement_log.push_back(
      {s.index, transmission, EveObservation::Kind::bell_outcome, code_of(m.outcome)});
  eve_.inferred_key[s.index] = m.outcome;
}

void Adversary::opaque(Transmission transmission, Signal& s, RandomSource& rng) {
  if (rng.bernoulli(strategy_.destroy_probability)) {
    s.fate = Fate::destroyed;
    eve_.measurement_log.push_back({s.index, transmission, EveObservation::Kind::destroyed, 0});
  }
}

std::optional<std::uint8_t> Adversary::observation_symbol(std::size_t index) const {
  auto it = symbols_.find(index);
  if (it == symbols_.end()) return std::nullopt;
  return it->second;
}

std::size_t Adversary::observation_alphabet() const {
  switch (strategy_.kind) {
    case AttackKind::measure_resend: return strategy_.measure_second_sequence ? 6 : 2;
    case AttackKind::fake_epr: return 4;
    case AttackKind::none:
    case AttackKind::opaque: return 0;
  }
  return 0;
}

std::map<std::size_t, std::uint8_t> symbols_from_log(const AttackStrategy& strategy,
                                                     std::span<const EveObservation> log) {
  std::map<std::size_t, std::uint8_t> symbols;
  switch (strategy.kind) {
    case AttackKind::fake_epr:
      for (const auto& o : log) {
        if (o.kind == EveObservation::Kind::bell_outcome) symbols[o.index] = o.value;
      }
      break;
    case AttackKind::measure_resend: {
      // Z bit of the second half from the first pass; with the both-sequence
      // variant, the first half's bit arrives on the second pass.
      std::map<std::size_t, std::uint8_t> second_half_bit;
      std::map<std::size_t, std::uint8_t> first_half_bit;
      for (const auto& o : log) {
        if (o.kind != EveObservation::Kind::z_bit) continue;
        (o.transmission == Transmission::first ? second_half_bit : first_half_bit)[o.index] =
            o.value;
      }
      for (const auto& [index, b] : second_half_bit) {
        if (!strategy.measure_second_sequence) {
          symbols[index] = b;
        } else if (auto a = first_half_bit.find(index); a != first_half_bit.end()) {
          symbols[index] = static_cast<std::uint8_t>(2 * a->second + b);
        } else {
          symbols[index] = static_cast<std::uint8_t>(4 + b);
        }
      }
      break;
    }
    case AttackKind::none:
    case AttackKind::opaque: break;
  }
  return symbols;
}

}  // namespace eprqkd
