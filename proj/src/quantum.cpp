#include "eprqkd/quantum.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "eprqkd/errors.hpp"

namespace eprqkd {

namespace {

constexpr double kInvSqrt2 = std::numbers::sqrt2 / 2.0;

// Index into the amplitude array for |first second>.
constexpr std::size_t basis_index(unsigned first, unsigned second) { return first * 2 + second; }

constexpr unsigned bit_at(std::size_t index, Half which) {
  return which == Half::first ? static_cast<unsigned>(index >> 1) : static_cast<unsigned>(index & 1);
}

}  // namespace

BellLabel label_from_code(unsigned code) {
  if (code > 3) throw ValidationError("Bell code out of range: " + std::to_string(code));
  return static_cast<BellLabel>(code);
}

std::string_view to_string(BellLabel l) {
  switch (l) {
    case BellLabel::psi1: return "psi1";
    case BellLabel::psi2: return "psi2";
    case BellLabel::psi3: return "psi3";
    case BellLabel::psi4: return "psi4";
  }
  throw InternalError("unknown Bell label");
}

BellLabel bell_label_from_string(std::string_view name) {
  for (BellLabel l : kAllBellLabels) {
    if (to_string(l) == name) return l;
  }
  throw ValidationError("unknown Bell label: " + std::string(name));
}

TwoQubitState TwoQubitState::from_amplitudes(const std::array<Amplitude, 4>& amps) {
  TwoQubitState s(amps);
  if (std::abs(s.norm_squared() - 1.0) > kNormTolerance) {
    throw ValidationError("two-qubit state is not normalized");
  }
  return s;
}

TwoQubitState TwoQubitState::basis(Bit first, Bit second) {
  std::array<Amplitude, 4> amps{};
  amps[basis_index(to_int(first), to_int(second))] = 1.0;
  return TwoQubitState(amps);
}

double TwoQubitState::norm_squared() const {
  double n = 0.0;
  for (const auto& a : amps_) n += std::norm(a);
  return n;
}

Amplitude inner_product(const TwoQubitState& a, const TwoQubitState& b) {
  Amplitude sum = 0.0;
  for (std::size_t i = 0; i < 4; ++i) sum += std::conj(a[i]) * b[i];
  return sum;
}

TwoQubitState make_bell_state(BellLabel label) {
  const double h = kInvSqrt2;
  switch (label) {
    case BellLabel::psi1: return TwoQubitState::from_amplitudes({h, 0.0, 0.0, h});
    case BellLabel::psi2: return TwoQubitState::from_amplitudes({h, 0.0, 0.0, -h});
    case BellLabel::psi3: return TwoQubitState::from_amplitudes({0.0, h, h, 0.0});
    case BellLabel::psi4: return TwoQubitState::from_amplitudes({0.0, -h, h, 0.0});
  }
  throw InternalError("unknown Bell label");
}

std::array<double, 2> z_probabilities(const TwoQubitState& state, Half which) {
  std::array<double, 2> p{0.0, 0.0};
  for (std::size_t i = 0; i < 4; ++i) p[bit_at(i, which)] += std::norm(state[i]);
  return p;
}

ZMeasurement measure_qubit_z(const TwoQubitState& state, Half which, RandomSource& rng) {
  const auto p = z_probabilities(state, which);
  // u in [0,1): a zero-probability outcome can never be selected.
  const unsigned outcome = rng.uniform() < p[0] ? 0u : 1u;
  if (p[outcome] <= 0.0) throw InternalError("sampled a zero-probability Z outcome");

  const double scale = 1.0 / std::sqrt(p[outcome]);
  std::array<Amplitude, 4> projected{};
  for (std::size_t i = 0; i < 4; ++i) {
    if (bit_at(i, which) == outcome) projected[i] = state[i] * scale;
  }
  return {bit_of(outcome), TwoQubitState::from_amplitudes(projected)};
}

std::array<double, 4> bell_overlap_probabilities(const TwoQubitState& state) {
  std::array<double, 4> p{};
  for (BellLabel l : kAllBellLabels) {
    p[code_of(l)] = std::norm(inner_product(make_bell_state(l), state));
  }
  return p;
}

BellMeasurement measure_bell_basis(const TwoQubitState& state, RandomSource& rng) {
  const auto p = bell_overlap_probabilities(state);
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t chosen = 4;
  std::size_t last_nonzero = 4;
  for (std::size_t k = 0; k < 4; ++k) {
    if (p[k] <= 0.0) continue;
    last_nonzero = k;
    cumulative += p[k];
    if (u < cumulative) {
      chosen = k;
      break;
    }
  }
  // Rounding can leave the cumulative sum a hair under 1.
  if (chosen == 4) chosen = last_nonzero;
  if (chosen == 4) throw InternalError("Bell measurement on a zero state");

  const auto label = static_cast<BellLabel>(chosen);
  return {label, make_bell_state(label)};
}

}  // namespace eprqkd
