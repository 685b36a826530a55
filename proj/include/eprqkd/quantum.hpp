#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string_view>

#include "eprqkd/random.hpp"

namespace eprqkd {

using Amplitude = std::complex<double>;

/// A classical measurement outcome in the computational basis.
enum class Bit : std::uint8_t { zero = 0, one = 1 };

constexpr std::uint8_t to_int(Bit b) { return static_cast<std::uint8_t>(b); }
constexpr Bit bit_of(unsigned v) { return v ? Bit::one : Bit::zero; }
constexpr Bit operator^(Bit a, Bit b) { return bit_of(to_int(a) ^ to_int(b)); }

/// The four Bell states, in the order of their key codes:
///   psi1 = (|00> + |11>)/sqrt2  -> 00
///   psi2 = (|00> - |11>)/sqrt2  -> 01
///   psi3 = (|10> + |01>)/sqrt2  -> 10
///   psi4 = (|10> - |01>)/sqrt2  -> 11
enum class BellLabel : std::uint8_t { psi1 = 0, psi2 = 1, psi3 = 2, psi4 = 3 };

inline constexpr std::array<BellLabel, 4> kAllBellLabels{BellLabel::psi1, BellLabel::psi2,
                                                         BellLabel::psi3, BellLabel::psi4};

/// 2-bit key code of a Bell label (0b00..0b11).
constexpr std::uint8_t code_of(BellLabel l) { return static_cast<std::uint8_t>(l); }

/// Inverse of code_of. Throws ValidationError for codes above 3.
BellLabel label_from_code(unsigned code);

/// High bit of the code: 0 for psi1/psi2 (equal Z outcomes on the two halves),
/// 1 for psi3/psi4 (opposite Z outcomes).
constexpr Bit parity_class(BellLabel l) { return bit_of(code_of(l) >> 1); }

std::string_view to_string(BellLabel l);
BellLabel bell_label_from_string(std::string_view name);

/// One particle of a pair. In |ab>, `first` is a and `second` is b.
enum class Half : std::uint8_t { first = 0, second = 1 };

constexpr Half other(Half h) { return h == Half::first ? Half::second : Half::first; }

/// Pure two-qubit state. Amplitudes are stored in the basis order
/// |00>, |01>, |10>, |11>, where the left digit is the first half.
///
/// Always normalized to within kNormTolerance; operations return new values.
class TwoQubitState {
 public:
  static constexpr double kNormTolerance = 1e-12;

  /// Validates normalization; throws ValidationError otherwise.
  static TwoQubitState from_amplitudes(const std::array<Amplitude, 4>& amps);

  /// Computational basis state |first second>.
  static TwoQubitState basis(Bit first, Bit second);

  [[nodiscard]] const std::array<Amplitude, 4>& amplitudes() const { return amps_; }
  [[nodiscard]] const Amplitude& operator[](std::size_t i) const { return amps_[i]; }

  [[nodiscard]] double norm_squared() const;

  friend bool operator==(const TwoQubitState&, const TwoQubitState&) = default;

 private:
  explicit TwoQubitState(const std::array<Amplitude, 4>& amps) : amps_(amps) {}

  std::array<Amplitude, 4> amps_;
};

/// <a|b>
Amplitude inner_product(const TwoQubitState& a, const TwoQubitState& b);

/// Canonical amplitudes of a Bell state.
TwoQubitState make_bell_state(BellLabel label);

/// Exact outcome probabilities (P(0), P(1)) of a Z measurement on one half.
std::array<double, 2> z_probabilities(const TwoQubitState& state, Half which);

struct ZMeasurement {
  Bit outcome;
  TwoQubitState post_state;
};

/// Projective Z measurement of one half, with collapse and renormalization.
ZMeasurement measure_qubit_z(const TwoQubitState& state, Half which, RandomSource& rng);

/// |<bell(L)|state>|^2 for each label, indexed by code_of(L).
std::array<double, 4> bell_overlap_probabilities(const TwoQubitState& state);

struct BellMeasurement {
  BellLabel outcome;
  TwoQubitState post_state;
};

/// Joint measurement of both halves onto the Bell basis.
BellMeasurement measure_bell_basis(const TwoQubitState& state, RandomSource& rng);

}  // namespace eprqkd
