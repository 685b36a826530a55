#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "eprqkd/quantum.hpp"
#include "eprqkd/random.hpp"

namespace eprqkd {

enum class AttackKind : std::uint8_t { none, measure_resend, fake_epr, opaque };

std::string_view to_string(AttackKind kind);
AttackKind attack_kind_from_string(std::string_view name);

/// Adversary configuration. Only the fields relevant to `kind` are consulted.
struct AttackStrategy {
  AttackKind kind = AttackKind::none;

  /// measure_resend: also Z-measure the second sequence (learns the parity
  /// class, destroys everything). Off by default.
  bool measure_second_sequence = false;

  /// fake_epr: label of the pairs Eve prepares, or a fresh uniform label per
  /// pair when `fake_label_uniform` is set.
  BellLabel fake_label = BellLabel::psi1;
  bool fake_label_uniform = false;

  /// opaque: per-particle probability that Eve destroys the signal.
  double destroy_probability = 0.0;

  /// Throws ConfigError if a parameter is out of range.
  void validate() const;
};

enum class Transmission : std::uint8_t { first = 1, second = 2 };

/// What became of a particle after passing the channel.
enum class Fate : std::uint8_t {
  delivered,    // the genuine particle reached the receiver
  substituted,  // Eve kept the genuine particle and forwarded one half of `substitute`
  destroyed,    // nothing reached the receiver
};

/// One particle in flight. `carrier` is the joint state of the pair the
/// particle belongs to; acting on the particle may change it. The prepared
/// label is deliberately absent: the channel only sees physics.
struct Signal {
  std::size_t index = 0;
  Half half = Half::second;
  TwoQubitState carrier = make_bell_state(BellLabel::psi1);
  /// Pair previously planted by Eve at this position, if any. When the fate is
  /// `substituted` the receiver gets `half` of this pair.
  std::optional<TwoQubitState> substitute;
  Fate fate = Fate::delivered;
};

/// Something Eve measured or prepared.
struct EveObservation {
  enum class Kind : std::uint8_t { z_bit, bell_outcome, fake_prepared, destroyed };

  std::size_t index = 0;
  Transmission transmission = Transmission::first;
  Kind kind = Kind::z_bit;
  std::uint8_t value = 0;  // bit, or Bell code
};

std::string_view to_string(EveObservation::Kind kind);

struct CapturedHalf {
  std::size_t index = 0;
  Half half = Half::second;
};

/// Everything Eve holds or knows. Built only from her own measurements.
struct EveState {
  std::vector<CapturedHalf> captured_halves;
  std::vector<EveObservation> measurement_log;
  /// Best 2-bit guess per pair, where she has one.
  std::map<std::size_t, BellLabel> inferred_key;

  [[nodiscard]] bool empty() const {
    return captured_halves.empty() && measurement_log.empty() && inferred_key.empty();
  }
};

/// The eavesdropper sitting on the quantum channel between sender and receiver.
class Adversary {
 public:
  explicit Adversary(AttackStrategy strategy);

  /// Acts on every particle of one transmission, in order.
  void interpose(Transmission transmission, std::span<Signal> signals, RandomSource& rng);

  [[nodiscard]] const AttackStrategy& strategy() const { return strategy_; }
  [[nodiscard]] const EveState& state() const { return eve_; }

  /// Eve's per-pair observation symbol: what she knows about pair `index`
  /// derived from her log alone. Empty if she observed nothing.
  ///   fake_epr: Bell code (0..3); measure_resend: her Z bit, or the two Z
  ///   bits (2*a + b) when she measured both sequences.
  [[nodiscard]] std::optional<std::uint8_t> observation_symbol(std::size_t index) const;

  /// Number of distinct values observation_symbol can take.
  [[nodiscard]] std::size_t observation_alphabet() const;

 private:
  void measure_resend(Transmission transmission, Signal& s, RandomSource& rng);
  void fake_epr(Transmission transmission, Signal& s, RandomSource& rng);
  void opaque(Transmission transmission, Signal& s, RandomSource& rng);

  AttackStrategy strategy_;
  EveState eve_;
  std::map<std::size_t, std::uint8_t> symbols_;
};

/// Eve's observation log replayed into per-pair symbols. Independent of any
/// Adversary instance; used to check her knowledge is a function of her log.
std::map<std::size_t, std::uint8_t> symbols_from_log(const AttackStrategy& strategy,
                                                     std::span<const EveObservation> log);

}  // namespace eprqkd
