#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eprqkd/adversary.hpp"
#include "eprqkd/analysis.hpp"
#include "eprqkd/quantum.hpp"
#include "eprqkd/random.hpp"
#include "eprqkd/transcript.hpp"

namespace eprqkd {

// ---------------------------------------------------------------------------
// Pair bookkeeping
// ---------------------------------------------------------------------------

/// Who holds a particle. Roles are relative to one hop: in a two-party run the
/// sender is Alice and the receiver Bob; on the relay hop Bob sends to Clare.
enum class Holder : std::uint8_t { sender, receiver, eve, destroyed };

std::string_view to_string(Holder h);

/// Lifecycle of a pair. Transitions only move forward:
///   prepared -> in_flight_1 -> {checked_1 | in_flight_2 -> decoded -> {checked_2 | key}}
/// and any non-terminal state may become `dropped` (lost particle or abort).
enum class Disposition : std::uint8_t {
  prepared,
  in_flight_1,
  checked_1,
  in_flight_2,
  decoded,
  checked_2,
  key,
  dropped,
};

std::string_view to_string(Disposition d);

struct PairRecord {
  std::size_t index = 0;
  BellLabel prepared = BellLabel::psi1;
  TwoQubitState carrier = make_bell_state(BellLabel::psi1);
  std::array<Holder, 2> custody{Holder::sender, Holder::sender};  // by Half

  /// A pair planted by Eve in place of the genuine particle(s).
  std::optional<TwoQubitState> substitute;
  std::array<Holder, 2> substitute_custody{Holder::eve, Holder::eve};

  Disposition disposition = Disposition::prepared;
  std::optional<BellLabel> decoded;  // receiver's Bell-basis outcome
};

enum class Phase : std::uint8_t {
  prepared,
  first_sent,
  first_checked,
  second_sent,
  decoded,
  second_checked,
  aborted,
};

enum class CheckId : std::uint8_t { first = 1, second = 2 };

/// Outcome of one public comparison.
struct CheckReport {
  CheckId check = CheckId::first;
  std::vector<std::size_t> sample_indices;  // ascending pair ordinals
  std::size_t mismatches = 0;
  double error_rate = 0.0;
  double threshold = 0.0;
  bool passed = true;  // error_rate <= threshold
};

struct TransmissionReceipt {
  std::size_t sent = 0;
  std::size_t received = 0;

  /// received / sent; 1 when nothing was sent.
  [[nodiscard]] double fraction() const {
    return sent == 0 ? 1.0 : static_cast<double>(received) / static_cast<double>(sent);
  }
};

/// How large a sample a check draws, and when it passes.
struct CheckPolicy {
  double fraction = 0.25;       // of the pairs still eligible
  std::size_t min_sample = 16;  // absolute floor, capped at the eligible count
  double threshold = 0.02;      // pass iff error_rate <= threshold

  void validate() const;
  /// Sample size for `eligible` candidate pairs.
  [[nodiscard]] std::size_t sample_size(std::size_t eligible) const;
};

/// Whether the second transmission may follow a failed first check. Only the
/// test harness uses `continue_after_failure`.
enum class OrderPolicy : std::uint8_t { strict, continue_after_failure };

/// Names used in transcripts for one hop of the protocol.
struct HopParties {
  int hop = 1;
  std::string sender = "alice";
  std::string receiver = "bob";
};

/// Ordered pair records of one hop plus the protocol phase they are in.
/// Indices are exactly 0..N-1; order is preserved through every step.
class PairLedger {
 public:
  [[nodiscard]] const std::vector<PairRecord>& records() const { return records_; }
  [[nodiscard]] std::size_t size() const { return records_.size(); }
  [[nodiscard]] const PairRecord& operator[](std::size_t i) const { return records_[i]; }
  [[nodiscard]] Phase phase() const { return phase_; }
  [[nodiscard]] const HopParties& parties() const { return parties_; }
  [[nodiscard]] const std::optional<CheckReport>& first_report() const { return first_; }
  [[nodiscard]] const std::optional<CheckReport>& second_report() const { return second_; }

  [[nodiscard]] std::size_t count(Disposition d) const;

 private:
  friend struct LedgerAccess;

  std::vector<PairRecord> records_;
  Phase phase_ = Phase::prepared;
  HopParties parties_;
  std::optional<CheckReport> first_;
  std::optional<CheckReport> second_;
};

/// Throws InternalError if indices are not 0..N-1 in order, or (for a
/// finished or aborted ledger) if some pair is not in a terminal disposition.
void validate_ledger(const PairLedger& ledger);

// ---------------------------------------------------------------------------
// Protocol steps
// ---------------------------------------------------------------------------

/// Step 1: N pairs with uniformly drawn labels, all particles with the sender.
/// Throws ConfigError when n == 0.
PairLedger alice_prepare(std::size_t n, RandomSource& rng, Transcript* transcript = nullptr,
                         HopParties parties = {});

/// Step 1 with prescribed labels (relay hop re-encoding its raw key).
PairLedger prepare_pairs(std::span<const BellLabel> labels, HopParties parties = {},
                         Transcript* transcript = nullptr);

/// Step 2: the second half of every pair crosses the quantum channel.
TransmissionReceipt transmit_first_sequence(PairLedger& ledger, Adversary& channel,
                                            RandomSource& eve_rng,
                                            Transcript* transcript = nullptr);

/// Steps 3-4: receiver Z-measures a random subset of the halves it received,
/// announces which, sender Z-measures the partners, and both compare parity
/// against the prepared label. Sampled pairs leave the protocol.
/// Throws ConfigError if no pair is eligible.
CheckReport first_check(PairLedger& ledger, const CheckPolicy& policy, RandomSource& receiver_rng,
                        RandomSource& sender_rng, Transcript* transcript = nullptr);

/// Step 5: the first halves of the unchecked pairs cross the channel.
/// Throws ProtocolOrderError after a failed first check unless allowed.
TransmissionReceipt transmit_second_sequence(PairLedger& ledger, Adversary& channel,
                                             RandomSource& eve_rng,
                                             OrderPolicy order = OrderPolicy::strict,
                                             Transcript* transcript = nullptr);

/// Step 6: Bell-basis measurement of each pair the receiver now holds whole.
/// Throws ProtocolOrderError if the receiver does not hold both halves.
void bob_decode(PairLedger& ledger, RandomSource& receiver_rng, Transcript* transcript = nullptr);

/// Step 7: public comparison of a random subset of decoded outcomes against
/// the prepared labels. On success the remaining decoded pairs become key.
CheckReport second_check(PairLedger& ledger, const CheckPolicy& policy,
                         RandomSource& receiver_rng, Transcript* transcript = nullptr);

/// Ends the hop: every pair not yet in a terminal state is dropped.
void abort_run(PairLedger& ledger);

struct KeyMaterial {
  std::vector<Bit> bits;                   // two bits per source pair
  std::vector<std::size_t> source_indices;  // ascending pair ordinals

  [[nodiscard]] std::string to_string() const;
  friend bool operator==(const KeyMaterial&, const KeyMaterial&) = default;
};

struct KeyExchange {
  KeyMaterial sender;    // prepared codes
  KeyMaterial receiver;  // decoded codes
  [[nodiscard]] bool agree() const { return sender == receiver; }
};

/// Appends the 2-bit code of `label` to `key`.
void append_code(KeyMaterial& key, BellLabel label, std::size_t index);

/// Raw keys of both ends, in ledger order. Throws ProtocolOrderError unless
/// both checks were made and passed.
KeyExchange extract_key(const PairLedger& ledger);

// ---------------------------------------------------------------------------
// End-to-end runs
// ---------------------------------------------------------------------------

enum class AbortReason : std::uint8_t {
  none,
  stalled_first_transmission,
  first_check_failed,
  no_pairs_left,
  stalled_second_transmission,
  second_check_failed,
};

std::string_view to_string(AbortReason r);
AbortReason abort_reason_from_string(std::string_view name);

struct ProtocolConfig {
  std::size_t pairs = 1000;
  CheckPolicy first_check;
  CheckPolicy second_check;
  /// Abort when the fraction of particles received in a transmission is
  /// below 1 - loss_tolerance.
  double loss_tolerance = 0.0;
  AttackStrategy attack;
  /// Keep going past a failed check so later statistics can be observed.
  bool continuation_mode = false;

  void validate() const;
};

/// Per-actor random streams for one hop.
struct HopStreams {
  RandomSource sender;
  RandomSource receiver;
  RandomSource eve;

  /// Streams for hop `hop` (1-based) of a trial rooted at `root`.
  static HopStreams for_hop(const RandomSource& root, int hop);
};

struct HopResult {
  PairLedger ledger;
  Adversary adversary{AttackStrategy{}};
  std::optional<TransmissionReceipt> first_receipt;
  std::optional<TransmissionReceipt> second_receipt;
  /// First failure; in continuation mode the run may have gone on after it.
  AbortReason abort_reason = AbortReason::none;
  std::optional<KeyExchange> keys;

  [[nodiscard]] bool aborted() const { return abort_reason != AbortReason::none; }
};

/// Steps 2-7 on an already prepared ledger.
HopResult run_hop(const ProtocolConfig& config, PairLedger ledger, HopStreams& streams,
                  Transcript* transcript = nullptr);

/// Steps 1-7 between Alice and Bob.
HopResult run_protocol(const ProtocolConfig& config, const RandomSource& root,
                       Transcript* transcript = nullptr);

struct CommonKey {
  KeyMaterial alice;
  KeyMaterial bob;
  KeyMaterial clare;
  [[nodiscard]] bool identical() const { return alice.bits == bob.bits && bob.bits == clare.bits; }
};

struct MultipartyResult {
  std::vector<HopResult> hops;
  std::optional<CommonKey> common_key;  // absent when any hop aborted
};

/// Alice -> Bob, then Bob re-encodes his raw key into fresh pairs and runs
/// the protocol again towards Clare. `hop_configs[1].pairs` is ignored.
MultipartyResult run_multiparty(const std::array<ProtocolConfig, 2>& hop_configs,
                                const RandomSource& root, Transcript* transcript = nullptr);

// ---------------------------------------------------------------------------
// Empirical information
// ---------------------------------------------------------------------------

/// Counts of (prepared code, decoded code) over every decoded pair.
analysis::ContingencyTable sender_receiver_counts(const PairLedger& ledger);

/// Counts of (prepared code, Eve's observation symbol) over the pairs that
/// survived the first check. The last column means "Eve saw nothing". Alice's
/// labels are used only for scoring. Empty optional if no pair qualifies.
std::optional<analysis::ContingencyTable> eve_information(const Adversary& eve,
                                                          const PairLedger& alice_truth);

/// Eta for the key a hop produced: 2 key bits per pair, 2 qubits per pair,
/// no classical bits outside the checks. Empty if no key was produced.
std::optional<double> key_efficiency(const HopResult& hop);

}  // namespace eprqkd
