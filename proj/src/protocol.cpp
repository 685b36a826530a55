#include "eprqkd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "eprqkd/errors.hpp"

namespace eprqkd {

struct LedgerAccess {
  static std::vector<PairRecord>& records(PairLedger& l) { return l.records_; }
  static Phase& phase(PairLedger& l) { return l.phase_; }
  static HopParties& parties(PairLedger& l) { return l.parties_; }
  static std::optional<CheckReport>& first(PairLedger& l) { return l.first_; }
  static std::optional<CheckReport>& second(PairLedger& l) { return l.second_; }
};

namespace {

using Access = LedgerAccess;

constexpr std::size_t idx(Half h) { return static_cast<std::size_t>(h); }

void require_phase(const PairLedger& ledger, Phase expected, const char* step) {
  if (ledger.phase() != expected) {
    throw ProtocolOrderError(std::string(step) + " invoked out of protocol order");
  }
}

bool is_terminal(Disposition d) {
  return d == Disposition::checked_1 || d == Disposition::checked_2 || d == Disposition::key ||
         d == Disposition::dropped;
}

// The qubit the receiver holds in slot `half`: genuine or planted by Eve.
struct HeldQubit {
  TwoQubitState* state = nullptr;
};

HeldQubit receiver_qubit(PairRecord& r, Half half) {
  if (r.custody[idx(half)] == Holder::receiver) return {&r.carrier};
  if (r.substitute && r.substitute_custody[idx(half)] == Holder::receiver) {
    return {&*r.substitute};
  }
  return {};
}

Holder holder_after(Fate fate) {
  switch (fate) {
    case Fate::delivered: return Holder::receiver;
    case Fate::substituted: return Holder::eve;
    case Fate::destroyed: return Holder::destroyed;
  }
  throw InternalError("unknown fate");
}

// Pushes the signals of `half` for every record in disposition `from`
// through the channel and writes the physics back.
TransmissionReceipt transmit(PairLedger& ledger, Adversary& channel, RandomSource& eve_rng,
                             Transmission which, Half half, Disposition from, Disposition to,
                             Transcript* transcript) {
  auto& records = Access::records(ledger);
  std::vector<Signal> signals;
  for (const auto& r : records) {
    if (r.disposition != from) continue;
    if (r.custody[idx(half)] != Holder::sender) {
      throw ProtocolOrderError("sender no longer holds the particle to transmit");
    }
    signals.push_back({r.index, half, r.carrier, r.substitute, Fate::delivered});
  }

  const auto& names = ledger.parties();
  const int step = which == Transmission::first ? 2 : 5;
  if (transcript) {
    transcript->record(step, names.sender, "send_sequence",
                       {{"hop", names.hop},
                        {"transmission", static_cast<int>(which)},
                        {"half", half == Half::first ? "first" : "second"},
                        {"count", signals.size()}});
  }

  const std::size_t log_before = channel.state().measurement_log.size();
  channel.interpose(which, signals, eve_rng);

  if (transcript && channel.strategy().kind != AttackKind::none) {
    Json observed = Json::array();
    const auto& log = channel.state().measurement_log;
    for (std::size_t i = log_before; i < log.size(); ++i) {
      observed.push_back({log[i].index, to_string(log[i].kind), log[i].value});
    }
    transcript->record(step, "eve", "intercept",
                       {{"hop", names.hop},
                        {"transmission", static_cast<int>(which)},
                        {"attack", to_string(channel.strategy().kind)},
                        {"observations", std::move(observed)}});
  }

  TransmissionReceipt receipt{signals.size(), 0};
  for (const Signal& s : signals) {
    PairRecord& r = records[s.index];
    r.carrier = s.carrier;
    r.substitute = s.substitute;
    r.custody[idx(half)] = holder_after(s.fate);
    if (s.fate == Fate::substituted) {
      if (!r.substitute) throw InternalError("substitution without a substitute pair");
      r.substitute_custody[idx(half)] = Holder::receiver;
      // Eve keeps the partner of what she forwards until she sends it too.
      if (r.substitute_custody[idx(other(half))] != Holder::receiver) {
        r.substitute_custody[idx(other(half))] = Holder::eve;
      }
    }
    if (s.fate == Fate::destroyed) {
      r.disposition = Disposition::dropped;
    } else {
      r.disposition = to;
      ++receipt.received;
    }
  }

  if (transcript) {
    transcript->record(step + 1, names.receiver, "receive",
                       {{"hop", names.hop},
                        {"transmission", static_cast<int>(which)},
                        {"sent", receipt.sent},
                        {"received", receipt.received}});
  }
  return receipt;
}

// Uniform sample without replacement, returned in ascending order.
std::vector<std::size_t> draw_sample(std::vector<std::size_t> candidates, std::size_t k,
                                     RandomSource& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_index(candidates.size() - i);
    std::swap(candidates[i], candidates[j]);
  }
  candidates.resize(k);
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

CheckReport make_report(CheckId id, std::vector<std::size_t> sample, std::size_t mismatches,
                        double threshold) {
  CheckReport report;
  report.check = id;
  report.error_rate = static_cast<double>(mismatches) / static_cast<double>(sample.size());
  report.sample_indices = std::move(sample);
  report.mismatches = mismatches;
  report.threshold = threshold;
  report.passed = report.error_rate <= threshold;
  return report;
}

Json report_json(const CheckReport& r) {
  return {{"check", r.check == CheckId::first ? "first" : "second"},
          {"sample", r.sample_indices.size()},
          {"mismatches", r.mismatches},
          {"error_rate", r.error_rate},
          {"threshold", r.threshold},
          {"passed", r.passed}};
}

}  // namespace

std::string_view to_string(Holder h) {
  switch (h) {
    case Holder::sender: return "sender";
    case Holder::receiver: return "receiver";
    case Holder::eve: return "eve";
    case Holder::destroyed: return "destroyed";
  }
  throw InternalError("unknown holder");
}

std::string_view to_string(Disposition d) {
  switch (d) {
    case Disposition::prepared: return "prepared";
    case Disposition::in_flight_1: return "in-flight-1";
    case Disposition::checked_1: return "checked-1";
    case Disposition::in_flight_2: return "in-flight-2";
    case Disposition::decoded: return "decoded";
    case Disposition::checked_2: return "checked-2";
    case Disposition::key: return "key";
    case Disposition::dropped: return "dropped";
  }
  throw InternalError("unknown disposition");
}

std::size_t PairLedger::count(Disposition d) const {
  return static_cast<std::size_t>(std::count_if(
      records_.begin(), records_.end(), [d](const PairRecord& r) { return r.disposition == d; }));
}

void validate_ledger(const PairLedger& ledger) {
  const auto& records = ledger.records();
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].index != i) throw InternalError("ledger indices are not 0..N-1 in order");
    if (std::abs(records[i].carrier.norm_squared() - 1.0) > TwoQubitState::kNormTolerance) {
      throw InternalError("carrier lost normalization");
    }
  }
  const bool finished = ledger.phase() == Phase::aborted ||
                        (ledger.phase() == Phase::second_checked && ledger.second_report() &&
                         ledger.second_report()->passed);
  if (!finished) return;
  for (const auto& r : records) {
    if (!is_terminal(r.disposition)) throw InternalError("finished ledger has a live pair");
  }
  const std::size_t total = ledger.count(Disposition::checked_1) +
                            ledger.count(Disposition::checked_2) +
                            ledger.count(Disposition::key) + ledger.count(Disposition::dropped);
  if (total != records.size()) throw InternalError("pair conservation violated");
}

void CheckPolicy::validate() const {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("check fraction must lie in (0, 1)");
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ConfigError("check threshold must lie in [0, 1]");
  }
}

std::size_t CheckPolicy::sample_size(std::size_t eligible) const {
  // The small slack keeps e.g. 0.1 * 30 from rounding up to 4.
  const double scaled = std::ceil(fraction * static_cast<double>(eligible) - 1e-9);
  const auto by_fraction = static_cast<std::size_t>(std::max(scaled, 0.0));
  return std::min(eligible, std::max(min_sample, by_fraction));
}

PairLedger prepare_pairs(std::span<const BellLabel> labels, HopParties parties,
                         Transcript* transcript) {
  if (labels.empty()) throw ConfigError("at least one pair is required");
  PairLedger ledger;
  auto& records = Access::records(ledger);
  records.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    PairRecord r;
    r.index = i;
    r.prepared = labels[i];
    r.carrier = make_bell_state(labels[i]);
    records.push_back(std::move(r));
  }
  if (transcript) {
    transcript->record(1, parties.sender, "prepare",
                       {{"hop", parties.hop}, {"pairs", labels.size()}});
  }
  Access::parties(ledger) = std::move(parties);
  return ledger;
}

PairLedger alice_prepare(std::size_t n, RandomSource& rng, Transcript* transcript,
                         HopParties parties) {
  if (n == 0) throw ConfigError("at least one pair is required");
  std::vector<BellLabel> labels(n);
  for (auto& l : labels) l = static_cast<BellLabel>(rng.uniform_index(4));
  return prepare_pairs(labels, std::move(parties), transcript);
}

TransmissionReceipt transmit_first_sequence(PairLedger& ledger, Adversary& channel,
                                            RandomSource& eve_rng, Transcript* transcript) {
  require_phase(ledger, Phase::prepared, "transmit_first_sequence");
  auto receipt = transmit(ledger, channel, eve_rng, Transmission::first, Half::second,
                          Disposition::prepared, Disposition::in_flight_1, transcript);
  Access::phase(ledger) = Phase::first_sent;
  return receipt;
}

CheckReport first_check(PairLedger& ledger, const CheckPolicy& policy, RandomSource& receiver_rng,
                        RandomSource& sender_rng, Transcript* transcript) {
  require_phase(ledger, Phase::first_sent, "first_check");
  policy.validate();
  auto& records = Access::records(ledger);

  std::vector<std::size_t> eligible;
  for (const auto& r : records) {
    if (r.disposition == Disposition::in_flight_1) eligible.push_back(r.index);
  }
  if (eligible.empty()) throw ConfigError("first check: no pair available to sample");
  const std::size_t k = policy.sample_size(eligible.size());
  auto sample = draw_sample(std::move(eligible), k, receiver_rng);

  const auto& names = ledger.parties();
  std::vector<Bit> receiver_bits;
  receiver_bits.reserve(sample.size());
  for (std::size_t i : sample) {
    HeldQubit q = receiver_qubit(records[i], Half::second);
    if (!q.state) throw ProtocolOrderError("receiver does not hold the particle it checks");
    auto m = measure_qubit_z(*q.state, Half::second, receiver_rng);
    *q.state = m.post_state;
    receiver_bits.push_back(m.outcome);
  }
  if (transcript) {
    Json bits = Json::array();
    for (Bit b : receiver_bits) bits.push_back(to_int(b));
    transcript->record(3, names.receiver, "measure_z",
                       {{"hop", names.hop}, {"indices", sample}, {"outcomes", std::move(bits)}});
    transcript->record(4, names.receiver, "announce_sample",
                       {{"hop", names.hop}, {"check", "first"}, {"indices", sample}});
  }

  std::size_t mismatches = 0;
  Json sender_bits = Json::array();
  for (std::size_t k = 0; k < sample.size(); ++k) {
    PairRecord& r = records[sample[k]];
    if (r.custody[idx(Half::first)] != Holder::sender) {
      throw ProtocolOrderError("sender does not hold the partner particle");
    }
    auto m = measure_qubit_z(r.carrier, Half::first, sender_rng);
    r.carrier = m.post_state;
    if ((m.outcome ^ receiver_bits[k]) != parity_class(r.prepared)) ++mismatches;
    r.disposition = Disposition::checked_1;
    sender_bits.push_back(to_int(m.outcome));
  }

  auto report = make_report(CheckId::first, std::move(sample), mismatches, policy.threshold);
  if (transcript) {
    transcript->record(4, names.sender, "measure_z",
                       {{"hop", names.hop}, {"outcomes", std::move(sender_bits)}});
    transcript->record(4, names.sender, "compare", [&] {
      Json j = report_json(report);
      j["hop"] = names.hop;
      return j;
    }());
  }
  Access::first(ledger) = report;
  Access::phase(ledger) = Phase::first_checked;
  return report;
}

TransmissionReceipt transmit_second_sequence(PairLedger& ledger, Adversary& channel,
                                             RandomSource& eve_rng, OrderPolicy order,
                                             Transcript* transcript) {
  require_phase(ledger, Phase::first_checked, "transmit_second_sequence");
  if (!ledger.first_report()->passed && order == OrderPolicy::strict) {
    throw ProtocolOrderError("second sequence sent after a failed first check");
  }
  auto receipt = transmit(ledger, channel, eve_rng, Transmission::second, Half::first,
                          Disposition::in_flight_1, Disposition::in_flight_2, transcript);
  Access::phase(ledger) = Phase::second_sent;
  return receipt;
}

void bob_decode(PairLedger& ledger, RandomSource& receiver_rng, Transcript* transcript) {
  require_phase(ledger, Phase::second_sent, "bob_decode");
  auto& records = Access::records(ledger);
  Json indices = Json::array();
  Json outcomes = Json::array();
  for (auto& r : records) {
    if (r.disposition != Disposition::in_flight_2) continue;
    TwoQubitState* pair = nullptr;
    if (r.custody[0] == Holder::receiver && r.custody[1] == Holder::receiver) {
      pair = &r.carrier;
    } else if (r.substitute && r.substitute_custody[0] == Holder::receiver &&
               r.substitute_custody[1] == Holder::receiver) {
      pair = &*r.substitute;
    } else {
      throw ProtocolOrderError("receiver does not hold both halves of pair " +
                               std::to_string(r.index));
    }
    auto m = measure_bell_basis(*pair, receiver_rng);
    *pair = m.post_state;
    r.decoded = m.outcome;
    r.disposition = Disposition::decoded;
    if (transcript) {
      indices.push_back(r.index);
      outcomes.push_back(code_of(m.outcome));
    }
  }
  if (transcript) {
    const auto& names = ledger.parties();
    transcript->record(6, names.receiver, "measure_bell",
                       {{"hop", names.hop}, {"indices", std::move(indices)},
                        {"outcomes", std::move(outcomes)}});
  }
  Access::phase(ledger) = Phase::decoded;
}

CheckReport second_check(PairLedger& ledger, const CheckPolicy& policy,
                         RandomSource& receiver_rng, Transcript* transcript) {
  require_phase(ledger, Phase::decoded, "second_check");
  policy.validate();
  auto& records = Access::records(ledger);

  std::vector<std::size_t> eligible;
  for (const auto& r : records) {
    if (r.disposition == Disposition::decoded) eligible.push_back(r.index);
  }
  if (eligible.empty()) throw ConfigError("second check: no pair available to sample");
  const std::size_t k = policy.sample_size(eligible.size());
  auto sample = draw_sample(std::move(eligible), k, receiver_rng);

  std::size_t mismatches = 0;
  for (std::size_t i : sample) {
    PairRecord& r = records[i];
    if (*r.decoded != r.prepared) ++mismatches;
    r.disposition = Disposition::checked_2;
  }
  auto report = make_report(CheckId::second, std::move(sample), mismatches, policy.threshold);

  if (report.passed) {
    for (auto& r : records) {
      if (r.disposition == Disposition::decoded) r.disposition = Disposition::key;
    }
  }
  if (transcript) {
    const auto& names = ledger.parties();
    transcript->record(7, names.receiver, "announce_sample",
                       {{"hop", names.hop}, {"check", "second"}, {"indices", report.sample_indices}});
    Json j = report_json(report);
    j["hop"] = names.hop;
    transcript->record(7, names.sender, "compare", std::move(j));
  }
  Access::second(ledger) = report;
  Access::phase(ledger) = Phase::second_checked;
  return report;
}

void abort_run(PairLedger& ledger) {
  for (auto& r : Access::records(ledger)) {
    if (!is_terminal(r.disposition)) r.disposition = Disposition::dropped;
  }
  Access::phase(ledger) = Phase::aborted;
}

std::string KeyMaterial::to_string() const {
  std::string s;
  s.reserve(bits.size());
  for (Bit b : bits) s.push_back(b == Bit::one ? '1' : '0');
  return s;
}

void append_code(KeyMaterial& key, BellLabel label, std::size_t index) {
  const auto code = code_of(label);
  key.bits.push_back(bit_of(code >> 1));
  key.bits.push_back(bit_of(code & 1));
  key.source_indices.push_back(index);
}

KeyExchange extract_key(const PairLedger& ledger) {
  if (ledger.phase() != Phase::second_checked || !ledger.first_report() ||
      !ledger.first_report()->passed || !ledger.second_report() ||
      !ledger.second_report()->passed) {
    throw ProtocolOrderError("key requested before both checks passed");
  }
  KeyExchange keys;
  for (const auto& r : ledger.records()) {
    if (r.disposition != Disposition::key) continue;
    append_code(keys.sender, r.prepared, r.index);
    append_code(keys.receiver, *r.decoded, r.index);
  }
  return keys;
}

// ---------------------------------------------------------------------------

std::string_view to_string(AbortReason r) {
  switch (r) {
    case AbortReason::none: return "none";
    case AbortReason::stalled_first_transmission: return "stalled_first_transmission";
    case AbortReason::first_check_failed: return "first_check_failed";
    case AbortReason::no_pairs_left: return "no_pairs_left";
    case AbortReason::stalled_second_transmission: return "stalled_second_transmission";
    case AbortReason::second_check_failed: return "second_check_failed";
  }
  throw InternalError("unknown abort reason");
}

AbortReason abort_reason_from_string(std::string_view name) {
  for (auto r : {AbortReason::none, AbortReason::stalled_first_transmission,
                 AbortReason::first_check_failed, AbortReason::no_pairs_left,
                 AbortReason::stalled_second_transmission, AbortReason::second_check_failed}) {
    if (to_string(r) == name) return r;
  }
  throw ValidationError("unknown abort reason: " + std::string(name));
}

void ProtocolConfig::validate() const {
  if (pairs == 0) throw ConfigError("pairs must be at least 1");
  first_check.validate();
  second_check.validate();
  if (!(loss_tolerance >= 0.0 && loss_tolerance <= 1.0)) {
    throw ConfigError("loss tolerance must lie in [0, 1]");
  }
  attack.validate();
}

HopStreams HopStreams::for_hop(const RandomSource& root, int hop) {
  const auto base = static_cast<std::uint64_t>(hop) << 8;
  const Stream sender = hop == 1 ? Stream::alice : Stream::bob;
  const Stream receiver = hop == 1 ? Stream::bob : Stream::clare;
  return {root.substream(base | static_cast<std::uint64_t>(sender)),
          root.substream(base | static_cast<std::uint64_t>(receiver)),
          root.substream(base | static_cast<std::uint64_t>(Stream::eve))};
}

namespace {

// Records the first failure. Returns true when the run must stop now.
bool fail(HopResult& result, AbortReason reason, bool continuable, const ProtocolConfig& config) {
  if (result.abort_reason == AbortReason::none) result.abort_reason = reason;
  return !(continuable && config.continuation_mode);
}

HopResult finish_aborted(HopResult result, Transcript* transcript) {
  abort_run(result.ledger);
  if (transcript) {
    const auto& names = result.ledger.parties();
    transcript->record(7, names.sender, "abort",
                       {{"hop", names.hop}, {"reason", to_string(result.abort_reason)}});
  }
  validate_ledger(result.ledger);
  return result;
}

bool stalled(const TransmissionReceipt& receipt, double loss_tolerance) {
  return receipt.fraction() < 1.0 - loss_tolerance;
}

}  // namespace

HopResult run_hop(const ProtocolConfig& config, PairLedger ledger, HopStreams& streams,
                  Transcript* transcript) {
  config.validate();
  HopResult result;
  result.ledger = std::move(ledger);
  result.adversary = Adversary(config.attack);
  PairLedger& l = result.ledger;

  result.first_receipt = transmit_first_sequence(l, result.adversary, streams.eve, transcript);
  if (stalled(*result.first_receipt, config.loss_tolerance)) {
    result.abort_reason = AbortReason::stalled_first_transmission;
    return finish_aborted(std::move(result), transcript);
  }
  if (l.count(Disposition::in_flight_1) == 0) {
    result.abort_reason = AbortReason::no_pairs_left;
    return finish_aborted(std::move(result), transcript);
  }

  const auto first = first_check(l, config.first_check, streams.receiver, streams.sender, transcript);
  if (!first.passed && fail(result, AbortReason::first_check_failed, true, config)) {
    return finish_aborted(std::move(result), transcript);
  }
  if (l.count(Disposition::in_flight_1) == 0) {
    fail(result, AbortReason::no_pairs_left, false, config);
    return finish_aborted(std::move(result), transcript);
  }

  result.second_receipt =
      transmit_second_sequence(l, result.adversary, streams.eve,
                               config.continuation_mode ? OrderPolicy::continue_after_failure
                                                        : OrderPolicy::strict,
                               transcript);
  if (stalled(*result.second_receipt, config.loss_tolerance)) {
    fail(result, AbortReason::stalled_second_transmission, false, config);
    return finish_aborted(std::move(result), transcript);
  }
  if (result.second_receipt->received == 0) {
    fail(result, AbortReason::no_pairs_left, false, config);
    return finish_aborted(std::move(result), transcript);
  }

  bob_decode(l, streams.receiver, transcript);
  const auto second = second_check(l, config.second_check, streams.receiver, transcript);
  if (!second.passed) fail(result, AbortReason::second_check_failed, false, config);
  if (result.aborted()) return finish_aborted(std::move(result), transcript);

  result.keys = extract_key(l);
  if (transcript) {
    const auto& names = l.parties();
    transcript->record(7, names.sender, "commit",
                       {{"hop", names.hop},
                        {"key_pairs", result.keys->sender.source_indices.size()},
                        {"key_bits", result.keys->sender.bits.size()}});
  }
  validate_ledger(l);
  return result;
}

HopResult run_protocol(const ProtocolConfig& config, const RandomSource& root,
                       Transcript* transcript) {
  config.validate();
  HopStreams streams = HopStreams::for_hop(root, 1);
  auto ledger = alice_prepare(config.pairs, streams.sender, transcript, HopParties{});
  return run_hop(config, std::move(ledger), streams, transcript);
}

MultipartyResult run_multiparty(const std::array<ProtocolConfig, 2>& hop_configs,
                                const RandomSource& root, Transcript* transcript) {
  MultipartyResult out;
  out.hops.reserve(2);  // first_hop below must survive the second push_back
  out.hops.push_back(run_protocol(hop_configs[0], root, transcript));
  const HopResult& first_hop = out.hops.front();
  if (first_hop.aborted()) return out;

  // Bob re-encodes his raw key, in order, into fresh pairs for Clare.
  const KeyMaterial& bob_raw = first_hop.keys->receiver;
  std::vector<BellLabel> labels;
  labels.reserve(bob_raw.source_indices.size());
  for (std::size_t k = 0; k < bob_raw.source_indices.size(); ++k) {
    labels.push_back(label_from_code(2u * to_int(bob_raw.bits[2 * k]) + to_int(bob_raw.bits[2 * k + 1])));
  }

  HopStreams streams = HopStreams::for_hop(root, 2);
  auto ledger = prepare_pairs(labels, HopParties{2, "bob", "clare"}, transcript);
  out.hops.push_back(run_hop(hop_configs[1], std::move(ledger), streams, transcript));
  const HopResult& second_hop = out.hops.back();
  if (second_hop.aborted()) return out;

  // Hop-2 ordinal k stands for hop-1 pair bob_raw.source_indices[k].
  CommonKey common;
  const auto& alice_ledger = first_hop.ledger;
  for (const auto& r : second_hop.ledger.records()) {
    if (r.disposition != Disposition::key) continue;
    const std::size_t origin = bob_raw.source_indices[r.index];
    append_code(common.alice, alice_ledger[origin].prepared, origin);
    append_code(common.bob, r.prepared, origin);
    append_code(common.clare, *r.decoded, origin);
  }
  if (transcript) {
    transcript->record(7, "bob", "broadcast_common_positions",
                       {{"hop", 2}, {"indices", common.alice.source_indices}});
  }
  out.common_key = std::move(common);
  return out;
}

// ---------------------------------------------------------------------------

analysis::ContingencyTable sender_receiver_counts(const PairLedger& ledger) {
  analysis::ContingencyTable table(4, 4);
  for (const auto& r : ledger.records()) {
    if (r.decoded) table.add(code_of(r.prepared), code_of(*r.decoded));
  }
  return table;
}

std::optional<analysis::ContingencyTable> eve_information(const Adversary& eve,
                                                          const PairLedger& alice_truth) {
  const std::size_t nothing = eve.observation_alphabet();
  analysis::ContingencyTable table(4, nothing + 1);
  for (const auto& r : alice_truth.records()) {
    if (r.disposition == Disposition::checked_1) continue;
    if (r.custody[idx(Half::second)] == Holder::destroyed) continue;
    const auto symbol = eve.observation_symbol(r.index);
    table.add(code_of(r.prepared), symbol ? *symbol : nothing);
  }
  if (table.total() == 0) return std::nullopt;
  return table;
}

std::optional<double> key_efficiency(const HopResult& hop) {
  if (!hop.keys || hop.keys->sender.source_indices.empty()) return std::nullopt;
  const auto pairs = static_cast<double>(hop.keys->sender.source_indices.size());
  return analysis::efficiency({static_cast<double>(hop.keys->sender.bits.size()), 2.0 * pairs, 0.0});
}

}  // namespace eprqkd
