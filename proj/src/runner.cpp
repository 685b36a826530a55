#include "eprqkd/runner.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "eprqkd/analysis.hpp"
#include "eprqkd/errors.hpp"

namespace eprqkd {

void RunConfig::validate() const {
  if (pairs == 0) throw ConfigError("--pairs must be at least 1");
  if (trials == 0) throw ConfigError("--trials must be at least 1");
  if (!(check_fraction_1 > 0.0 && check_fraction_1 < 1.0)) {
    throw ConfigError("--check-fraction-1 must lie in (0, 1)");
  }
  if (!(check_fraction_2 > 0.0 && check_fraction_2 < 1.0)) {
    throw ConfigError("--check-fraction-2 must lie in (0, 1)");
  }
  if (!(threshold_1 >= 0.0 && threshold_1 <= 1.0)) throw ConfigError("--threshold-1 must lie in [0, 1]");
  if (!(threshold_2 >= 0.0 && threshold_2 <= 1.0)) throw ConfigError("--threshold-2 must lie in [0, 1]");
  if (!(loss_tolerance >= 0.0 && loss_tolerance <= 1.0)) {
    throw ConfigError("--loss-tolerance must lie in [0, 1]");
  }
  if (parties != 2 && parties != 3) throw ConfigError("--parties must be 2 or 3");
  if (attack_hop < 0 || attack_hop > parties - 1) {
    throw ConfigError("--attack-hop must be 0 (all) or a hop number up to parties - 1");
  }
  attack.validate();
}

std::array<ProtocolConfig, 2> RunConfig::hop_configs() const {
  std::array<ProtocolConfig, 2> hops;
  for (int h = 1; h <= 2; ++h) {
    ProtocolConfig& c = hops[static_cast<std::size_t>(h - 1)];
    c.pairs = pairs;
    c.first_check = {check_fraction_1, min_check_sample, threshold_1};
    c.second_check = {check_fraction_2, min_check_sample, threshold_2};
    c.loss_tolerance = loss_tolerance;
    c.continuation_mode = continuation_mode;
    if (attack_hop == 0 || attack_hop == h) c.attack = attack;
  }
  return hops;
}

namespace {

std::optional<CheckRow> check_row(const std::optional<CheckReport>& r) {
  if (!r) return std::nullopt;
  return CheckRow{r->sample_indices.size(), r->mismatches, r->error_rate, r->threshold, r->passed};
}

HopRow hop_row(const HopResult& result, int hop) {
  HopRow row;
  row.hop = hop;
  row.receipt_1 = result.first_receipt;
  row.receipt_2 = result.second_receipt;
  row.first_check = check_row(result.ledger.first_report());
  row.second_check = check_row(result.ledger.second_report());
  row.abort_reason = result.abort_reason;
  row.key_bits = result.keys ? result.keys->sender.bits.size() : 0;

  const auto ab = sender_receiver_counts(result.ledger);
  if (ab.total() > 0) row.i_ab = analysis::mutual_information(ab.to_distribution());
  if (const auto ae = eve_information(result.adversary, result.ledger)) {
    row.i_ae = analysis::mutual_information(ae->to_distribution());
  }
  row.efficiency = key_efficiency(result);
  return row;
}

bool any_check_failed(const HopRow& row) {
  return (row.first_check && !row.first_check->passed) ||
         (row.second_check && !row.second_check->passed);
}

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

CheckAggregate aggregate_check(const std::vector<const CheckRow*>& rows) {
  CheckAggregate a;
  std::vector<double> rates;
  for (const CheckRow* r : rows) {
    ++a.trials;
    if (!r->passed) ++a.failures;
    a.mismatches += r->mismatches;
    a.samples += r->sample;
    rates.push_back(r->error_rate);
  }
  if (a.samples > 0) {
    const auto pooled = analysis::estimate_rate(a.mismatches, a.samples);
    a.pooled_rate = pooled.rate;
    a.pooled_se = pooled.standard_error;
  }
  a.mean_rate = mean_of(rates);
  if (a.mean_rate) {
    double ss = 0.0;
    for (double r : rates) ss += (r - *a.mean_rate) * (r - *a.mean_rate);
    const auto k = static_cast<double>(rates.size());
    a.se_mean = rates.size() > 1 ? std::sqrt(ss / (k - 1.0) / k) : 0.0;
  }
  return a;
}

}  // namespace

TrialRecord simulate_trial(const RunConfig& config, std::uint64_t trial, Transcript* transcript) {
  TrialRecord rec;
  rec.trial = trial;
  rec.seed = config.seed ^ trial;
  const RandomSource root(rec.seed, 0);
  const auto hops = config.hop_configs();

  if (config.parties == 2) {
    const HopResult result = run_protocol(hops[0], root, transcript);
    rec.hops.push_back(hop_row(result, 1));
    rec.key_agreement = result.keys && result.keys->agree();
    rec.key_bits = result.keys ? result.keys->receiver.bits.size() : 0;
  } else {
    const MultipartyResult result = run_multiparty(hops, root, transcript);
    for (std::size_t h = 0; h < result.hops.size(); ++h) {
      rec.hops.push_back(hop_row(result.hops[h], static_cast<int>(h + 1)));
    }
    rec.key_agreement = result.common_key && result.common_key->identical();
    rec.key_bits = result.common_key ? result.common_key->clare.bits.size() : 0;
  }

  for (const auto& row : rec.hops) {
    if (any_check_failed(row)) rec.detected = true;
    if (rec.abort_hop == 0 && row.abort_reason != AbortReason::none) {
      rec.abort_reason = row.abort_reason;
      rec.abort_hop = row.hop;
    }
  }
  return rec;
}

RunReport run(const RunConfig& config, std::vector<Transcript>* transcripts) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.config = config;
  report.trials.reserve(config.trials);
  for (std::uint64_t t = 0; t < config.trials; ++t) {
    if (transcripts) {
      transcripts->emplace_back(true, t);
      report.trials.push_back(simulate_trial(config, t, &transcripts->back()));
    } else {
      report.trials.push_back(simulate_trial(config, t));
    }
  }
  report.aggregate = aggregate(report.trials, config.parties - 1);
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

Aggregate aggregate(std::span<const TrialRecord> trials, int hops) {
  Aggregate a;
  a.trials = trials.size();
  std::size_t detected = 0;
  std::size_t aborted = 0;
  std::size_t agreed = 0;
  double key_bits = 0.0;
  for (const auto& t : trials) {
    detected += t.detected ? 1 : 0;
    aborted += t.abort_reason != AbortReason::none ? 1 : 0;
    agreed += t.key_agreement ? 1 : 0;
    key_bits += static_cast<double>(t.key_bits);
  }
  if (!trials.empty()) {
    const auto n = static_cast<double>(trials.size());
    a.detection_rate = static_cast<double>(detected) / n;
    a.abort_rate = static_cast<double>(aborted) / n;
    a.key_agreement_rate = static_cast<double>(agreed) / n;
    a.mean_key_bits = key_bits / n;
  }

  for (int h = 1; h <= hops; ++h) {
    std::vector<const CheckRow*> first;
    std::vector<const CheckRow*> second;
    std::vector<double> receipt_1, receipt_2, i_ab, i_ae, eff;
    for (const auto& t : trials) {
      if (t.hops.size() < static_cast<std::size_t>(h)) continue;
      const HopRow& row = t.hops[static_cast<std::size_t>(h - 1)];
      if (row.first_check) first.push_back(&*row.first_check);
      if (row.second_check) second.push_back(&*row.second_check);
      if (row.receipt_1) receipt_1.push_back(row.receipt_1->fraction());
      if (row.receipt_2) receipt_2.push_back(row.receipt_2->fraction());
      if (row.i_ab) i_ab.push_back(*row.i_ab);
      if (row.i_ae) i_ae.push_back(*row.i_ae);
      if (row.efficiency) eff.push_back(*row.efficiency);
    }
    HopAggregate ha;
    ha.hop = h;
    ha.first_check = aggregate_check(first);
    ha.second_check = aggregate_check(second);
    ha.mean_receipt_1 = mean_of(receipt_1);
    ha.mean_receipt_2 = mean_of(receipt_2);
    ha.mean_i_ab = mean_of(i_ab);
    ha.mean_i_ae = mean_of(i_ae);
    ha.mean_efficiency = mean_of(eff);
    a.hops.push_back(ha);
  }
  return a;
}

}  // namespace eprqkd
