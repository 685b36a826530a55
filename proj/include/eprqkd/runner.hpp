#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eprqkd/protocol.hpp"
#include "eprqkd/transcript.hpp"

namespace eprqkd {

/// Version tag written into every report and checked when one is read back.
inline constexpr std::string_view kReportSchema = "eprqkd-report/1";

/// Everything that determines the outcome of a batch of trials.
struct RunConfig {
  std::size_t pairs = 1000;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  AttackStrategy attack;
  double check_fraction_1 = 0.25;
  double check_fraction_2 = 0.25;
  double threshold_1 = 0.02;
  double threshold_2 = 0.02;
  std::size_t min_check_sample = 16;
  double loss_tolerance = 0.0;
  int parties = 2;
  /// Hop the adversary sits on in a 3-party chain; 0 means every hop.
  int attack_hop = 0;
  bool continuation_mode = false;

  /// Throws ConfigError describing the first invalid field.
  void validate() const;

  /// Protocol parameters for hop 1 and hop 2 (the latter unused for 2 parties).
  [[nodiscard]] std::array<ProtocolConfig, 2> hop_configs() const;

  [[nodiscard]] Json to_json() const;
  /// Inverse of to_json. Missing keys keep their defaults.
  static RunConfig from_json(const Json& j);
};

struct CheckRow {
  std::size_t sample = 0;
  std::size_t mismatches = 0;
  double error_rate = 0.0;
  double threshold = 0.0;
  bool passed = true;
};

struct HopRow {
  int hop = 1;
  std::optional<TransmissionReceipt> receipt_1;
  std::optional<TransmissionReceipt> receipt_2;
  std::optional<CheckRow> first_check;
  std::optional<CheckRow> second_check;
  AbortReason abort_reason = AbortReason::none;
  std::size_t key_bits = 0;
  std::optional<double> i_ab;
  std::optional<double> i_ae;
  std::optional<double> efficiency;
};

/// One protocol run, flattened for reporting.
struct TrialRecord {
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;  // run seed XOR trial index
  AbortReason abort_reason = AbortReason::none;
  int abort_hop = 0;       // 0 when not aborted
  bool detected = false;   // some eavesdropping check failed
  std::size_t key_bits = 0;  // final (common) key length
  bool key_agreement = false;
  std::vector<HopRow> hops;
};

struct CheckAggregate {
  std::size_t trials = 0;    // trials in which this check ran
  std::size_t failures = 0;  // of which failed
  std::uint64_t mismatches = 0;
  std::uint64_t samples = 0;
  std::optional<double> pooled_rate;  // mismatches / samples
  std::optional<double> pooled_se;    // binomial
  std::optional<double> mean_rate;    // mean of per-trial rates
  std::optional<double> se_mean;      // standard error of that mean
};

struct HopAggregate {
  int hop = 1;
  CheckAggregate first_check;
  CheckAggregate second_check;
  std::optional<double> mean_receipt_1;
  std::optional<double> mean_receipt_2;
  std::optional<double> mean_i_ab;
  std::optional<double> mean_i_ae;
  std::optional<double> mean_efficiency;
};

struct Aggregate {
  std::size_t trials = 0;
  double detection_rate = 0.0;
  double abort_rate = 0.0;
  double key_agreement_rate = 0.0;
  double mean_key_bits = 0.0;
  std::vector<HopAggregate> hops;
};

struct RunReport {
  RunConfig config;
  std::vector<TrialRecord> trials;
  Aggregate aggregate;
  double wall_time_seconds = 0.0;  // not serialized unless asked for
};

/// Runs one trial with randomness rooted at (seed XOR trial).
TrialRecord simulate_trial(const RunConfig& config, std::uint64_t trial,
                           Transcript* transcript = nullptr);

/// Runs every trial in order. When `transcripts` is non-null one transcript per
/// trial is appended to it.
RunReport run(const RunConfig& config, std::vector<Transcript>* transcripts = nullptr);

/// Deterministic fold over trial rows in trial order.
Aggregate aggregate(std::span<const TrialRecord> trials, int hops);

enum class ReportFormat : std::uint8_t { structured, tabular };

ReportFormat report_format_from_string(std::string_view name);

/// JSON document: schema, config echo, per-trial array, aggregates.
Json report_to_json(const RunReport& report, bool include_timing = false);
/// CSV with one row per trial; columns fixed by the schema version and hop count.
std::string report_to_tabular(const RunReport& report);
std::string render_report(const RunReport& report, ReportFormat format,
                          bool include_timing = false);

/// Parses the config echo and per-trial rows of a structured report. The
/// aggregate is recomputed from the rows, not read back. Throws ValidationError on schema mismatch or malformed content.
RunReport report_from_json(const Json& j);

/// Recomputes the aggregates of a structured report from its trial rows and
/// lists every field that differs. Empty means the report is consistent.
std::vector<std::string> verify_report(const Json& j);

}  // namespace eprqkd
