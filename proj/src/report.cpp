#include <sstream>
#include <string>

#include "eprqkd/errors.hpp"
#include "eprqkd/runner.hpp"

namespace eprqkd {

namespace {

template <typename T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <typename T>
std::optional<T> get_opt(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

Json receipt_json(const std::optional<TransmissionReceipt>& r) {
  if (!r) return nullptr;
  return {{"sent", r->sent}, {"received", r->received}, {"fraction", r->fraction()}};
}

std::optional<TransmissionReceipt> receipt_from(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return TransmissionReceipt{j.at("sent").get<std::size_t>(), j.at("received").get<std::size_t>()};
}

Json check_json(const std::optional<CheckRow>& c) {
  if (!c) return nullptr;
  return {{"sample", c->sample},
          {"mismatches", c->mismatches},
          {"error_rate", c->error_rate},
          {"threshold", c->threshold},
          {"passed", c->passed}};
}

std::optional<CheckRow> check_from(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return CheckRow{j.at("sample").get<std::size_t>(), j.at("mismatches").get<std::size_t>(),
                  j.at("error_rate").get<double>(), j.at("threshold").get<double>(),
                  j.at("passed").get<bool>()};
}

Json hop_json(const HopRow& h) {
  return {{"hop", h.hop},
          {"receipt_1", receipt_json(h.receipt_1)},
          {"receipt_2", receipt_json(h.receipt_2)},
          {"first_check", check_json(h.first_check)},
          {"second_check", check_json(h.second_check)},
          {"abort_reason", to_string(h.abort_reason)},
          {"key_bits", h.key_bits},
          {"i_ab_bits", opt(h.i_ab)},
          {"i_ae_bits", opt(h.i_ae)},
          {"efficiency", opt(h.efficiency)}};
}

HopRow hop_from(const Json& j) {
  HopRow h;
  h.hop = j.at("hop").get<int>();
  h.receipt_1 = receipt_from(j.at("receipt_1"));
  h.receipt_2 = receipt_from(j.at("receipt_2"));
  h.first_check = check_from(j.at("first_check"));
  h.second_check = check_from(j.at("second_check"));
  h.abort_reason = abort_reason_from_string(j.at("abort_reason").get<std::string>());
  h.key_bits = j.at("key_bits").get<std::size_t>();
  h.i_ab = get_opt<double>(j, "i_ab_bits");
  h.i_ae = get_opt<double>(j, "i_ae_bits");
  h.efficiency = get_opt<double>(j, "efficiency");
  return h;
}

Json trial_json(const TrialRecord& t) {
  Json hops = Json::array();
  for (const auto& h : t.hops) hops.push_back(hop_json(h));
  return {{"trial", t.trial},
          {"seed", t.seed},
          {"abort_reason", to_string(t.abort_reason)},
          {"abort_hop", t.abort_hop},
          {"detected", t.detected},
          {"key_bits", t.key_bits},
          {"key_agreement", t.key_agreement},
          {"hops", std::move(hops)}};
}

TrialRecord trial_from(const Json& j) {
  TrialRecord t;
  t.trial = j.at("trial").get<std::uint64_t>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.abort_reason = abort_reason_from_string(j.at("abort_reason").get<std::string>());
  t.abort_hop = j.at("abort_hop").get<int>();
  t.detected = j.at("detected").get<bool>();
  t.key_bits = j.at("key_bits").get<std::size_t>();
  t.key_agreement = j.at("key_agreement").get<bool>();
  for (const auto& h : j.at("hops")) t.hops.push_back(hop_from(h));
  return t;
}

Json check_aggregate_json(const CheckAggregate& c) {
  return {{"trials", c.trials},
          {"failures", c.failures},
          {"mismatches", c.mismatches},
          {"samples", c.samples},
          {"pooled_rate", opt(c.pooled_rate)},
          {"pooled_se", opt(c.pooled_se)},
          {"mean_rate", opt(c.mean_rate)},
          {"se_mean", opt(c.se_mean)}};
}

Json aggregate_json(const Aggregate& a) {
  Json hops = Json::array();
  for (const auto& h : a.hops) {
    hops.push_back({{"hop", h.hop},
                    {"first_check", check_aggregate_json(h.first_check)},
                    {"second_check", check_aggregate_json(h.second_check)},
                    {"mean_receipt_1", opt(h.mean_receipt_1)},
                    {"mean_receipt_2", opt(h.mean_receipt_2)},
                    {"mean_i_ab_bits", opt(h.mean_i_ab)},
                    {"mean_i_ae_bits", opt(h.mean_i_ae)},
                    {"mean_efficiency", opt(h.mean_efficiency)}});
  }
  return {{"trials", a.trials},
          {"detection_rate", a.detection_rate},
          {"abort_rate", a.abort_rate},
          {"key_agreement_rate", a.key_agreement_rate},
          {"mean_key_bits", a.mean_key_bits},
          {"hops", std::move(hops)}};
}

// Shortest round-trip text of a JSON scalar; empty for null.
std::string cell(const Json& v) { return v.is_null() ? std::string() : v.dump(); }

std::string cell(const std::string_view s) { return std::string(s); }

}  // namespace

Json RunConfig::to_json() const {
  return {{"pairs", pairs},
          {"trials", trials},
          {"seed", seed},
          {"attack",
           {{"kind", to_string(attack.kind)},
            {"destroy_probability", attack.destroy_probability},
            {"fake_label", attack.fake_label_uniform ? "uniform" : to_string(attack.fake_label)},
            {"measure_second_sequence", attack.measure_second_sequence}}},
          {"check_fraction_1", check_fraction_1},
          {"check_fraction_2", check_fraction_2},
          {"threshold_1", threshold_1},
          {"threshold_2", threshold_2},
          {"min_check_sample", min_check_sample},
          {"loss_tolerance", loss_tolerance},
          {"parties", parties},
          {"attack_hop", attack_hop},
          {"continuation_mode", continuation_mode}};
}

RunConfig RunConfig::from_json(const Json& j) {
  RunConfig c;
  try {
    c.pairs = j.value("pairs", c.pairs);
    c.trials = j.value("trials", c.trials);
    c.seed = j.value("seed", c.seed);
    if (j.contains("attack")) {
      const auto& a = j.at("attack");
      c.attack.kind = attack_kind_from_string(a.value("kind", std::string("none")));
      c.attack.destroy_probability = a.value("destroy_probability", 0.0);
      const auto fake = a.value("fake_label", std::string("psi1"));
      c.attack.fake_label_uniform = fake == "uniform";
      if (!c.attack.fake_label_uniform) c.attack.fake_label = bell_label_from_string(fake);
      c.attack.measure_second_sequence = a.value("measure_second_sequence", false);
    }
    c.check_fraction_1 = j.value("check_fraction_1", c.check_fraction_1);
    c.check_fraction_2 = j.value("check_fraction_2", c.check_fraction_2);
    c.threshold_1 = j.value("threshold_1", c.threshold_1);
    c.threshold_2 = j.value("threshold_2", c.threshold_2);
    c.min_check_sample = j.value("min_check_sample", c.min_check_sample);
    c.loss_tolerance = j.value("loss_tolerance", c.loss_tolerance);
    c.parties = j.value("parties", c.parties);
    c.attack_hop = j.value("attack_hop", c.attack_hop);
    c.continuation_mode = j.value("continuation_mode", c.continuation_mode);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

ReportFormat report_format_from_string(std::string_view name) {
  if (name == "structured") return ReportFormat::structured;
  if (name == "tabular") return ReportFormat::tabular;
  throw ConfigError("unknown report format: " + std::string(name));
}

Json report_to_json(const RunReport& report, bool include_timing) {
  Json trials = Json::array();
  for (const auto& t : report.trials) trials.push_back(trial_json(t));
  Json j;
  j["schema"] = kReportSchema;
  j["config"] = report.config.to_json();
  j["trials"] = std::move(trials);
  j["aggregate"] = aggregate_json(report.aggregate);
  if (include_timing) j["wall_time_seconds"] = report.wall_time_seconds;
  return j;
}

std::string report_to_tabular(const RunReport& report) {
  std::ostringstream out;
  out << "schema,trial,seed,abort_reason,abort_hop,detected,key_bits,key_agreement";
  const int hops = report.config.parties - 1;
  for (int h = 1; h <= hops; ++h) {
    const std::string p = "hop" + std::to_string(h) + "_";
    for (const char* col :
         {"receipt_1_sent", "receipt_1_received", "receipt_2_sent", "receipt_2_received",
          "check_1_sample", "check_1_mismatches", "check_1_error_rate", "check_1_threshold",
          "check_1_passed", "check_2_sample", "check_2_mismatches", "check_2_error_rate",
          "check_2_threshold", "check_2_passed", "abort_reason", "key_bits", "i_ab_bits",
          "i_ae_bits", "efficiency"}) {
      out << ',' << p << col;
    }
  }
  out << '\n';

  for (const auto& t : report.trials) {
    out << kReportSchema << ',' << t.trial << ',' << t.seed << ',' << to_string(t.abort_reason)
        << ',' << t.abort_hop << ',' << (t.detected ? "true" : "false") << ',' << t.key_bits
        << ',' << (t.key_agreement ? "true" : "false");
    for (int h = 1; h <= hops; ++h) {
      const bool present = t.hops.size() >= static_cast<std::size_t>(h);
      const HopRow row = present ? t.hops[static_cast<std::size_t>(h - 1)] : HopRow{};
      const Json hop = present ? hop_json(row) : Json(nullptr);
      auto field = [&](const char* obj, const char* key) {
        if (!present || hop.at(obj).is_null()) return std::string();
        return cell(hop.at(obj).at(key));
      };
      out << ',' << field("receipt_1", "sent") << ',' << field("receipt_1", "received") << ','
          << field("receipt_2", "sent") << ',' << field("receipt_2", "received");
      for (const char* c : {"first_check", "second_check"}) {
        out << ',' << field(c, "sample") << ',' << field(c, "mismatches") << ','
            << field(c, "error_rate") << ',' << field(c, "threshold") << ','
            << field(c, "passed");
      }
      if (present) {
        out << ',' << cell(to_string(row.abort_reason)) << ',' << row.key_bits << ','
            << cell(hop.at("i_ab_bits")) << ',' << cell(hop.at("i_ae_bits")) << ','
            << cell(hop.at("efficiency"));
      } else {
        out << ",,,,,";
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string render_report(const RunReport& report, ReportFormat format, bool include_timing) {
  if (format == ReportFormat::tabular) return report_to_tabular(report);
  return report_to_json(report, include_timing).dump(2) + "\n";
}

RunReport report_from_json(const Json& j) {
  try {
    if (j.at("schema").get<std::string>() != kReportSchema) {
      throw ValidationError("unsupported report schema " + j.at("schema").dump());
    }
    RunReport r;
    r.config = RunConfig::from_json(j.at("config"));
    for (const auto& t : j.at("trials")) r.trials.push_back(trial_from(t));
    r.aggregate = aggregate(r.trials, r.config.parties - 1);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
}

std::vector<std::string> verify_report(const Json& j) {
  const RunReport parsed = report_from_json(j);
  const Json recomputed = aggregate_json(parsed.aggregate);
  std::vector<std::string> problems;
  if (!j.contains("aggregate")) {
    problems.emplace_back("/aggregate missing");
    return problems;
  }
  if (parsed.trials.size() != parsed.config.trials) {
    problems.emplace_back("/trials count differs from config");
  }
  for (const auto& op : Json::diff(j.at("aggregate"), recomputed)) {
    problems.push_back("/aggregate" + op.at("path").get<std::string>());
  }
  return problems;
}

}  // namespace eprqkd
