// Command-line front end: run batches of protocol trials and verify reports.
//
//   eprqkd --pairs 1000 --trials 100 --attack fake-epr --out report.json
//   eprqkd verify report.json

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "eprqkd/errors.hpp"
#include "eprqkd/runner.hpp"

namespace {

constexpr int kExitIoError = 1;
constexpr int kExitUsage = 2;

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot open " + path + " for writing");
  out << content;
  if (!out) throw std::ios_base::failure("failed writing " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

int main(int argc, char** argv) {
  using eprqkd::RunConfig;

  CLI::App app{"Two-step EPR-pair key distribution simulator"};
  app.set_version_flag("--version", std::string(eprqkd::kReportSchema));

  RunConfig cfg;
  std::string config_path;
  std::string attack = "none";
  std::string fake_label = "psi1";
  std::string out_path;
  std::string format = "structured";
  bool transcript = false;
  bool timing = false;

  auto* config_opt = app.add_option("--config", config_path,
                                    "Start from the config echo of an earlier report (JSON); "
                                    "explicit flags override it");
  auto* pairs = app.add_option("--pairs", cfg.pairs, "EPR pairs per run");
  auto* trials = app.add_option("--trials", cfg.trials, "Independent repetitions");
  auto* seed = app.add_option("--seed", cfg.seed, "Root seed; trial t uses seed XOR t");
  auto* attack_opt = app.add_option("--attack", attack, "Eavesdropping strategy")
                         ->check(CLI::IsMember({"none", "measure-resend", "fake-epr", "opaque"}));
  auto* destroy = app.add_option("--destroy-prob", cfg.attack.destroy_probability,
                                 "Opaque attack: probability Eve destroys a particle");
  auto* fake = app.add_option("--fake-label", fake_label,
                              "Fake-EPR attack: label of Eve's pairs")
                   ->check(CLI::IsMember({"psi1", "psi2", "psi3", "psi4", "uniform"}));
  auto* both = app.add_flag("--eve-measure-both", cfg.attack.measure_second_sequence,
                            "Measure-resend attack: also measure the second sequence");
  auto* f1 = app.add_option("--check-fraction-1", cfg.check_fraction_1, "First check sample fraction");
  auto* f2 = app.add_option("--check-fraction-2", cfg.check_fraction_2, "Second check sample fraction");
  auto* t1 = app.add_option("--threshold-1", cfg.threshold_1, "First check maximum error rate");
  auto* t2 = app.add_option("--threshold-2", cfg.threshold_2, "Second check maximum error rate");
  auto* min_sample = app.add_option("--min-check-sample", cfg.min_check_sample,
                                    "Smallest check sample (capped at the pairs available)");
  auto* loss = app.add_option("--loss-tolerance", cfg.loss_tolerance,
                              "Tolerated fraction of lost particles per transmission");
  auto* parties = app.add_option("--parties", cfg.parties, "2 (Alice, Bob) or 3 (relay to Clare)")
                      ->check(CLI::IsMember({2, 3}));
  auto* attack_hop = app.add_option("--attack-hop", cfg.attack_hop,
                                    "Hop Eve attacks in a 3-party chain (0 = every hop)");
  auto* continuation = app.add_flag("--continuation-mode", cfg.continuation_mode,
                                    "Testing aid: keep running past a failed check");
  app.add_option("--out", out_path, "Report path (default: stdout)");
  app.add_option("--format", format, "Report format")
      ->check(CLI::IsMember({"structured", "tabular"}));
  app.add_flag("--transcript", transcript, "Also write <out>.transcript.jsonl");
  app.add_flag("--timing", timing, "Include wall time in the structured report");

  std::string verify_path;
  auto* verify = app.add_subcommand("verify", "Recompute a report's aggregates from its trial rows");
  verify->add_option("report", verify_path, "Structured report")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; anything else is a usage error.
    return app.exit(e) == 0 ? EXIT_SUCCESS : kExitUsage;
  }

  try {
    if (*verify) {
      const auto problems = eprqkd::verify_report(eprqkd::Json::parse(read_file(verify_path)));
      for (const auto& p : problems) std::cerr << "mismatch: " << p << '\n';
      std::cout << (problems.empty() ? "report consistent\n" : "report inconsistent\n");
      return problems.empty() ? EXIT_SUCCESS : EXIT_FAILURE;
    }

    if (*config_opt) {
      // Re-parse so that explicit flags win over the loaded file.
      const RunConfig flags = cfg;
      const auto doc = eprqkd::Json::parse(read_file(config_path));
      cfg = RunConfig::from_json(doc.contains("config") ? doc.at("config") : doc);
      if (*pairs) cfg.pairs = flags.pairs;
      if (*trials) cfg.trials = flags.trials;
      if (*seed) cfg.seed = flags.seed;
      if (*destroy) cfg.attack.destroy_probability = flags.attack.destroy_probability;
      if (*both) cfg.attack.measure_second_sequence = flags.attack.measure_second_sequence;
      if (*f1) cfg.check_fraction_1 = flags.check_fraction_1;
      if (*f2) cfg.check_fraction_2 = flags.check_fraction_2;
      if (*t1) cfg.threshold_1 = flags.threshold_1;
      if (*t2) cfg.threshold_2 = flags.threshold_2;
      if (*min_sample) cfg.min_check_sample = flags.min_check_sample;
      if (*loss) cfg.loss_tolerance = flags.loss_tolerance;
      if (*parties) cfg.parties = flags.parties;
      if (*attack_hop) cfg.attack_hop = flags.attack_hop;
      if (*continuation) cfg.continuation_mode = flags.continuation_mode;
    }
    if (!*config_opt || *attack_opt) cfg.attack.kind = eprqkd::attack_kind_from_string(attack);
    if (!*config_opt || *fake) {
      cfg.attack.fake_label_uniform = fake_label == "uniform";
      if (!cfg.attack.fake_label_uniform) {
        cfg.attack.fake_label = eprqkd::bell_label_from_string(fake_label);
      }
    }
    if (transcript && out_path.empty()) {
      throw eprqkd::ConfigError("--transcript requires --out");
    }

    std::vector<eprqkd::Transcript> transcripts;
    const auto report = eprqkd::run(cfg, transcript ? &transcripts : nullptr);
    const auto text =
        eprqkd::render_report(report, eprqkd::report_format_from_string(format), timing);

    if (out_path.empty()) {
      std::cout << text;
    } else {
      write_file(out_path, text);
    }
    if (transcript) {
      std::string lines;
      for (const auto& t : transcripts) lines += t.to_jsonl();
      write_file(out_path + ".transcript.jsonl", lines);
    }
    return EXIT_SUCCESS;
  } catch (const eprqkd::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const eprqkd::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIoError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitIoError;
  }
}
