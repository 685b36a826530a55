#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace eprqkd {

struct CheckReport;

namespace analysis {

/// Joint probability table p(x, y) over two finite alphabets.
/// Rows index X, columns index Y.
class JointDistribution {
 public:
  static constexpr double kSumTolerance = 1e-9;

  /// Row-major probabilities, rows * cols entries. Throws ValidationError if
  /// any entry is negative or the total differs from 1 by more than 1e-9.
  JointDistribution(std::size_t rows, std::size_t cols, std::vector<double> p);

  /// Plug-in estimate from a row-major contingency table of counts.
  /// Throws ValidationError when the table is empty or sums to zero.
  static JointDistribution from_counts(std::size_t rows, std::size_t cols,
                                       std::span<const std::uint64_t> counts);

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }
  [[nodiscard]] double at(std::size_t x, std::size_t y) const { return p_[x * cols_ + y]; }

  [[nodiscard]] std::vector<double> marginal_x() const;
  [[nodiscard]] std::vector<double> marginal_y() const;

  /// Same table with X and Y swapped.
  [[nodiscard]] JointDistribution transposed() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> p_;
};

/// Counts of co-occurring symbols, accumulated incrementally.
class ContingencyTable {
 public:
  ContingencyTable(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), counts_(rows * cols, 0) {}

  void add(std::size_t x, std::size_t y);
  [[nodiscard]] std::uint64_t total() const { return total_; }
  [[nodiscard]] std::uint64_t count(std::size_t x, std::size_t y) const {
    return counts_[x * cols_ + y];
  }
  [[nodiscard]] JointDistribution to_distribution() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// H(X) = -sum p log2 p in bits, over the entries with p > 0.
double shannon_entropy(std::span<const double> p);

/// H(X|Y) in bits. Columns with zero marginal contribute nothing.
double conditional_entropy(const JointDistribution& joint);

/// I(X:Y) = H(X) - H(X|Y) in bits, clamped at zero for round-off.
double mutual_information(const JointDistribution& joint);

/// Closed-form mutual-information values for BB84 used as a comparison point.
struct Bb84Reference {
  double i_ab_attacked;  // Alice/Bob under intercept-resend
  double i_ae;           // Alice/Eve (= Eve/Bob) under intercept-resend
  double i_ab_clean;     // Alice/Bob without eavesdropping
};

Bb84Reference reference_bb84();

/// Inputs to eta = b_s / (q_t + b_t). Classical bits spent on eavesdropping
/// checks are not counted in b_t.
struct EfficiencyInputs {
  double secret_bits = 0.0;     // b_s
  double qubits = 0.0;          // q_t
  double classical_bits = 0.0;  // b_t
};

/// Throws ValidationError on negative inputs or a zero denominator.
double efficiency(const EfficiencyInputs& in);

/// Per-unit accounting: one qubit, half of them kept, one basis bit announced.
EfficiencyInputs bb84_efficiency_inputs();
/// Per pair: two qubits, one key bit, bases compared only on check pairs.
EfficiencyInputs epr_efficiency_inputs();
/// Per pair of the two-step protocol: two qubits, two key bits, nothing announced.
EfficiencyInputs two_step_efficiency_inputs();

/// An error-rate estimate with its binomial standard error sqrt(p(1-p)/n).
struct RateEstimate {
  std::uint64_t mismatches = 0;
  std::uint64_t samples = 0;
  double rate = 0.0;
  double standard_error = 0.0;
};

/// Throws ValidationError when samples == 0 or mismatches > samples.
RateEstimate estimate_rate(std::uint64_t mismatches, std::uint64_t samples);

struct QberSummary {
  std::optional<RateEstimate> first;
  std::optional<RateEstimate> second;
  RateEstimate overall;
};

/// Pools check reports by check id. Throws ValidationError if no comparison
/// was made at all.
QberSummary qber(std::span<const CheckReport> reports);

}  // namespace analysis
}  // namespace eprqkd
