#include "eprqkd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eprqkd/errors.hpp"
#include "eprqkd/protocol.hpp"

namespace eprqkd::analysis {

namespace {

void validate_probabilities(std::span<const double> p) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw ValidationError("probabilities must be non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > JointDistribution::kSumTolerance) {
    throw ValidationError("probabilities must sum to 1");
  }
}

// Entropy without validation; callers have already checked the table.
double entropy_bits(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return h;
}

}  // namespace

JointDistribution::JointDistribution(std::size_t rows, std::size_t cols, std::vector<double> p)
    : rows_(rows), cols_(cols), p_(std::move(p)) {
  if (rows_ == 0 || cols_ == 0 || p_.size() != rows_ * cols_) {
    throw ValidationError("joint distribution shape mismatch");
  }
  validate_probabilities(p_);
}

JointDistribution JointDistribution::from_counts(std::size_t rows, std::size_t cols,
                                                 std::span<const std::uint64_t> counts) {
  if (counts.size() != rows * cols) throw ValidationError("contingency table shape mismatch");
  const auto total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (total == 0) throw ValidationError("contingency table is empty");
  std::vector<double> p(counts.size());
  std::transform(counts.begin(), counts.end(), p.begin(), [total](std::uint64_t c) {
    return static_cast<double>(c) / static_cast<double>(total);
  });
  return JointDistribution(rows, cols, std::move(p));
}

std::vector<double> JointDistribution::marginal_x() const {
  std::vector<double> m(rows_, 0.0);
  for (std::size_t x = 0; x < rows_; ++x)
    for (std::size_t y = 0; y < cols_; ++y) m[x] += at(x, y);
  return m;
}

std::vector<double> JointDistribution::marginal_y() const {
  std::vector<double> m(cols_, 0.0);
  for (std::size_t x = 0; x < rows_; ++x)
    for (std::size_t y = 0; y < cols_; ++y) m[y] += at(x, y);
  return m;
}

JointDistribution JointDistribution::transposed() const {
  std::vector<double> t(p_.size());
  for (std::size_t x = 0; x < rows_; ++x)
    for (std::size_t y = 0; y < cols_; ++y) t[y * rows_ + x] = at(x, y);
  return JointDistribution(cols_, rows_, std::move(t));
}

void ContingencyTable::add(std::size_t x, std::size_t y) {
  if (x >= rows_ || y >= cols_) throw InternalError("contingency index out of range");
  ++counts_[x * cols_ + y];
  ++total_;
}

JointDistribution ContingencyTable::to_distribution() const {
  return JointDistribution::from_counts(rows_, cols_, counts_);
}

double shannon_entropy(std::span<const double> p) {
  if (p.empty()) throw ValidationError("empty distribution");
  validate_probabilities(p);
  return entropy_bits(p);
}

double conditional_entropy(const JointDistribution& joint) {
  const auto py = joint.marginal_y();
  double h = 0.0;
  std::vector<double> column(joint.rows());
  for (std::size_t y = 0; y < joint.cols(); ++y) {
    if (py[y] <= 0.0) continue;
    for (std::size_t x = 0; x < joint.rows(); ++x) column[x] = joint.at(x, y) / py[y];
    h += py[y] * entropy_bits(column);
  }
  return h;
}

double mutual_information(const JointDistribution& joint) {
  const auto px = joint.marginal_x();
  const double i = entropy_bits(px) - conditional_entropy(joint);
  return std::max(i, 0.0);
}

Bb84Reference reference_bb84() {
  const double log2_3 = std::log2(3.0);
  const double log2_5 = std::log2(5.0);
  return {
      .i_ab_attacked = 5.0 / 8.0 * log2_5 + 3.0 / 8.0 * log2_3 - 2.0,
      .i_ae = 3.0 / 4.0 * log2_3 - 1.0,
      .i_ab_clean = 3.0 / 4.0 * log2_3 - 1.0,
  };
}

double efficiency(const EfficiencyInputs& in) {
  if (in.secret_bits < 0.0 || in.qubits < 0.0 || in.classical_bits < 0.0) {
    throw ValidationError("efficiency inputs must be non-negative");
  }
  const double denominator = in.qubits + in.classical_bits;
  if (!(denominator > 0.0)) throw ValidationError("efficiency: q_t + b_t must be positive");
  return in.secret_bits / denominator;
}

EfficiencyInputs bb84_efficiency_inputs() { return {0.5, 1.0, 1.0}; }
EfficiencyInputs epr_efficiency_inputs() { return {1.0, 2.0, 0.0}; }
EfficiencyInputs two_step_efficiency_inputs() { return {2.0, 2.0, 0.0}; }

RateEstimate estimate_rate(std::uint64_t mismatches, std::uint64_t samples) {
  if (samples == 0) throw ValidationError("error rate over zero samples");
  if (mismatches > samples) throw ValidationError("more mismatches than samples");
  const double n = static_cast<double>(samples);
  const double p = static_cast<double>(mismatches) / n;
  return {mismatches, samples, p, std::sqrt(p * (1.0 - p) / n)};
}

QberSummary qber(std::span<const CheckReport> reports) {
  std::uint64_t m[2] = {0, 0};
  std::uint64_t n[2] = {0, 0};
  for (const auto& r : reports) {
    const int k = r.check == CheckId::first ? 0 : 1;
    m[k] += r.mismatches;
    n[k] += r.sample_indices.size();
  }
  QberSummary s;
  if (n[0] > 0) s.first = estimate_rate(m[0], n[0]);
  if (n[1] > 0) s.second = estimate_rate(m[1], n[1]);
  s.overall = estimate_rate(m[0] + m[1], n[0] + n[1]);
  return s;
}

}  // namespace eprqkd::analysis
