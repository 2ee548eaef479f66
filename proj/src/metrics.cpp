#include "qkern/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qkern::metrics {

namespace {

constexpr double kBoundSlack = 1e-9;

void require_same_dim(const DensityOperator& r1, const DensityOperator& r2, const char* op) {
  if (r1.dim() != r2.dim()) throw DimensionError(std::string(op) + ": states have different dimensions");
}

// Lexicographic order on entries; fixes the operand order so symmetric results are bit-identical.
bool entries_less(const linalg::ComplexMatrix& a, const linalg::ComplexMatrix& b) {
  const auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].real() != y[i].real()) return x[i].real() < y[i].real();
    if (x[i].imag() != y[i].imag()) return x[i].imag() < y[i].imag();
  }
  return false;
}

}  // namespace

double trace_distance(const DensityOperator& r1, const DensityOperator& r2) {
  require_same_dim(r1, r2, "trace_distance");
  const bool swap = entries_less(r2.matrix(), r1.matrix());
  const auto& a = swap ? r2.matrix() : r1.matrix();
  const auto& b = swap ? r1.matrix() : r2.matrix();
  const auto eig = linalg::hermitian_eig(a - b);
  double s = 0.0;
  for (double l : eig.eigenvalues) s += std::abs(l);
  return std::clamp(0.5 * s, 0.0, 1.0);
}

double fidelity(const DensityOperator& r1, const DensityOperator& r2) {
  require_same_dim(r1, r2, "fidelity");
  const auto root = linalg::sqrt_psd(r1.matrix());
  const auto inner = linalg::hermitian_part(linalg::matmul(linalg::matmul(root, r2.matrix()), root));
  const auto eig = linalg::hermitian_eig(inner);
  // Eigenvalues at roundoff level are indistinguishable from zero; their square roots would leak ~1e-8 into F.
  const double noise = 16.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(r1.dim()) *
                       std::max(1.0, eig.eigenvalues.back());
  double s = 0.0;
  for (double l : eig.eigenvalues) s += l > noise ? std::sqrt(l) : 0.0;
  return std::clamp(s * s, 0.0, 1.0);
}

double bures(const DensityOperator& r1, const DensityOperator& r2) {
  return std::clamp(2.0 - 2.0 * std::sqrt(fidelity(r1, r2)), 0.0, 2.0);
}

ForwardDistribution forward_distribution(const Qhmm& q, const DensityOperator& rho, int k) {
  return qhmm::enumerate_distribution(q, rho, k);
}

double total_variation(const ForwardDistribution& d1, const ForwardDistribution& d2) {
  if (d1.length != d2.length) throw std::invalid_argument("total_variation: horizons differ");
  double sup = 0.0;
  for (const auto& [z, p] : d1.probs) sup = std::max(sup, std::abs(p - d2.at(z)));
  for (const auto& [z, p] : d2.probs)
    if (!d1.probs.contains(z)) sup = std::max(sup, p);
  return sup;
}

double half_l1_distance(const ForwardDistribution& d1, const ForwardDistribution& d2) {
  if (d1.length != d2.length) throw std::invalid_argument("half_l1_distance: horizons differ");
  double s = 0.0;
  for (const auto& [z, p] : d1.probs) s += std::abs(p - d2.at(z));
  for (const auto& [z, p] : d2.probs)
    if (!d1.probs.contains(z)) s += p;
  return 0.5 * s;
}

BoundCheck check_proposition1(const Qhmm& q, const DensityOperator& r1, const DensityOperator& r2, int k) {
  BoundCheck out;
  out.lhs = total_variation(forward_distribution(q, r1, k), forward_distribution(q, r2, k));
  out.rhs = 2.0 * trace_distance(r1, r2);
  out.holds = out.lhs <= out.rhs + kBoundSlack;
  return out;
}

double predictive_class_probability(const Qhmm& q, const ClassLabeler& label, const Sequence& y, int k, int c) {
  const DensityOperator rho = qhmm::end_state(q, y);
  const auto forward = forward_distribution(q, rho, k);
  double p = 0.0;
  for (const auto& [z, pz] : forward.probs)
    if (label(y + z) == c) p += pz;
  return p;
}

BoundCheck check_proposition2(const Qhmm& q, const ClassLabeler& label, const Sequence& y1, const Sequence& y2,
                              int k) {
  BoundCheck out;
  for (int c = 0; c <= 1; ++c) {
    out.lhs = std::max(out.lhs, std::abs(predictive_class_probability(q, label, y1, k, c) -
                                         predictive_class_probability(q, label, y2, k, c)));
  }
  const double alphabet_power = std::pow(static_cast<double>(q.channels().size()), k);
  out.rhs = 2.0 * alphabet_power * trace_distance(qhmm::end_state(q, y1), qhmm::end_state(q, y2));
  out.holds = out.lhs <= out.rhs + kBoundSlack;
  return out;
}

}  // namespace qkern::metrics
