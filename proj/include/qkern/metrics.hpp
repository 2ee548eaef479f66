#ifndef QKERN_METRICS_HPP
#define QKERN_METRICS_HPP

#include <functional>

#include "qkern/core.hpp"
#include "qkern/qhmm.hpp"

namespace qkern::metrics {

using qhmm::DensityOperator;
using qhmm::Qhmm;

/// Distribution over all length-k continuations from a given state.
using ForwardDistribution = SequenceDistribution;

/// 1/2 tr|r1 - r2|, in [0, 1].
double trace_distance(const DensityOperator& r1, const DensityOperator& r2);

/// (tr sqrt(sqrt(r1) r2 sqrt(r1)))^2, clamped to [0, 1].
double fidelity(const DensityOperator& r1, const DensityOperator& r2);

/// 2 - 2 sqrt(F); note this is the squared Bures distance, range [0, 2].
double bures(const DensityOperator& r1, const DensityOperator& r2);

ForwardDistribution forward_distribution(const Qhmm& q, const DensityOperator& rho, int k);

/// sup_z |P1(z) - P2(z)|.
double total_variation(const ForwardDistribution& d1, const ForwardDistribution& d2);

/// 1/2 sum_z |P1(z) - P2(z)|, the other common convention. Diagnostic only.
double half_l1_distance(const ForwardDistribution& d1, const ForwardDistribution& d2);

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// sup-TV of forward distributions against 2 D(r1, r2).
BoundCheck check_proposition1(const Qhmm& q, const DensityOperator& r1, const DensityOperator& r2, int k);

/// Deterministic class labeler applied to full sequences yz.
using ClassLabeler = std::function<int(const Sequence&)>;

/// p_p(y, k, c) = sum_z P[z | y] [label(yz) == c], for c in {0, 1}.
double predictive_class_probability(const Qhmm& q, const ClassLabeler& label, const Sequence& y, int k, int c);

/// sup_c |p_p(y1,k,c) - p_p(y2,k,c)| against 2 |Sigma|^k D(rho_y1, rho_y2).
BoundCheck check_proposition2(const Qhmm& q, const ClassLabeler& label, const Sequence& y1, const Sequence& y2, int k);

}  // namespace qkern::metrics

#endif  // QKERN_METRICS_HPP
