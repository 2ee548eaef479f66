#ifndef QKERN_KERNELS_HPP
#define QKERN_KERNELS_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "qkern/core.hpp"
#include "qkern/qhmm.hpp"

namespace qkern::kernels {

using qhmm::DensityOperator;
using qhmm::Qhmm;

enum class Family { Predictive, Structural, Rbf };
enum class Metric { Trace, Bures, Fidelity };

/// Automatic RBF bandwidth rule, used when no explicit sigma is given.
/// Scale: gamma = 1 / (length * Var(x)) over all symbol values, i.e. sigma^2 = length * Var(x) / 2.
/// Median: sigma = median of the non-zero pairwise Euclidean distances.
enum class Bandwidth { Scale, Median };

struct KernelSpec {
  Family family = Family::Predictive;
  Metric metric = Metric::Trace;  ///< ignored for Rbf
  std::optional<double> rbf_sigma;  ///< nullopt selects `bandwidth`
  Bandwidth bandwidth = Bandwidth::Scale;
  double gamma = 1.0;  ///< projected kernel only

  /// "predictive:trace", "structural:bures", "rbf", "rbf:median", "rbf:0.7", ...
  std::string id() const;
  static KernelSpec parse(const std::string& text);
};

struct GramMatrix {
  std::vector<Sequence> labels;
  Eigen::MatrixXd values;
  double min_eigenvalue_raw = 0.0;
  bool repaired = false;
};

/// rho_y = T_y rho0 / P[y | rho0].
DensityOperator phi_predictive(const Qhmm& q, const Sequence& y);

/// Mean of the generating states of y; y must be non-empty.
DensityOperator phi_structural(const Qhmm& q, const Sequence& y);

DensityOperator feature_state(const Qhmm& q, Family family, const Sequence& y);

/// Trace distance, Bures divergence, or 1 - F between two feature states.
double state_distance(Metric metric, const DensityOperator& r1, const DensityOperator& r2);

/// exp(-distance) for trace and Bures; F itself for fidelity.
double kernel_from_states(Metric metric, const DensityOperator& r1, const DensityOperator& r2);

/// Quantum kernel between two sequences. Throws std::invalid_argument for the rbf family.
double kernel_value(const Qhmm& q, const KernelSpec& spec, const Sequence& y1, const Sequence& y2);

/// exp(-||y1 - y2||^2 / (2 sigma^2)) with symbols mapped to their alphabet position.
double rbf_kernel(const Sequence& y1, const Sequence& y2, double sigma, const std::string& alphabet = "0123456789");

/// Median of the non-zero pairwise Euclidean distances (1.0 when all sequences coincide).
double median_sigma(const std::vector<Sequence>& sequences, const std::string& alphabet = "0123456789");
/// sqrt(length * Var(x) / 2) over every symbol value in the set (sqrt(1/2) when the variance is zero).
double scale_sigma(const std::vector<Sequence>& sequences, const std::string& alphabet = "0123456789");
/// The explicit sigma of `spec`, or its bandwidth rule applied to `sequences`.
double resolve_sigma(const KernelSpec& spec, const std::vector<Sequence>& sequences,
                     const std::string& alphabet = "0123456789");

/// Eigenvalue clipping at zero followed by symmetric reconstruction.
Eigen::MatrixXd clip_to_psd(const Eigen::MatrixXd& m);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Eigen::MatrixXd& m);

/// Symmetric kernel matrix; repaired when the raw spectrum dips below -1e-8.
/// For the rbf family with an automatic sigma, the bandwidth rule runs over `dataset`.
GramMatrix gram(const Qhmm& q, const KernelSpec& spec, const std::vector<Sequence>& dataset);

/// Cross-kernel rows K(query_i, reference_j); no repair.
Eigen::MatrixXd cross_kernel(const Qhmm& q, const KernelSpec& spec, const std::vector<Sequence>& queries,
                             const std::vector<Sequence>& references);

/// Upper-triangle pairwise distances in row-major order (-log kernel; 1 - F for fidelity).
std::vector<double> pairwise_distances(const Qhmm& q, const KernelSpec& spec, const std::vector<Sequence>& dataset);

/// Counts per [edge_i, edge_{i+1}); values outside the edges land in the nearest end bin.
std::vector<std::size_t> distance_histogram(const Qhmm& q, const KernelSpec& spec,
                                            const std::vector<Sequence>& dataset,
                                            const std::vector<double>& bin_edges);

std::vector<std::size_t> bin_values(const std::vector<double>& values, const std::vector<double>& bin_edges);

}  // namespace qkern::kernels

#endif  // QKERN_KERNELS_HPP
