#ifndef QKERN_CIRCUITS_HPP
#define QKERN_CIRCUITS_HPP

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qkern/core.hpp"
#include "qkern/kernels.hpp"
#include "qkern/qhmm.hpp"

namespace qkern::circuits {

using linalg::Complex;
using linalg::ComplexMatrix;
using qhmm::DensityOperator;
using qhmm::UnitaryQhmm;

class PureState {
 public:
  /// Requires unit norm within 1e-10.
  explicit PureState(std::vector<Complex> amplitudes);
  static PureState basis(std::size_t dim, std::size_t index);
  static PureState random(std::size_t dim, Rng& rng);

  std::size_t dim() const noexcept { return amplitudes_.size(); }
  const std::vector<Complex>& amplitudes() const noexcept { return amplitudes_; }

 private:
  std::vector<Complex> amplitudes_;
};

/// Outcome counts; for trajectories the outcome is the emitted symbol string.
struct ShotRecord {
  std::size_t shots = 0;
  std::map<std::string, std::size_t> counts;

  SequenceDistribution empirical(int length) const;
};

struct Trajectory {
  Sequence symbols;
  std::vector<Complex> state;  ///< hidden-system state vector after the last step
};

/// One pass through the dilation circuit: draw an initial pure state from the
/// eigen-ensemble of rho0, then per step apply U to state (x) |e0>, rotate the
/// emission register by V^dagger, measure it, map the outcome through the
/// partition and reset the register.
Trajectory run_single_trajectory(const UnitaryQhmm& u, int steps, Rng& rng);

ShotRecord run_trajectories(const UnitaryQhmm& u, int steps, std::size_t shots, Rng& rng);

/// Exact distribution over Sigma^steps from the Kraus channel of U.
SequenceDistribution run_exact(const UnitaryQhmm& u, int steps);

/// Ancilla-H, controlled-SWAP, H, measure; returns 2 (r0 / R - 1/2).
double swap_test(const PureState& psi, const PureState& phi, std::size_t shots, Rng& rng);

/// P(ancilla = 0) of the SWAP-test circuit, from the simulated state vector.
double swap_test_zero_probability(const PureState& psi, const PureState& phi);

struct BlochVector {
  double rx = 0.0, ry = 0.0, rz = 0.0;
  double norm() const;
};

enum class PauliBasis { X, Y, Z };

/// Probability of reading 0 after rotating a single-qubit state into the given basis
/// (X: H; Y: S^dagger then H; Z: none).
double basis_zero_probability(const ComplexMatrix& rho, PauliBasis basis);

/// r_k = (n0 - n1) / R per basis; `prepare` is invoked once per shot.
BlochVector pauli_expectations(const std::function<DensityOperator(Rng&)>& prepare, std::size_t shots_per_basis,
                               Rng& rng);

/// Same for a fixed state, drawing the basis counts binomially.
BlochVector pauli_expectations(const DensityOperator& rho, std::size_t shots_per_basis, Rng& rng);

/// rho = (I + r . sigma) / 2; r is first scaled onto the unit ball if it lies outside.
DensityOperator reconstruct_density(BlochVector r);

/// exp(-gamma ||rho1 - rho2||_F^2).
double projected_kernel(const DensityOperator& rho1, const DensityOperator& rho2, double gamma = 1.0);

/// Per-qubit reduced states of a 2^n-dimensional operator; qubit 0 is the high-order bit.
std::vector<DensityOperator> one_rdms(const ComplexMatrix& rho);

/// exp(-gamma sum_q ||rho1_q - rho2_q||_F^2) over matching 1-RDM lists.
double projected_kernel(const std::vector<DensityOperator>& rdms1, const std::vector<DensityOperator>& rdms2,
                        double gamma = 1.0);

inline constexpr double kPostSelectionFloor = 1e-6;

struct ProjectedGram {
  kernels::GramMatrix gram;
  std::vector<Sequence> skipped;  ///< sequences below the post-selection floor
};

/// Infinite-shot projected kernel from the channel's end states.
ProjectedGram projected_kernel_matrix_exact(const qhmm::Qhmm& q, const std::vector<Sequence>& sequences,
                                            double gamma = 1.0);
ProjectedGram projected_kernel_matrix_exact(const UnitaryQhmm& u, const std::vector<Sequence>& sequences,
                                            double gamma = 1.0);

/// Shot-based protocol: rejection-sample trajectories that emit each sequence, run
/// X/Y/Z tomography on every state qubit, reconstruct, and form the kernel.
ProjectedGram projected_kernel_matrix(const UnitaryQhmm& u, const std::vector<Sequence>& sequences,
                                      std::size_t shots_per_basis, double gamma, Rng& rng);

}  // namespace qkern::circuits

#endif  // QKERN_CIRCUITS_HPP
