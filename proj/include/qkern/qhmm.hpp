#ifndef QKERN_QHMM_HPP
#define QKERN_QHMM_HPP

#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "qkern/core.hpp"
#include "qkern/hmm.hpp"
#include "qkern/linalg.hpp"

namespace qkern::qhmm {

using linalg::ComplexMatrix;

/// Hermitian, PSD, unit-trace matrix. The checked constructor enforces the
/// invariants to 1e-10; `trusted` skips the spectral check for states produced
/// by operations that preserve them.
class DensityOperator {
 public:
  explicit DensityOperator(ComplexMatrix m);
  static DensityOperator trusted(ComplexMatrix m);
  static DensityOperator maximally_mixed(std::size_t dim);
  static DensityOperator pure(std::span<const linalg::Complex> amplitudes);

  std::size_t dim() const noexcept { return matrix_.rows(); }
  const ComplexMatrix& matrix() const noexcept { return matrix_; }

 private:
  struct Unchecked {};
  DensityOperator(ComplexMatrix m, Unchecked) : matrix_(std::move(m)) {}
  ComplexMatrix matrix_;
};

/// Largest violation of the density-operator invariants (Hermiticity, trace, negative eigenvalue).
double density_violation(const ComplexMatrix& m);

struct SymbolChannel {
  char symbol;
  std::vector<ComplexMatrix> kraus;
};

/// Channel-form QHMM: one Kraus set per symbol, jointly complete.
class Qhmm {
 public:
  /// Checks shapes only; call validate() for completeness.
  Qhmm(std::vector<SymbolChannel> channels, DensityOperator initial);

  std::string alphabet() const;
  std::size_t dim() const noexcept { return initial_.dim(); }
  const std::vector<SymbolChannel>& channels() const noexcept { return channels_; }
  const DensityOperator& initial() const noexcept { return initial_; }
  const SymbolChannel& channel(char a) const;

  Qhmm with_initial(DensityOperator rho) const;

 private:
  std::vector<SymbolChannel> channels_;
  DensityOperator initial_;
};

struct Diagnostics {
  double completeness_deviation = 0.0;  ///< max |sum K^dagger K - I| entry
  double initial_violation = 0.0;
  bool passed = false;
};

Diagnostics validate(const Qhmm& q);

/// Unnormalized branch sum_j K_j rho K_j^dagger for symbol a.
ComplexMatrix branch(const Qhmm& q, const ComplexMatrix& rho, char a);

struct SymbolOutcome {
  DensityOperator state;
  double probability;
};

/// Throws ImpossibleSequenceError when P[a | rho] <= 1e-12.
SymbolOutcome apply_symbol(const Qhmm& q, const DensityOperator& rho, char a);

/// P[y | rho0]; the empty sequence has probability 1.
double sequence_probability(const Qhmm& q, const Sequence& y);
double sequence_probability(const Qhmm& q, const DensityOperator& rho, const Sequence& y);

std::vector<DensityOperator> generating_states(const Qhmm& q, const Sequence& y);

/// Normalized end state after emitting y from the initial state.
DensityOperator end_state(const Qhmm& q, const Sequence& y);

std::map<char, double> conditional_next_distribution(const Qhmm& q, const Sequence& y);

Sequence sample(const Qhmm& q, int length, Rng& rng);

SequenceDistribution enumerate_distribution(const Qhmm& q, const DensityOperator& rho, int length);

/// Exact channel embedding of a classical HMM:
/// K_{a,(i,j)} = sqrt(B[a,i] A[j,i]) |j><i|, rho0 = diag(x0).
Qhmm embed_hmm(const hmm::ClassicalHmm& model);

/// Unitary dilation: U acts on state (high-order) x emission (low-order).
struct UnitaryQhmm {
  std::string alphabet;
  std::size_t state_dim = 0;
  std::size_t emission_dim = 0;
  ComplexMatrix unitary;
  ComplexMatrix basis;  ///< columns are the emission measurement basis
  std::vector<char> partition;  ///< emission basis index -> symbol
  std::size_t reset_index = 0;
  DensityOperator initial = DensityOperator::maximally_mixed(1);
};

/// Throws std::invalid_argument describing the first broken invariant.
void check(const UnitaryQhmm& u);

/// T_e = (I (x) <e~|) U (I (x) |e0>), grouped into symbol channels by the partition.
Qhmm kraus_from_unitary(const UnitaryQhmm& u);

/// Haar-random unitary via QR of a complex Ginibre matrix with phase-fixed R.
ComplexMatrix haar_unitary(std::size_t n, Rng& rng);

/// Random mixed state G G^dagger / tr for a complex Ginibre G of the given rank (0 = full rank).
DensityOperator random_density(std::size_t dim, Rng& rng, std::size_t rank = 0);

/// Random dilation with V = I and a maximally mixed initial state.
/// An empty partition assigns emission index e to alphabet[e % |alphabet|].
UnitaryQhmm random_qhmm(std::size_t state_dim, std::size_t emission_dim, const std::string& alphabet,
                        std::vector<char> partition, Rng& rng);

// Matrices serialize as rows of [re, im] pairs.
nlohmann::json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Qhmm& q);
Qhmm qhmm_from_json(const nlohmann::json& j);
nlohmann::json to_json(const UnitaryQhmm& u);
UnitaryQhmm unitary_from_json(const nlohmann::json& j);

}  // namespace qkern::qhmm

#endif  // QKERN_QHMM_HPP
