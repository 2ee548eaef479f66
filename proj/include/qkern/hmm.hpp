#ifndef QKERN_HMM_HPP
#define QKERN_HMM_HPP

#include <nlohmann/json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "qkern/core.hpp"

namespace qkern::hmm {

/// Real dense matrix, row-major.
class RealMatrix {
 public:
  RealMatrix() = default;
  RealMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

using BeliefVector = std::vector<double>;

/// Classical HMM acting on column beliefs.
///
/// transition(j, i) = P[next = j | current = i] (columns sum to one);
/// emission(a, i) = P[symbol a | state i]. A symbol is emitted from the current
/// state before the transition, so T_a = A diag(B[a, .]).
class ClassicalHmm {
 public:
  /// Validates stochasticity to 1e-12 and throws std::invalid_argument otherwise.
  ClassicalHmm(std::string alphabet, RealMatrix transition, RealMatrix emission, BeliefVector initial);

  /// Builds a model from the row-major table layout (row i = distributions given state i).
  static ClassicalHmm from_rows(std::string alphabet, const std::vector<std::vector<double>>& transition_rows,
                                const std::vector<std::vector<double>>& emission_rows, BeliefVector initial);

  const std::string& alphabet() const noexcept { return alphabet_; }
  std::size_t n_states() const noexcept { return initial_.size(); }
  const RealMatrix& transition() const noexcept { return transition_; }
  const RealMatrix& emission() const noexcept { return emission_; }
  const BeliefVector& initial() const noexcept { return initial_; }

  /// Index of symbol `a` in the alphabet; throws std::invalid_argument for unknown symbols.
  std::size_t symbol_index(char a) const;

 private:
  std::string alphabet_;
  RealMatrix transition_;
  RealMatrix emission_;
  BeliefVector initial_;
};

/// The four-state market-movement model over {0,1} with a uniform initial belief.
ClassicalHmm market4();

RealMatrix observable_operator(const ClassicalHmm& model, char a);

/// T_y x0 without normalization.
BeliefVector feature_map(const ClassicalHmm& model, const Sequence& y);

double sequence_probability(const ClassicalHmm& model, const Sequence& y);

SequenceDistribution enumerate_distribution(const ClassicalHmm& model, int length);

/// Normalized belief after emitting `a`, and the probability of `a`.
std::pair<BeliefVector, double> belief_update(const ClassicalHmm& model, const BeliefVector& belief, char a);

Sequence sample(const ClassicalHmm& model, int length, Rng& rng);

/// JSON layout: {states, alphabet, transition, emission, initial}; transition and
/// emission rows are indexed by the source state.
ClassicalHmm from_json(const nlohmann::json& j);
nlohmann::json to_json(const ClassicalHmm& model);

}  // namespace qkern::hmm

#endif  // QKERN_HMM_HPP
