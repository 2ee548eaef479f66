#ifndef QKERN_CORE_HPP
#define QKERN_CORE_HPP

#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>

namespace qkern {

/// Symbol sequences are strings over a model's alphabet; each symbol is one character.
using Sequence = std::string;

/// Caller-owned random stream. Every stochastic operation takes one explicitly.
using Rng = std::mt19937_64;

inline constexpr const char* kVersion = "0.3.0";

/// Exhaustive enumeration refuses to visit more than this many sequences.
inline constexpr std::size_t kEnumerationCap = std::size_t{1} << 20;

/// Probabilities at or below this are treated as zero.
inline constexpr double kImpossibleThreshold = 1e-12;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a symbol or sequence has (numerically) zero probability.
class ImpossibleSequenceError : public std::domain_error {
 public:
  ImpossibleSequenceError(const std::string& what, Sequence seq)
      : std::domain_error(what), sequence_(std::move(seq)) {}
  const Sequence& sequence() const noexcept { return sequence_; }

 private:
  Sequence sequence_;
};

class EnumerationCapError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Exact distribution over all sequences of one length, keyed by sequence.
struct SequenceDistribution {
  int length = 0;
  std::map<Sequence, double> probs;

  double at(const Sequence& y) const {
    auto it = probs.find(y);
    return it == probs.end() ? 0.0 : it->second;
  }
  double total() const {
    double s = 0.0;
    for (const auto& [_, p] : probs) s += p;
    return s;
  }
};

/// Derives an independent stream for task `index` from a master seed.
inline Rng derive_rng(std::uint64_t master_seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

/// Uniform double in [0, 1).
inline double uniform01(Rng& rng) { return std::generate_canonical<double, 53>(rng); }

/// Throws EnumerationCapError when alphabet_size^length exceeds kEnumerationCap.
void check_enumeration(std::size_t alphabet_size, int length);

}  // namespace qkern

#endif  // QKERN_CORE_HPP
