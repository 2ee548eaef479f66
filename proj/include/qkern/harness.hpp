#ifndef QKERN_HARNESS_HPP
#define QKERN_HARNESS_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qkern/hmm.hpp"
#include "qkern/kernels.hpp"
#include "qkern/qhmm.hpp"

namespace qkern::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitValidation = 2;

/// A model reference resolved to its channel form, plus the classical or
/// unitary form it came from when there is one.
struct LoadedModel {
  std::string name;
  qhmm::Qhmm channel;
  std::optional<hmm::ClassicalHmm> classical;
  std::optional<qhmm::UnitaryQhmm> unitary;
};

/// "market4", "random:N:M:seed", or a path to a classical, channel or unitary JSON file.
LoadedModel load_model(const std::string& ref);

struct DimensionStats {
  std::size_t dim = 0;
  std::vector<std::size_t> counts;
  double mean_distance = 0.0;
  double tail_mass = 0.0;  ///< fraction of distances above the midpoint of the binning range
};

struct DimensionStudy {
  std::string kernel;
  std::vector<double> edges;
  std::vector<DimensionStats> per_dim;
  bool mean_nondecreasing = false;
};

/// Pairwise feature distances over a fixed sequence sample, pooled over
/// `models_per_dim` random binary-alphabet dilations per hidden dimension.
DimensionStudy dimension_study(const kernels::KernelSpec& spec, const std::vector<std::size_t>& dims,
                               std::size_t models_per_dim, const std::vector<Sequence>& sample, std::uint64_t seed,
                               std::size_t bins);

/// Entry point of the qkern tool. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qkern::harness

#endif  // QKERN_HARNESS_HPP
