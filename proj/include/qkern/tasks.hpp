#ifndef QKERN_TASKS_HPP
#define QKERN_TASKS_HPP

#include <string>
#include <variant>
#include <vector>

#include "qkern/core.hpp"
#include "qkern/hmm.hpp"
#include "qkern/qhmm.hpp"

namespace qkern::tasks {

/// 32-entry class table indexed by a 5-bit window of the sequence.
class PredictiveLabelTable {
 public:
  explicit PredictiveLabelTable(std::string table);
  static PredictiveLabelTable market_default();

  int at(std::size_t index) const { return table_[index] - '0'; }
  const std::string& str() const noexcept { return table_; }

 private:
  std::string table_;
};

/// Which 5-symbol window selects the table entry.
enum class Window { Last, First };

/// 1 iff the count of '1' symbols exceeds half the length; ties go to 0.
int structural_label(const Sequence& y);

/// table[c2] where c2 is the MSB-first integer value of the chosen 5-symbol window.
int predictive_label(const Sequence& y, const PredictiveLabelTable& table, Window window = Window::Last);

enum class TaskKind { Structural, Predictive };

struct Labeler {
  TaskKind kind = TaskKind::Structural;
  PredictiveLabelTable table = PredictiveLabelTable::market_default();
  Window window = Window::Last;

  int operator()(const Sequence& y) const;
  std::size_t min_length() const { return kind == TaskKind::Predictive ? 5 : 1; }
  std::string name() const { return kind == TaskKind::Predictive ? "predictive" : "structural"; }
};

struct Example {
  Sequence sequence;
  int label;
};

struct LabeledDataset {
  std::vector<Example> examples;
  std::string source_model;
  int length = 0;
  std::uint64_t seed = 0;

  std::vector<Sequence> sequences() const;
  std::vector<int> labels() const;
};

using ModelRef = std::variant<const qhmm::Qhmm*, const hmm::ClassicalHmm*>;

/// n i.i.d. labeled samples of a fixed length, drawn with a stream seeded from `seed`.
LabeledDataset generate_dataset(ModelRef model, std::size_t n, int length, const Labeler& labeler, std::uint64_t seed,
                                std::string source_model = "");

/// Same, but drawing from a caller-owned stream.
LabeledDataset generate_dataset(ModelRef model, std::size_t n, int length, const Labeler& labeler, Rng& rng,
                                std::string source_model = "");

/// Exact probability mass of class 1 over all sequences of the given length.
double class_one_mass(const qhmm::Qhmm& q, int length, const Labeler& labeler);

}  // namespace qkern::tasks

#endif  // QKERN_TASKS_HPP
