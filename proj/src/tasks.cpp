#include "qkern/tasks.hpp"

#include <stdexcept>

namespace qkern::tasks {

namespace {

constexpr std::size_t kWindow = 5;

void require_binary(const Sequence& y) {
  for (char c : y)
    if (c != '0' && c != '1') throw std::invalid_argument(std::string("non-binary symbol '") + c + "'");
}

}  // namespace

PredictiveLabelTable::PredictiveLabelTable(std::string table) : table_(std::move(table)) {
  if (table_.size() != 32) throw std::invalid_argument("predictive label table must have exactly 32 entries");
  require_binary(table_);
}

PredictiveLabelTable PredictiveLabelTable::market_default() {
  return PredictiveLabelTable("11110011001100100110001011000110");
}

int structural_label(const Sequence& y) {
  require_binary(y);
  std::size_t ones = 0;
  for (char c : y) ones += c == '1';
  return 2 * ones > y.size() ? 1 : 0;
}

int predictive_label(const Sequence& y, const PredictiveLabelTable& table, Window window) {
  require_binary(y);
  if (y.size() < kWindow) {
    throw std::invalid_argument("predictive_label: sequence shorter than " + std::to_string(kWindow));
  }
  const std::size_t start = window == Window::Last ? y.size() - kWindow : 0;
  std::size_t index = 0;
  for (std::size_t i = start; i < start + kWindow; ++i) index = (index << 1) | static_cast<std::size_t>(y[i] - '0');
  return table.at(index);
}

int Labeler::operator()(const Sequence& y) const {
  return kind == TaskKind::Predictive ? predictive_label(y, table, window) : structural_label(y);
}

std::vector<Sequence> LabeledDataset::sequences() const {
  std::vector<Sequence> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(e.sequence);
  return out;
}

std::vector<int> LabeledDataset::labels() const {
  std::vector<int> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(e.label);
  return out;
}

LabeledDataset generate_dataset(ModelRef model, std::size_t n, int length, const Labeler& labeler, Rng& rng,
                                std::string source_model) {
  if (length < 0 || static_cast<std::size_t>(length) < labeler.min_length()) {
    throw std::invalid_argument("generate_dataset: length " + std::to_string(length) + " is too short for the " +
                                labeler.name() + " labeler");
  }
  LabeledDataset ds;
  ds.source_model = std::move(source_model);
  ds.length = length;
  ds.examples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Sequence y = std::visit(
        [&](auto* m) {
          if constexpr (std::is_same_v<decltype(m), const qhmm::Qhmm*>) {
            return qhmm::sample(*m, length, rng);
          } else {
            return hmm::sample(*m, length, rng);
          }
        },
        model);
    const int label = labeler(y);
    ds.examples.push_back({std::move(y), label});
  }
  return ds;
}

LabeledDataset generate_dataset(ModelRef model, std::size_t n, int length, const Labeler& labeler, std::uint64_t seed,
                                std::string source_model) {
  Rng rng(seed);
  LabeledDataset ds = generate_dataset(model, n, length, labeler, rng, std::move(source_model));
  ds.seed = seed;
  return ds;
}

double class_one_mass(const qhmm::Qhmm& q, int length, const Labeler& labeler) {
  const auto dist = qhmm::enumerate_distribution(q, q.initial(), length);
  double mass = 0.0;
  for (const auto& [y, p] : dist.probs)
    if (labeler(y) == 1) mass += p;
  return mass;
}

}  // namespace qkern::tasks
