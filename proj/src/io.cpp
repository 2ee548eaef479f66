#include "qkern/io.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace qkern::io {

namespace {

std::string fixed(double v, int precision) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

std::string full(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string output_header(const std::string& command, const nlohmann::json& resolved_config, std::uint64_t seed) {
  const std::string dumped = resolved_config.dump();
  std::ostringstream os;
  os << "# qkern " << kVersion << " " << command << " config_hash=" << std::hex << std::setw(16) << std::setfill('0')
     << fnv1a64(dumped) << std::dec << " seed=" << seed << "\n";
  os << "# config: " << dumped << "\n";
  return os.str();
}

void write_distribution_csv(std::ostream& os, const SequenceDistribution& d) {
  os << "sequence,probability\n";
  for (const auto& [y, p] : d.probs) os << y << "," << full(p) << "\n";
}

void write_gram_csv(std::ostream& os, const kernels::GramMatrix& g) {
  for (std::size_t i = 0; i < g.labels.size(); ++i) os << (i ? "," : "") << g.labels[i];
  os << "\n";
  for (Eigen::Index i = 0; i < g.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.values.cols(); ++j) os << (j ? "," : "") << full(g.values(i, j));
    os << "\n";
  }
}

void write_histogram_csv(std::ostream& os, const std::vector<double>& edges, const std::vector<std::size_t>& counts) {
  if (edges.size() != counts.size() + 1) throw std::invalid_argument("histogram: edges must be one longer than counts");
  os << "bin_low,bin_high,count\n";
  for (std::size_t i = 0; i < counts.size(); ++i) os << full(edges[i]) << "," << full(edges[i + 1]) << "," << counts[i] << "\n";
}

void write_dataset_csv(std::ostream& os, const tasks::LabeledDataset& ds) {
  os << "sequence,class\n";
  for (const auto& e : ds.examples) os << e.sequence << "," << e.label << "\n";
}

tasks::LabeledDataset read_dataset_csv(std::istream& is) {
  tasks::LabeledDataset ds;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "sequence,class") throw std::invalid_argument("dataset CSV: expected header 'sequence,class'");
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("dataset CSV: malformed row '" + line + "'");
    const std::string cls = line.substr(comma + 1);
    if (cls != "0" && cls != "1") throw std::invalid_argument("dataset CSV: class must be 0 or 1");
    ds.examples.push_back({line.substr(0, comma), cls == "1" ? 1 : 0});
  }
  if (!header_seen) throw std::invalid_argument("dataset CSV: missing header");
  if (!ds.examples.empty()) {
    ds.length = static_cast<int>(ds.examples.front().sequence.size());
    for (const auto& e : ds.examples)
      if (static_cast<int>(e.sequence.size()) != ds.length) throw std::invalid_argument("dataset CSV: ragged lengths");
  }
  return ds;
}

void write_shots_csv(std::ostream& os, const circuits::ShotRecord& rec) {
  os << "outcome,count\n";
  for (const auto& [k, c] : rec.counts) os << k << "," << c << "\n";
}

std::string kernel_label(const std::string& kernel_id) {
  if (kernel_id == "rbf") return "Classical";
  if (kernel_id.rfind("rbf:", 0) == 0) return "Classical " + kernel_id.substr(4);
  return "Quantum " + kernel_id;
}

void write_eval_csv(std::ostream& os, const std::vector<learn::EvalReport>& reports, bool include_rfs_row) {
  os << "Classifier,Kernel,In Sample,CI,Out Sample,CI\n";
  if (include_rfs_row) os << "RFS,N/A,not implemented,,not implemented,\n";
  for (const auto& r : reports) {
    os << r.classifier << "," << kernel_label(r.kernel) << "," << fixed(r.in_sample_accuracy, 3) << ","
       << fixed(r.in_ci_low, 3) << " - " << fixed(r.in_ci_high, 3) << "," << fixed(r.out_sample_accuracy, 3) << ","
       << fixed(r.out_ci_low, 3) << " - " << fixed(r.out_ci_high, 3) << "\n";
  }
}

}  // namespace qkern::io
