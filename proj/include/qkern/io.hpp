#ifndef QKERN_IO_HPP
#define QKERN_IO_HPP

#include <iosfwd>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "qkern/circuits.hpp"
#include "qkern/core.hpp"
#include "qkern/kernels.hpp"
#include "qkern/learn.hpp"
#include "qkern/tasks.hpp"

namespace qkern::io {

std::uint64_t fnv1a64(std::string_view data);

/// Comment lines naming the tool version, the hash of the resolved config, the
/// seed, and the config itself.
std::string output_header(const std::string& command, const nlohmann::json& resolved_config, std::uint64_t seed);

/// sequence,probability
void write_distribution_csv(std::ostream& os, const SequenceDistribution& d);

/// First row: sequence labels; then one row per sequence.
void write_gram_csv(std::ostream& os, const kernels::GramMatrix& g);

/// bin_low,bin_high,count
void write_histogram_csv(std::ostream& os, const std::vector<double>& edges, const std::vector<std::size_t>& counts);

/// sequence,class
void write_dataset_csv(std::ostream& os, const tasks::LabeledDataset& ds);
tasks::LabeledDataset read_dataset_csv(std::istream& is);

/// outcome,count
void write_shots_csv(std::ostream& os, const circuits::ShotRecord& rec);

/// Classifier,Kernel,In Sample,CI,Out Sample,CI
void write_eval_csv(std::ostream& os, const std::vector<learn::EvalReport>& reports, bool include_rfs_row = true);

/// Human-readable kernel column: "Classical" for rbf (with any bandwidth suffix), "Quantum <id>" otherwise.
std::string kernel_label(const std::string& kernel_id);

}  // namespace qkern::io

#endif  // QKERN_IO_HPP
