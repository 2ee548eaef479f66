#include "qkern/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "qkern/metrics.hpp"

namespace qkern::kernels {

namespace {

constexpr double kRepairThreshold = -1e-8;

const char* family_name(Family f) {
  switch (f) {
    case Family::Predictive: return "predictive";
    case Family::Structural: return "structural";
    case Family::Rbf: return "rbf";
  }
  return "?";
}

const char* metric_name(Metric m) {
  switch (m) {
    case Metric::Trace: return "trace";
    case Metric::Bures: return "bures";
    case Metric::Fidelity: return "fidelity";
  }
  return "?";
}

struct FeatureTable {
  std::vector<Sequence> unique;
  std::vector<std::size_t> index_of;  // dataset position -> unique slot
  std::vector<DensityOperator> states;
};

FeatureTable build_features(const Qhmm& q, Family family, const std::vector<Sequence>& dataset) {
  FeatureTable t;
  std::unordered_map<Sequence, std::size_t> slot;
  t.index_of.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    auto [it, inserted] = slot.try_emplace(dataset[i], t.unique.size());
    if (inserted) {
      try {
        t.states.push_back(feature_state(q, family, dataset[i]));
      } catch (const ImpossibleSequenceError&) {
        throw ImpossibleSequenceError("dataset entry " + std::to_string(i) + " ('" + dataset[i] +
                                          "') is impossible under the model",
                                      dataset[i]);
      }
      t.unique.push_back(dataset[i]);
    }
    t.index_of.push_back(it->second);
  }
  return t;
}

// Evaluates f on the pair in a fixed order so that results are exactly symmetric.
template <typename F>
double ordered(const Sequence& a, const Sequence& b, const DensityOperator& ra, const DensityOperator& rb, F f) {
  return a <= b ? f(ra, rb) : f(rb, ra);
}

double symbol_value(char c, const std::string& alphabet) {
  const auto pos = alphabet.find(c);
  if (pos == std::string::npos) throw std::invalid_argument(std::string("rbf: symbol '") + c + "' not in alphabet");
  return static_cast<double>(pos);
}

double squared_euclidean(const Sequence& y1, const Sequence& y2, const std::string& alphabet) {
  if (y1.size() != y2.size()) {
    throw std::invalid_argument("rbf: sequences of different lengths (" + std::to_string(y1.size()) + " vs " +
                                std::to_string(y2.size()) + ")");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < y1.size(); ++i) {
    const double d = symbol_value(y1[i], alphabet) - symbol_value(y2[i], alphabet);
    s += d * d;
  }
  return s;
}

}  // namespace

std::string KernelSpec::id() const {
  if (family == Family::Rbf) {
    if (rbf_sigma) {
      std::ostringstream os;
      os << "rbf:" << *rbf_sigma;
      return os.str();
    }
    return bandwidth == Bandwidth::Median ? "rbf:median" : "rbf";
  }
  return std::string(family_name(family)) + ":" + metric_name(metric);
}

KernelSpec KernelSpec::parse(const std::string& text) {
  KernelSpec spec;
  const auto colon = text.find(':');
  const std::string fam = text.substr(0, colon);
  const std::string met = colon == std::string::npos ? "trace" : text.substr(colon + 1);
  if (fam == "predictive") {
    spec.family = Family::Predictive;
  } else if (fam == "structural") {
    spec.family = Family::Structural;
  } else if (fam == "rbf") {
    spec.family = Family::Rbf;
    if (colon == std::string::npos || met == "scale") return spec;
    if (met == "median") {
      spec.bandwidth = Bandwidth::Median;
      return spec;
    }
    std::size_t used = 0;
    double sigma = 0.0;
    try {
      sigma = std::stod(met, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != met.size() || !(sigma > 0.0)) throw std::invalid_argument("rbf: expected scale, median or a positive sigma");
    spec.rbf_sigma = sigma;
    return spec;
  } else {
    throw std::invalid_argument("unknown kernel family '" + fam + "'");
  }
  if (met == "trace") {
    spec.metric = Metric::Trace;
  } else if (met == "bures") {
    spec.metric = Metric::Bures;
  } else if (met == "fidelity") {
    spec.metric = Metric::Fidelity;
  } else {
    throw std::invalid_argument("unknown kernel metric '" + met + "'");
  }
  return spec;
}

DensityOperator phi_predictive(const Qhmm& q, const Sequence& y) { return qhmm::end_state(q, y); }

DensityOperator phi_structural(const Qhmm& q, const Sequence& y) {
  if (y.empty()) throw std::invalid_argument("phi_structural: sequence must be non-empty");
  const auto states = qhmm::generating_states(q, y);
  linalg::ComplexMatrix mean(q.dim(), q.dim());
  for (const auto& s : states) mean += s.matrix();
  mean *= linalg::Complex(1.0 / static_cast<double>(states.size()));
  return DensityOperator::trusted(std::move(mean));
}

DensityOperator feature_state(const Qhmm& q, Family family, const Sequence& y) {
  switch (family) {
    case Family::Predictive: return phi_predictive(q, y);
    case Family::Structural: return phi_structural(q, y);
    case Family::Rbf: break;
  }
  throw std::invalid_argument("feature_state: rbf has no quantum feature state");
}

double state_distance(Metric metric, const DensityOperator& r1, const DensityOperator& r2) {
  switch (metric) {
    case Metric::Trace: return metrics::trace_distance(r1, r2);
    case Metric::Bures: return metrics::bures(r1, r2);
    case Metric::Fidelity: return 1.0 - metrics::fidelity(r1, r2);
  }
  return 0.0;
}

double kernel_from_states(Metric metric, const DensityOperator& r1, const DensityOperator& r2) {
  if (metric == Metric::Fidelity) return metrics::fidelity(r1, r2);
  return std::exp(-state_distance(metric, r1, r2));
}

double kernel_value(const Qhmm& q, const KernelSpec& spec, const Sequence& y1, const Sequence& y2) {
  if (spec.family == Family::Rbf) throw std::invalid_argument("kernel_value: use rbf_kernel for the rbf family");
  const auto r1 = feature_state(q, spec.family, y1);
  const auto r2 = feature_state(q, spec.family, y2);
  return ordered(y1, y2, r1, r2, [&](const auto& a, const auto& b) { return kernel_from_states(spec.metric, a, b); });
}

double rbf_kernel(const Sequence& y1, const Sequence& y2, double sigma, const std::string& alphabet) {
  if (!(sigma > 0.0)) throw std::invalid_argument("rbf: sigma must be positive");
  return std::exp(-squared_euclidean(y1, y2, alphabet) / (2.0 * sigma * sigma));
}

double median_sigma(const std::vector<Sequence>& sequences, const std::string& alphabet) {
  std::vector<double> d;
  for (std::size_t i = 0; i < sequences.size(); ++i)
    for (std::size_t j = i + 1; j < sequences.size(); ++j) {
      const double s = squared_euclidean(sequences[i], sequences[j], alphabet);
      if (s > 0.0) d.push_back(std::sqrt(s));
    }
  if (d.empty()) return 1.0;
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  if (d.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(d.begin(), mid);
  return 0.5 * (lower + upper);
}

double scale_sigma(const std::vector<Sequence>& sequences, const std::string& alphabet) {
  double sum = 0.0, sum_sq = 0.0;
  std::size_t count = 0, length = 0;
  for (const auto& y : sequences) {
    length = std::max(length, y.size());
    for (char c : y) {
      const auto pos = alphabet.find(c);
      if (pos == std::string::npos) throw std::invalid_argument("rbf: symbol outside the alphabet");
      const double v = static_cast<double>(pos);
      sum += v;
      sum_sq += v * v;
      ++count;
    }
  }
  if (count == 0) return std::sqrt(0.5);
  const double mean = sum / count;
  const double var = sum_sq / count - mean * mean;
  if (!(var > 0.0)) return std::sqrt(0.5);
  return std::sqrt(static_cast<double>(length) * var / 2.0);
}

double resolve_sigma(const KernelSpec& spec, const std::vector<Sequence>& sequences, const std::string& alphabet) {
  if (spec.rbf_sigma) return *spec.rbf_sigma;
  return spec.bandwidth == Bandwidth::Median ? median_sigma(sequences, alphabet) : scale_sigma(sequences, alphabet);
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

Eigen::MatrixXd clip_to_psd(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  const Eigen::VectorXd clipped = solver.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd out = solver.eigenvectors() * clipped.asDiagonal() * solver.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

GramMatrix gram(const Qhmm& q, const KernelSpec& spec, const std::vector<Sequence>& dataset) {
  GramMatrix g;
  g.labels = dataset;
  const std::size_t n = dataset.size();
  g.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  if (spec.family == Family::Rbf) {
    const std::string alphabet = q.alphabet();
    const double sigma = resolve_sigma(spec, dataset, alphabet);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        const double k = rbf_kernel(dataset[i], dataset[j], sigma, alphabet);
        g.values(i, j) = g.values(j, i) = k;
      }
  } else {
    const FeatureTable t = build_features(q, spec.family, dataset);
    const std::size_t u = t.unique.size();
    Eigen::MatrixXd ku(u, u);
    for (std::size_t i = 0; i < u; ++i)
      for (std::size_t j = i; j < u; ++j) {
        const double k = ordered(t.unique[i], t.unique[j], t.states[i], t.states[j],
                                 [&](const auto& a, const auto& b) { return kernel_from_states(spec.metric, a, b); });
        ku(i, j) = ku(j, i) = k;
      }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) g.values(i, j) = ku(t.index_of[i], t.index_of[j]);
  }
  g.min_eigenvalue_raw = min_eigenvalue(g.values);
  if (g.min_eigenvalue_raw < kRepairThreshold) {
    g.values = clip_to_psd(g.values);
    g.repaired = true;
  }
  return g;
}

Eigen::MatrixXd cross_kernel(const Qhmm& q, const KernelSpec& spec, const std::vector<Sequence>& queries,
                             const std::vector<Sequence>& references) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(queries.size()), static_cast<Eigen::Index>(references.size()));
  if (spec.family == Family::Rbf) {
    const std::string alphabet = q.alphabet();
    const double sigma = resolve_sigma(spec, references, alphabet);
    for (std::size_t i = 0; i < queries.size(); ++i)
      for (std::size_t j = 0; j < references.size(); ++j) out(i, j) = rbf_kernel(queries[i], references[j], sigma, alphabet);
    return out;
  }
  const FeatureTable tq = build_features(q, spec.family, queries);
  const FeatureTable tr = build_features(q, spec.family, references);
  for (std::size_t i = 0; i < queries.size(); ++i)
    for (std::size_t j = 0; j < references.size(); ++j) {
      const auto& a = tq.states[tq.index_of[i]];
      const auto& b = tr.states[tr.index_of[j]];
      out(i, j) = ordered(queries[i], references[j], a, b,
                          [&](const auto& x, const auto& y) { return kernel_from_states(spec.metric, x, y); });
    }
  return out;
}

std::vector<double> pairwise_distances(const Qhmm& q, const KernelSpec& spec, const std::vector<Sequence>& dataset) {
  std::vector<double> out;
  if (dataset.size() < 2) return out;
  out.reserve(dataset.size() * (dataset.size() - 1) / 2);
  if (spec.family == Family::Rbf) {
    const GramMatrix g = gram(q, spec, dataset);
    for (std::size_t i = 0; i < dataset.size(); ++i)
      for (std::size_t j = i + 1; j < dataset.size(); ++j) out.push_back(-std::log(g.values(i, j)));
    return out;
  }
  const FeatureTable t = build_features(q, spec.family, dataset);
  for (std::size_t i = 0; i < dataset.size(); ++i)
    for (std::size_t j = i + 1; j < dataset.size(); ++j) {
      const auto& a = t.states[t.index_of[i]];
      const auto& b = t.states[t.index_of[j]];
      out.push_back(ordered(dataset[i], dataset[j], a, b,
                            [&](const auto& x, const auto& y) { return state_distance(spec.metric, x, y); }));
    }
  return out;
}

std::vector<std::size_t> bin_values(const std::vector<double>& values, const std::vector<double>& bin_edges) {
  if (bin_edges.size() < 2 || !std::is_sorted(bin_edges.begin(), bin_edges.end())) {
    throw std::invalid_argument("histogram: need at least two ascending bin edges");
  }
  std::vector<std::size_t> counts(bin_edges.size() - 1, 0);
  for (double v : values) {
    auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), v);
    std::ptrdiff_t bin = (it - bin_edges.begin()) - 1;
    bin = std::clamp<std::ptrdiff_t>(bin, 0, static_cast<std::ptrdiff_t>(counts.size()) - 1);
    ++counts[static_cast<std::size_t>(bin)];
  }
  return counts;
}

std::vector<std::size_t> distance_histogram(const Qhmm& q, const KernelSpec& spec,
                                            const std::vector<Sequence>& dataset,
                                            const std::vector<double>& bin_edges) {
  return bin_values(pairwise_distances(q, spec, dataset), bin_edges);
}

}  // namespace qkern::kernels
