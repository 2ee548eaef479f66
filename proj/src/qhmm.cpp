#include "qkern/qhmm.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace qkern::qhmm {

using linalg::Complex;

namespace {

constexpr double kStateTol = 1e-10;
constexpr double kCompletenessTol = 1e-10;

ComplexMatrix branch_unchecked(const SymbolChannel& ch, const ComplexMatrix& rho) {
  ComplexMatrix out(rho.rows(), rho.cols());
  for (const auto& k : ch.kraus) out += linalg::matmul(linalg::matmul(k, rho), linalg::adjoint(k));
  return out;
}

double real_trace(const ComplexMatrix& m) { return linalg::trace(m).real(); }

}  // namespace

double density_violation(const ComplexMatrix& m) {
  if (!m.is_square() || m.rows() == 0) return INFINITY;
  double v = linalg::hermitian_deviation(m);
  const Complex tr = linalg::trace(m);
  v = std::max(v, std::abs(tr - Complex{1.0, 0.0}));
  if (v > 1e-6) return v;
  const auto eig = linalg::hermitian_eig(linalg::hermitian_part(m));
  return std::max(v, -eig.eigenvalues.front());
}

DensityOperator::DensityOperator(ComplexMatrix m) : matrix_(std::move(m)) {
  if (const double v = density_violation(matrix_); v > kStateTol) {
    throw NumericalError("DensityOperator: invariants violated by " + std::to_string(v));
  }
  matrix_ = linalg::hermitian_part(matrix_);
}

DensityOperator DensityOperator::trusted(ComplexMatrix m) {
  return DensityOperator(linalg::hermitian_part(m), Unchecked{});
}

DensityOperator DensityOperator::maximally_mixed(std::size_t dim) {
  if (dim == 0) throw DimensionError("maximally_mixed: dimension must be positive");
  return DensityOperator(ComplexMatrix::identity(dim) * Complex(1.0 / static_cast<double>(dim)), Unchecked{});
}

DensityOperator DensityOperator::pure(std::span<const Complex> amplitudes) {
  double norm = 0.0;
  for (const auto& a : amplitudes) norm += std::norm(a);
  if (amplitudes.empty() || std::abs(norm - 1.0) > kStateTol) {
    throw NumericalError("DensityOperator::pure: amplitudes must have unit norm");
  }
  return DensityOperator(ComplexMatrix::outer(amplitudes), Unchecked{});
}

Qhmm::Qhmm(std::vector<SymbolChannel> channels, DensityOperator initial)
    : channels_(std::move(channels)), initial_(std::move(initial)) {
  if (channels_.empty()) throw std::invalid_argument("Qhmm: at least one symbol channel required");
  const std::size_t n = initial_.dim();
  std::string seen;
  for (const auto& ch : channels_) {
    if (seen.find(ch.symbol) != std::string::npos) {
      throw std::invalid_argument(std::string("Qhmm: duplicate symbol '") + ch.symbol + "'");
    }
    seen.push_back(ch.symbol);
    if (ch.kraus.empty()) throw std::invalid_argument("Qhmm: empty Kraus set");
    for (const auto& k : ch.kraus) {
      if (k.rows() != n || k.cols() != n) throw DimensionError("Qhmm: Kraus operator has wrong dimension");
    }
  }
}

std::string Qhmm::alphabet() const {
  std::string out;
  for (const auto& ch : channels_) out.push_back(ch.symbol);
  return out;
}

const SymbolChannel& Qhmm::channel(char a) const {
  for (const auto& ch : channels_)
    if (ch.symbol == a) return ch;
  throw std::invalid_argument(std::string("unknown symbol '") + a + "'");
}

Qhmm Qhmm::with_initial(DensityOperator rho) const {
  if (rho.dim() != dim()) throw DimensionError("with_initial: dimension mismatch");
  return Qhmm(channels_, std::move(rho));
}

Diagnostics validate(const Qhmm& q) {
  const std::size_t n = q.dim();
  ComplexMatrix sum(n, n);
  for (const auto& ch : q.channels())
    for (const auto& k : ch.kraus) sum += linalg::matmul(linalg::adjoint(k), k);
  Diagnostics d;
  d.completeness_deviation = linalg::max_abs_diff(sum, ComplexMatrix::identity(n));
  d.initial_violation = density_violation(q.initial().matrix());
  // Per-symbol maps given in Kraus form are CP by construction; trace-non-increase follows from completeness.
  d.passed = d.completeness_deviation <= kCompletenessTol && d.initial_violation <= kStateTol;
  return d;
}

ComplexMatrix branch(const Qhmm& q, const ComplexMatrix& rho, char a) {
  if (rho.rows() != q.dim() || rho.cols() != q.dim()) throw DimensionError("branch: state dimension mismatch");
  return branch_unchecked(q.channel(a), rho);
}

SymbolOutcome apply_symbol(const Qhmm& q, const DensityOperator& rho, char a) {
  ComplexMatrix b = branch(q, rho.matrix(), a);
  const double p = real_trace(b);
  if (p <= kImpossibleThreshold) {
    throw ImpossibleSequenceError(std::string("symbol '") + a + "' is impossible in this state", Sequence(1, a));
  }
  b *= Complex(1.0 / p);
  return {DensityOperator::trusted(std::move(b)), p};
}

double sequence_probability(const Qhmm& q, const DensityOperator& rho, const Sequence& y) {
  ComplexMatrix m = rho.matrix();
  for (char a : y) m = branch(q, m, a);
  return std::max(0.0, real_trace(m));
}

double sequence_probability(const Qhmm& q, const Sequence& y) { return sequence_probability(q, q.initial(), y); }

std::vector<DensityOperator> generating_states(const Qhmm& q, const Sequence& y) {
  std::vector<DensityOperator> states;
  states.reserve(y.size());
  DensityOperator rho = q.initial();
  for (std::size_t i = 0; i < y.size(); ++i) {
    try {
      rho = apply_symbol(q, rho, y[i]).state;
    } catch (const ImpossibleSequenceError&) {
      throw ImpossibleSequenceError("sequence '" + y + "' is impossible at position " + std::to_string(i), y);
    }
    states.push_back(rho);
  }
  return states;
}

DensityOperator end_state(const Qhmm& q, const Sequence& y) {
  // Normalizing once at the end matches T_y rho0 / P[y | rho0].
  ComplexMatrix m = q.initial().matrix();
  for (char a : y) m = branch(q, m, a);
  const double p = real_trace(m);
  if (p <= kImpossibleThreshold) throw ImpossibleSequenceError("sequence '" + y + "' is impossible", y);
  m *= Complex(1.0 / p);
  return DensityOperator::trusted(std::move(m));
}

std::map<char, double> conditional_next_distribution(const Qhmm& q, const Sequence& y) {
  const DensityOperator rho = end_state(q, y);
  std::map<char, double> out;
  double total = 0.0;
  for (const auto& ch : q.channels()) {
    const double p = std::max(0.0, real_trace(branch_unchecked(ch, rho.matrix())));
    out[ch.symbol] = p;
    total += p;
  }
  for (auto& [_, p] : out) p /= total;
  return out;
}

Sequence sample(const Qhmm& q, int length, Rng& rng) {
  if (length < 0) throw std::invalid_argument("sample: negative length");
  Sequence y;
  y.reserve(static_cast<std::size_t>(length));
  ComplexMatrix rho = q.initial().matrix();
  std::vector<ComplexMatrix> branches;
  for (int t = 0; t < length; ++t) {
    branches.clear();
    for (const auto& ch : q.channels()) branches.push_back(branch_unchecked(ch, rho));
    const double u = uniform01(rng);
    double acc = 0.0;
    std::size_t pick = branches.size();
    std::size_t last_positive = 0;
    for (std::size_t s = 0; s < branches.size(); ++s) {
      const double p = real_trace(branches[s]);
      if (p > kImpossibleThreshold) last_positive = s;
      acc += p;
      if (pick == branches.size() && u < acc) pick = s;
    }
    if (pick == branches.size()) pick = last_positive;
    const double p = real_trace(branches[pick]);
    rho = branches[pick] * Complex(1.0 / p);
    y.push_back(q.channels()[pick].symbol);
  }
  return y;
}

namespace {

void enumerate(const Qhmm& q, const ComplexMatrix& m, Sequence& prefix, int remaining, SequenceDistribution& out) {
  if (remaining == 0) {
    out.probs.emplace(prefix, std::max(0.0, real_trace(m)));
    return;
  }
  for (const auto& ch : q.channels()) {
    prefix.push_back(ch.symbol);
    enumerate(q, branch_unchecked(ch, m), prefix, remaining - 1, out);
    prefix.pop_back();
  }
}

}  // namespace

SequenceDistribution enumerate_distribution(const Qhmm& q, const DensityOperator& rho, int length) {
  check_enumeration(q.channels().size(), length);
  if (rho.dim() != q.dim()) throw DimensionError("enumerate_distribution: state dimension mismatch");
  SequenceDistribution out;
  out.length = length;
  Sequence prefix;
  enumerate(q, rho.matrix(), prefix, length, out);
  return out;
}

Qhmm embed_hmm(const hmm::ClassicalHmm& model) {
  const std::size_t n = model.n_states();
  std::vector<SymbolChannel> channels;
  for (std::size_t s = 0; s < model.alphabet().size(); ++s) {
    SymbolChannel ch{model.alphabet()[s], {}};
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double w = model.emission()(s, i) * model.transition()(j, i);
        if (w == 0.0) continue;
        ComplexMatrix k(n, n);
        k(j, i) = std::sqrt(w);
        ch.kraus.push_back(std::move(k));
      }
    }
    if (ch.kraus.empty()) ch.kraus.emplace_back(n, n);
    channels.push_back(std::move(ch));
  }
  return Qhmm(std::move(channels), DensityOperator(ComplexMatrix::diagonal(model.initial())));
}

void check(const UnitaryQhmm& u) {
  const std::size_t total = u.state_dim * u.emission_dim;
  if (u.state_dim == 0 || u.emission_dim == 0) throw std::invalid_argument("UnitaryQhmm: dimensions must be positive");
  if (total > linalg::kMaxDim) throw DimensionError("UnitaryQhmm: state x emission dimension exceeds 32");
  if (u.unitary.rows() != total || u.unitary.cols() != total) {
    throw DimensionError("UnitaryQhmm: unitary must be (N*M) x (N*M)");
  }
  const auto deviation = [](const ComplexMatrix& m) {
    return linalg::max_abs_diff(linalg::matmul(linalg::adjoint(m), m), ComplexMatrix::identity(m.rows()));
  };
  if (deviation(u.unitary) > 1e-10) throw NumericalError("UnitaryQhmm: U is not unitary");
  if (u.basis.rows() != u.emission_dim || u.basis.cols() != u.emission_dim) {
    throw DimensionError("UnitaryQhmm: basis must be M x M");
  }
  if (deviation(u.basis) > 1e-10) throw NumericalError("UnitaryQhmm: measurement basis is not orthonormal");
  if (u.partition.size() != u.emission_dim) throw std::invalid_argument("UnitaryQhmm: partition must cover all M indices");
  for (char a : u.alphabet) {
    if (std::find(u.partition.begin(), u.partition.end(), a) == u.partition.end()) {
      throw std::invalid_argument(std::string("UnitaryQhmm: symbol '") + a + "' has no emission index");
    }
  }
  for (char a : u.partition) {
    if (u.alphabet.find(a) == std::string::npos) {
      throw std::invalid_argument(std::string("UnitaryQhmm: partition maps to unknown symbol '") + a + "'");
    }
  }
  if (u.reset_index >= u.emission_dim) throw std::invalid_argument("UnitaryQhmm: reset index out of range");
  if (u.initial.dim() != u.state_dim) throw DimensionError("UnitaryQhmm: initial state has wrong dimension");
}

Qhmm kraus_from_unitary(const UnitaryQhmm& u) {
  check(u);
  const std::size_t n = u.state_dim, m = u.emission_dim;
  std::vector<SymbolChannel> channels;
  for (char a : u.alphabet) channels.push_back({a, {}});
  for (std::size_t e = 0; e < m; ++e) {
    ComplexMatrix k(n, n);
    for (std::size_t out = 0; out < n; ++out)
      for (std::size_t in = 0; in < n; ++in) {
        Complex s{};
        for (std::size_t f = 0; f < m; ++f) s += std::conj(u.basis(f, e)) * u.unitary(out * m + f, in * m + u.reset_index);
        k(out, in) = s;
      }
    const auto idx = u.alphabet.find(u.partition[e]);
    channels[idx].kraus.push_back(std::move(k));
  }
  return Qhmm(std::move(channels), u.initial);
}

ComplexMatrix haar_unitary(std::size_t n, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  std::vector<std::vector<Complex>> cols(n, std::vector<Complex>(n));
  for (auto& c : cols)
    for (auto& x : c) x = Complex(gauss(rng), gauss(rng));
  // Modified Gram-Schmidt, applied twice; R's diagonal is the positive column norm.
  for (std::size_t j = 0; j < n; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        Complex dot{};
        for (std::size_t i = 0; i < n; ++i) dot += std::conj(cols[k][i]) * cols[j][i];
        for (std::size_t i = 0; i < n; ++i) cols[j][i] -= dot * cols[k][i];
      }
    }
    double norm = 0.0;
    for (const auto& x : cols[j]) norm += std::norm(x);
    norm = std::sqrt(norm);
    for (auto& x : cols[j]) x /= norm;
  }
  ComplexMatrix q(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) q(i, j) = cols[j][i];
  return q;
}

DensityOperator random_density(std::size_t dim, Rng& rng, std::size_t rank) {
  if (dim == 0) throw DimensionError("random_density: dimension must be positive");
  if (rank == 0 || rank > dim) rank = dim;
  std::normal_distribution<double> gauss;
  ComplexMatrix g(dim, rank);
  for (auto& x : g.data()) x = Complex(gauss(rng), gauss(rng));
  ComplexMatrix rho = linalg::matmul(g, linalg::adjoint(g));
  rho *= Complex(1.0 / linalg::trace(rho).real());
  return DensityOperator(std::move(rho));
}

UnitaryQhmm random_qhmm(std::size_t state_dim, std::size_t emission_dim, const std::string& alphabet,
                        std::vector<char> partition, Rng& rng) {
  if (emission_dim < alphabet.size()) throw std::invalid_argument("random_qhmm: emission_dim must be >= |alphabet|");
  if (partition.empty()) {
    for (std::size_t e = 0; e < emission_dim; ++e) partition.push_back(alphabet[e % alphabet.size()]);
  }
  UnitaryQhmm u;
  u.alphabet = alphabet;
  u.state_dim = state_dim;
  u.emission_dim = emission_dim;
  if (state_dim * emission_dim > linalg::kMaxDim) throw DimensionError("random_qhmm: total dimension exceeds 32");
  u.unitary = haar_unitary(state_dim * emission_dim, rng);
  u.basis = ComplexMatrix::identity(emission_dim);
  u.partition = std::move(partition);
  u.reset_index = 0;
  u.initial = DensityOperator::maximally_mixed(state_dim);
  check(u);
  return u;
}

nlohmann::json matrix_to_json(const ComplexMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

ComplexMatrix matrix_from_json(const nlohmann::json& j) {
  const std::size_t rows = j.size();
  const std::size_t cols = rows == 0 ? 0 : j.at(0).size();
  ComplexMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (j.at(r).size() != cols) throw DimensionError("matrix JSON: ragged rows");
    for (std::size_t c = 0; c < cols; ++c) {
      const auto& cell = j.at(r).at(c);
      if (cell.is_number()) {
        m(r, c) = cell.get<double>();
      } else {
        m(r, c) = Complex(cell.at(0).get<double>(), cell.at(1).get<double>());
      }
    }
  }
  return m;
}

nlohmann::json to_json(const Qhmm& q) {
  nlohmann::json channels = nlohmann::json::array();
  for (const auto& ch : q.channels()) {
    nlohmann::json kraus = nlohmann::json::array();
    for (const auto& k : ch.kraus) kraus.push_back(matrix_to_json(k));
    channels.push_back({{"symbol", std::string(1, ch.symbol)}, {"kraus", kraus}});
  }
  return {{"alphabet", q.alphabet()},
          {"dim", q.dim()},
          {"channels", channels},
          {"initial", matrix_to_json(q.initial().matrix())}};
}

Qhmm qhmm_from_json(const nlohmann::json& j) {
  const auto dim = j.at("dim").get<std::size_t>();
  std::vector<SymbolChannel> channels;
  for (const auto& cj : j.at("channels")) {
    const auto sym = cj.at("symbol").get<std::string>();
    if (sym.size() != 1) throw std::invalid_argument("QHMM file: symbols must be single characters");
    SymbolChannel ch{sym[0], {}};
    for (const auto& kj : cj.at("kraus")) ch.kraus.push_back(matrix_from_json(kj));
    channels.push_back(std::move(ch));
  }
  DensityOperator rho = j.contains("initial") ? DensityOperator(matrix_from_json(j.at("initial")))
                                              : DensityOperator::maximally_mixed(dim);
  if (rho.dim() != dim) throw DimensionError("QHMM file: initial state has wrong dimension");
  Qhmm q(std::move(channels), std::move(rho));
  if (j.contains("alphabet") && j.at("alphabet").get<std::string>() != q.alphabet()) {
    throw std::invalid_argument("QHMM file: alphabet does not match channel symbols");
  }
  return q;
}

nlohmann::json to_json(const UnitaryQhmm& u) {
  nlohmann::json partition = nlohmann::json::array();
  for (char a : u.partition) partition.push_back(std::string(1, a));
  return {{"alphabet", u.alphabet},
          {"state_dim", u.state_dim},
          {"emission_dim", u.emission_dim},
          {"unitary", matrix_to_json(u.unitary)},
          {"basis", matrix_to_json(u.basis)},
          {"partition", partition},
          {"reset_index", u.reset_index},
          {"initial", matrix_to_json(u.initial.matrix())}};
}

UnitaryQhmm unitary_from_json(const nlohmann::json& j) {
  UnitaryQhmm u;
  u.alphabet = j.at("alphabet").get<std::string>();
  u.state_dim = j.at("state_dim").get<std::size_t>();
  u.emission_dim = j.at("emission_dim").get<std::size_t>();
  u.unitary = matrix_from_json(j.at("unitary"));
  u.basis = j.contains("basis") ? matrix_from_json(j.at("basis")) : ComplexMatrix::identity(u.emission_dim);
  for (const auto& p : j.at("partition")) {
    const auto s = p.get<std::string>();
    if (s.size() != 1) throw std::invalid_argument("unitary QHMM file: partition entries must be single symbols");
    u.partition.push_back(s[0]);
  }
  u.reset_index = j.value("reset_index", std::size_t{0});
  u.initial = j.contains("initial") ? DensityOperator(matrix_from_json(j.at("initial")))
                                    : DensityOperator::maximally_mixed(u.state_dim);
  check(u);
  return u;
}

}  // namespace qkern::qhmm
