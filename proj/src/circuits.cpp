#include "qkern/circuits.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace qkern::circuits {

namespace {

constexpr double kNormTol = 1e-10;
constexpr double kInvSqrt2 = 0.70710678118654752440;

std::size_t qubit_count(std::size_t dim) {
  std::size_t n = 0;
  while ((std::size_t{1} << n) < dim) ++n;
  if ((std::size_t{1} << n) != dim || dim < 2) {
    throw DimensionError("projected kernel: state dimension " + std::to_string(dim) + " is not a power of two");
  }
  return n;
}

// Eigen-ensemble of rho0, used to draw one pure initial state per trajectory.
struct InitialEnsemble {
  std::vector<double> weights;
  ComplexMatrix vectors;
};

InitialEnsemble ensemble_of(const DensityOperator& rho) {
  auto eig = linalg::hermitian_eig(rho.matrix());
  InitialEnsemble e{std::move(eig.eigenvalues), std::move(eig.eigenvectors)};
  for (double& w : e.weights) w = std::max(0.0, w);
  return e;
}

std::vector<Complex> draw_initial(const InitialEnsemble& e, Rng& rng) {
  const double total = [&] {
    double s = 0.0;
    for (double w : e.weights) s += w;
    return s;
  }();
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t k = e.weights.size() - 1;
  for (std::size_t i = 0; i < e.weights.size(); ++i) {
    acc += e.weights[i];
    if (u < acc) {
      k = i;
      break;
    }
  }
  std::vector<Complex> psi(e.vectors.rows());
  for (std::size_t r = 0; r < psi.size(); ++r) psi[r] = e.vectors(r, k);
  return psi;
}

Trajectory run_from(const UnitaryQhmm& u, std::vector<Complex> psi, int steps, Rng& rng) {
  const std::size_t n = u.state_dim, m = u.emission_dim;
  std::vector<Complex> joint(n * m), rotated(n * m);
  std::vector<double> probs(m);
  Trajectory t;
  t.symbols.reserve(static_cast<std::size_t>(steps));
  for (int step = 0; step < steps; ++step) {
    // U (psi (x) |e0>): only the e0 columns of U see a non-zero input.
    for (std::size_t r = 0; r < n * m; ++r) {
      Complex s{};
      for (std::size_t k = 0; k < n; ++k) s += u.unitary(r, k * m + u.reset_index) * psi[k];
      joint[r] = s;
    }
    // (I (x) V^dagger)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t e = 0; e < m; ++e) {
        Complex s{};
        for (std::size_t f = 0; f < m; ++f) s += std::conj(u.basis(f, e)) * joint[k * m + f];
        rotated[k * m + e] = s;
      }
    double total = 0.0;
    for (std::size_t e = 0; e < m; ++e) {
      double p = 0.0;
      for (std::size_t k = 0; k < n; ++k) p += std::norm(rotated[k * m + e]);
      probs[e] = p;
      total += p;
    }
    const double x = uniform01(rng) * total;
    double acc = 0.0;
    std::size_t outcome = m - 1;
    for (std::size_t e = 0; e < m; ++e) {
      acc += probs[e];
      if (x < acc && probs[e] > 0.0) {
        outcome = e;
        break;
      }
    }
    while (probs[outcome] <= 0.0 && outcome > 0) --outcome;
    const double scale = 1.0 / std::sqrt(probs[outcome]);
    for (std::size_t k = 0; k < n; ++k) psi[k] = rotated[k * m + outcome] * scale;
    t.symbols.push_back(u.partition[outcome]);
  }
  t.state = std::move(psi);
  return t;
}

ComplexMatrix rotation_for(PauliBasis basis) {
  const Complex h = kInvSqrt2;
  switch (basis) {
    case PauliBasis::X: return ComplexMatrix{{h, h}, {h, -h}};
    // H S^dagger
    case PauliBasis::Y: return ComplexMatrix{{h, Complex(0.0, -kInvSqrt2)}, {h, Complex(0.0, kInvSqrt2)}};
    case PauliBasis::Z: return ComplexMatrix::identity(2);
  }
  return ComplexMatrix::identity(2);
}

// 2x2 reduced state of qubit q (0 = high-order) of a pure state vector.
ComplexMatrix qubit_rdm(const std::vector<Complex>& psi, std::size_t n_qubits, std::size_t q) {
  ComplexMatrix rho(2, 2);
  const std::size_t shift = n_qubits - 1 - q;
  const std::size_t bit = std::size_t{1} << shift;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (i & bit) continue;
    const Complex a0 = psi[i], a1 = psi[i | bit];
    rho(0, 0) += std::norm(a0);
    rho(1, 1) += std::norm(a1);
    rho(0, 1) += a0 * std::conj(a1);
    rho(1, 0) += a1 * std::conj(a0);
  }
  return rho;
}

bool draw_zero(double p0, Rng& rng) { return uniform01(rng) < p0; }

kernels::GramMatrix gram_from_rdms(const std::vector<Sequence>& labels,
                                   const std::vector<std::vector<DensityOperator>>& rdms, double gamma) {
  kernels::GramMatrix g;
  g.labels = labels;
  const auto n = static_cast<Eigen::Index>(labels.size());
  g.values.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const auto& a = labels[i] <= labels[j] ? rdms[i] : rdms[j];
      const auto& b = labels[i] <= labels[j] ? rdms[j] : rdms[i];
      g.values(i, j) = g.values(j, i) = i == j ? 1.0 : projected_kernel(a, b, gamma);
    }
  g.min_eigenvalue_raw = kernels::min_eigenvalue(g.values);
  if (g.min_eigenvalue_raw < -1e-8) {
    g.values = kernels::clip_to_psd(g.values);
    g.repaired = true;
  }
  return g;
}

}  // namespace

PureState::PureState(std::vector<Complex> amplitudes) : amplitudes_(std::move(amplitudes)) {
  double norm = 0.0;
  for (const auto& a : amplitudes_) norm += std::norm(a);
  if (amplitudes_.empty() || std::abs(std::sqrt(norm) - 1.0) > kNormTol) {
    throw NumericalError("PureState: amplitudes must have unit norm");
  }
}

PureState PureState::basis(std::size_t dim, std::size_t index) {
  if (index >= dim) throw DimensionError("PureState::basis: index out of range");
  std::vector<Complex> a(dim);
  a[index] = 1.0;
  return PureState(std::move(a));
}

PureState PureState::random(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> gauss;
  std::vector<Complex> a(dim);
  double norm = 0.0;
  for (auto& x : a) {
    x = Complex(gauss(rng), gauss(rng));
    norm += std::norm(x);
  }
  for (auto& x : a) x /= std::sqrt(norm);
  return PureState(std::move(a));
}

SequenceDistribution ShotRecord::empirical(int length) const {
  SequenceDistribution d;
  d.length = length;
  for (const auto& [k, c] : counts) d.probs[k] = static_cast<double>(c) / static_cast<double>(shots);
  return d;
}

Trajectory run_single_trajectory(const UnitaryQhmm& u, int steps, Rng& rng) {
  qhmm::check(u);
  return run_from(u, draw_initial(ensemble_of(u.initial), rng), steps, rng);
}

ShotRecord run_trajectories(const UnitaryQhmm& u, int steps, std::size_t shots, Rng& rng) {
  qhmm::check(u);
  if (steps < 0) throw std::invalid_argument("run_trajectories: negative step count");
  const InitialEnsemble ens = ensemble_of(u.initial);
  ShotRecord rec;
  rec.shots = shots;
  for (std::size_t s = 0; s < shots; ++s) ++rec.counts[run_from(u, draw_initial(ens, rng), steps, rng).symbols];
  return rec;
}

SequenceDistribution run_exact(const UnitaryQhmm& u, int steps) {
  const qhmm::Qhmm q = qhmm::kraus_from_unitary(u);
  return qhmm::enumerate_distribution(q, q.initial(), steps);
}

double swap_test_zero_probability(const PureState& psi, const PureState& phi) {
  if (psi.dim() != phi.dim()) throw DimensionError("swap_test: states have different dimensions");
  const std::size_t d = psi.dim();
  const std::size_t half = d * d;
  // Register order: ancilla (high), psi register, phi register.
  std::vector<Complex> v(2 * half);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) v[i * d + j] = psi.amplitudes()[i] * phi.amplitudes()[j];
  const auto hadamard_ancilla = [&] {
    for (std::size_t k = 0; k < half; ++k) {
      const Complex a = v[k], b = v[half + k];
      v[k] = (a + b) * kInvSqrt2;
      v[half + k] = (a - b) * kInvSqrt2;
    }
  };
  hadamard_ancilla();
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) std::swap(v[half + i * d + j], v[half + j * d + i]);
  hadamard_ancilla();
  double p0 = 0.0;
  for (std::size_t k = 0; k < half; ++k) p0 += std::norm(v[k]);
  // Roundoff in the amplitude sum must not turn a certain outcome into a random one.
  if (p0 > 1.0 - 1e-12) p0 = 1.0;
  return std::clamp(p0, 0.0, 1.0);
}

double swap_test(const PureState& psi, const PureState& phi, std::size_t shots, Rng& rng) {
  if (shots == 0) throw std::invalid_argument("swap_test: at least one shot required");
  const double p0 = swap_test_zero_probability(psi, phi);
  std::binomial_distribution<std::size_t> draws(shots, p0);
  const std::size_t r0 = draws(rng);
  return 2.0 * (-0.5 + static_cast<double>(r0) / static_cast<double>(shots));
}

double BlochVector::norm() const { return std::sqrt(rx * rx + ry * ry + rz * rz); }

double basis_zero_probability(const ComplexMatrix& rho, PauliBasis basis) {
  if (rho.rows() != 2 || rho.cols() != 2) throw DimensionError("basis_zero_probability: single-qubit state required");
  const ComplexMatrix g = rotation_for(basis);
  const ComplexMatrix rotated = linalg::matmul(linalg::matmul(g, rho), linalg::adjoint(g));
  return std::clamp(rotated(0, 0).real(), 0.0, 1.0);
}

BlochVector pauli_expectations(const std::function<DensityOperator(Rng&)>& prepare, std::size_t shots_per_basis,
                               Rng& rng) {
  if (shots_per_basis == 0) throw std::invalid_argument("pauli_expectations: at least one shot required");
  double r[3] = {0.0, 0.0, 0.0};
  const PauliBasis bases[3] = {PauliBasis::X, PauliBasis::Y, PauliBasis::Z};
  for (int b = 0; b < 3; ++b) {
    long diff = 0;
    for (std::size_t s = 0; s < shots_per_basis; ++s) {
      const DensityOperator rho = prepare(rng);
      diff += draw_zero(basis_zero_probability(rho.matrix(), bases[b]), rng) ? 1 : -1;
    }
    r[b] = static_cast<double>(diff) / static_cast<double>(shots_per_basis);
  }
  return {r[0], r[1], r[2]};
}

BlochVector pauli_expectations(const DensityOperator& rho, std::size_t shots_per_basis, Rng& rng) {
  if (shots_per_basis == 0) throw std::invalid_argument("pauli_expectations: at least one shot required");
  double r[3] = {0.0, 0.0, 0.0};
  const PauliBasis bases[3] = {PauliBasis::X, PauliBasis::Y, PauliBasis::Z};
  for (int b = 0; b < 3; ++b) {
    std::binomial_distribution<std::size_t> draws(shots_per_basis, basis_zero_probability(rho.matrix(), bases[b]));
    const auto n0 = static_cast<double>(draws(rng));
    r[b] = (2.0 * n0 - static_cast<double>(shots_per_basis)) / static_cast<double>(shots_per_basis);
  }
  return {r[0], r[1], r[2]};
}

DensityOperator reconstruct_density(BlochVector r) {
  const double len = r.norm();
  if (len > 1.0) {
    r.rx /= len;
    r.ry /= len;
    r.rz /= len;
  }
  ComplexMatrix m{{0.5 * (1.0 + r.rz), Complex(0.5 * r.rx, -0.5 * r.ry)},
                  {Complex(0.5 * r.rx, 0.5 * r.ry), 0.5 * (1.0 - r.rz)}};
  return DensityOperator::trusted(std::move(m));
}

double projected_kernel(const DensityOperator& rho1, const DensityOperator& rho2, double gamma) {
  if (rho1.dim() != rho2.dim()) throw DimensionError("projected_kernel: states have different dimensions");
  const double f = linalg::frobenius_norm(rho1.matrix() - rho2.matrix());
  return std::exp(-gamma * f * f);
}

std::vector<DensityOperator> one_rdms(const ComplexMatrix& rho) {
  const std::size_t n = qubit_count(rho.rows());
  std::vector<DensityOperator> out;
  out.reserve(n);
  for (std::size_t q = 0; q < n; ++q) {
    const std::size_t before = std::size_t{1} << q;
    const std::size_t after = std::size_t{1} << (n - 1 - q);
    const ComplexMatrix tail = linalg::partial_trace(rho, before, 2 * after, linalg::Subsystem::B);
    out.push_back(DensityOperator::trusted(linalg::partial_trace(tail, 2, after, linalg::Subsystem::A)));
  }
  return out;
}

double projected_kernel(const std::vector<DensityOperator>& rdms1, const std::vector<DensityOperator>& rdms2,
                        double gamma) {
  if (rdms1.size() != rdms2.size()) throw DimensionError("projected_kernel: reduced-state lists differ in length");
  double s = 0.0;
  for (std::size_t q = 0; q < rdms1.size(); ++q) {
    const double f = linalg::frobenius_norm(rdms1[q].matrix() - rdms2[q].matrix());
    s += f * f;
  }
  return std::exp(-gamma * s);
}

ProjectedGram projected_kernel_matrix_exact(const qhmm::Qhmm& q, const std::vector<Sequence>& sequences, double gamma) {
  ProjectedGram out;
  std::vector<Sequence> kept;
  std::vector<std::vector<DensityOperator>> rdms;
  for (const auto& y : sequences) {
    if (qhmm::sequence_probability(q, y) < kPostSelectionFloor) {
      out.skipped.push_back(y);
      continue;
    }
    kept.push_back(y);
    rdms.push_back(one_rdms(qhmm::end_state(q, y).matrix()));
  }
  out.gram = gram_from_rdms(kept, rdms, gamma);
  return out;
}

ProjectedGram projected_kernel_matrix_exact(const UnitaryQhmm& u, const std::vector<Sequence>& sequences,
                                            double gamma) {
  return projected_kernel_matrix_exact(qhmm::kraus_from_unitary(u), sequences, gamma);
}

ProjectedGram projected_kernel_matrix(const UnitaryQhmm& u, const std::vector<Sequence>& sequences,
                                      std::size_t shots_per_basis, double gamma, Rng& rng) {
  if (shots_per_basis == 0) throw std::invalid_argument("projected_kernel_matrix: at least one shot required");
  const qhmm::Qhmm channel = qhmm::kraus_from_unitary(u);
  const std::size_t n_qubits = qubit_count(u.state_dim);
  const InitialEnsemble ens = ensemble_of(u.initial);
  const PauliBasis bases[3] = {PauliBasis::X, PauliBasis::Y, PauliBasis::Z};

  ProjectedGram out;
  std::vector<Sequence> kept;
  std::vector<std::vector<DensityOperator>> rdms;
  for (const auto& y : sequences) {
    const double p = qhmm::sequence_probability(channel, y);
    if (p < kPostSelectionFloor) {
      out.skipped.push_back(y);
      continue;
    }
    const auto max_trials = static_cast<std::size_t>(100.0 * static_cast<double>(shots_per_basis) / p) + 1000;
    std::vector<BlochVector> bloch(n_qubits);
    for (int b = 0; b < 3; ++b) {
      std::vector<long> diff(n_qubits, 0);
      std::size_t accepted = 0, trials = 0;
      while (accepted < shots_per_basis) {
        if (++trials > max_trials) throw NumericalError("projected_kernel_matrix: post-selection did not accept enough runs");
        const Trajectory t = run_from(u, draw_initial(ens, rng), static_cast<int>(y.size()), rng);
        if (t.symbols != y) continue;
        ++accepted;
        for (std::size_t qb = 0; qb < n_qubits; ++qb) {
          const double p0 = basis_zero_probability(qubit_rdm(t.state, n_qubits, qb), bases[b]);
          diff[qb] += draw_zero(p0, rng) ? 1 : -1;
        }
      }
      for (std::size_t qb = 0; qb < n_qubits; ++qb) {
        const double r = static_cast<double>(diff[qb]) / static_cast<double>(shots_per_basis);
        (b == 0 ? bloch[qb].rx : b == 1 ? bloch[qb].ry : bloch[qb].rz) = r;
      }
    }
    std::vector<DensityOperator> reduced;
    for (const auto& r : bloch) reduced.push_back(reconstruct_density(r));
    kept.push_back(y);
    rdms.push_back(std::move(reduced));
  }
  out.gram = gram_from_rdms(kept, rdms, gamma);
  return out;
}

}  // namespace qkern::circuits
