// Independent oracles and hand-rolled generators shared by the unit tests.
#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include "qkern/core.hpp"
#include "qkern/hmm.hpp"
#include "qkern/linalg.hpp"
#include "qkern/qhmm.hpp"

namespace support {

using qkern::Rng;
using qkern::linalg::Complex;
using qkern::linalg::ComplexMatrix;

inline Complex gaussian_complex(Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  const double re = g(rng);
  return {re, g(rng)};
}

inline ComplexMatrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  ComplexMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = gaussian_complex(rng);
  return m;
}

inline ComplexMatrix random_hermitian(std::size_t n, Rng& rng) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = std::normal_distribution<double>(0.0, 1.0)(rng);
    for (std::size_t j = i + 1; j < n; ++j) {
      m(i, j) = gaussian_complex(rng);
      m(j, i) = std::conj(m(i, j));
    }
  }
  return m;
}

// Plain triple loop, written independently of linalg::matmul.
inline ComplexMatrix naive_matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      Complex s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

inline ComplexMatrix naive_adjoint(const ComplexMatrix& a) {
  ComplexMatrix c(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(j, i) = std::conj(a(i, j));
  return c;
}

inline double max_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

inline bool is_diagonal(const ComplexMatrix& m, double tol) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (i != j && std::abs(m(i, j)) > tol) return false;
  return true;
}

inline std::string random_sequence(const std::string& alphabet, int length, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string y;
  for (int i = 0; i < length; ++i) y.push_back(alphabet[pick(rng)]);
  return y;
}

inline std::vector<std::string> all_sequences(const std::string& alphabet, int length) {
  std::vector<std::string> out{""};
  for (int t = 0; t < length; ++t) {
    std::vector<std::string> next;
    for (const auto& y : out)
      for (char a : alphabet) next.push_back(y + a);
    out = std::move(next);
  }
  return out;
}

// Forward algorithm over the table layout, independent of the library's storage convention:
// alpha'(j) = sum_i alpha(i) P[a | i] P[j | i].
inline double forward_probability(const std::vector<std::vector<double>>& transition_rows,
                                  const std::vector<std::vector<double>>& emission_rows, std::vector<double> alpha,
                                  const std::string& alphabet, const std::string& y) {
  const std::size_t n = alpha.size();
  for (char c : y) {
    const std::size_t a = alphabet.find(c);
    std::vector<double> next(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) next[j] += alpha[i] * emission_rows[i][a] * transition_rows[i][j];
    alpha = std::move(next);
  }
  double s = 0.0;
  for (double v : alpha) s += v;
  return s;
}

inline const std::vector<std::vector<double>>& market_transition_rows() {
  static const std::vector<std::vector<double>> rows{
      {0.50, 0.10, 0.15, 0.25}, {0.10, 0.50, 0.25, 0.15}, {0.25, 0.15, 0.50, 0.10}, {0.15, 0.25, 0.10, 0.50}};
  return rows;
}

inline const std::vector<std::vector<double>>& market_emission_rows() {
  static const std::vector<std::vector<double>> rows{{0.8, 0.2}, {0.2, 0.8}, {0.4, 0.6}, {0.6, 0.4}};
  return rows;
}

inline double market_forward(const std::string& y) {
  return forward_probability(market_transition_rows(), market_emission_rows(), {0.25, 0.25, 0.25, 0.25}, "01", y);
}

inline qkern::qhmm::DensityOperator diag_state(std::vector<double> p) {
  return qkern::qhmm::DensityOperator(ComplexMatrix::diagonal(p));
}

}  // namespace support

#include <Eigen/Dense>

namespace support {

inline Eigen::MatrixXcd to_eigen(const qkern::linalg::ComplexMatrix& m) {
  Eigen::MatrixXcd e(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

// Trace distance through Eigen's Hermitian solver.
inline double eigen_trace_distance(const qkern::linalg::ComplexMatrix& a, const qkern::linalg::ComplexMatrix& b) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> s(to_eigen(a) - to_eigen(b), Eigen::EigenvaluesOnly);
  return 0.5 * s.eigenvalues().cwiseAbs().sum();
}

// Fidelity through Eigen: sum of square roots of the eigenvalues of sqrt(a) b sqrt(a), squared.
inline double eigen_fidelity(const qkern::linalg::ComplexMatrix& a, const qkern::linalg::ComplexMatrix& b) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> sa(to_eigen(a));
  const Eigen::VectorXd lam = sa.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXcd root = sa.eigenvectors() * lam.cast<std::complex<double>>().asDiagonal() *
                                sa.eigenvectors().adjoint();
  const Eigen::MatrixXcd inner = root * to_eigen(b) * root;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> si(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < si.eigenvalues().size(); ++i) s += std::sqrt(std::max(0.0, si.eigenvalues()(i)));
  return s * s;
}

}  // namespace support
