#include "qkern/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "qkern/core.hpp"

namespace qkern::linalg {

namespace {

constexpr int kMaxSweeps = 64;
constexpr double kHermitianTol = 1e-10;

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

void require_square(const ComplexMatrix& m, const char* op) {
  if (!m.is_square() || m.rows() == 0) throw DimensionError(std::string(op) + ": matrix must be square and non-empty");
}

double off_diagonal_norm2(const ComplexMatrix& a) {
  double off = 0.0;
  for (std::size_t p = 0; p < a.rows(); ++p)
    for (std::size_t q = p + 1; q < a.cols(); ++q) off += std::norm(a(p, q));
  return off;
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) throw DimensionError("ComplexMatrix: ragged initializer");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> values) {
  ComplexMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

ComplexMatrix ComplexMatrix::outer(std::span<const Complex> v) {
  ComplexMatrix m(v.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = v[i] * std::conj(v[j]);
  return m;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex s) {
  for (auto& x : data_) x *= s;
  return *this;
}

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()) + ")");
  }
  ComplexMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{}) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

std::vector<Complex> apply(const ComplexMatrix& m, std::span<const Complex> v) {
  if (m.cols() != v.size()) throw DimensionError("apply: vector length does not match matrix columns");
  std::vector<Complex> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Complex s{};
    for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  const std::size_t rows = a.rows() * b.rows();
  const std::size_t cols = a.cols() * b.cols();
  if (rows > kMaxDim || cols > kMaxDim) {
    throw DimensionError("tensor: result " + std::to_string(rows) + "x" + std::to_string(cols) +
                         " exceeds the maximum dimension " + std::to_string(kMaxDim));
  }
  ComplexMatrix out(rows, cols);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const Complex aij = a(i, j);
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return out;
}

ComplexMatrix adjoint(const ComplexMatrix& m) {
  ComplexMatrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = std::conj(m(i, j));
  return out;
}

Complex trace(const ComplexMatrix& m) {
  require_square(m, "trace");
  Complex t{};
  for (std::size_t i = 0; i < m.rows(); ++i) t += m(i, i);
  return t;
}

double frobenius_norm(const ComplexMatrix& m) {
  double s = 0.0;
  for (const auto& x : m.data()) s += std::norm(x);
  return std::sqrt(s);
}

double hermitian_deviation(const ComplexMatrix& m) {
  require_square(m, "hermitian_deviation");
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) s += std::norm(m(i, j) - std::conj(m(j, i)));
  return std::sqrt(s) / std::max(1.0, frobenius_norm(m));
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) {
  require_square(m, "hermitian_part");
  ComplexMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
  return out;
}

HermitianEigen hermitian_eig(const ComplexMatrix& m) {
  require_square(m, "hermitian_eig");
  if (const double dev = hermitian_deviation(m); dev > kHermitianTol) {
    throw NumericalError("hermitian_eig: input is not Hermitian (relative deviation " + std::to_string(dev) + ")");
  }
  const std::size_t n = m.rows();
  ComplexMatrix a = hermitian_part(m);
  ComplexMatrix v = ComplexMatrix::identity(n);
  const double scale = frobenius_norm(a);
  const double target = 1e-15 * scale;

  bool converged = scale == 0.0 || n == 1;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    const double off = off_diagonal_norm2(a);
    if (std::sqrt(off) <= target || off == 0.0) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex b = a(p, q);
        const double abs_b = std::abs(b);
        if (abs_b <= std::numeric_limits<double>::min()) continue;
        // Phase-rotate the (p,q) block to a real symmetric one, then apply a real Jacobi rotation.
        const Complex phase = std::conj(b / abs_b);
        const double tau = (a(q, q).real() - a(p, p).real()) / (2.0 * abs_b);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const Complex gpp = c, gpq = s, gqp = -s * phase, gqq = c * phase;

        for (std::size_t k = 0; k < n; ++k) {
          const Complex akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * gpp + akq * gqp;
          a(k, q) = akp * gpq + akq * gqq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const Complex apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(gpp) * apk + std::conj(gqp) * aqk;
          a(q, k) = std::conj(gpq) * apk + std::conj(gqq) * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (std::size_t k = 0; k < n; ++k) {
          const Complex vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp * gpp + vkq * gqp;
          v(k, q) = vkp * gpq + vkq * gqq;
        }
      }
    }
  }
  if (!converged && std::sqrt(off_diagonal_norm2(a)) > 1e-12 * scale) {
    throw NumericalError("hermitian_eig: Jacobi iteration did not converge");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });
  HermitianEigen out{std::vector<double>(n), ComplexMatrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]).real();
    for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, k) = v(r, order[k]);
  }
  return out;
}

ComplexMatrix spectral_apply(const HermitianEigen& eig, const std::function<double(double)>& f) {
  const auto& v = eig.eigenvectors;
  const std::size_t n = v.rows();
  ComplexMatrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double fk = f(eig.eigenvalues[k]);
    if (fk == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const Complex vik = v(i, k) * fk;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += vik * std::conj(v(j, k));
    }
  }
  return out;
}

ComplexMatrix sqrt_psd(const ComplexMatrix& m) {
  const HermitianEigen eig = hermitian_eig(m);
  const double floor = -1e-8 * std::max(1.0, frobenius_norm(m));
  if (eig.eigenvalues.front() < floor) {
    throw NumericalError("sqrt_psd: matrix is not positive semi-definite (eigenvalue " +
                         std::to_string(eig.eigenvalues.front()) + ")");
  }
  return spectral_apply(eig, [](double x) { return x > 0.0 ? std::sqrt(x) : 0.0; });
}

ComplexMatrix partial_trace(const ComplexMatrix& m, std::size_t dim_a, std::size_t dim_b, Subsystem keep) {
  if (!m.is_square() || m.rows() != dim_a * dim_b || dim_a == 0 || dim_b == 0) {
    throw DimensionError("partial_trace: matrix dimension " + std::to_string(m.rows()) + " does not factor as " +
                         std::to_string(dim_a) + "x" + std::to_string(dim_b));
  }
  if (keep == Subsystem::A) {
    ComplexMatrix out(dim_a, dim_a);
    for (std::size_t i = 0; i < dim_a; ++i)
      for (std::size_t j = 0; j < dim_a; ++j)
        for (std::size_t b = 0; b < dim_b; ++b) out(i, j) += m(i * dim_b + b, j * dim_b + b);
    return out;
  }
  ComplexMatrix out(dim_b, dim_b);
  for (std::size_t i = 0; i < dim_b; ++i)
    for (std::size_t j = 0; j < dim_b; ++j)
      for (std::size_t a = 0; a < dim_a; ++a) out(i, j) += m(a * dim_b + i, a * dim_b + j);
  return out;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double d = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) d = std::max(d, std::abs(a.data()[i] - b.data()[i]));
  return d;
}

}  // namespace qkern::linalg
