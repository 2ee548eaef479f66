#ifndef QKERN_LINALG_HPP
#define QKERN_LINALG_HPP

#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace qkern::linalg {

using Complex = std::complex<double>;

/// Largest dimension produced by tensor products.
inline constexpr std::size_t kMaxDim = 32;

/// Dense row-major complex matrix for small operators and states.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix diagonal(std::span<const double> values);
  /// |v><v| for a column vector v.
  static ComplexMatrix outer(std::span<const Complex> v);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<Complex> data() noexcept { return data_; }
  std::span<const Complex> data() const noexcept { return data_; }

  ComplexMatrix& operator+=(const ComplexMatrix& other);
  ComplexMatrix& operator-=(const ComplexMatrix& other);
  ComplexMatrix& operator*=(Complex s);

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, Complex s) { return a *= s; }
  friend ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

/// Eigenvalues ascending; eigenvectors stored as the columns of a unitary matrix.
struct HermitianEigen {
  std::vector<double> eigenvalues;
  ComplexMatrix eigenvectors;
};

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);
inline ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) { return matmul(a, b); }

/// Matrix-vector product.
std::vector<Complex> apply(const ComplexMatrix& m, std::span<const Complex> v);

/// Kronecker product. The left factor indexes the high-order digit.
ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix adjoint(const ComplexMatrix& m);
Complex trace(const ComplexMatrix& m);
double frobenius_norm(const ComplexMatrix& m);

/// ||m - m^dagger||_F / max(1, ||m||_F).
double hermitian_deviation(const ComplexMatrix& m);

/// (m + m^dagger) / 2.
ComplexMatrix hermitian_part(const ComplexMatrix& m);

/// Cyclic complex Jacobi. Requires hermitian_deviation(m) <= 1e-10.
HermitianEigen hermitian_eig(const ComplexMatrix& m);

/// V f(Lambda) V^dagger.
ComplexMatrix spectral_apply(const HermitianEigen& eig, const std::function<double(double)>& f);

/// Principal square root of a PSD matrix. Eigenvalues in [-1e-8 * max(1, ||m||_F), 0) are clamped to 0.
ComplexMatrix sqrt_psd(const ComplexMatrix& m);

enum class Subsystem { A, B };

/// Traces out the other factor of an (dim_a * dim_b)-dimensional operator, index = a * dim_b + b.
ComplexMatrix partial_trace(const ComplexMatrix& m, std::size_t dim_a, std::size_t dim_b, Subsystem keep);

/// Max absolute entrywise difference; dimensions must agree.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace qkern::linalg

#endif  // QKERN_LINALG_HPP
