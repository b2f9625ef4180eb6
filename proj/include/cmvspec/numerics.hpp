#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmvspec::numerics {

using Complex = std::complex<double>;

/// Raised when a dense solver fails to converge or to meet its residual contract.
class NumericsError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/**
 * @brief Dense complex matrix stored row-major.
 *
 * Entries are required to be finite; the solvers check this on entry.
 */
class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols);
  DenseMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(std::span<const Complex> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const Complex> data() const noexcept { return data_; }
  std::span<Complex> data() noexcept { return data_; }

  bool all_finite() const noexcept;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

DenseMatrix adjoint(const DenseMatrix& m);
DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);
std::vector<Complex> multiply(const DenseMatrix& m, std::span<const Complex> v);

double frobenius(const DenseMatrix& m);
double max_abs_entry(const DenseMatrix& m);

/// max_ij |(MᴴM - I)_ij|; requires a square matrix.
double unitarity_defect(const DenseMatrix& m);

struct EigenResult {
  std::vector<Complex> values;
  /// ‖Mv − λv‖₂ for each unit eigenvector, aligned with `values`.
  std::vector<double> residuals;
  /// The residual bound every entry of `residuals` satisfies.
  double tolerance = 0.0;
};

/**
 * @brief All eigenvalues of a general complex square matrix.
 *
 * Hessenberg reduction followed by shifted QR (LAPACK zgeev). Each eigenpair
 * is checked against ‖Mv − λv‖₂ ≤ 1e-8·‖M‖_F; pairs that miss the bound get
 * a few steps of inverse iteration before the call gives up.
 *
 * @throws NumericsError on non-convergence or an unmet residual bound; the
 *         message names the matrix size and the achieved residual.
 */
EigenResult eig_all(const DenseMatrix& m);

/// Relative residual factor used by eig_all.
inline constexpr double eig_residual_factor = 1e-8;

/**
 * @brief Smallest singular value, i.e. min over unit v of ‖m v‖₂.
 *
 * For a wide matrix (rows < cols) the kernel is non-trivial and the result is 0.
 */
double smallest_singular(const DenseMatrix& m);

/// All singular values in descending order (values only).
std::vector<double> singular_values(const DenseMatrix& m);

}  // namespace cmvspec::numerics
