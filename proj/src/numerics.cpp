#include "cmvspec/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <complex>
#define LAPACK_COMPLEX_CUSTOM
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace cmvspec::numerics {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_{rows}, cols_{cols}, data_(rows * cols, Complex{}) {}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) throw std::invalid_argument("DenseMatrix: ragged initializer");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const Complex> values) {
  DenseMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

bool DenseMatrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

DenseMatrix adjoint(const DenseMatrix& m) {
  DenseMatrix out(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(c, r) = std::conj(m(r, c));
  return out;
}

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("multiply: shape mismatch");
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex x = a(r, k);
      if (x == Complex{}) continue;
      for (std::size_t c = 0; c < b.cols(); ++c) out(r, c) += x * b(k, c);
    }
  return out;
}

std::vector<Complex> multiply(const DenseMatrix& m, std::span<const Complex> v) {
  if (v.size() != m.cols()) throw std::invalid_argument("multiply: vector length mismatch");
  std::vector<Complex> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Complex acc{};
    for (std::size_t c = 0; c < m.cols(); ++c) acc += m(r, c) * v[c];
    out[r] = acc;
  }
  return out;
}

double frobenius(const DenseMatrix& m) {
  double acc = 0.0;
  for (const Complex& z : m.data()) acc += std::norm(z);
  return std::sqrt(acc);
}

double max_abs_entry(const DenseMatrix& m) {
  double best = 0.0;
  for (const Complex& z : m.data()) best = std::max(best, std::abs(z));
  return best;
}

double unitarity_defect(const DenseMatrix& m) {
  if (!m.square()) throw std::invalid_argument("unitarity_defect: matrix not square");
  const DenseMatrix g = multiply(adjoint(m), m);
  double worst = 0.0;
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c)
      worst = std::max(worst, std::abs(g(r, c) - (r == c ? 1.0 : 0.0)));
  return worst;
}

namespace {

// Column-major copy for LAPACK.
std::vector<Complex> to_column_major(const DenseMatrix& m) {
  std::vector<Complex> out(m.rows() * m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out[c * m.rows() + r] = m(r, c);
  return out;
}

struct SparseRows {
  std::vector<std::size_t> start;
  std::vector<std::size_t> col;
  std::vector<Complex> val;
};

SparseRows nonzeros(const DenseMatrix& m) {
  SparseRows s;
  s.start.reserve(m.rows() + 1);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    s.start.push_back(s.col.size());
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (m(r, c) != Complex{}) {
        s.col.push_back(c);
        s.val.push_back(m(r, c));
      }
  }
  s.start.push_back(s.col.size());
  return s;
}

double pair_residual(const SparseRows& s, std::span<const Complex> v, Complex lambda) {
  double acc = 0.0;
  for (std::size_t r = 0; r + 1 < s.start.size(); ++r) {
    Complex y = -lambda * v[r];
    for (std::size_t k = s.start[r]; k < s.start[r + 1]; ++k) y += s.val[k] * v[s.col[k]];
    acc += std::norm(y);
  }
  return std::sqrt(acc);
}

void normalize(std::span<Complex> v) {
  double n = 0.0;
  for (const Complex& z : v) n += std::norm(z);
  n = std::sqrt(n);
  if (n > 0.0)
    for (Complex& z : v) z /= n;
}

// Inverse iteration on (M - λI); returns the best residual reached.
double refine_by_inverse_iteration(const DenseMatrix& m, const SparseRows& s, Complex lambda,
                                   std::span<Complex> v, double target) {
  const auto n = static_cast<lapack_int>(m.rows());
  std::vector<Complex> a = to_column_major(m);
  // Nudge the shift off the eigenvalue so the factorization stays regular.
  const Complex shift = lambda + Complex{1e-13 * std::max(1.0, std::abs(lambda)), 0.0};
  for (lapack_int i = 0; i < n; ++i) a[i * n + i] -= shift;
  std::vector<lapack_int> piv(n);
  if (LAPACKE_zgetrf(LAPACK_COL_MAJOR, n, n, a.data(), n, piv.data()) < 0)
    return pair_residual(s, v, lambda);
  double best = pair_residual(s, v, lambda);
  for (int step = 0; step < 4 && best > target; ++step) {
    std::vector<Complex> x(v.begin(), v.end());
    if (LAPACKE_zgetrs(LAPACK_COL_MAJOR, 'N', n, 1, a.data(), n, piv.data(), x.data(), n) != 0)
      break;
    normalize(x);
    const double r = pair_residual(s, x, lambda);
    if (r < best) {
      best = r;
      std::copy(x.begin(), x.end(), v.begin());
    }
  }
  return best;
}

}  // namespace

EigenResult eig_all(const DenseMatrix& m) {
  if (!m.square() || m.rows() == 0) throw std::invalid_argument("eig_all: need a non-empty square matrix");
  if (!m.all_finite()) throw std::invalid_argument("eig_all: non-finite entry");

  const auto n = static_cast<lapack_int>(m.rows());
  std::vector<Complex> a = to_column_major(m);
  std::vector<Complex> w(n);
  std::vector<Complex> vr(static_cast<std::size_t>(n) * n);
  const lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, a.data(), n, w.data(), nullptr, 1, vr.data(), n);
  if (info != 0) {
    std::ostringstream os;
    os << "eig_all: QR iteration did not converge on " << n << "x" << n << " matrix (info=" << info
       << ")";
    throw NumericsError(os.str());
  }

  EigenResult out;
  out.tolerance = eig_residual_factor * std::max(frobenius(m), 1e-300);
  out.values = std::move(w);
  out.residuals.resize(n);
  const SparseRows s = nonzeros(m);
  for (lapack_int k = 0; k < n; ++k) {
    std::span<Complex> v(vr.data() + static_cast<std::size_t>(k) * n, n);
    normalize(v);
    double r = pair_residual(s, v, out.values[k]);
    if (r > out.tolerance) r = refine_by_inverse_iteration(m, s, out.values[k], v, out.tolerance);
    if (r > out.tolerance) {
      std::ostringstream os;
      os << "eig_all: eigenpair " << k << " of " << n << "x" << n << " matrix reached residual " << r
         << " > " << out.tolerance;
      throw NumericsError(os.str());
    }
    out.residuals[k] = r;
  }
  return out;
}

std::vector<double> singular_values(const DenseMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) throw std::invalid_argument("singular_values: empty matrix");
  if (!m.all_finite()) throw std::invalid_argument("singular_values: non-finite entry");
  const auto rows = static_cast<lapack_int>(m.rows());
  const auto cols = static_cast<lapack_int>(m.cols());
  std::vector<Complex> a = to_column_major(m);
  std::vector<double> s(std::min(rows, cols));
  std::vector<double> superb(std::max<lapack_int>(1, std::min(rows, cols) - 1));
  const lapack_int info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'N', 'N', rows, cols, a.data(), rows,
                                         s.data(), nullptr, 1, nullptr, 1, superb.data());
  if (info != 0) {
    std::ostringstream os;
    os << "singular_values: bidiagonal QR did not converge on " << rows << "x" << cols
       << " matrix (info=" << info << ")";
    throw NumericsError(os.str());
  }
  return s;
}

double smallest_singular(const DenseMatrix& m) {
  const std::vector<double> s = singular_values(m);
  if (m.rows() < m.cols()) return 0.0;
  return s.back();
}

}  // namespace cmvspec::numerics
