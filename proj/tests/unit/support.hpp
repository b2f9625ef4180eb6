#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "cmvspec/numerics.hpp"
#include "cmvspec/torus.hpp"

namespace testing {

using cmvspec::numerics::Complex;
using cmvspec::numerics::DenseMatrix;

inline Complex unit_phase(double turns) {
  return std::polar(1.0, 2.0 * std::numbers::pi * turns);
}

inline double circ_dist(double a, double b) {
  double d = std::fmod(std::abs(a - b), 1.0);
  return std::min(d, 1.0 - d);
}

inline Complex random_complex(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return {g(rng), g(rng)};
}

inline DenseMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  DenseMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = random_complex(rng);
  return m;
}

// Modified Gram-Schmidt on the columns.
inline DenseMatrix random_unitary(std::mt19937_64& rng, std::size_t n) {
  DenseMatrix q = random_matrix(rng, n, n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t p = 0; p < k; ++p) {
      Complex dot{};
      for (std::size_t i = 0; i < n; ++i) dot += std::conj(q(i, p)) * q(i, k);
      for (std::size_t i = 0; i < n; ++i) q(i, k) -= dot * q(i, p);
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += std::norm(q(i, k));
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < n; ++i) q(i, k) /= norm;
  }
  return q;
}

// (a, b) with |a|² + |b|² = 1 to rounding.
inline std::pair<Complex, Complex> random_coin(std::mt19937_64& rng, bool real = false) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::uniform_real_distribution<double> t(0.0, 1.0);
  const double s = std::asin(u(rng));
  const double ca = std::cos(s);
  const double sb = std::sin(s);
  if (real) return {Complex(ca, 0.0), Complex(sb, 0.0)};
  return {ca * unit_phase(t(rng)), sb * unit_phase(t(rng))};
}

inline cmvspec::torus::RationalTurn random_rational_turn(std::mt19937_64& rng, long max_q = 97) {
  std::uniform_int_distribution<long> qd(1, max_q);
  const long q = qd(rng);
  std::uniform_int_distribution<long> pd(0, q - 1);
  return cmvspec::torus::RationalTurn(cmvspec::torus::Rational(pd(rng), q));
}

// Cyclic Jacobi on the real-symmetric embedding [[Re, −Im], [Im, Re]] of a Hermitian matrix.
// Every eigenvalue of the Hermitian matrix appears twice.
inline std::vector<double> hermitian_eigenvalues(const DenseMatrix& h) {
  const std::size_t n = h.rows();
  const std::size_t m = 2 * n;
  std::vector<double> a(m * m);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * m + j]; };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      at(i, j) = h(i, j).real();
      at(i + n, j + n) = h(i, j).real();
      at(i, j + n) = -h(i, j).imag();
      at(i + n, j) = h(i, j).imag();
    }
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) off += at(i, j) * at(i, j);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t q = p + 1; q < m; ++q) {
        if (std::abs(at(p, q)) < 1e-300) continue;
        const double tau = (at(q, q) - at(p, p)) / (2.0 * at(p, q));
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < m; ++k) {
          const double akp = at(k, p);
          const double akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < m; ++k) {
          const double apk = at(p, k);
          const double aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(m);
  for (std::size_t i = 0; i < m; ++i) ev[i] = at(i, i);
  std::sort(ev.begin(), ev.end());
  std::vector<double> out;
  for (std::size_t i = 0; i < m; i += 2) out.push_back(0.5 * (ev[i] + ev[i + 1]));
  return out;
}

}  // namespace testing
