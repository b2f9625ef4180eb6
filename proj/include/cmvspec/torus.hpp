#pragma once

// Angles in turns, exact combinatorics and iterated skew-shifts on T^d.
//
// Every angle is stored in units of full revolutions and reduced into
// [0, modulus). Two number types are supported: double (for spectra) and
// GMP rationals (for exact identity checks). Multiplication by an integer is
// carried out exactly and rounded once, so phases such as binom(n,2)·ω stay
// accurate for large |n|.

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

namespace cmvspec::torus {

using BigInt = mpz_class;
using Rational = mpq_class;

/// Exact binomial coefficient for any integer n and k ≥ 0.
///
/// n ≥ 0 uses the factorial definition (0 when n < k); n ≤ -1 uses the
/// reflection binom(n, k) = (-1)^k binom(-n+k-1, k).
/// @throws std::domain_error when k < 0.
BigInt binom(std::int64_t n, std::int64_t k);

/// binom(n,k) + binom(n,k-1) == binom(n+1,k), evaluated exactly. Requires k ≥ 1.
bool pascal_holds(std::int64_t n, std::int64_t k);

namespace detail {

double reduce(double v, int modulus);
Rational reduce(const Rational& v, int modulus);

// m·v mod modulus with a single final rounding.
double scale(double v, const BigInt& m, int modulus);
Rational scale(const Rational& v, const BigInt& m, int modulus);

inline double to_double(double v) { return v; }
inline double to_double(const Rational& v) { return v.get_d(); }

}  // namespace detail

/**
 * @brief An element of ℝ / (Modulus·ℤ), stored as its representative in [0, Modulus).
 *
 * Modulus 1 is the circle T (a Turn). Modulus 2 holds a real lift of a turn
 * precisely enough to take half of it consistently.
 */
template <class Number, int Modulus>
class Cyclic {
public:
  Cyclic() : v_(0) {}
  explicit Cyclic(const Number& v) : v_(detail::reduce(v, Modulus)) {}

  const Number& value() const noexcept { return v_; }
  double to_double() const { return detail::to_double(v_); }

  Cyclic scaled(const BigInt& m) const {
    Cyclic out;
    out.v_ = detail::scale(v_, m, Modulus);
    return out;
  }
  Cyclic scaled(std::int64_t m) const { return scaled(BigInt(static_cast<long>(m))); }

  friend Cyclic operator+(const Cyclic& a, const Cyclic& b) { return Cyclic(Number(a.v_ + b.v_)); }
  friend Cyclic operator-(const Cyclic& a, const Cyclic& b) { return Cyclic(Number(a.v_ - b.v_)); }
  Cyclic operator-() const { return Cyclic(Number(-v_)); }
  Cyclic& operator+=(const Cyclic& o) { return *this = *this + o; }

  friend bool operator==(const Cyclic& a, const Cyclic& b) { return a.v_ == b.v_; }

private:
  Number v_;
};

template <class Number>
using BasicTurn = Cyclic<Number, 1>;
/// A real lift of a turn, kept modulo 2 so that halving is well defined.
template <class Number>
using TwoTurn = Cyclic<Number, 2>;

using Turn = BasicTurn<double>;
using RationalTurn = BasicTurn<Rational>;

/// Canonical lift: the [0,1) representative, read modulo 2.
template <class Number>
TwoTurn<Number> lift(const BasicTurn<Number>& t) {
  return TwoTurn<Number>(t.value());
}

/// Reduce a lift back to the circle.
template <class Number>
BasicTurn<Number> on_circle(const TwoTurn<Number>& t) {
  return BasicTurn<Number>(t.value());
}

/// Half of a lifted angle: (representative in [0,2)) / 2, a turn in [0,1).
template <class Number>
BasicTurn<Number> half(const TwoTurn<Number>& t) {
  return BasicTurn<Number>(Number(t.value() / 2));
}

inline Turn to_turn(const Turn& t) { return t; }
inline Turn to_turn(const RationalTurn& t) { return Turn(t.value().get_d()); }

/// e^{2πi t}.
std::complex<double> phase(const Turn& t);
inline std::complex<double> phase(const RationalTurn& t) { return phase(to_turn(t)); }

/// Parse "p/q" (or an integer) into an exact turn. @throws std::invalid_argument.
RationalTurn parse_rational_turn(std::string_view text);

/// (√5 − 1)/2, the golden rotation number.
Turn golden_turn();

template <class Number>
struct TorusPoint {
  std::vector<BasicTurn<Number>> coords;

  TorusPoint() = default;
  explicit TorusPoint(std::vector<BasicTurn<Number>> c) : coords(std::move(c)) {}

  std::size_t dim() const noexcept { return coords.size(); }
  /// 1-based coordinate access, x_1 … x_d.
  const BasicTurn<Number>& x(std::size_t k) const { return coords.at(k - 1); }

  friend bool operator==(const TorusPoint&, const TorusPoint&) = default;
};

/// One application of T_{d,ω}: (x1 + ω, x2 + x1, …, xd + x_{d-1}).
template <class Number>
TorusPoint<Number> skew_step(const TorusPoint<Number>& x, const BasicTurn<Number>& omega);

/// T_{d,ω}^n(x) through the binomial closed form; any integer n.
template <class Number>
TorusPoint<Number> skew_iterate_closed(const TorusPoint<Number>& x, const BasicTurn<Number>& omega,
                                       std::int64_t n);

/// P_d(x) = x_d.
template <class Number>
BasicTurn<Number> project_last(const TorusPoint<Number>& x) {
  if (x.dim() == 0) throw std::invalid_argument("project_last: empty torus point");
  return x.coords.back();
}

/// ψ_j = P_d(T_{d,ω}^j(x)) for j in [j_lo, j_hi).
template <class Number>
std::vector<BasicTurn<Number>> psi_sequence(const TorusPoint<Number>& x,
                                            const BasicTurn<Number>& omega, std::int64_t j_lo,
                                            std::int64_t j_hi);

/// ψ_j as a lift modulo 2, formed from the canonical representatives of x and ω.
template <class Number>
TwoTurn<Number> psi_lift(const TorusPoint<Number>& x, const BasicTurn<Number>& omega,
                         std::int64_t j);

extern template TorusPoint<double> skew_step(const TorusPoint<double>&, const Turn&);
extern template TorusPoint<Rational> skew_step(const TorusPoint<Rational>&, const RationalTurn&);
extern template TorusPoint<double> skew_iterate_closed(const TorusPoint<double>&, const Turn&,
                                                       std::int64_t);
extern template TorusPoint<Rational> skew_iterate_closed(const TorusPoint<Rational>&,
                                                         const RationalTurn&, std::int64_t);
extern template std::vector<Turn> psi_sequence(const TorusPoint<double>&, const Turn&,
                                               std::int64_t, std::int64_t);
extern template std::vector<RationalTurn> psi_sequence(const TorusPoint<Rational>&,
                                                       const RationalTurn&, std::int64_t,
                                                       std::int64_t);
extern template TwoTurn<double> psi_lift(const TorusPoint<double>&, const Turn&, std::int64_t);
extern template TwoTurn<Rational> psi_lift(const TorusPoint<Rational>&, const RationalTurn&,
                                           std::int64_t);

}  // namespace cmvspec::torus
