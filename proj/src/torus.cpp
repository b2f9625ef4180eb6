#include "cmvspec/torus.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

namespace cmvspec::torus {

namespace {

// n(n-1)…(n-k+1)/k! for n ≥ 0.
BigInt binom_nonnegative(std::int64_t n, std::int64_t k) {
  if (n < k) return 0;
  k = std::min(k, n - k);
  BigInt num = 1;
  BigInt den = 1;
  for (std::int64_t i = 0; i < k; ++i) {
    num *= BigInt(static_cast<long>(n - i));
    den *= BigInt(static_cast<long>(i + 1));
  }
  return num / den;
}

}  // namespace

BigInt binom(std::int64_t n, std::int64_t k) {
  if (k < 0) throw std::domain_error("binom: k must be non-negative");
  if (n >= 0) return binom_nonnegative(n, k);
  BigInt r = binom_nonnegative(-n + k - 1, k);
  return (k % 2 == 0) ? r : BigInt(-r);
}

bool pascal_holds(std::int64_t n, std::int64_t k) {
  if (k < 1) throw std::domain_error("pascal_holds: k must be positive");
  return binom(n, k) + binom(n, k - 1) == binom(n + 1, k);
}

namespace detail {

double reduce(double v, int modulus) {
  const double m = static_cast<double>(modulus);
  double r = v - m * std::floor(v / m);
  // v slightly below 0 may round up to exactly m.
  if (r >= m) r -= m;
  if (r < 0.0) r = 0.0;
  return r;
}

Rational reduce(const Rational& v, int modulus) {
  Rational c = v;
  c.canonicalize();
  Rational q = c / modulus;
  BigInt fl;
  mpz_fdiv_q(fl.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return c - Rational(fl * modulus);
}

double scale(double v, const BigInt& m, int modulus) {
  constexpr double exact_limit = 9007199254740992.0;  // 2^53
  if (mpz_cmpabs_d(m.get_mpz_t(), exact_limit) < 0) {
    const double md = m.get_d();
    const double p = md * v;
    const double err = std::fma(md, v, -p);
    return reduce(reduce(p, modulus) + err, modulus);
  }
  // Doubles are dyadic rationals, so this route is exact until the last rounding.
  return reduce(Rational(Rational(v) * m), modulus).get_d();
}

Rational scale(const Rational& v, const BigInt& m, int modulus) {
  return reduce(Rational(v * m), modulus);
}

}  // namespace detail

std::complex<double> phase(const Turn& t) {
  // Quadrant reduction: quarter turns come out exact and the remainder lies in [0, 1/4).
  const double v = t.value();
  const int q = static_cast<int>(std::floor(4.0 * v)) & 3;
  const double r = v - 0.25 * q;
  const double ang = 2.0 * std::numbers::pi * r;
  const double c = r == 0.0 ? 1.0 : std::cos(ang);
  const double s = r == 0.0 ? 0.0 : std::sin(ang);
  switch (q) {
    case 1: return {-s, c};
    case 2: return {-c, -s};
    case 3: return {s, -c};
    default: return {c, s};
  }
}

RationalTurn parse_rational_turn(std::string_view text) {
  auto parse_int = [&](std::string_view s) {
    if (s.empty()) throw std::invalid_argument("parse_rational_turn: malformed '" + std::string(text) + "'");
    BigInt v;
    if (v.set_str(std::string(s), 10) != 0)
      throw std::invalid_argument("parse_rational_turn: malformed '" + std::string(text) + "'");
    return v;
  };
  const auto slash = text.find('/');
  BigInt p = parse_int(text.substr(0, slash));
  BigInt q = slash == std::string_view::npos ? BigInt(1) : parse_int(text.substr(slash + 1));
  if (q == 0) throw std::invalid_argument("parse_rational_turn: zero denominator");
  Rational r(p, q);
  r.canonicalize();
  return RationalTurn(r);
}

Turn golden_turn() { return Turn((std::sqrt(5.0) - 1.0) / 2.0); }

template <class Number>
TorusPoint<Number> skew_step(const TorusPoint<Number>& x, const BasicTurn<Number>& omega) {
  TorusPoint<Number> y = x;
  if (x.dim() == 0) return y;
  y.coords[0] = x.coords[0] + omega;
  for (std::size_t k = 1; k < x.dim(); ++k) y.coords[k] = x.coords[k] + x.coords[k - 1];
  return y;
}

template <class Number>
TorusPoint<Number> skew_iterate_closed(const TorusPoint<Number>& x, const BasicTurn<Number>& omega,
                                       std::int64_t n) {
  TorusPoint<Number> y = x;
  const std::size_t d = x.dim();
  std::vector<BigInt> c(d + 1);
  for (std::size_t k = 0; k <= d; ++k) c[k] = binom(n, static_cast<std::int64_t>(k));
  // y_m = x_m + Σ_{k=1}^{m-1} binom(n,k) x_{m-k} + binom(n,m) ω   (1-based m)
  for (std::size_t m = 1; m <= d; ++m) {
    BasicTurn<Number> acc = x.x(m);
    for (std::size_t k = 1; k < m; ++k) acc += x.x(m - k).scaled(c[k]);
    acc += omega.scaled(c[m]);
    y.coords[m - 1] = acc;
  }
  return y;
}

template <class Number>
std::vector<BasicTurn<Number>> psi_sequence(const TorusPoint<Number>& x,
                                            const BasicTurn<Number>& omega, std::int64_t j_lo,
                                            std::int64_t j_hi) {
  std::vector<BasicTurn<Number>> out;
  if (j_hi <= j_lo) return out;
  out.reserve(static_cast<std::size_t>(j_hi - j_lo));
  for (std::int64_t j = j_lo; j < j_hi; ++j)
    out.push_back(project_last(skew_iterate_closed(x, omega, j)));
  return out;
}

template <class Number>
TwoTurn<Number> psi_lift(const TorusPoint<Number>& x, const BasicTurn<Number>& omega,
                         std::int64_t j) {
  const std::size_t d = x.dim();
  if (d == 0) throw std::invalid_argument("psi_lift: empty torus point");
  TwoTurn<Number> acc = lift(x.x(d));
  for (std::size_t k = 1; k < d; ++k)
    acc += lift(x.x(d - k)).scaled(binom(j, static_cast<std::int64_t>(k)));
  acc += lift(omega).scaled(binom(j, static_cast<std::int64_t>(d)));
  return acc;
}

template TorusPoint<double> skew_step(const TorusPoint<double>&, const Turn&);
template TorusPoint<Rational> skew_step(const TorusPoint<Rational>&, const RationalTurn&);
template TorusPoint<double> skew_iterate_closed(const TorusPoint<double>&, const Turn&, std::int64_t);
template TorusPoint<Rational> skew_iterate_closed(const TorusPoint<Rational>&, const RationalTurn&,
                                                  std::int64_t);
template std::vector<Turn> psi_sequence(const TorusPoint<double>&, const Turn&, std::int64_t,
                                        std::int64_t);
template std::vector<RationalTurn> psi_sequence(const TorusPoint<Rational>&, const RationalTurn&,
                                                std::int64_t, std::int64_t);
template TwoTurn<double> psi_lift(const TorusPoint<double>&, const Turn&, std::int64_t);
template TwoTurn<Rational> psi_lift(const TorusPoint<Rational>&, const RationalTurn&, std::int64_t);

}  // namespace cmvspec::torus
