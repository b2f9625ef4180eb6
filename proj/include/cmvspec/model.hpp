#pragma once

// Parameter sets and Verblunsky coefficient generators for the electric
// quantum walk and the d-dimensional skew-shift CMV family.

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmvspec/numerics.hpp"
#include "cmvspec/torus.hpp"

namespace cmvspec::model {

using numerics::Complex;
using numerics::DenseMatrix;
using torus::BasicTurn;
using torus::Turn;
using torus::TorusPoint;

class ModelError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double coin_norm_tolerance = 1e-12;

/// Throws ModelError unless | |a|² + |b|² − 1 | ≤ 1e-12.
void check_coin_norm(Complex a, Complex b);

/// The coin e^{2πiη}·[[a, b], [−b*, a*]].
class CoinSpec {
public:
  CoinSpec(Complex a, Complex b, Turn eta);

  Complex a() const noexcept { return a_; }
  Complex b() const noexcept { return b_; }
  Turn eta() const noexcept { return eta_; }

private:
  Complex a_;
  Complex b_;
  Turn eta_;
};

DenseMatrix coin_matrix(const CoinSpec& c);

/// Electric walk parameters (ω, θ, η, a, b). Angles share one number type so
/// that rational ω can be carried exactly into the site phases.
template <class Number>
struct WalkParams {
  BasicTurn<Number> omega;
  BasicTurn<Number> theta;
  BasicTurn<Number> eta;
  Complex a{1.0, 0.0};
  Complex b{0.0, 0.0};

  void validate() const { check_coin_norm(a, b); }
  CoinSpec coin() const { return CoinSpec(a, b, torus::to_turn(eta)); }
};

/// Skew-shift CMV parameters: dimension d ≥ 2, ω, x ∈ T^d and coin entries a, b.
template <class Number>
struct SkewParams {
  int d = 2;
  BasicTurn<Number> omega;
  TorusPoint<Number> x;
  Complex a{1.0, 0.0};
  Complex b{0.0, 0.0};

  void validate() const;
  /// (x_1, …, x_{d-1}).
  TorusPoint<Number> x_minus() const;
};

/**
 * Sign and offset convention for the electric coefficients.
 *
 * The default is α_{2n} = |b| e^{−2πi((n²−n)ω + 2n(θ+η))}.
 * `walk_matched` replaces n²−n by n², which is the family that is exactly
 * diagonally gauge-equivalent to the walk; it equals the default at
 * θ + ω/2. `conjugate` flips the sign of the exponent.
 */
struct ElectricConvention {
  bool conjugate = false;
  bool walk_matched = false;
};

/// α at `site` of the electric family; odd sites are 0.
template <class Number>
Complex verblunsky_electric(const WalkParams<Number>& p, std::int64_t site,
                            ElectricConvention conv = {});

/// Exponent of α_{2n} in turns, before the sign convention is applied.
template <class Number>
BasicTurn<Number> electric_angle(const WalkParams<Number>& p, std::int64_t n, bool walk_matched);

/// α at `site` of the skew family: b·e^{2πi P_d(T^n x)} at site 2n, 0 at odd sites.
template <class Number>
Complex verblunsky_skew(const SkewParams<Number>& p, std::int64_t site);

/// √(1 − |α|²). @throws ModelError when |α| > 1 + 1e-12.
double rho(Complex alpha);

/// [[ᾱ, ρ], [ρ, −α]].
DenseMatrix theta_block(Complex alpha);

/// Floor division of a site index by 2.
constexpr std::int64_t half_floor(std::int64_t site) {
  return site >= 0 ? site / 2 : -((-site + 1) / 2);
}
constexpr bool is_even(std::int64_t site) { return site % 2 == 0; }

/**
 * @brief Lazy map ℤ → closed unit disk with a finite override table.
 *
 * Overrides are how compressions place |α| = 1 decoupling sites.
 */
class VerblunskySource {
public:
  enum class Kind { electric, skew, custom };

  template <class Number>
  static VerblunskySource electric(const WalkParams<Number>& p, ElectricConvention conv = {});
  template <class Number>
  static VerblunskySource skew(const SkewParams<Number>& p);
  /// values[i] sits at site first_site + i; α = 0 elsewhere.
  static VerblunskySource custom(std::vector<Complex> values, std::int64_t first_site);

  Kind kind() const noexcept { return kind_; }
  const std::string& description() const noexcept { return description_; }
  const std::map<std::int64_t, Complex>& overrides() const noexcept { return overrides_; }

  Complex alpha(std::int64_t site) const;
  double rho(std::int64_t site) const { return model::rho(alpha(site)); }

  /// Copy with α fixed to `value` at `site` (|value| ≤ 1).
  VerblunskySource with_override(std::int64_t site, Complex value) const;

private:
  VerblunskySource(Kind kind, std::function<Complex(std::int64_t)> gen, std::string description)
      : kind_{kind}, gen_{std::move(gen)}, description_{std::move(description)} {}

  Kind kind_;
  std::function<Complex(std::int64_t)> gen_;
  std::string description_;
  std::map<std::int64_t, Complex> overrides_;
};

template <class Number>
VerblunskySource VerblunskySource::electric(const WalkParams<Number>& p, ElectricConvention conv) {
  p.validate();
  std::string desc = "electric";
  if (conv.walk_matched) desc += "/walk-matched";
  if (conv.conjugate) desc += "/conjugate";
  return VerblunskySource(
      Kind::electric, [p, conv](std::int64_t s) { return verblunsky_electric(p, s, conv); }, desc);
}

template <class Number>
VerblunskySource VerblunskySource::skew(const SkewParams<Number>& p) {
  p.validate();
  return VerblunskySource(
      Kind::skew, [p](std::int64_t s) { return verblunsky_skew(p, s); },
      "skew/d=" + std::to_string(p.d));
}

extern template struct SkewParams<double>;
extern template struct SkewParams<torus::Rational>;
extern template Complex verblunsky_electric(const WalkParams<double>&, std::int64_t,
                                            ElectricConvention);
extern template Complex verblunsky_electric(const WalkParams<torus::Rational>&, std::int64_t,
                                            ElectricConvention);
extern template Turn electric_angle(const WalkParams<double>&, std::int64_t, bool);
extern template torus::RationalTurn electric_angle(const WalkParams<torus::Rational>&, std::int64_t,
                                                   bool);
extern template Complex verblunsky_skew(const SkewParams<double>&, std::int64_t);
extern template Complex verblunsky_skew(const SkewParams<torus::Rational>&, std::int64_t);

}  // namespace cmvspec::model
