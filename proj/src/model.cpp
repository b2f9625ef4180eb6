#include "cmvspec/model.hpp"

#include <cmath>
#include <sstream>

namespace cmvspec::model {

void check_coin_norm(Complex a, Complex b) {
  const double defect = std::abs(std::norm(a) + std::norm(b) - 1.0);
  if (defect > coin_norm_tolerance) {
    std::ostringstream os;
    os << "coin violates |a|^2 + |b|^2 = 1 (defect " << defect << ")";
    throw ModelError(os.str());
  }
}

CoinSpec::CoinSpec(Complex a, Complex b, Turn eta) : a_{a}, b_{b}, eta_{eta} {
  check_coin_norm(a, b);
}

DenseMatrix coin_matrix(const CoinSpec& c) {
  const Complex g = torus::phase(c.eta());
  return DenseMatrix{{g * c.a(), g * c.b()}, {-g * std::conj(c.b()), g * std::conj(c.a())}};
}

template <class Number>
void SkewParams<Number>::validate() const {
  if (d < 2) throw ModelError("skew model needs d >= 2");
  if (x.dim() != static_cast<std::size_t>(d)) throw ModelError("skew model: x must have d coordinates");
  check_coin_norm(a, b);
}

template <class Number>
TorusPoint<Number> SkewParams<Number>::x_minus() const {
  return TorusPoint<Number>(
      std::vector<BasicTurn<Number>>(x.coords.begin(), x.coords.end() - 1));
}

template <class Number>
BasicTurn<Number> electric_angle(const WalkParams<Number>& p, std::int64_t n, bool walk_matched) {
  const torus::BigInt nn(static_cast<long>(n));
  const torus::BigInt quad = walk_matched ? torus::BigInt(nn * nn) : torus::BigInt(nn * nn - nn);
  return p.omega.scaled(quad) + (p.theta + p.eta).scaled(2 * n);
}

template <class Number>
Complex verblunsky_electric(const WalkParams<Number>& p, std::int64_t site, ElectricConvention conv) {
  if (!is_even(site)) return {0.0, 0.0};
  const auto angle = electric_angle(p, half_floor(site), conv.walk_matched);
  const Complex ph = torus::phase(conv.conjugate ? angle : -angle);
  return std::abs(p.b) * ph;
}

template <class Number>
Complex verblunsky_skew(const SkewParams<Number>& p, std::int64_t site) {
  if (!is_even(site)) return {0.0, 0.0};
  const auto psi = torus::project_last(torus::skew_iterate_closed(p.x, p.omega, half_floor(site)));
  return p.b * torus::phase(psi);
}

double rho(Complex alpha) {
  const double m2 = std::norm(alpha);
  if (m2 > 1.0 + 2e-12) throw ModelError("rho: |alpha| exceeds 1");
  return std::sqrt(std::max(0.0, 1.0 - m2));
}

DenseMatrix theta_block(Complex alpha) {
  const double r = rho(alpha);
  return DenseMatrix{{std::conj(alpha), r}, {r, -alpha}};
}

VerblunskySource VerblunskySource::custom(std::vector<Complex> values, std::int64_t first_site) {
  for (const Complex& v : values)
    if (std::abs(v) > 1.0 + 1e-12) throw ModelError("custom Verblunsky list: |alpha| > 1");
  return VerblunskySource(
      Kind::custom,
      [values = std::move(values), first_site](std::int64_t s) -> Complex {
        const std::int64_t i = s - first_site;
        if (i < 0 || i >= static_cast<std::int64_t>(values.size())) return {0.0, 0.0};
        return values[static_cast<std::size_t>(i)];
      },
      "custom");
}

Complex VerblunskySource::alpha(std::int64_t site) const {
  if (auto it = overrides_.find(site); it != overrides_.end()) return it->second;
  return gen_(site);
}

VerblunskySource VerblunskySource::with_override(std::int64_t site, Complex value) const {
  if (std::abs(value) > 1.0 + 1e-12) throw ModelError("override: |alpha| > 1");
  VerblunskySource out = *this;
  out.overrides_[site] = value;
  return out;
}

template struct SkewParams<double>;
template struct SkewParams<torus::Rational>;
template Complex verblunsky_electric(const WalkParams<double>&, std::int64_t, ElectricConvention);
template Complex verblunsky_electric(const WalkParams<torus::Rational>&, std::int64_t,
                                     ElectricConvention);
template Turn electric_angle(const WalkParams<double>&, std::int64_t, bool);
template torus::RationalTurn electric_angle(const WalkParams<torus::Rational>&, std::int64_t, bool);
template Complex verblunsky_skew(const SkewParams<double>&, std::int64_t);
template Complex verblunsky_skew(const SkewParams<torus::Rational>&, std::int64_t);

}  // namespace cmvspec::model
