#include "cmvspec/gauge.hpp"

#include <cmath>
#include <deque>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace cmvspec::gauge {

using numerics::Complex;

Turn GaugePhases::at(std::int64_t i) const {
  if (!window.contains(i)) {
    std::ostringstream os;
    os << "GaugePhases: index " << i << " outside [" << window.lo << ", " << window.hi << ")";
    throw operators::UsageError(os.str());
  }
  return lambda[static_cast<std::size_t>(i - window.lo)];
}

GaugePhases GaugePhases::zero(const Window& w) {
  return {w, std::vector<Turn>(static_cast<std::size_t>(w.size()), Turn(0.0))};
}

template <class Number>
BasicTurn<Number> beta_j(std::span<const TwoTurn<Number>> x_minus_lift, const TwoTurn<Number>& omega_lift,
                         std::int64_t j) {
  const std::size_t dm = x_minus_lift.size();  // d − 1
  if (dm == 0) throw std::invalid_argument("beta_j: need d >= 2");
  const auto x = [&](std::size_t k) -> const TwoTurn<Number>& { return x_minus_lift[k - 1]; };
  TwoTurn<Number> sum = x(dm);
  for (std::size_t k = 2; k <= dm; ++k)
    sum += x(dm + 1 - k).scaled(torus::binom(j, static_cast<std::int64_t>(k - 1)));
  sum += omega_lift.scaled(torus::binom(j, static_cast<std::int64_t>(dm)));
  return -torus::half(sum);
}

template <class Number>
BasicTurn<Number> beta_j(const TorusPoint<Number>& x_minus, const BasicTurn<Number>& omega,
                         std::int64_t j) {
  std::vector<TwoTurn<Number>> lifts;
  lifts.reserve(x_minus.dim());
  for (const auto& c : x_minus.coords) lifts.push_back(torus::lift(c));
  return beta_j<Number>(std::span<const TwoTurn<Number>>(lifts), torus::lift(omega), j);
}

template <class Number>
std::vector<BasicTurn<Number>> lambda_values(std::span<const TwoTurn<Number>> psi_lifts) {
  std::vector<BasicTurn<Number>> out;
  out.reserve(2 * psi_lifts.size());
  for (const auto& psi : psi_lifts) {
    const BasicTurn<Number> h = torus::half(psi);
    out.push_back(h);
    out.push_back(-h);
  }
  return out;
}

GaugePhases lambda_from_psi(std::span<const TwoTurn<double>> psi_lifts, std::int64_t j_first) {
  const auto n = static_cast<std::int64_t>(psi_lifts.size());
  return {Window{2 * j_first, 2 * (j_first + n)}, lambda_values<double>(psi_lifts)};
}

BandedOperator conjugate(const BandedOperator& op, const GaugePhases& g) {
  const Window& w = op.window();
  if (!(g.window.lo <= w.lo && w.hi <= g.window.hi))
    throw operators::UsageError("conjugate: gauge does not cover the operator window");
  return operators::transform(
      op,
      [&](std::int64_t i, std::int64_t j, Complex v) { return v * torus::phase(g.at(i) - g.at(j)); },
      op.provenance() + "/conjugated");
}

GaugePhases solve_gauge(const BandedOperator& a, const BandedOperator& b, double tol) {
  const Window& w = a.window();
  if (!(w == b.window())) throw GaugeError("solve_gauge: windows differ", INFINITY);

  struct Edge {
    std::int64_t i, j;
    double delta;  // λ_i − λ_j in turns
  };
  std::vector<std::vector<Edge>> adj(static_cast<std::size_t>(w.size()));
  const auto slot = [&](std::int64_t i) { return static_cast<std::size_t>(i - w.lo); };

  for (std::int64_t i = w.lo; i < w.hi; ++i)
    for (std::int64_t j = std::max(w.lo, i - 2); j < std::min(w.hi, i + 3); ++j) {
      const Complex x = a.at(i, j);
      const Complex y = b.at(i, j);
      const bool zx = std::abs(x) <= tol;
      const bool zy = std::abs(y) <= tol;
      if (zx && zy) continue;
      if (zx != zy || std::abs(std::abs(x) - std::abs(y)) > tol) {
        std::ostringstream os;
        os << "solve_gauge: modulus mismatch at (" << i << ", " << j << "): " << std::abs(x) << " vs "
           << std::abs(y);
        throw GaugeError(os.str(), std::abs(std::abs(x) - std::abs(y)));
      }
      if (i == j) continue;
      const double delta = std::arg(y / x) / (2.0 * std::numbers::pi);
      adj[slot(i)].push_back({i, j, delta});
      adj[slot(j)].push_back({i, j, delta});
    }

  GaugePhases g = GaugePhases::zero(w);
  std::vector<bool> seen(static_cast<std::size_t>(w.size()), false);
  for (std::int64_t root = w.lo; root < w.hi; ++root) {
    if (seen[slot(root)]) continue;
    seen[slot(root)] = true;
    std::deque<std::int64_t> queue{root};
    while (!queue.empty()) {
      const std::int64_t u = queue.front();
      queue.pop_front();
      for (const Edge& e : adj[slot(u)]) {
        const std::int64_t v = e.i == u ? e.j : e.i;
        if (seen[slot(v)]) continue;
        seen[slot(v)] = true;
        const Turn lu = g.lambda[slot(u)];
        g.lambda[slot(v)] = e.i == u ? lu - Turn(e.delta) : lu + Turn(e.delta);
        queue.push_back(v);
      }
    }
  }

  const double residual = operators::max_difference(conjugate(a, g), b);
  if (residual > tol) {
    std::ostringstream os;
    os << "solve_gauge: inconsistent phase cycle, residual " << residual << " > " << tol;
    throw GaugeError(os.str(), residual);
  }
  return g;
}

template <class Number>
ResidualReport verify_lemma1(const model::WalkParams<Number>& p, const Window& window,
                             model::ElectricConvention conv) {
  if (window.size() < 16) throw operators::UsageError("verify_lemma1: window must hold at least 16 sites");
  const BandedOperator w = operators::build_walk(p, window);
  const auto src = model::VerblunskySource::electric(p, conv);
  const BandedOperator e = operators::build_cmv_product(src, window);
  const GaugePhases g = solve_gauge(w, e, identity_tolerance);
  ResidualReport r;
  r.identity = "walk-electric-gauge:" + src.description();
  r.window = window;
  r.max_residual = operators::interior_difference(conjugate(w, g), e);
  r.tolerance = identity_tolerance;
  r.anchor_convention = "lambda=0 at the smallest index of each connected component; E = D W D^-1";
  return r;
}

template <class Number>
std::function<Turn(std::int64_t)> beta_function(const model::SkewParams<Number>& p,
                                                const BasicTurn<Number>& tau) {
  p.validate();
  std::vector<TwoTurn<Number>> lifts;
  for (const auto& c : p.x_minus().coords) lifts.push_back(torus::lift(c));
  lifts.back() += torus::lift(tau);
  const TwoTurn<Number> om = torus::lift(p.omega);
  return [lifts, om](std::int64_t j) {
    return torus::to_turn(beta_j<Number>(std::span<const TwoTurn<Number>>(lifts), om, j));
  };
}

template <class Number>
BandedOperator build_skew_cmv(const model::SkewParams<Number>& p, const Window& window) {
  p.validate();
  const bool real_coin = p.a.imag() == 0.0 && p.b.imag() == 0.0 && p.a.real() >= 0.0 && p.b.real() >= 0.0;
  if (real_coin) return operators::build_cmv_product(model::VerblunskySource::skew(p), window);
  return operators::build_coin_pattern(operators::skew_display_pattern(p), window);
}

template <class Number>
GaugePhases skew_gauge(const model::SkewParams<Number>& p, const Window& window) {
  if (!window.aligned()) throw operators::UsageError("skew_gauge: window must be aligned");
  std::vector<TwoTurn<Number>> psi;
  for (std::int64_t j = window.lo / 2; 2 * j < window.hi; ++j) psi.push_back(torus::psi_lift(p.x, p.omega, j));
  const auto vals = lambda_values<Number>(std::span<const TwoTurn<Number>>(psi));
  GaugePhases g{window, {}};
  g.lambda.reserve(vals.size());
  for (const auto& v : vals) g.lambda.push_back(torus::to_turn(v));
  return g;
}

template <class Number>
ResidualReport verify_section4(const model::SkewParams<Number>& p, const Window& window) {
  if (window.size() < 16) throw operators::UsageError("verify_section4: window must hold at least 16 sites");
  const BandedOperator e = build_skew_cmv(p, window);
  const BandedOperator wb = operators::build_wbeta(beta_function(p), p.a, p.b, window);
  ResidualReport r;
  r.identity = "skew-gauge:d=" + std::to_string(p.d);
  r.window = window;
  r.max_residual = operators::interior_difference(conjugate(e, skew_gauge(p, window)), wb);
  r.tolerance = identity_tolerance;
  r.anchor_convention = "lambda_2j = psi_j/2, lambda_2j+1 = -psi_j/2, psi lifted mod 2 from [0,1) representatives";
  return r;
}

template <class Number>
double tau_shift_covariance(const model::SkewParams<Number>& p, const BasicTurn<Number>& tau,
                            const Window& window) {
  const BandedOperator shifted = operators::build_wbeta(beta_function(p, tau), p.a, p.b, window);
  const BandedOperator base = operators::build_wbeta(beta_function(p), p.a, p.b, window);
  const Complex factor = torus::phase(torus::to_turn(-torus::half(torus::lift(tau))));
  const BandedOperator scaled = operators::transform(
      base, [&](std::int64_t, std::int64_t, Complex v) { return factor * v; }, "scaled");
  return operators::max_difference(shifted, scaled);
}

std::string to_json(const ResidualReport& r) {
  nlohmann::ordered_json j;
  j["identity"] = r.identity;
  j["window"] = {r.window.lo, r.window.hi};
  j["max_residual"] = r.max_residual;
  j["tolerance"] = r.tolerance;
  j["passed"] = r.passed();
  j["anchor_convention"] = r.anchor_convention;
  return j.dump();
}

#define CMVSPEC_GAUGE_INSTANTIATE(N)                                                           \
  template BasicTurn<N> beta_j(std::span<const TwoTurn<N>>, const TwoTurn<N>&, std::int64_t);  \
  template BasicTurn<N> beta_j(const TorusPoint<N>&, const BasicTurn<N>&, std::int64_t);       \
  template std::vector<BasicTurn<N>> lambda_values(std::span<const TwoTurn<N>>);               \
  template ResidualReport verify_lemma1(const model::WalkParams<N>&, const Window&,            \
                                        model::ElectricConvention);                            \
  template ResidualReport verify_section4(const model::SkewParams<N>&, const Window&);         \
  template double tau_shift_covariance(const model::SkewParams<N>&, const BasicTurn<N>&,       \
                                       const Window&);                                         \
  template std::function<Turn(std::int64_t)> beta_function(const model::SkewParams<N>&,        \
                                                           const BasicTurn<N>&);               \
  template BandedOperator build_skew_cmv(const model::SkewParams<N>&, const Window&);          \
  template GaugePhases skew_gauge(const model::SkewParams<N>&, const Window&);

CMVSPEC_GAUGE_INSTANTIATE(double)
CMVSPEC_GAUGE_INSTANTIATE(torus::Rational)

}  // namespace cmvspec::gauge
