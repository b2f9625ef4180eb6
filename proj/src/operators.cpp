#include "cmvspec/operators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cmvspec::operators {

using model::half_floor;

Window Window::centered(std::int64_t n) {
  if (n < 0 || n % 2 != 0) throw UsageError("Window::centered: size must be even and non-negative");
  std::int64_t lo = -n / 2;
  if (lo % 2 != 0) lo -= 1;
  return {lo, lo + n};
}

BandedOperator::BandedOperator(Window window, std::string provenance)
    : window_{window},
      band_(static_cast<std::size_t>(std::max<std::int64_t>(0, window.size())), Band{}),
      provenance_{std::move(provenance)} {}

Complex BandedOperator::at(std::int64_t i, std::int64_t j) const {
  const std::int64_t off = j - i;
  if (!window_.contains(i) || !window_.contains(j) || off < -half_bandwidth || off > half_bandwidth)
    return {0.0, 0.0};
  return band_[static_cast<std::size_t>(i - window_.lo)][static_cast<std::size_t>(off + half_bandwidth)];
}

void BandedOperator::set(std::int64_t i, std::int64_t j, Complex v) {
  const std::int64_t off = j - i;
  if (!window_.contains(i) || !window_.contains(j) || off < -half_bandwidth || off > half_bandwidth) {
    std::ostringstream os;
    os << "BandedOperator::set: (" << i << ", " << j << ") outside band/window";
    throw UsageError(os.str());
  }
  band_[static_cast<std::size_t>(i - window_.lo)][static_cast<std::size_t>(off + half_bandwidth)] = v;
}

namespace {

void require_aligned(const Window& w, const char* who) {
  if (w.size() < 4 || !w.aligned()) {
    std::ostringstream os;
    os << who << ": window [" << w.lo << ", " << w.hi << ") must have even endpoints and length >= 4";
    throw UsageError(os.str());
  }
}

void set_if_inside(BandedOperator& op, std::int64_t i, std::int64_t j, Complex v) {
  if (op.window().contains(i) && op.window().contains(j)) op.set(i, j, v);
}

// α and ρ cached over [lo − 1, hi + 1).
class AlphaCache {
public:
  AlphaCache(const model::VerblunskySource& src, const Window& w) : first_{w.lo - 1} {
    for (std::int64_t s = w.lo - 1; s < w.hi + 1; ++s) {
      const Complex a = src.alpha(s);
      alpha_.push_back(a);
      rho_.push_back(model::rho(a));
    }
  }
  Complex alpha(std::int64_t s) const { return alpha_.at(static_cast<std::size_t>(s - first_)); }
  double rho(std::int64_t s) const { return rho_.at(static_cast<std::size_t>(s - first_)); }

  // Entry (i, k) of Θ_s acting on {s, s+1}.
  Complex theta(std::int64_t s, std::int64_t i, std::int64_t k) const {
    const bool top = i == s;
    const bool left = k == s;
    if (top && left) return std::conj(alpha(s));
    if (!top && !left) return -alpha(s);
    return rho(s);
  }

private:
  std::int64_t first_;
  std::vector<Complex> alpha_;
  std::vector<double> rho_;
};

}  // namespace

template <class Number>
CoinPattern walk_pattern(const model::WalkParams<Number>& p) {
  return CoinPattern{p.a, p.b,
                     [p](std::int64_t j) {
                       const Turn t = torus::to_turn(p.eta + p.omega.scaled(j));
                       return CoinPhases{t, t, t, t};
                     },
                     "walk", torus::phase(p.theta)};
}

CoinPattern wbeta_pattern(std::function<Turn(std::int64_t)> beta, Complex a, Complex b) {
  return CoinPattern{a, b,
                     [beta = std::move(beta)](std::int64_t j) {
                       const Turn prev = beta(j - 1);
                       const Turn cur = beta(j);
                       return CoinPhases{prev, cur, prev, cur};
                     },
                     "wbeta"};
}

template <class Number>
CoinPattern skew_display_pattern(const model::SkewParams<Number>& p) {
  p.validate();
  return CoinPattern{p.a, p.b,
                     [p](std::int64_t j) {
                       const Turn psi = torus::to_turn(
                           torus::project_last(torus::skew_iterate_closed(p.x, p.omega, j)));
                       return CoinPhases{-psi, Turn(0.0), Turn(0.0), psi};
                     },
                     "skew-display"};
}

BandedOperator build_coin_pattern(const CoinPattern& pattern, const Window& window) {
  require_aligned(window, "build_coin_pattern");
  BandedOperator op(window, pattern.provenance);
  const Complex a = pattern.a;
  const Complex b = pattern.b;
  const Complex g = pattern.scale;
  for (std::int64_t j = window.lo / 2; 2 * j < window.hi; ++j) {
    const CoinPhases ph = pattern.phases(j);
    set_if_inside(op, 2 * j, 2 * j - 1, g * (b * torus::phase(ph.p)));
    set_if_inside(op, 2 * j, 2 * j + 2, g * (a * torus::phase(ph.q)));
    set_if_inside(op, 2 * j + 1, 2 * j - 1, g * (std::conj(a) * torus::phase(ph.r)));
    set_if_inside(op, 2 * j + 1, 2 * j + 2, g * (-std::conj(b) * torus::phase(ph.s)));
  }
  return op;
}

BandedOperator build_wbeta(std::function<Turn(std::int64_t)> beta, Complex a, Complex b,
                           const Window& window) {
  model::check_coin_norm(a, b);
  return build_coin_pattern(wbeta_pattern(std::move(beta), a, b), window);
}

BandedOperator build_cmv_product(const model::VerblunskySource& src, const Window& window) {
  require_aligned(window, "build_cmv_product");
  const AlphaCache cache(src, window);
  BandedOperator op(window, "cmv-product/" + src.description());

  // L = ⊕Θ_{2n} on {2n, 2n+1}; M = ⊕Θ_{2n+1} on {2n+1, 2n+2}.
  auto l_block = [](std::int64_t i) { return 2 * half_floor(i); };
  auto m_block = [](std::int64_t k) { return model::is_even(k) ? k - 1 : k; };

  for (std::int64_t r = window.lo; r < window.hi; ++r) {
    const std::int64_t ls = l_block(r);
    for (std::int64_t k = ls; k <= ls + 1; ++k) {
      const Complex lv = cache.theta(ls, r, k);
      const std::int64_t ms = m_block(k);
      for (std::int64_t c = ms; c <= ms + 1; ++c) {
        if (!window.contains(c)) continue;
        op.set(r, c, op.at(r, c) + lv * cache.theta(ms, k, c));
      }
    }
  }
  return op;
}

BandedOperator build_cmv_direct(const model::VerblunskySource& src, const Window& window) {
  require_aligned(window, "build_cmv_direct");
  const AlphaCache c(src, window);
  BandedOperator op(window, "cmv-direct/" + src.description());
  auto al = [&](std::int64_t s) { return c.alpha(s); };
  auto rh = [&](std::int64_t s) { return c.rho(s); };
  for (std::int64_t j = window.lo / 2; 2 * j < window.hi; ++j) {
    const std::int64_t e = 2 * j;
    const std::int64_t o = 2 * j + 1;
    set_if_inside(op, e, e - 1, std::conj(al(e)) * rh(e - 1));
    set_if_inside(op, e, e, -std::conj(al(e)) * al(e - 1));
    set_if_inside(op, e, e + 1, std::conj(al(e + 1)) * rh(e));
    set_if_inside(op, e, e + 2, rh(e + 1) * rh(e));
    set_if_inside(op, o, e - 1, rh(e) * rh(e - 1));
    set_if_inside(op, o, e, -rh(e) * al(e - 1));
    set_if_inside(op, o, e + 1, -std::conj(al(e + 1)) * al(e));
    set_if_inside(op, o, e + 2, -rh(e + 1) * al(e));
  }
  return op;
}

std::vector<Complex> apply(const BandedOperator& op, std::span<const Complex> v) {
  const Window& w = op.window();
  if (static_cast<std::int64_t>(v.size()) != w.size())
    throw UsageError("apply: vector length does not match the window");
  std::vector<Complex> out(v.size());
  for (std::int64_t i = w.lo; i < w.hi; ++i) {
    Complex acc{};
    for (std::int64_t j = std::max(w.lo, i - 2); j < std::min(w.hi, i + 3); ++j)
      acc += op.at(i, j) * v[static_cast<std::size_t>(j - w.lo)];
    out[static_cast<std::size_t>(i - w.lo)] = acc;
  }
  return out;
}

DenseMatrix densify(const BandedOperator& op) {
  const Window& w = op.window();
  const auto n = static_cast<std::size_t>(w.size());
  DenseMatrix m(n, n);
  for (std::int64_t i = w.lo; i < w.hi; ++i)
    for (std::int64_t j = std::max(w.lo, i - 2); j < std::min(w.hi, i + 3); ++j)
      m(static_cast<std::size_t>(i - w.lo), static_cast<std::size_t>(j - w.lo)) = op.at(i, j);
  return m;
}

BandedOperator from_dense(const DenseMatrix& m, const Window& window, std::string provenance) {
  if (!m.square() || static_cast<std::int64_t>(m.rows()) != window.size())
    throw UsageError("from_dense: matrix size does not match the window");
  BandedOperator op(window, std::move(provenance));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (m(r, c) == Complex{}) continue;
      op.set(window.lo + static_cast<std::int64_t>(r), window.lo + static_cast<std::int64_t>(c), m(r, c));
    }
  return op;
}

double interior_unitarity_residual(const BandedOperator& op, std::int64_t margin) {
  const Window& w = op.window();
  const std::int64_t lo = w.lo + margin;
  const std::int64_t hi = w.hi - margin;
  double worst = 0.0;
  for (std::int64_t i = lo; i < hi; ++i)
    for (std::int64_t j = std::max(lo, i - 4); j < std::min(hi, i + 5); ++j) {
      Complex ata{};  // (AᴴA)_ij: columns i and j
      Complex aat{};  // (AAᴴ)_ij: rows i and j
      for (std::int64_t k = std::min(i, j) - 2; k <= std::max(i, j) + 2; ++k) {
        ata += std::conj(op.at(k, i)) * op.at(k, j);
        aat += op.at(i, k) * std::conj(op.at(j, k));
      }
      const double id = i == j ? 1.0 : 0.0;
      worst = std::max({worst, std::abs(ata - id), std::abs(aat - id)});
    }
  return worst;
}

double interior_difference(const BandedOperator& a, const BandedOperator& b, std::int64_t margin) {
  if (!(a.window() == b.window())) throw UsageError("interior_difference: windows differ");
  const Window& w = a.window();
  double worst = 0.0;
  for (std::int64_t i = w.lo + margin; i < w.hi - margin; ++i)
    for (std::int64_t j = std::max(w.lo + margin, i - 2); j < std::min(w.hi - margin, i + 3); ++j)
      worst = std::max(worst, std::abs(a.at(i, j) - b.at(i, j)));
  return worst;
}

double max_difference(const BandedOperator& a, const BandedOperator& b) {
  return interior_difference(a, b, 0);
}

BandedOperator transform(const BandedOperator& op,
                         const std::function<Complex(std::int64_t, std::int64_t, Complex)>& f,
                         std::string provenance) {
  const Window& w = op.window();
  BandedOperator out(w, std::move(provenance));
  for (std::int64_t i = w.lo; i < w.hi; ++i)
    for (std::int64_t j = std::max(w.lo, i - 2); j < std::min(w.hi, i + 3); ++j) {
      const Complex v = op.at(i, j);
      if (v != Complex{}) out.set(i, j, f(i, j, v));
    }
  return out;
}

template CoinPattern walk_pattern(const model::WalkParams<double>&);
template CoinPattern walk_pattern(const model::WalkParams<torus::Rational>&);
template CoinPattern skew_display_pattern(const model::SkewParams<double>&);
template CoinPattern skew_display_pattern(const model::SkewParams<torus::Rational>&);

}  // namespace cmvspec::operators
