#include "cmvspec/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "cmvspec/gauge.hpp"

namespace cmvspec::spectral {

using numerics::Complex;

namespace {

double circular_distance(double a, double b) {
  const double d = std::abs(a - b);
  return std::min(d, 1.0 - d);
}

double angle_of(Complex z) {
  const double t = std::arg(z) / (2.0 * std::numbers::pi);
  return torus::detail::reduce(t, 1);
}

void check_block_unitary(const DenseMatrix& u, const char* who) {
  const double defect = numerics::unitarity_defect(u);
  if (defect > compression_unitarity_tolerance) {
    std::ostringstream os;
    os << who << ": " << u.rows() << "-site block is not unitary (defect " << defect << ")";
    throw StructuralError(os.str());
  }
}

}  // namespace

Cuts centered_cuts(std::int64_t n) {
  const Window w = Window::centered(n);
  return {w.lo - 1, w.hi - 1};
}

DenseMatrix checked_compression(const model::VerblunskySource& src, std::int64_t cut_lo, std::int64_t cut_hi) {
  if (model::is_even(cut_lo) || model::is_even(cut_hi))
    throw operators::UsageError("compression: cut sites must be odd");
  if (cut_hi - cut_lo < 8) throw operators::UsageError("compression: cuts must be at least 8 sites apart");
  const Cuts cuts{cut_lo, cut_hi};
  DenseMatrix u = operators::densify(operators::build_cmv_product(src, cuts.enclosed()));
  check_block_unitary(u, "unitary_compression");
  return u;
}

DenseMatrix unitary_compression(const model::VerblunskySource& src, std::int64_t cut_lo, std::int64_t cut_hi) {
  return checked_compression(src.with_override(cut_lo, 1.0).with_override(cut_hi, 1.0), cut_lo, cut_hi);
}

DenseMatrix reflecting_compression(const CoinPattern& pattern, std::int64_t site_lo, std::int64_t site_hi) {
  if (site_hi - site_lo < 2) throw operators::UsageError("reflecting_compression: need at least two walk sites");
  const Window w{2 * site_lo, 2 * site_hi};
  BandedOperator op = operators::build_coin_pattern(pattern, w);

  // Right edge: the + output of the last site re-enters its own row pair via the − slot.
  const std::int64_t m = site_hi - 1;
  const Complex g = pattern.scale;
  const operators::CoinPhases right = pattern.phases(m);
  op.set(2 * m, 2 * m + 1, g * (pattern.a * torus::phase(right.q)));
  op.set(2 * m + 1, 2 * m + 1, g * (-std::conj(pattern.b) * torus::phase(right.s)));
  // Left edge: the − output of the first site re-enters via the + slot.
  const operators::CoinPhases left = pattern.phases(site_lo);
  op.set(2 * site_lo, 2 * site_lo, g * (pattern.b * torus::phase(left.p)));
  op.set(2 * site_lo + 1, 2 * site_lo, g * (std::conj(pattern.a) * torus::phase(left.r)));

  DenseMatrix u = operators::densify(op);
  check_block_unitary(u, "reflecting_compression");
  return u;
}

EigenangleSet eigenangles(const DenseMatrix& u) {
  const double defect = numerics::unitarity_defect(u);
  if (defect > eigenangle_unitarity_gate) {
    std::ostringstream os;
    os << "eigenangles: input is not unitary (defect " << defect << ")";
    throw StructuralError(os.str());
  }
  const numerics::EigenResult eig = numerics::eig_all(u);
  EigenangleSet s;
  s.angles.reserve(eig.values.size());
  for (const Complex& z : eig.values) {
    s.max_modulus_defect = std::max(s.max_modulus_defect, std::abs(std::abs(z) - 1.0));
    s.angles.push_back(angle_of(z));
  }
  for (double r : eig.residuals) s.max_residual = std::max(s.max_residual, r);
  s.residual_tolerance = eig.tolerance;
  if (s.max_modulus_defect > unimodularity_tolerance) {
    std::ostringstream os;
    os << "eigenangles: eigenvalue off the unit circle by " << s.max_modulus_defect;
    throw StructuralError(os.str());
  }
  std::sort(s.angles.begin(), s.angles.end());
  return s;
}

GapStats gap_stats(const EigenangleSet& s) {
  const std::size_t n = s.angles.size();
  if (n < 2) throw std::invalid_argument("gap_stats: need at least two angles");
  GapStats g;
  g.n = n;
  g.mean_gap = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double next = i + 1 < n ? s.angles[i + 1] : s.angles[0] + 1.0;
    const double gap = next - s.angles[i];
    if (gap > g.max_gap) {
      g.max_gap = gap;
      g.max_gap_start = s.angles[i];
    }
  }
  return g;
}

double shift_mismatch(const EigenangleSet& base, const EigenangleSet& shifted, double shift) {
  const std::size_t n = base.angles.size();
  if (n != shifted.angles.size()) return INFINITY;
  if (n == 0) return 0.0;
  std::vector<double> moved(n);
  for (std::size_t i = 0; i < n; ++i) moved[i] = torus::detail::reduce(base.angles[i] + shift, 1);
  std::sort(moved.begin(), moved.end());
  double best = INFINITY;
  for (std::size_t k = 0; k < n; ++k) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n && worst < best; ++i)
      worst = std::max(worst, circular_distance(moved[(i + k) % n], shifted.angles[i]));
    best = std::min(best, worst);
  }
  return best;
}

namespace {

std::pair<std::int64_t, std::int64_t> walk_sites(std::int64_t block) {
  if (block < 4 || block % 2 != 0) throw operators::UsageError("block must be even and at least 4");
  const std::int64_t sites = block / 2;
  const std::int64_t lo = -(sites / 2);
  return {lo, lo + sites};
}

}  // namespace

template <class Number>
double rotation_covariance_check(const model::WalkParams<Number>& p, const BasicTurn<Number>& theta,
                                 std::int64_t block) {
  const auto [lo, hi] = walk_sites(block);
  model::WalkParams<Number> at0 = p;
  at0.theta = BasicTurn<Number>();
  model::WalkParams<Number> at_theta = p;
  at_theta.theta = theta;
  const EigenangleSet s0 = eigenangles(reflecting_compression(operators::walk_pattern(at0), lo, hi));
  const EigenangleSet st = eigenangles(reflecting_compression(operators::walk_pattern(at_theta), lo, hi));
  return shift_mismatch(s0, st, torus::to_turn(theta).value());
}

template <class Number>
double tau_spectral_covariance(const model::SkewParams<Number>& p, const BasicTurn<Number>& tau,
                               std::int64_t block) {
  const auto [lo, hi] = walk_sites(block);
  const auto base = operators::wbeta_pattern(gauge::beta_function(p), p.a, p.b);
  const auto moved = operators::wbeta_pattern(gauge::beta_function(p, tau), p.a, p.b);
  const EigenangleSet s0 = eigenangles(reflecting_compression(base, lo, hi));
  const EigenangleSet st = eigenangles(reflecting_compression(moved, lo, hi));
  const double shift = -torus::to_turn(tau).value() / 2.0;
  return shift_mismatch(s0, st, shift);
}

double weyl_sigma_min(const BandedOperator& op, Complex z, const Window& window) {
  if (window.size() < 32) throw operators::UsageError("weyl_certify: window must hold at least 32 sites");
  const Window rows = window.grown(BandedOperator::half_bandwidth);
  if (!(op.window().lo <= rows.lo && rows.hi <= op.window().hi))
    throw operators::UsageError("weyl_certify: operator does not cover the row range");
  DenseMatrix r(static_cast<std::size_t>(rows.size()), static_cast<std::size_t>(window.size()));
  for (std::int64_t i = rows.lo; i < rows.hi; ++i)
    for (std::int64_t j = std::max(window.lo, i - 2); j < std::min(window.hi, i + 3); ++j) {
      Complex v = op.at(i, j);
      if (i == j) v -= z;
      r(static_cast<std::size_t>(i - rows.lo), static_cast<std::size_t>(j - window.lo)) = v;
    }
  return numerics::smallest_singular(r);
}

CertRecord weyl_certify(const BandedOperator& op, double z_angle, const Window& window) {
  return {z_angle, window, weyl_sigma_min(op, torus::phase(Turn(z_angle)), window)};
}

CertRecord weyl_certify(const OperatorFactory& factory, double z_angle, const Window& window) {
  return weyl_certify(factory(window.grown(4)), z_angle, window);
}

std::vector<CertRecord> certify_grid(const OperatorFactory& factory, std::size_t grid_n, const Window& window,
                                     unsigned threads) {
  if (grid_n < 8) throw std::invalid_argument("certify_grid: grid_n must be at least 8");
  const BandedOperator op = factory(window.grown(4));
  std::vector<CertRecord> out(grid_n);
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t k = first; k < grid_n; k += stride)
      out[k] = weyl_certify(op, static_cast<double>(k) / static_cast<double>(grid_n), window);
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(grid_n)));
  if (threads == 1) {
    work(0, 1);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        work(t, threads);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

template double rotation_covariance_check(const model::WalkParams<double>&, const Turn&, std::int64_t);
template double rotation_covariance_check(const model::WalkParams<torus::Rational>&, const torus::RationalTurn&,
                                          std::int64_t);
template double tau_spectral_covariance(const model::SkewParams<double>&, const Turn&, std::int64_t);
template double tau_spectral_covariance(const model::SkewParams<torus::Rational>&, const torus::RationalTurn&,
                                        std::int64_t);

}  // namespace cmvspec::spectral
