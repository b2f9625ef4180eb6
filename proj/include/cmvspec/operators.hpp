#pragma once

// Five-diagonal operators on finite windows of ℤ: the electric walk, the
// extended CMV matrix (two independent builders) and W_β.
//
// Every operator here has the same "coin pattern": row pair (2j, 2j+1) reads
// only columns 2j−1 and 2j+2. Index convention for the walk: δ_n^+ ↦ 2n+1,
// δ_n^- ↦ 2n.

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmvspec/model.hpp"
#include "cmvspec/numerics.hpp"
#include "cmvspec/torus.hpp"

namespace cmvspec::operators {

using numerics::Complex;
using numerics::DenseMatrix;
using torus::Turn;

class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Half-open interval [lo, hi) of ℤ.
struct Window {
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  std::int64_t size() const noexcept { return hi - lo; }
  bool contains(std::int64_t i) const noexcept { return lo <= i && i < hi; }
  /// Both endpoints even, so every row pair (2j, 2j+1) and every L-block is whole.
  bool aligned() const noexcept { return lo % 2 == 0 && hi % 2 == 0; }
  Window grown(std::int64_t by) const { return {lo - by, hi + by}; }

  /// Aligned window of `n` sites (n even) around 0.
  static Window centered(std::int64_t n);

  friend bool operator==(const Window&, const Window&) = default;
};

/**
 * @brief Complex operator with entries only on offsets −2…+2, restricted to a window.
 *
 * Entries whose column leaves the window are dropped, so rows within two sites
 * of an edge are truncated.
 */
class BandedOperator {
public:
  static constexpr int half_bandwidth = 2;
  using Band = std::array<Complex, 2 * half_bandwidth + 1>;

  BandedOperator() = default;
  BandedOperator(Window window, std::string provenance);

  const Window& window() const noexcept { return window_; }
  const std::string& provenance() const noexcept { return provenance_; }

  /// A(i, j); zero outside the band or the window.
  Complex at(std::int64_t i, std::int64_t j) const;
  /// @throws UsageError when (i, j) is outside the band or the window.
  void set(std::int64_t i, std::int64_t j, Complex v);

  const Band& row_band(std::int64_t i) const { return band_.at(static_cast<std::size_t>(i - window_.lo)); }

  friend bool operator==(const BandedOperator& a, const BandedOperator& b) {
    return a.window_ == b.window_ && a.band_ == b.band_;
  }

private:
  Window window_;
  std::vector<Band> band_;
  std::string provenance_;
};

/// Phases (turns) of the four coin entries of row pair j:
/// (2j,2j−1) = b·e(p), (2j,2j+2) = a·e(q), (2j+1,2j−1) = a*·e(r), (2j+1,2j+2) = −b*·e(s).
struct CoinPhases {
  Turn p, q, r, s;
};

struct CoinPattern {
  Complex a;
  Complex b;
  std::function<CoinPhases(std::int64_t j)> phases;
  std::string provenance;
  /// Global factor applied to every entry.
  Complex scale{1.0, 0.0};
};

/// W_{ω,θ,η,a,b}: all four phases equal θ + η + jω.
template <class Number>
CoinPattern walk_pattern(const model::WalkParams<Number>& p);

/// W_β: p = r = β_{j−1}, q = s = β_j.
CoinPattern wbeta_pattern(std::function<Turn(std::int64_t)> beta, Complex a, Complex b);

/// The skew CMV in the general-coin form (b e^{−2πiψ_j}, a, a*, −b* e^{2πiψ_j}).
/// Coincides with the CMV builders when a, b are real and non-negative.
template <class Number>
CoinPattern skew_display_pattern(const model::SkewParams<Number>& p);

/// @throws UsageError when the window is not aligned or shorter than 4.
BandedOperator build_coin_pattern(const CoinPattern& pattern, const Window& window);

template <class Number>
BandedOperator build_walk(const model::WalkParams<Number>& p, const Window& window) {
  p.validate();
  return build_coin_pattern(walk_pattern(p), window);
}

BandedOperator build_wbeta(std::function<Turn(std::int64_t)> beta, Complex a, Complex b,
                           const Window& window);

/// E = L·M, multiplying the block-diagonal factors restricted to the window.
BandedOperator build_cmv_product(const model::VerblunskySource& src, const Window& window);

/// E assembled entry by entry from the five-diagonal closed form.
BandedOperator build_cmv_direct(const model::VerblunskySource& src, const Window& window);

std::vector<Complex> apply(const BandedOperator& op, std::span<const Complex> v);

DenseMatrix densify(const BandedOperator& op);

/// Inverse of densify. @throws UsageError when m has entries outside the band.
BandedOperator from_dense(const DenseMatrix& m, const Window& window, std::string provenance = "dense");

/// max |(AᴴA − I)_ij| and |(AAᴴ − I)_ij| over indices at least `margin` sites from both edges.
double interior_unitarity_residual(const BandedOperator& op, std::int64_t margin = 4);

/// max |A_ij − B_ij| over rows and columns at least `margin` sites from both edges.
double interior_difference(const BandedOperator& a, const BandedOperator& b, std::int64_t margin = 4);

/// max |A_ij − B_ij| over the whole (shared) window.
double max_difference(const BandedOperator& a, const BandedOperator& b);

/// Entrywise map, preserving the window.
BandedOperator transform(const BandedOperator& op,
                         const std::function<Complex(std::int64_t, std::int64_t, Complex)>& f,
                         std::string provenance);

extern template CoinPattern walk_pattern(const model::WalkParams<double>&);
extern template CoinPattern walk_pattern(const model::WalkParams<torus::Rational>&);
extern template CoinPattern skew_display_pattern(const model::SkewParams<double>&);
extern template CoinPattern skew_display_pattern(const model::SkewParams<torus::Rational>&);

}  // namespace cmvspec::operators
