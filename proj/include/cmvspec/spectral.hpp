#pragma once

// Finite-volume spectral analysis: unitary compressions, eigenangles, cyclic
// gap statistics, covariance checks and Weyl-criterion certification.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cmvspec/model.hpp"
#include "cmvspec/numerics.hpp"
#include "cmvspec/operators.hpp"

namespace cmvspec::spectral {

using numerics::DenseMatrix;
using operators::BandedOperator;
using operators::CoinPattern;
using operators::Window;
using torus::BasicTurn;
using torus::Turn;

/// A compression failed its unitarity gate (wrong cut placement or bad input).
class StructuralError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr double compression_unitarity_tolerance = 1e-12;
inline constexpr double eigenangle_unitarity_gate = 1e-10;
inline constexpr double unimodularity_tolerance = 1e-8;

struct EigenangleSet {
  /// Sorted turns in [0, 1).
  std::vector<double> angles;
  /// max ||λ| − 1| over the spectrum.
  double max_modulus_defect = 0.0;
  /// max ‖Uv − λv‖₂ and the bound the solver guaranteed.
  double max_residual = 0.0;
  double residual_tolerance = 0.0;

  std::size_t size() const noexcept { return angles.size(); }
};

struct GapStats {
  double max_gap = 0.0;
  double mean_gap = 0.0;
  std::size_t n = 0;
  /// Angle where the largest gap opens (the eigenangle just below it).
  double max_gap_start = 0.0;
};

struct CertRecord {
  double z_angle = 0.0;
  Window window;
  double sigma_min = 0.0;

  std::int64_t window_size() const noexcept { return window.size(); }
};

/// Cut sites and enclosed window for a compression of `n` sites around 0.
struct Cuts {
  std::int64_t lo;
  std::int64_t hi;
  Window enclosed() const { return {lo + 1, hi + 1}; }
};
Cuts centered_cuts(std::int64_t n);

/**
 * @brief The decoupled block between two odd cut sites.
 *
 * Sets α = 1 at both cuts (ρ = 0), rebuilds E on [cut_lo + 1, cut_hi + 1) and
 * checks ‖UᴴU − I‖_max ≤ 1e-12.
 *
 * @throws operators::UsageError on even cuts or cut_hi − cut_lo < 8.
 * @throws StructuralError when the block is not unitary.
 */
DenseMatrix unitary_compression(const model::VerblunskySource& src, std::int64_t cut_lo, std::int64_t cut_hi);

/// The block between two cuts of a source whose overrides are already in
/// place, with the same unitarity check. @throws StructuralError.
DenseMatrix checked_compression(const model::VerblunskySource& src, std::int64_t cut_lo, std::int64_t cut_hi);

/**
 * @brief Finite unitary section of a coin-pattern operator on walk sites [site_lo, site_hi).
 *
 * The conditional shift is made reflecting at both ends: the outgoing column
 * at each edge is routed back into the edge row pair through the unused coin
 * slot, with the phase that slot carries. Scalar covariance of the pattern
 * (e.g. W(θ) = e^{2πiθ} W(0)) carries over exactly to the section.
 */
DenseMatrix reflecting_compression(const CoinPattern& pattern, std::int64_t site_lo, std::int64_t site_hi);

/// Sorted eigenangles of a unitary matrix. @throws StructuralError when ‖UᴴU − I‖ > 1e-10
/// or some ||λ| − 1| > 1e-8.
EigenangleSet eigenangles(const DenseMatrix& u);

/// Cyclic consecutive gaps. @throws std::invalid_argument for fewer than 2 angles.
GapStats gap_stats(const EigenangleSet& s);

/// Largest positional distance (on the circle) between `shifted` and `base`
/// moved by `shift`, after sorting and the best cyclic alignment.
double shift_mismatch(const EigenangleSet& base, const EigenangleSet& shifted, double shift);

/// Spectral form of W(θ) = e^{2πiθ} W(0) on a reflecting walk section of `block` sites.
template <class Number>
double rotation_covariance_check(const model::WalkParams<Number>& p, const BasicTurn<Number>& theta,
                                 std::int64_t block);

/// Spectral form of W_β(x + τe_{d−1}) = e^{−πiτ} W_β(x) on a reflecting section of `block` sites.
template <class Number>
double tau_spectral_covariance(const model::SkewParams<Number>& p, const BasicTurn<Number>& tau,
                               std::int64_t block);

/// Builds the full-line operator on any aligned window.
using OperatorFactory = std::function<BandedOperator(const Window&)>;

/// σ_min of (A − z) on vectors supported in `window` (rows: every index the band reaches).
/// Upper bound on dist(z, σ(A)) for the full-line normal operator A.
CertRecord weyl_certify(const OperatorFactory& factory, double z_angle, const Window& window);

/// Same, reusing a pre-built operator that covers window.grown(4).
CertRecord weyl_certify(const BandedOperator& op, double z_angle, const Window& window);

/// σ_min of the rectangular (A − z) block for an arbitrary complex z.
double weyl_sigma_min(const BandedOperator& op, numerics::Complex z, const Window& window);

/// weyl_certify at grid_n equispaced points e^{2πik/grid_n}; output in grid order.
std::vector<CertRecord> certify_grid(const OperatorFactory& factory, std::size_t grid_n, const Window& window,
                                     unsigned threads = 1);

template <class OmegaT>
struct SweepRow {
  OmegaT omega;
  EigenangleSet angles;
  GapStats gaps;
};

/// Eigenangles and gap statistics of `compress(ω)` for each ω, in input order.
template <class OmegaT, class Compress>
std::vector<SweepRow<OmegaT>> omega_sweep(std::span<const OmegaT> omegas, Compress&& compress) {
  std::vector<SweepRow<OmegaT>> out;
  out.reserve(omegas.size());
  for (const OmegaT& om : omegas) {
    EigenangleSet s = eigenangles(compress(om));
    GapStats g = gap_stats(s);
    out.push_back({om, std::move(s), g});
  }
  return out;
}

extern template double rotation_covariance_check(const model::WalkParams<double>&, const Turn&, std::int64_t);
extern template double rotation_covariance_check(const model::WalkParams<torus::Rational>&,
                                                 const torus::RationalTurn&, std::int64_t);
extern template double tau_spectral_covariance(const model::SkewParams<double>&, const Turn&, std::int64_t);
extern template double tau_spectral_covariance(const model::SkewParams<torus::Rational>&,
                                               const torus::RationalTurn&, std::int64_t);

}  // namespace cmvspec::spectral
