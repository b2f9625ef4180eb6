#pragma once

// Diagonal unitary conjugations Λ = diag(e^{2πiλ_j}) between the five-diagonal
// operators, the β_j sequence, and the identity checks built on them.
//
// Half-angle convention: every λ and β is half of a lift taken modulo 2, where
// the lift is the integer combination of the [0,1) representatives of x and ω
// (plus τ for shifted points). Using one convention for ψ and β makes
// ψ_j − ψ_{j−1} = −2β_{j−1} hold modulo 2, so the halved phases agree exactly.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmvspec/model.hpp"
#include "cmvspec/operators.hpp"
#include "cmvspec/torus.hpp"

namespace cmvspec::gauge {

using operators::BandedOperator;
using operators::Window;
using torus::BasicTurn;
using torus::TorusPoint;
using torus::Turn;
using torus::TwoTurn;

/// Raised when two operators are not related by a diagonal gauge.
class GaugeError : public std::runtime_error {
public:
  GaugeError(const std::string& what, double residual)
      : std::runtime_error(what), residual_{residual} {}
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

/// λ_i for every index of a window; D = diag(e^{2πiλ_i}).
struct GaugePhases {
  Window window;
  std::vector<Turn> lambda;

  Turn at(std::int64_t i) const;
  static GaugePhases zero(const Window& w);
};

/// β_j = −½(x_{d−1} + Σ_{k=2}^{d−1} binom(j,k−1) x_{d−k} + binom(j,d−1) ω), from explicit lifts.
template <class Number>
BasicTurn<Number> beta_j(std::span<const TwoTurn<Number>> x_minus_lift, const TwoTurn<Number>& omega_lift,
                         std::int64_t j);

/// β_j with the canonical lifts of x_− = (x_1, …, x_{d−1}) and ω.
template <class Number>
BasicTurn<Number> beta_j(const TorusPoint<Number>& x_minus, const BasicTurn<Number>& omega,
                         std::int64_t j);

/// λ_{2j} = ψ_j/2, λ_{2j+1} = −ψ_j/2 for j = j_first, …; the window is [2·j_first, 2·(j_first + n)).
template <class Number>
std::vector<BasicTurn<Number>> lambda_values(std::span<const TwoTurn<Number>> psi_lifts);

GaugePhases lambda_from_psi(std::span<const TwoTurn<double>> psi_lifts, std::int64_t j_first);

/// Entry (i, j) multiplied by e^{2πi(λ_i − λ_j)}: the operator D·A·D⁻¹.
BandedOperator conjugate(const BandedOperator& op, const GaugePhases& g);

/**
 * @brief Find λ with conjugate(A, λ) = B by propagating λ_i − λ_j = arg(B_ij / A_ij).
 *
 * One λ per connected component of the entry graph is anchored to 0 (the
 * smallest index of the component).
 *
 * @throws GaugeError on a sparsity or modulus mismatch, or when some cycle is
 *         inconsistent so that the achieved residual exceeds `tol`.
 */
GaugePhases solve_gauge(const BandedOperator& a, const BandedOperator& b, double tol);

struct ResidualReport {
  std::string identity;
  Window window;
  double max_residual = 0.0;
  double tolerance = 0.0;
  std::string anchor_convention;

  bool passed() const noexcept { return max_residual <= tolerance; }
};

inline constexpr double identity_tolerance = 1e-10;

/// Builds W and E (electric coefficients under `conv`) on `window`, solves for Λ
/// and reports the interior residual of Λ·W·Λ⁻¹ − E. Propagates GaugeError.
template <class Number>
ResidualReport verify_lemma1(const model::WalkParams<Number>& p, const Window& window,
                             model::ElectricConvention conv = {false, true});

/// Builds E^d, D from the ψ lifts and W_β from β_j; reports the interior residual of D·E·D⁻¹ − W_β.
template <class Number>
ResidualReport verify_section4(const model::SkewParams<Number>& p, const Window& window);

/// Entrywise residual of W_β(x_− + τ e_{d−1}) − e^{−πiτ}·W_β(x_−) over the whole window.
template <class Number>
double tau_shift_covariance(const model::SkewParams<Number>& p, const BasicTurn<Number>& tau,
                            const Window& window);

/// β lifted for the point with τ added to x_{d−1} (τ's [0,1) representative added to the lift).
template <class Number>
std::function<Turn(std::int64_t)> beta_function(const model::SkewParams<Number>& p,
                                                const BasicTurn<Number>& tau = BasicTurn<Number>());

/// E^d on a window: the CMV product of the skew source when a, b are real and
/// non-negative, the general-coin display form otherwise.
template <class Number>
BandedOperator build_skew_cmv(const model::SkewParams<Number>& p, const Window& window);

/// D for the skew model on a window, λ from the ψ lifts.
template <class Number>
GaugePhases skew_gauge(const model::SkewParams<Number>& p, const Window& window);

std::string to_json(const ResidualReport& r);

#define CMVSPEC_GAUGE_EXTERN(N)                                                                       \
  extern template BasicTurn<N> beta_j(std::span<const TwoTurn<N>>, const TwoTurn<N>&, std::int64_t);  \
  extern template BasicTurn<N> beta_j(const TorusPoint<N>&, const BasicTurn<N>&, std::int64_t);       \
  extern template std::vector<BasicTurn<N>> lambda_values(std::span<const TwoTurn<N>>);               \
  extern template ResidualReport verify_lemma1(const model::WalkParams<N>&, const Window&,            \
                                               model::ElectricConvention);                            \
  extern template ResidualReport verify_section4(const model::SkewParams<N>&, const Window&);         \
  extern template double tau_shift_covariance(const model::SkewParams<N>&, const BasicTurn<N>&,       \
                                              const Window&);                                         \
  extern template std::function<Turn(std::int64_t)> beta_function(const model::SkewParams<N>&,        \
                                                                  const BasicTurn<N>&);               \
  extern template BandedOperator build_skew_cmv(const model::SkewParams<N>&, const Window&);          \
  extern template GaugePhases skew_gauge(const model::SkewParams<N>&, const Window&);

CMVSPEC_GAUGE_EXTERN(double)
CMVSPEC_GAUGE_EXTERN(torus::Rational)
#undef CMVSPEC_GAUGE_EXTERN

}  // namespace cmvspec::gauge
