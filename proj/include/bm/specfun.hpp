#pragma once

#include "bm/precision.hpp"

namespace bm::specfun {

struct BesselPair {
    HPReal argument;
    HPReal k0;
    HPReal k1;
};

// Modified Bessel functions K0(x), K1(x) for x > 0 by the convergent
// ascending series, run with enough guard bits to absorb the exp(x)-scale
// cancellation between the log term and the power series. Results carry
// relative error <= 2^(8-bits) at the context precision.
BesselPair bessel_k01(const HPReal& x, const PrecisionContext& ctx);

// u*K1(u) - K0(u), the exponent factor of the bridge transform, with
// absolute error <= tol. When sqrt(pi/2)*sqrt(u)*exp(-u) < tol already,
// returns 0 without evaluating any Bessel series.
HPReal bessel_term(const HPReal& x, const PrecisionContext& ctx, const HPReal& tol);

// u*K1(u) - K0(u) changes sign at u ~ 0.59505; it is guaranteed positive
// (and capped by the sqrt(pi/2)*sqrt(u)*exp(-u) bound) only above this.
inline constexpr double kBesselTermPositiveAbove = 0.6;

struct F3Value {
    HPReal x;
    HPReal value;      // clamped to [0, 1]
    long terms_used;   // series terms actually summed
    HPReal tail_bound; // geometric bound on the dropped tail
};

// Cdf of the maximum of a normalized Brownian excursion,
//   F3(x) = 1 - 2 * sum_{n>=1} (4 n^2 x^2 - 1) exp(-2 n^2 x^2),
// truncated at the first n whose tail bound 2 exp(-(n+1)x^2)/(1-exp(-x^2))
// drops below tol. Throws ConvergenceError when that would take more than
// 10^6 terms (very small x).
F3Value f3_cdf(const HPReal& x, const HPReal& tol, const PrecisionContext& ctx);

inline constexpr long kF3TermCap = 1000000;

// Double-precision path for the Monte Carlo estimators; same truncation rule.
double f3_cdf_double(double x, double tol);

namespace detail {
// Evaluation at an explicit output precision; test hook for the guard-bit
// audit (out_bits may sit below the context floor). When ctx is null the
// Euler constant comes from MPFR's own cache.
void bessel_k01_prec(mpfr_srcptr x, long out_bits, mpfr_ptr k0_out, mpfr_ptr k1_out,
                     const PrecisionContext* ctx = nullptr);
}  // namespace detail

}  // namespace bm::specfun
