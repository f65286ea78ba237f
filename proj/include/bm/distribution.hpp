#pragma once

#include <optional>
#include <vector>

#include "bm/gaver_stehfest.hpp"
#include "bm/precision.hpp"

namespace bm::dist {

// One evaluation of the truncated bridge transform
//   G_N(t) = exp(-H_N(t)),
//   H_N(t) = 4 * sum_{n=1}^{N} (u_n K1(u_n) - K0(u_n)),  u_n = 2 sqrt(2) n t.
struct GEvaluation {
    HPReal t;
    HPReal value;
    long n_terms = 0;   // N actually used
    HPReal tail_bound;  // 4 sqrt(pi/2) exp(-cN/2) / (1 - exp(-c/2)), c = 2 sqrt(2) t
};

inline constexpr long kGTermCap = 10000000;

// Adaptive mode (max_n empty): N is the smallest count whose tail bound
// drops to eps, raised when needed so every dropped term is positive and
// the bound actually applies (u_{N+1} >= 0.6). Fixed mode: N = *max_n.
GEvaluation g_transform(const HPReal& t, const HPReal& eps, std::optional<long> max_n,
                        const PrecisionContext& ctx);

// Worst-case single truncation level for the inversion sum:
// N0 = floor( 1/(sqrt(2 ln2) x) * { ln(1/(eps(1-exp(-sqrt(2 ln2) x))))
//      + (2K+1) ln K + 3K + 2 } ) + 1.
long n0_bound(const HPReal& x, int K, const HPReal& eps);

struct CdfPointDiagnostic {
    int k = 0;
    long n_terms = 0;
    HPReal tail_bound;
};

struct CdfEvaluation {
    HPReal x;
    int K = 0;
    long N_used = 0;  // largest per-node truncation level
    HPReal value;     // clamped to [0, 1]
    HPReal eps_budget;
    bool clamped = false;
    bool below_validated_range = false;  // x < 0.33, where the left tail gets soft
    std::vector<CdfPointDiagnostic> points;
};

// F~(x) = sum_{k=1}^{2K} (xi_k / k) G_N(sqrt(k ln2) x). The per-node
// truncation budget splits eps so that sum_k (|xi_k|/k) eps_k = eps; the
// 2K transform evaluations are independent and may run on `threads`
// workers, with the final sum in ascending k.
CdfEvaluation cdf(const HPReal& x, int K, const HPReal& eps, std::optional<long> fixed_n,
                  const PrecisionContext& ctx, const gs::GSWeights* weights = nullptr,
                  int threads = 1);

struct QuantileResult {
    double p = 0;
    HPReal x;
    HPReal residual;  // |F~(x) - p| at termination
    int iterations = 0;
};

// Bisection for F~(x) = p starting from the bracket [0.33, 2.54]; the
// upper end doubles and the lower end halves its gap to 0.05 until the
// bracket straddles p. Stops when |F~(x) - p| < threshold.
QuantileResult quantile(double p, const HPReal& threshold, int K, const HPReal& eps,
                        const PrecisionContext& ctx, const gs::GSWeights* weights = nullptr,
                        int threads = 1);

}  // namespace bm::dist
