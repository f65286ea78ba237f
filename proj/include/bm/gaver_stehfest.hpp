#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "bm/precision.hpp"

namespace bm::gs {

// Inversion weights xi_1..xi_2K, kept exact until the final weighted sum.
struct GSWeights {
    int K = 0;
    std::vector<ExactRational> xi;  // xi[k-1] is the weight for node k
    double max_log2_xi = 0.0;       // magnitude of the largest weight
};

inline constexpr int kMaxK = 512;

// xi_k = (-1)^(k+K)/K! * sum_{j=floor((k+1)/2)}^{min(k,K)}
//        j^(K+1) C(K,j) C(2j,j) C(j,k-j),  exact rationals.
GSWeights gs_weights(int K);

// sum_k xi_k / k in exact arithmetic; equals 1 for well-formed weights.
ExactRational weight_identity_sum(const GSWeights& w);

// Context floor for running the inversion at a given K: ceil(3.5K) + 64.
// The weighted sum cancels roughly log2(sum |xi_k|/k) bits, so anything
// below this is guaranteed garbage and is rejected outright.
long min_bits_for(int K);

// Textual cache, one line per weight: "K k numerator/denominator".
void save_weights(const GSWeights& w, std::ostream& os);

// Parses a cache stream and revalidates the sum xi_k/k = 1 identity
// before returning; throws FormatError otherwise.
GSWeights load_weights(std::istream& is);

// Deterministic real-valued Laplace transform, evaluated at s > 0.
using TransformFn = std::function<HPReal(const HPReal& s, const PrecisionContext& ctx)>;

// f~(t) = (ln 2 / t) * sum_{k=1}^{2K} xi_k g(k ln2 / t).
// Transform evaluations may run on `threads` workers; the weighted sum is
// always taken in ascending k, so the result does not depend on the
// worker count. Throws PrecisionError when ctx.bits() < min_bits_for(K).
HPReal gs_invert(const TransformFn& g, const HPReal& t, const GSWeights& w,
                 const PrecisionContext& ctx, int threads = 1);

}  // namespace bm::gs
