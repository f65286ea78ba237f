#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "bm/errors.hpp"
#include "bm/rng.hpp"

namespace bm::mc {

struct McPlan {
    long J = 0;         // stick-breaking truncation
    long C = 0;         // replications
    long N = 0;         // empirical-process grid size (second variant)
    uint64_t seed = 0;
    int streams = 1;    // worker hint; results never depend on it
};

struct StickLengths {
    std::vector<double> lengths;  // L_1..L_J, all in (0,1), partial sums < 1
};

struct McEstimate {
    double x = 0;
    double estimate = 0;
    double ci_low = 0;
    double ci_high = 0;
    long C = 0;
    long J = 0;
};

struct BridgePath {
    std::vector<double> grid;      // dyadic times 0..1, mesh 2^-m
    std::vector<double> values;    // bridge, pinned to 0 at both ends
    std::vector<double> majorant;  // least concave majorant on the grid
    double max_gap = 0;            // max(majorant - values)
};

// Truncation level from the stick-breaking tail bound:
// J0 = floor(-log(x^2 eps^2 / 2) / log 2) + 1, clamped to >= 1.
// Requires 0 < eps < 1/4.
long j0_bound(double x, double eps);

// (1 - p)-quantile helper for the CLT interval (Acklam's approximation,
// relative error ~1e-9).
double inverse_normal_cdf(double p);

// L_1 = U_1, L_j = U_j prod_{i<j} (1 - U_i).
template <class Rng>
StickLengths sample_sticks(long J, Rng& rng) {
    if (J < 1) throw DomainError("montecarlo: sample_sticks requires J >= 1");
    StickLengths out;
    out.lengths.reserve(static_cast<size_t>(J));
    double rem = 1.0;
    for (long j = 0; j < J; ++j) {
        const double u = rng.uniform01();
        out.lengths.push_back(rem * u);
        rem *= 1.0 - u;
    }
    return out;
}

// V_N = sqrt(N) { max_i (i/N - U_(i)) - min_i ((i-1)/N - U_(i)) },
// the range of the uniform empirical process on one sample of size N.
template <class Rng>
double sample_vn_into(std::vector<double>& buf, long N, Rng& rng) {
    if (N < 1) throw DomainError("montecarlo: sample_vn requires N >= 1");
    buf.resize(static_cast<size_t>(N));
    for (auto& u : buf) u = rng.uniform01();
    std::sort(buf.begin(), buf.end());
    const double n = static_cast<double>(N);
    double hi = -1e300, lo = 1e300;
    for (long i = 1; i <= N; ++i) {
        const double ui = buf[static_cast<size_t>(i) - 1];
        hi = std::max(hi, static_cast<double>(i) / n - ui);
        lo = std::min(lo, (static_cast<double>(i) - 1.0) / n - ui);
    }
    return std::sqrt(n) * (hi - lo);
}

template <class Rng>
double sample_vn(long N, Rng& rng) {
    std::vector<double> buf;
    return sample_vn_into(buf, N, rng);
}

// M_{J,N} = max_j sqrt(L_j) V_N^(j); sticks first, then J times N uniforms,
// all from the same stream.
template <class Rng>
double sample_m(long J, long N, Rng& rng) {
    StickLengths sticks = sample_sticks(J, rng);
    std::vector<double> buf;
    double best = 0.0;
    for (long j = 0; j < J; ++j) {
        const double v = sample_vn_into(buf, N, rng);
        best = std::max(best, std::sqrt(sticks.lengths[static_cast<size_t>(j)]) * v);
    }
    return best;
}

// F^(x) = (1/C) sum_c prod_j F3(x / sqrt(L_j^(c))) with J = j0_bound(x, eps)
// and the asymmetric CLT interval [F^ - 2 eps - z/sqrt(C), F^ + z/sqrt(C)].
// Replication c always draws from stream (seed, c); the reduction runs over
// fixed-size chunks in index order, so output is byte-stable in `threads`.
McEstimate mc_cdf(double x, double eps, long C, double alpha, uint64_t seed, int threads = 1);

// C draws of M_{J,N}, one stream per replication.
std::vector<double> sample_m_batch(long J, long N, long C, uint64_t seed, int threads = 1);

// Least concave majorant of the discrete graph (t_i, v_i); t strictly
// increasing. Returns the majorant values on the same grid.
std::vector<double> least_concave_majorant(const std::vector<double>& t,
                                           const std::vector<double>& v);

// Brownian bridge by dyadic midpoint refinement at mesh 2^-m (4 <= m <= 20)
// plus its concave majorant.
BridgePath simulate_bridge_majorant(int mesh_exponent, RngStream& rng);

}  // namespace bm::mc
