#include "bm/montecarlo.hpp"

#include <cmath>
#include <string>

#include "bm/parallel.hpp"
#include "bm/specfun.hpp"

namespace bm::mc {

long j0_bound(double x, double eps) {
    if (!(x > 0)) throw DomainError("montecarlo: j0_bound requires x > 0");
    if (!(eps > 0 && eps < 0.25))
        throw DomainError("montecarlo: j0_bound requires 0 < eps < 1/4");
    // -log(x^2 eps^2 / 2) / log 2, in log form so tiny eps cannot underflow
    const double v = (std::log(2.0) - 2.0 * std::log(x) - 2.0 * std::log(eps)) / std::log(2.0);
    const long j0 = static_cast<long>(std::floor(v)) + 1;
    return std::max(1L, j0);
}

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("montecarlo: inverse_normal_cdf requires 0 < p < 1");
    // Acklam's rational approximation with one Halley refinement step.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Halley step against erfc.
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * 3.14159265358979323846) * std::exp(x * x / 2.0);
    x = x - u / (1.0 + x * u / 2.0);
    return x;
}

namespace {

constexpr long kChunk = 1024;  // reduction granularity, independent of threads

}  // namespace

McEstimate mc_cdf(double x, double eps, long C, double alpha, uint64_t seed, int threads) {
    if (!(x > 0)) throw DomainError("montecarlo: mc_cdf requires x > 0");
    if (C < 1) throw DomainError("montecarlo: mc_cdf requires C >= 1");
    if (!(alpha > 0 && alpha < 1))
        throw DomainError("montecarlo: mc_cdf requires 0 < alpha < 1");
    const long J = j0_bound(x, eps);
    const double f3_tol = eps / (10.0 * static_cast<double>(J));

    const long nchunks = (C + kChunk - 1) / kChunk;
    std::vector<double> partial(static_cast<size_t>(nchunks), 0.0);
    parallel_for(static_cast<size_t>(nchunks), threads, [&](size_t ci) {
        const long lo = static_cast<long>(ci) * kChunk;
        const long hi = std::min(C, lo + kChunk);
        double acc = 0.0;
        for (long c = lo; c < hi; ++c) {
            RngStream rng(seed, static_cast<uint64_t>(c));
            double prod = 1.0;
            double rem = 1.0;
            for (long j = 0; j < J; ++j) {
                const double u = rng.uniform01();
                const double len = rem * u;
                rem *= 1.0 - u;
                prod *= specfun::f3_cdf_double(x / std::sqrt(len), f3_tol);
                if (prod == 0.0) break;
            }
            acc += prod;
        }
        partial[ci] = acc;
    });
    double sum = 0.0;
    for (double pcs : partial) sum += pcs;

    const double est = sum / static_cast<double>(C);
    const double z = inverse_normal_cdf(1.0 - alpha / 2.0);
    const double half = z / std::sqrt(static_cast<double>(C));
    McEstimate out;
    out.x = x;
    out.estimate = est;
    out.ci_low = est - 2.0 * eps - half;
    out.ci_high = est + half;
    out.C = C;
    out.J = J;
    return out;
}

std::vector<double> sample_m_batch(long J, long N, long C, uint64_t seed, int threads) {
    if (J < 1 || N < 1 || C < 1)
        throw DomainError("montecarlo: sample_m_batch requires J, N, C >= 1");
    std::vector<double> draws(static_cast<size_t>(C), 0.0);
    const long nchunks = (C + kChunk - 1) / kChunk;
    parallel_for(static_cast<size_t>(nchunks), threads, [&](size_t ci) {
        const long lo = static_cast<long>(ci) * kChunk;
        const long hi = std::min(C, lo + kChunk);
        for (long c = lo; c < hi; ++c) {
            RngStream rng(seed, static_cast<uint64_t>(c));
            draws[static_cast<size_t>(c)] = sample_m(J, N, rng);
        }
    });
    return draws;
}

std::vector<double> least_concave_majorant(const std::vector<double>& t,
                                           const std::vector<double>& v) {
    const size_t n = t.size();
    if (n != v.size() || n < 2)
        throw DomainError("montecarlo: majorant needs matching grids of >= 2 points");
    for (size_t i = 1; i < n; ++i)
        if (!(t[i] > t[i - 1]))
            throw DomainError("montecarlo: majorant grid must be strictly increasing");

    // Upper hull, monotone-chain scan: keep only clockwise turns.
    std::vector<size_t> hull;
    hull.reserve(n);
    auto cross = [&](size_t a, size_t b, size_t c) {
        return (t[b] - t[a]) * (v[c] - v[a]) - (v[b] - v[a]) * (t[c] - t[a]);
    };
    for (size_t i = 0; i < n; ++i) {
        while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), i) >= 0.0)
            hull.pop_back();
        hull.push_back(i);
    }

    std::vector<double> maj(n, 0.0);
    for (size_t s = 0; s + 1 < hull.size(); ++s) {
        const size_t a = hull[s], b = hull[s + 1];
        maj[a] = v[a];
        const double slope = (v[b] - v[a]) / (t[b] - t[a]);
        for (size_t i = a + 1; i < b; ++i) maj[i] = v[a] + slope * (t[i] - t[a]);
    }
    maj[hull.back()] = v[hull.back()];
    return maj;
}

BridgePath simulate_bridge_majorant(int mesh_exponent, RngStream& rng) {
    if (mesh_exponent < 4 || mesh_exponent > 20)
        throw DomainError("montecarlo: mesh exponent must be in [4, 20]");
    const long n = 1L << mesh_exponent;
    BridgePath out;
    out.grid.resize(static_cast<size_t>(n) + 1);
    out.values.assign(static_cast<size_t>(n) + 1, 0.0);
    for (long i = 0; i <= n; ++i)
        out.grid[static_cast<size_t>(i)] = static_cast<double>(i) / static_cast<double>(n);

    // Midpoint refinement, coarse levels first, left to right within a level.
    // Conditional on both ends, the midpoint of a span of length L is
    // normal with mean the average and variance L/4.
    for (long step = n; step > 1; step /= 2) {
        const long half = step / 2;
        const double sd = 0.5 * std::sqrt(static_cast<double>(step) / static_cast<double>(n));
        for (long i = half; i < n; i += step) {
            const size_t idx = static_cast<size_t>(i);
            out.values[idx] = 0.5 * (out.values[idx - static_cast<size_t>(half)] +
                                     out.values[idx + static_cast<size_t>(half)]) +
                              sd * rng.normal();
        }
    }

    out.majorant = least_concave_majorant(out.grid, out.values);
    double gap = 0.0;
    for (size_t i = 0; i < out.values.size(); ++i)
        gap = std::max(gap, out.majorant[i] - out.values[i]);
    out.max_gap = gap;
    return out;
}

}  // namespace bm::mc
