#include "bm/distribution.hpp"

#include <cmath>
#include <string>

#include "bm/parallel.hpp"
#include "bm/specfun.hpp"

namespace bm::dist {

namespace {

constexpr double kLn2 = 0.6931471805599453;

// tail(N) = 4 sqrt(pi/2) exp(-c N / 2) / (1 - exp(-c/2)), rounded up.
HPReal tail_bound_at(const HPReal& c, long n) {
    const long p = 96;
    HPReal half_c(p), num(p), den(p);
    mpfr_div_ui(half_c.raw(), c.raw(), 2, MPFR_RNDU);
    mpfr_mul_si(num.raw(), half_c.raw(), -n, MPFR_RNDD);
    mpfr_exp(num.raw(), num.raw(), MPFR_RNDU);
    mpfr_neg(den.raw(), half_c.raw(), MPFR_RNDU);
    mpfr_exp(den.raw(), den.raw(), MPFR_RNDD);
    mpfr_ui_sub(den.raw(), 1, den.raw(), MPFR_RNDD);  // 1 - exp(-c/2), rounded down
    HPReal pi2(p);
    mpfr_const_pi(pi2.raw(), MPFR_RNDU);
    mpfr_div_ui(pi2.raw(), pi2.raw(), 2, MPFR_RNDU);
    mpfr_sqrt(pi2.raw(), pi2.raw(), MPFR_RNDU);
    mpfr_mul(num.raw(), num.raw(), pi2.raw(), MPFR_RNDU);
    mpfr_mul_ui(num.raw(), num.raw(), 4, MPFR_RNDU);
    mpfr_div(num.raw(), num.raw(), den.raw(), MPFR_RNDU);
    return num;
}

}  // namespace

GEvaluation g_transform(const HPReal& t, const HPReal& eps, std::optional<long> max_n,
                        const PrecisionContext& ctx) {
    if (t.sign() <= 0) throw DomainError("distribution: g_transform requires t > 0");
    if (eps.sign() <= 0) throw DomainError("distribution: g_transform requires eps > 0");

    const long P = ctx.working_bits();
    HPReal c(P);
    mpfr_sqrt_ui(c.raw(), 8, MPFR_RNDN);
    mpfr_mul(c.raw(), c.raw(), t.raw(), MPFR_RNDN);  // c = 2 sqrt(2) t
    const double cd = c.to_double();

    long N;
    if (max_n.has_value()) {
        N = *max_n;
        if (N < 1) throw DomainError("distribution: fixed N must be >= 1");
    } else {
        // Smallest N with tail(N) <= eps, from the log form first and then
        // verified exactly; the positivity floor keeps every dropped term
        // inside the one-sided bound's validity range.
        HPReal leps(64);
        mpfr_log(leps.raw(), eps.raw(), MPFR_RNDN);
        const double ln_eps = leps.to_double();
        const double ln1me = std::log(-std::expm1(-cd / 2));
        const double kLn4SqrtPi2 = std::log(4.0 * std::sqrt(3.14159265358979323846 / 2));
        double approx = (kLn4SqrtPi2 - ln1me - ln_eps) / (cd / 2);
        if (!(approx < static_cast<double>(kGTermCap)))
            throw ConvergenceError("distribution: g_transform cannot reach eps within " +
                                   std::to_string(kGTermCap) + " terms at t = " +
                                   t.to_decimal(6));
        N = std::max(1L, static_cast<long>(std::ceil(approx)));
        while (N > 1 && tail_bound_at(c, N - 1) <= eps) --N;
        while (tail_bound_at(c, N) > eps) {
            ++N;
            if (N > kGTermCap)
                throw ConvergenceError("distribution: g_transform cannot reach eps at t = " +
                                       t.to_decimal(6));
        }
        const long n_min = static_cast<long>(
            std::ceil(specfun::kBesselTermPositiveAbove / cd));
        if (N < n_min) N = n_min;
    }

    // Per-term evaluation budget; the short-circuit inside bessel_term
    // drops far-tail factors without touching the Bessel series.
    HPReal tol_term(96);
    {
        HPReal div(96);
        mpfr_set_ui(div.raw(), 32, MPFR_RNDN);
        mpfr_mul_ui(div.raw(), div.raw(), static_cast<unsigned long>(N) + 1, MPFR_RNDN);
        mpfr_div(tol_term.raw(), eps.raw(), div.raw(), MPFR_RNDD);
        if (tol_term.sign() <= 0) mpfr_set_d(tol_term.raw(), 1e-300, MPFR_RNDN);
    }

    HPReal h(P), u(P);
    mpfr_set_zero(h.raw(), 1);
    for (long n = 1; n <= N; ++n) {
        mpfr_mul_ui(u.raw(), c.raw(), static_cast<unsigned long>(n), MPFR_RNDN);
        HPReal term = specfun::bessel_term(u, ctx, tol_term);
        if (term.is_zero() && u.to_double() >= 1.0) break;  // bound decays from here on
        mpfr_add(h.raw(), h.raw(), term.raw(), MPFR_RNDN);
    }
    mpfr_mul_ui(h.raw(), h.raw(), 4, MPFR_RNDN);
    mpfr_neg(h.raw(), h.raw(), MPFR_RNDN);

    GEvaluation out{t, HPReal(ctx.bits()), N, tail_bound_at(c, N)};
    mpfr_exp(out.value.raw(), h.raw(), MPFR_RNDN);
    return out;
}

long n0_bound(const HPReal& x, int K, const HPReal& eps) {
    if (x.sign() <= 0) throw DomainError("distribution: n0_bound requires x > 0");
    if (K < 1) throw DomainError("distribution: n0_bound requires K >= 1");
    if (eps.sign() <= 0 || eps >= HPReal::from_long(1, 64))
        throw DomainError("distribution: n0_bound requires 0 < eps < 1");

    const long p = 256;
    HPReal a(p), t(p), acc(p);
    // a = sqrt(2 ln2) x
    mpfr_const_log2(a.raw(), MPFR_RNDN);
    mpfr_mul_ui(a.raw(), a.raw(), 2, MPFR_RNDN);
    mpfr_sqrt(a.raw(), a.raw(), MPFR_RNDN);
    mpfr_mul(a.raw(), a.raw(), x.raw(), MPFR_RNDN);
    // acc = ln(1/(eps (1 - exp(-a))))
    mpfr_neg(t.raw(), a.raw(), MPFR_RNDN);
    mpfr_exp(t.raw(), t.raw(), MPFR_RNDN);
    mpfr_ui_sub(t.raw(), 1, t.raw(), MPFR_RNDN);
    mpfr_mul(t.raw(), t.raw(), eps.raw(), MPFR_RNDN);
    mpfr_log(acc.raw(), t.raw(), MPFR_RNDN);
    mpfr_neg(acc.raw(), acc.raw(), MPFR_RNDN);
    // + (2K+1) ln K
    mpfr_set_ui(t.raw(), static_cast<unsigned long>(K), MPFR_RNDN);
    mpfr_log(t.raw(), t.raw(), MPFR_RNDN);
    mpfr_mul_ui(t.raw(), t.raw(), 2ul * static_cast<unsigned long>(K) + 1, MPFR_RNDN);
    mpfr_add(acc.raw(), acc.raw(), t.raw(), MPFR_RNDN);
    // + 3K + 2
    mpfr_add_ui(acc.raw(), acc.raw(), 3ul * static_cast<unsigned long>(K) + 2, MPFR_RNDN);
    mpfr_div(acc.raw(), acc.raw(), a.raw(), MPFR_RNDN);
    mpfr_floor(acc.raw(), acc.raw());
    long n0 = mpfr_get_si(acc.raw(), MPFR_RNDN) + 1;
    return n0;
}

CdfEvaluation cdf(const HPReal& x, int K, const HPReal& eps, std::optional<long> fixed_n,
                  const PrecisionContext& ctx, const gs::GSWeights* weights, int threads) {
    if (x.sign() <= 0) throw DomainError("distribution: cdf requires x > 0");
    if (eps.sign() <= 0 || eps >= HPReal::from_long(1, 64))
        throw DomainError("distribution: cdf requires 0 < eps < 1");
    if (ctx.bits() < gs::min_bits_for(K))
        throw PrecisionError("distribution: K = " + std::to_string(K) + " requires >= " +
                             std::to_string(gs::min_bits_for(K)) + " bits, context has " +
                             std::to_string(ctx.bits()));

    gs::GSWeights local;
    if (weights == nullptr) {
        local = gs::gs_weights(K);
        weights = &local;
    } else if (weights->K != K) {
        throw DomainError("distribution: weight table K mismatch");
    }

    const long P = ctx.working_bits();
    const size_t n = 2 * static_cast<size_t>(K);
    HPReal ln2 = ctx.ln2(P);
    std::vector<GEvaluation> evals(n);

    parallel_for(n, threads, [&](size_t i) {
        const int k = static_cast<int>(i) + 1;
        HPReal tk(P);
        mpfr_mul_ui(tk.raw(), ln2.raw(), static_cast<unsigned long>(k), MPFR_RNDN);
        mpfr_sqrt(tk.raw(), tk.raw(), MPFR_RNDN);
        mpfr_mul(tk.raw(), tk.raw(), x.raw(), MPFR_RNDN);  // t_k = sqrt(k ln2) x

        // Budget split: eps_k = eps * k / (2K |xi_k|), so that
        // sum_k (|xi_k|/k) eps_k = eps.
        HPReal eps_k(96), q(96);
        mpfr_set_q(q.raw(), weights->xi[i].abs().raw(), MPFR_RNDN);
        mpfr_mul_ui(q.raw(), q.raw(), 2ul * static_cast<unsigned long>(K), MPFR_RNDN);
        mpfr_div_ui(q.raw(), q.raw(), static_cast<unsigned long>(k), MPFR_RNDN);
        mpfr_div(eps_k.raw(), eps.raw(), q.raw(), MPFR_RNDD);
        evals[i] = g_transform(tk, eps_k, fixed_n, ctx);
    });

    const long guard = static_cast<long>(std::ceil(weights->max_log2_xi)) +
                       static_cast<long>(std::ceil(std::log2(2.0 * K))) + 32;
    const long Psum = ctx.working_bits(guard);
    HPReal sum(Psum), term(Psum);
    mpfr_set_zero(sum.raw(), 1);
    for (size_t i = 0; i < n; ++i) {
        mpfr_set_q(term.raw(), weights->xi[i].raw(), MPFR_RNDN);
        mpfr_div_ui(term.raw(), term.raw(), static_cast<unsigned long>(i) + 1, MPFR_RNDN);
        mpfr_mul(term.raw(), term.raw(), evals[i].value.raw(), MPFR_RNDN);
        mpfr_add(sum.raw(), sum.raw(), term.raw(), MPFR_RNDN);
    }

    CdfEvaluation out;
    out.x = x;
    out.K = K;
    out.eps_budget = eps;
    out.value = HPReal(ctx.bits());
    mpfr_set(out.value.raw(), sum.raw(), MPFR_RNDN);
    if (out.value.sign() < 0) {
        mpfr_set_zero(out.value.raw(), 1);
        out.clamped = true;
    } else if (mpfr_cmp_ui(out.value.raw(), 1) > 0) {
        mpfr_set_ui(out.value.raw(), 1, MPFR_RNDN);
        out.clamped = true;
    }
    static const ExactRational kLeftEdge(33, 100);
    out.below_validated_range = mpfr_cmp_q(x.raw(), kLeftEdge.raw()) < 0;
    out.points.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        out.points.push_back(
            CdfPointDiagnostic{static_cast<int>(i) + 1, evals[i].n_terms, evals[i].tail_bound});
        if (evals[i].n_terms > out.N_used) out.N_used = evals[i].n_terms;
    }
    return out;
}

QuantileResult quantile(double p, const HPReal& threshold, int K, const HPReal& eps,
                        const PrecisionContext& ctx, const gs::GSWeights* weights, int threads) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("distribution: quantile requires 0 < p < 1");
    if (threshold.sign() <= 0) throw DomainError("distribution: quantile threshold must be > 0");

    gs::GSWeights local;
    if (weights == nullptr) {
        local = gs::gs_weights(K);
        weights = &local;
    }

    const long pb = 192;  // bracket arithmetic precision
    HPReal p_hp = HPReal::from_double(p, pb);
    HPReal lo = HPReal::from_decimal("0.33", pb);
    HPReal hi = HPReal::from_decimal("2.54", pb);
    HPReal floor_x = HPReal::from_decimal("0.05", pb);

    auto eval = [&](const HPReal& xv) {
        return cdf(xv, K, eps, std::nullopt, ctx, weights, threads).value;
    };

    HPReal f_lo = eval(lo);
    HPReal f_hi = eval(hi);
    int expansions = 0;
    while (f_lo > p_hp || f_hi < p_hp) {
        if (++expansions > 20)
            throw ConvergenceError(
                "distribution: quantile bracket failed to straddle p after 20 expansions");
        if (f_lo > p_hp) {
            lo = floor_x + (lo - floor_x) / HPReal::from_long(2, pb);
            f_lo = eval(lo);
        }
        if (f_hi < p_hp) {
            hi = hi * HPReal::from_long(2, pb);
            f_hi = eval(hi);
        }
    }

    constexpr int kIterCap = 300;
    for (int iter = 1; iter <= kIterCap; ++iter) {
        HPReal mid = (lo + hi) / HPReal::from_long(2, pb);
        HPReal fm = eval(mid);
        HPReal residual = abs(fm - p_hp);
        if (residual < threshold) return QuantileResult{p, mid, residual, iter};
        if (fm < p_hp)
            lo = mid;
        else
            hi = mid;
    }
    throw ConvergenceError("distribution: quantile bisection exceeded " +
                           std::to_string(kIterCap) + " iterations for p = " + std::to_string(p));
}

}  // namespace bm::dist
