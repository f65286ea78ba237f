#include "bm/specfun.hpp"

#include <cmath>
#include <string>

namespace bm::specfun {

namespace {

// RAII mpfr temporary.
struct Scratch {
    explicit Scratch(long prec) { mpfr_init2(v, prec); }
    ~Scratch() { mpfr_clear(v); }
    Scratch(const Scratch&) = delete;
    Scratch& operator=(const Scratch&) = delete;
    mpfr_t v;
};

constexpr double kLn2 = 0.6931471805599453;

}  // namespace

namespace detail {

void bessel_k01_prec(mpfr_srcptr x, long out_bits, mpfr_ptr k0_out, mpfr_ptr k1_out,
                     const PrecisionContext* ctx) {
    if (mpfr_sgn(x) <= 0 || !mpfr_number_p(x))
        throw DomainError("specfun: bessel_k01 requires x > 0");

    const double xd = mpfr_get_d(x, MPFR_RNDU);
    // The series sums terms of size exp(x) that cancel down to exp(-x).
    const long cancel = static_cast<long>(std::ceil(2.0 * xd / kLn2));
    const long P = out_bits + cancel + 48;

    Scratch q(P), r(P), recip(P), recip_next(P), h(P), i0(P), s0(P), i1s(P), s1(P), t1(P),
        t2(P), lt(P);

    // q = x^2/4
    mpfr_sqr(q.v, x, MPFR_RNDN);
    mpfr_div_ui(q.v, q.v, 4, MPFR_RNDN);

    // m = 0 seeds: r_0 = 1, H_0 = 0, I0 = 1, S0 = 0, I1s = 1, S1 = 1.
    mpfr_set_ui(r.v, 1, MPFR_RNDN);
    mpfr_set_ui(h.v, 0, MPFR_RNDN);
    mpfr_set_ui(i0.v, 1, MPFR_RNDN);
    mpfr_set_ui(s0.v, 0, MPFR_RNDN);
    mpfr_set_ui(i1s.v, 1, MPFR_RNDN);
    mpfr_set_ui(s1.v, 1, MPFR_RNDN);
    mpfr_set_ui(recip_next.v, 1, MPFR_RNDN);  // 1/(0+1)

    constexpr long kIterCap = 20000000;
    for (long m = 1;; ++m) {
        if (m > kIterCap)
            throw ConvergenceError("specfun: bessel series exceeded iteration cap");
        mpfr_swap(recip.v, recip_next.v);  // recip = 1/m
        // r_m = r_{m-1} * q / m^2
        mpfr_mul(r.v, r.v, q.v, MPFR_RNDN);
        mpfr_div_ui(r.v, r.v, static_cast<unsigned long>(m) * static_cast<unsigned long>(m),
                    MPFR_RNDN);
        // H_m = H_{m-1} + 1/m
        mpfr_add(h.v, h.v, recip.v, MPFR_RNDN);
        mpfr_add(i0.v, i0.v, r.v, MPFR_RNDN);
        mpfr_mul(t1.v, r.v, h.v, MPFR_RNDN);
        mpfr_add(s0.v, s0.v, t1.v, MPFR_RNDN);
        // u = r_m / (m+1); contributes to I1 and (with H_m + H_{m+1}) to S1
        mpfr_div_ui(t1.v, r.v, static_cast<unsigned long>(m) + 1, MPFR_RNDN);
        mpfr_add(i1s.v, i1s.v, t1.v, MPFR_RNDN);
        mpfr_set_ui(recip_next.v, static_cast<unsigned long>(m) + 1, MPFR_RNDN);
        mpfr_ui_div(recip_next.v, 1, recip_next.v, MPFR_RNDN);  // 1/(m+1)
        mpfr_mul_2ui(t2.v, h.v, 1, MPFR_RNDN);                  // 2 H_m
        mpfr_add(t2.v, t2.v, recip_next.v, MPFR_RNDN);          // H_m + H_{m+1}
        mpfr_mul(t1.v, t1.v, t2.v, MPFR_RNDN);
        mpfr_add(s1.v, s1.v, t1.v, MPFR_RNDN);

        // All series have positive terms decaying superexponentially once
        // m exceeds ~x; stop when the next term cannot move any sum.
        if (mpfr_zero_p(r.v)) break;
        long re = mpfr_get_exp(r.v);
        long i0e = mpfr_get_exp(i0.v);
        if (re + 8 < i0e - P) break;
    }

    // L = ln(x/2) + gamma
    mpfr_div_ui(lt.v, x, 2, MPFR_RNDN);
    mpfr_log(lt.v, lt.v, MPFR_RNDN);
    if (ctx != nullptr) {
        HPReal g = ctx->euler(P);
        mpfr_add(lt.v, lt.v, g.raw(), MPFR_RNDN);
    } else {
        mpfr_const_euler(t1.v, MPFR_RNDN);
        mpfr_add(lt.v, lt.v, t1.v, MPFR_RNDN);
    }

    // K0 = S0 - L*I0
    mpfr_mul(t1.v, lt.v, i0.v, MPFR_RNDN);
    mpfr_sub(t1.v, s0.v, t1.v, MPFR_RNDN);
    mpfr_set(k0_out, t1.v, MPFR_RNDN);

    // K1 = 1/x + L*(x/2)*I1s - (x/4)*S1
    mpfr_mul(t1.v, lt.v, i1s.v, MPFR_RNDN);
    mpfr_mul(t1.v, t1.v, x, MPFR_RNDN);
    mpfr_div_ui(t1.v, t1.v, 2, MPFR_RNDN);
    mpfr_mul(t2.v, s1.v, x, MPFR_RNDN);
    mpfr_div_ui(t2.v, t2.v, 4, MPFR_RNDN);
    mpfr_sub(t1.v, t1.v, t2.v, MPFR_RNDN);
    mpfr_ui_div(t2.v, 1, x, MPFR_RNDN);
    mpfr_add(t1.v, t1.v, t2.v, MPFR_RNDN);
    mpfr_set(k1_out, t1.v, MPFR_RNDN);
}

}  // namespace detail

BesselPair bessel_k01(const HPReal& x, const PrecisionContext& ctx) {
    BesselPair out{x, HPReal(ctx.bits()), HPReal(ctx.bits())};
    detail::bessel_k01_prec(x.raw(), ctx.bits(), out.k0.raw(), out.k1.raw(), &ctx);
    return out;
}

HPReal bessel_term(const HPReal& x, const PrecisionContext& ctx, const HPReal& tol) {
    if (x.sign() <= 0) throw DomainError("specfun: bessel_term requires x > 0");
    if (tol.sign() <= 0) throw DomainError("specfun: bessel_term requires tol > 0");

    // A-priori cap sqrt(pi/2)*sqrt(x)*exp(-x), evaluated coarsely but
    // conservatively: if it already sits below tol the term is dropped.
    {
        HPReal b(96);
        mpfr_neg(b.raw(), x.raw(), MPFR_RNDN);
        mpfr_exp(b.raw(), b.raw(), MPFR_RNDU);
        Scratch s(96), pi2(96);
        mpfr_sqrt(s.v, x.raw(), MPFR_RNDU);
        mpfr_mul(b.raw(), b.raw(), s.v, MPFR_RNDU);
        mpfr_const_pi(pi2.v, MPFR_RNDU);
        mpfr_div_ui(pi2.v, pi2.v, 2, MPFR_RNDU);
        mpfr_sqrt(pi2.v, pi2.v, MPFR_RNDU);
        mpfr_mul(b.raw(), b.raw(), pi2.v, MPFR_RNDU);
        // one extra headroom bit for the rounded-up chain
        mpfr_mul_2ui(b.raw(), b.raw(), 1, MPFR_RNDU);
        if (mpfr_cmp(b.raw(), tol.raw()) < 0) return HPReal::from_long(0, ctx.bits());
    }

    long out_bits = ctx.bits();
    if (!tol.is_zero()) {
        long need = 16 - tol.exponent2();  // abs error target below tol
        if (need > out_bits) out_bits = need;
    }
    HPReal k0(out_bits), k1(out_bits);
    detail::bessel_k01_prec(x.raw(), out_bits, k0.raw(), k1.raw(), &ctx);
    HPReal r(out_bits);
    mpfr_fms(r.raw(), x.raw(), k1.raw(), k0.raw(), MPFR_RNDN);  // x*K1 - K0
    return r;
}

F3Value f3_cdf(const HPReal& x, const HPReal& tol, const PrecisionContext& ctx) {
    if (x.sign() <= 0) throw DomainError("specfun: f3_cdf requires x > 0");
    if (tol.sign() <= 0 || tol >= HPReal::from_long(1, 64))
        throw DomainError("specfun: f3_cdf requires 0 < tol < 1");

    const long P = ctx.working_bits();

    // Projected term count from the geometric tail bound; refuse slow series.
    {
        Scratch lt(64);
        mpfr_log(lt.v, tol.raw(), MPFR_RNDN);
        const double ln_tol = mpfr_get_d(lt.v, MPFR_RNDN);
        const double xd = x.to_double();
        const double a = xd * xd;
        const double ln1me = std::log(-std::expm1(-a));
        const double projected = (kLn2 - ln_tol - ln1me) / a - 1.0;
        if (!(projected < static_cast<double>(kF3TermCap)))
            throw ConvergenceError("specfun: f3_cdf slow convergence at x = " + x.to_decimal(6) +
                                   " (projected terms exceed cap " + std::to_string(kF3TermCap) +
                                   ")");
    }

    Scratch a(P), e2(P), term(P), sum(P), t(P);
    mpfr_sqr(a.v, x.raw(), MPFR_RNDN);           // a = x^2
    mpfr_mul_si(e2.v, a.v, -2, MPFR_RNDN);
    mpfr_exp(e2.v, e2.v, MPFR_RNDN);             // e2 = exp(-2x^2)
    mpfr_set_ui(sum.v, 0, MPFR_RNDN);

    // Low-precision pieces for the tail bound check.
    HPReal ea(96);
    mpfr_neg(ea.raw(), a.v, MPFR_RNDN);
    mpfr_exp(ea.raw(), ea.raw(), MPFR_RNDU);     // exp(-x^2), rounded up
    HPReal one_m(96);
    mpfr_ui_sub(one_m.raw(), 1, ea.raw(), MPFR_RNDD);
    if (one_m.sign() <= 0)
        throw ConvergenceError("specfun: f3_cdf tail bound degenerate at x = " + x.to_decimal(6));

    long n = 0;
    HPReal tail(96);
    while (true) {
        ++n;
        if (n > kF3TermCap)
            throw ConvergenceError("specfun: f3_cdf exceeded term cap at x = " + x.to_decimal(6));
        const unsigned long nn =
            static_cast<unsigned long>(n) * static_cast<unsigned long>(n);
        mpfr_pow_ui(term.v, e2.v, nn, MPFR_RNDN);        // exp(-2 n^2 x^2)
        mpfr_mul_ui(t.v, a.v, 4 * nn, MPFR_RNDN);        // 4 n^2 x^2
        mpfr_sub_ui(t.v, t.v, 1, MPFR_RNDN);
        mpfr_mul(term.v, term.v, t.v, MPFR_RNDN);
        mpfr_add(sum.v, sum.v, term.v, MPFR_RNDN);

        // tail(n) = 2 exp(-(n+1)x^2) / (1 - exp(-x^2)), rounded up
        mpfr_pow_ui(tail.raw(), ea.raw(), static_cast<unsigned long>(n) + 1, MPFR_RNDU);
        mpfr_mul_2ui(tail.raw(), tail.raw(), 1, MPFR_RNDU);
        mpfr_div(tail.raw(), tail.raw(), one_m.raw(), MPFR_RNDU);
        if (mpfr_cmp(tail.raw(), tol.raw()) <= 0) break;
    }

    HPReal value(ctx.bits());
    mpfr_mul_2ui(sum.v, sum.v, 1, MPFR_RNDN);
    mpfr_ui_sub(value.raw(), 1, sum.v, MPFR_RNDN);
    if (value.sign() < 0) mpfr_set_zero(value.raw(), 1);
    if (mpfr_cmp_ui(value.raw(), 1) > 0) mpfr_set_ui(value.raw(), 1, MPFR_RNDN);

    return F3Value{x, std::move(value), n, std::move(tail)};
}

double f3_cdf_double(double x, double tol) {
    if (!(x > 0)) throw DomainError("specfun: f3_cdf requires x > 0");
    const double a = x * x;
    const double denom = -std::expm1(-a);  // 1 - exp(-x^2)
    double sum = 0.0;
    long n = 0;
    while (true) {
        ++n;
        if (n > kF3TermCap)
            throw ConvergenceError("specfun: f3_cdf_double exceeded term cap at x = " +
                                   std::to_string(x));
        const double nn = static_cast<double>(n) * static_cast<double>(n);
        sum += (4.0 * nn * a - 1.0) * std::exp(-2.0 * nn * a);
        const double tail = 2.0 * std::exp(-(static_cast<double>(n) + 1.0) * a) / denom;
        if (tail <= tol) break;
    }
    double v = 1.0 - 2.0 * sum;
    if (v < 0.0) v = 0.0;
    if (v > 1.0) v = 1.0;
    return v;
}

}  // namespace bm::specfun
