#include "bm/gaver_stehfest.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "bm/parallel.hpp"

namespace bm::gs {

GSWeights gs_weights(int K) {
    if (K < 1 || K > kMaxK)
        throw DomainError("gaver-stehfest: K must be in [1, " + std::to_string(kMaxK) +
                          "], got " + std::to_string(K));
    GSWeights w;
    w.K = K;
    w.xi.reserve(2 * static_cast<size_t>(K));
    const BigInt kfact = BigInt::factorial(static_cast<unsigned long>(K));
    for (int k = 1; k <= 2 * K; ++k) {
        BigInt sum(0);
        const int jlo = (k + 1) / 2;
        const int jhi = std::min(k, K);
        for (int j = jlo; j <= jhi; ++j) {
            BigInt term = BigInt::pow(static_cast<unsigned long>(j),
                                      static_cast<unsigned long>(K) + 1);
            term *= binomial(static_cast<unsigned long>(K), static_cast<unsigned long>(j));
            term *= binomial(2ul * static_cast<unsigned long>(j), static_cast<unsigned long>(j));
            term *= binomial(static_cast<unsigned long>(j), static_cast<unsigned long>(k - j));
            sum += term;
        }
        ExactRational xi(sum, kfact);
        if ((k + K) % 2 != 0) xi = -xi;
        double l2 = xi.abs().log2_abs();
        if (l2 > w.max_log2_xi) w.max_log2_xi = l2;
        w.xi.push_back(std::move(xi));
    }
    return w;
}

ExactRational weight_identity_sum(const GSWeights& w) {
    ExactRational s;
    for (int k = 1; k <= 2 * w.K; ++k)
        s += w.xi[static_cast<size_t>(k) - 1] / ExactRational(k);
    return s;
}

long min_bits_for(int K) { return (7L * K + 1) / 2 + 64; }

void save_weights(const GSWeights& w, std::ostream& os) {
    for (int k = 1; k <= 2 * w.K; ++k) {
        const ExactRational& q = w.xi[static_cast<size_t>(k) - 1];
        os << w.K << ' ' << k << ' ' << q.numerator().to_string() << '/'
           << q.denominator().to_string() << '\n';
    }
}

GSWeights load_weights(std::istream& is) {
    GSWeights w;
    std::string line;
    int expected_k = 1;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        int K = 0, k = 0;
        std::string frac;
        if (!(ls >> K >> k >> frac))
            throw FormatError("gaver-stehfest: malformed weight cache line: '" + line + "'");
        if (w.K == 0) {
            if (K < 1 || K > kMaxK) throw FormatError("gaver-stehfest: cache K out of range");
            w.K = K;
        } else if (K != w.K) {
            throw FormatError("gaver-stehfest: mixed K values in weight cache");
        }
        if (k != expected_k)
            throw FormatError("gaver-stehfest: weight cache out of order at k = " +
                              std::to_string(k));
        ExactRational q = ExactRational::from_string(frac);
        double l2 = q.abs().log2_abs();
        if (l2 > w.max_log2_xi) w.max_log2_xi = l2;
        w.xi.push_back(std::move(q));
        ++expected_k;
    }
    if (w.K == 0 || static_cast<int>(w.xi.size()) != 2 * w.K)
        throw FormatError("gaver-stehfest: weight cache truncated");
    if (!(weight_identity_sum(w) == ExactRational(1)))
        throw FormatError("gaver-stehfest: weight cache failed the sum xi_k/k = 1 identity");
    return w;
}

HPReal gs_invert(const TransformFn& g, const HPReal& t, const GSWeights& w,
                 const PrecisionContext& ctx, int threads) {
    if (t.sign() <= 0) throw DomainError("gaver-stehfest: gs_invert requires t > 0");
    if (ctx.bits() < min_bits_for(w.K))
        throw PrecisionError("gaver-stehfest: K = " + std::to_string(w.K) + " requires >= " +
                             std::to_string(min_bits_for(w.K)) + " bits, context has " +
                             std::to_string(ctx.bits()));

    const long guard =
        static_cast<long>(std::ceil(w.max_log2_xi)) + static_cast<long>(std::ceil(
            std::log2(2.0 * w.K))) + 32;
    const long P = ctx.working_bits(guard);
    const size_t n = 2 * static_cast<size_t>(w.K);

    HPReal ln2 = ctx.ln2(P);
    std::vector<HPReal> gvals(n);
    parallel_for(n, threads, [&](size_t i) {
        HPReal s(P);
        mpfr_mul_ui(s.raw(), ln2.raw(), static_cast<unsigned long>(i) + 1, MPFR_RNDN);
        mpfr_div(s.raw(), s.raw(), t.raw(), MPFR_RNDN);
        gvals[i] = g(s, ctx);
    });

    HPReal sum(P), term(P);
    mpfr_set_zero(sum.raw(), 1);
    for (size_t i = 0; i < n; ++i) {
        mpfr_set_q(term.raw(), w.xi[i].raw(), MPFR_RNDN);
        mpfr_mul(term.raw(), term.raw(), gvals[i].raw(), MPFR_RNDN);
        mpfr_add(sum.raw(), sum.raw(), term.raw(), MPFR_RNDN);
    }
    mpfr_mul(sum.raw(), sum.raw(), ln2.raw(), MPFR_RNDN);
    mpfr_div(sum.raw(), sum.raw(), t.raw(), MPFR_RNDN);

    HPReal out(ctx.bits());
    mpfr_set(out.raw(), sum.raw(), MPFR_RNDN);
    return out;
}

}  // namespace bm::gs
