#include "bm/precision.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <limits>

namespace bm {

BigInt BigInt::from_string(std::string_view s) {
    BigInt r;
    std::string buf(s);
    if (buf.empty() || mpz_set_str(r.v_, buf.c_str(), 10) != 0)
        throw FormatError("precision-core: not a decimal integer: '" + buf + "'");
    return r;
}

std::string BigInt::to_string() const {
    char* p = mpz_get_str(nullptr, 10, v_);
    std::string s(p);
    void (*freefn)(void*, size_t);
    mp_get_memory_functions(nullptr, nullptr, &freefn);
    freefn(p, std::strlen(p) + 1);
    return s;
}

BigInt binomial(unsigned long n, unsigned long m) {
    BigInt r;
    if (m > n) return r;  // 0
    mpz_bin_uiui(r.raw(), n, m);
    return r;
}

ExactRational::ExactRational(const BigInt& num, const BigInt& den) {
    if (den.sign() == 0) throw DomainError("precision-core: rational with zero denominator");
    mpq_init(v_);
    mpz_set(mpq_numref(v_), num.raw());
    mpz_set(mpq_denref(v_), den.raw());
    mpq_canonicalize(v_);
}

ExactRational& ExactRational::operator/=(const ExactRational& o) {
    if (o.sign() == 0) throw DomainError("precision-core: rational division by zero");
    mpq_div(v_, v_, o.v_);
    return *this;
}

ExactRational ExactRational::from_string(std::string_view s) {
    auto slash = s.find('/');
    if (slash == std::string_view::npos) {
        BigInt n = BigInt::from_string(s);
        return ExactRational(n, BigInt(1));
    }
    BigInt n = BigInt::from_string(s.substr(0, slash));
    BigInt d = BigInt::from_string(s.substr(slash + 1));
    if (d.sign() <= 0) throw FormatError("precision-core: denominator must be positive");
    return ExactRational(n, d);
}

ExactRational ExactRational::from_decimal(std::string_view s) {
    // [sign] digits [. digits] [eE [sign] digits]
    size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = (s[i++] == '-');
    std::string digits;
    long frac_digits = 0;
    bool saw_digit = false, saw_dot = false;
    for (; i < s.size(); ++i) {
        if (std::isdigit(static_cast<unsigned char>(s[i]))) {
            digits += s[i];
            saw_digit = true;
            if (saw_dot) ++frac_digits;
        } else if (s[i] == '.' && !saw_dot) {
            saw_dot = true;
        } else {
            break;
        }
    }
    long exp10 = 0;
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        ++i;
        bool eneg = false;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) eneg = (s[i++] == '-');
        if (i >= s.size()) throw FormatError("precision-core: bad decimal exponent");
        long e = 0;
        for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i) {
            e = e * 10 + (s[i] - '0');
            if (e > 1000000) throw FormatError("precision-core: decimal exponent too large");
        }
        exp10 = eneg ? -e : e;
    }
    if (!saw_digit || i != s.size())
        throw FormatError("precision-core: not a decimal literal: '" + std::string(s) + "'");

    BigInt num = BigInt::from_string(digits.empty() ? "0" : digits);
    if (neg) mpz_neg(num.raw(), num.raw());
    long shift = exp10 - frac_digits;
    BigInt den(1);
    if (shift >= 0) {
        BigInt scale = BigInt::pow(10, static_cast<unsigned long>(shift));
        num *= scale;
    } else {
        den = BigInt::pow(10, static_cast<unsigned long>(-shift));
    }
    return ExactRational(num, den);
}

double ExactRational::log2_abs() const {
    if (sign() == 0) return -std::numeric_limits<double>::infinity();
    // Split as (top bits) * 2^shift on both sides; double covers the rest.
    signed long ne = 0, de = 0;
    double nm = mpz_get_d_2exp(&ne, mpq_numref(v_));
    double dm = mpz_get_d_2exp(&de, mpq_denref(v_));
    return std::log2(std::fabs(nm)) + static_cast<double>(ne) - std::log2(dm) -
           static_cast<double>(de);
}

std::string ExactRational::to_string() const {
    std::string s = numerator().to_string();
    BigInt den = denominator();
    if (!(den == BigInt(1))) s += "/" + den.to_string();
    return s;
}

HPReal HPReal::from_decimal(std::string_view s, long prec) {
    HPReal r(prec);
    std::string buf(s);
    if (buf.empty() || mpfr_set_str(r.v_, buf.c_str(), 10, MPFR_RNDN) != 0)
        throw FormatError("precision-core: not a decimal number: '" + buf + "'");
    return r;
}

ExactRational HPReal::to_rational_exact() const {
    if (!mpfr_number_p(v_)) throw DomainError("precision-core: non-finite value has no rational form");
    ExactRational q;
    mpfr_get_q(q.raw(), v_);
    return q;
}

std::string HPReal::to_decimal(int sig_digits) const {
    if (mpfr_nan_p(v_)) return "nan";
    if (mpfr_inf_p(v_)) return mpfr_sgn(v_) < 0 ? "-inf" : "inf";
    if (mpfr_zero_p(v_)) return "0";
    if (sig_digits < 2) sig_digits = 2;
    mpfr_exp_t e = 0;
    char* p = mpfr_get_str(nullptr, &e, 10, static_cast<size_t>(sig_digits), v_, MPFR_RNDN);
    std::string digits(p);
    mpfr_free_str(p);
    std::string sign;
    if (digits[0] == '-') {
        sign = "-";
        digits.erase(0, 1);
    }
    // value = 0.digits * 10^e  ->  d.igits * 10^(e-1)
    std::string out = sign + digits.substr(0, 1) + "." + digits.substr(1);
    out += "e" + std::to_string(static_cast<long>(e) - 1);
    return out;
}

namespace {

HPReal unop(int (*fn)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t), const HPReal& x, long prec) {
    HPReal r(prec);
    fn(r.raw(), x.raw(), MPFR_RNDN);
    return r;
}

}  // namespace

HPReal exp(const HPReal& x) { return unop(mpfr_exp, x, x.precision()); }
HPReal exp(const HPReal& x, long prec) { return unop(mpfr_exp, x, prec); }

HPReal log(const HPReal& x) { return log(x, x.precision()); }
HPReal log(const HPReal& x, long prec) {
    if (x.sign() <= 0) throw DomainError("precision-core: log of non-positive value");
    return unop(mpfr_log, x, prec);
}

HPReal sqrt(const HPReal& x) { return sqrt(x, x.precision()); }
HPReal sqrt(const HPReal& x, long prec) {
    if (x.sign() < 0) throw DomainError("precision-core: sqrt of negative value");
    return unop(mpfr_sqrt, x, prec);
}

HPReal abs(const HPReal& x) {
    HPReal r(x.precision());
    mpfr_abs(r.raw(), x.raw(), MPFR_RNDN);
    return r;
}

HPReal pow_int(const HPReal& x, long e) {
    HPReal r(x.precision());
    mpfr_pow_si(r.raw(), x.raw(), e, MPFR_RNDN);
    return r;
}

HPReal PrecisionContext::constant(Kind kind, long prec) const {
    // Round the precision up to a coarse grid so the cache stays small while
    // guard-bit requests vary; the value is rounded down to `prec` on return.
    constexpr long kGrain = 256;
    long stored = ((prec + kGrain - 1) / kGrain) * kGrain;
    HPReal out(prec);
    {
        std::lock_guard<std::mutex> lock(cache_->mu);
        auto key = std::make_pair(static_cast<int>(kind), stored);
        auto it = cache_->values.find(key);
        if (it == cache_->values.end()) {
            HPReal v(stored);
            switch (kind) {
                case Kind::kEuler: mpfr_const_euler(v.raw(), MPFR_RNDN); break;
                case Kind::kPi: mpfr_const_pi(v.raw(), MPFR_RNDN); break;
                case Kind::kLn2: mpfr_const_log2(v.raw(), MPFR_RNDN); break;
            }
            it = cache_->values.emplace(key, std::move(v)).first;
        }
        mpfr_set(out.raw(), it->second.raw(), MPFR_RNDN);
    }
    return out;
}

PrecisionContext make_context(long bits) {
    if (bits < PrecisionContext::kMinBits)
        throw DomainError("precision-core: context requires bits >= 64, got " +
                          std::to_string(bits));
    return PrecisionContext(bits);
}

}  // namespace bm
