#pragma once

#include <gmp.h>
#include <mpfr.h>

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>

#include "bm/errors.hpp"

namespace bm {

class ExactRational;

// Arbitrary-size integer (GMP mpz with value semantics).
class BigInt {
  public:
    BigInt() { mpz_init(v_); }
    BigInt(long v) { mpz_init_set_si(v_, v); }  // NOLINT: implicit by design
    BigInt(const BigInt& o) { mpz_init_set(v_, o.v_); }
    BigInt(BigInt&& o) noexcept {
        mpz_init(v_);
        mpz_swap(v_, o.v_);
    }
    BigInt& operator=(const BigInt& o) {
        if (this != &o) mpz_set(v_, o.v_);
        return *this;
    }
    BigInt& operator=(BigInt&& o) noexcept {
        mpz_swap(v_, o.v_);
        return *this;
    }
    ~BigInt() { mpz_clear(v_); }

    static BigInt from_string(std::string_view s);
    static BigInt pow(unsigned long base, unsigned long e) {
        BigInt r;
        mpz_ui_pow_ui(r.v_, base, e);
        return r;
    }
    static BigInt factorial(unsigned long n) {
        BigInt r;
        mpz_fac_ui(r.v_, n);
        return r;
    }

    BigInt& operator+=(const BigInt& o) {
        mpz_add(v_, v_, o.v_);
        return *this;
    }
    BigInt& operator*=(const BigInt& o) {
        mpz_mul(v_, v_, o.v_);
        return *this;
    }
    friend BigInt operator+(BigInt a, const BigInt& b) { return a += b; }
    friend BigInt operator*(BigInt a, const BigInt& b) { return a *= b; }
    friend bool operator==(const BigInt& a, const BigInt& b) { return mpz_cmp(a.v_, b.v_) == 0; }
    friend auto operator<=>(const BigInt& a, const BigInt& b) { return mpz_cmp(a.v_, b.v_) <=> 0; }

    bool fits_long() const { return mpz_fits_slong_p(v_) != 0; }
    long to_long() const { return mpz_get_si(v_); }
    // Number of bits in |value|; 0 for value 0.
    size_t bit_length() const { return mpz_sgn(v_) == 0 ? 0 : mpz_sizeinbase(v_, 2); }
    int sign() const { return mpz_sgn(v_); }
    std::string to_string() const;

    mpz_srcptr raw() const { return v_; }
    mpz_ptr raw() { return v_; }

  private:
    mpz_t v_;
};

// n-choose-m, exact; 0 when m > n.
BigInt binomial(unsigned long n, unsigned long m);

// Exact rational in reduced form, denominator > 0.
class ExactRational {
  public:
    ExactRational() { mpq_init(v_); }
    ExactRational(long num, unsigned long den = 1) {
        mpq_init(v_);
        mpq_set_si(v_, num, den);
        mpq_canonicalize(v_);
    }
    ExactRational(const BigInt& num, const BigInt& den);
    ExactRational(const ExactRational& o) {
        mpq_init(v_);
        mpq_set(v_, o.v_);
    }
    ExactRational(ExactRational&& o) noexcept {
        mpq_init(v_);
        mpq_swap(v_, o.v_);
    }
    ExactRational& operator=(const ExactRational& o) {
        if (this != &o) mpq_set(v_, o.v_);
        return *this;
    }
    ExactRational& operator=(ExactRational&& o) noexcept {
        mpq_swap(v_, o.v_);
        return *this;
    }
    ~ExactRational() { mpq_clear(v_); }

    // Parses "num/den" or "num"; decimal digits with optional sign.
    static ExactRational from_string(std::string_view s);
    // Parses a decimal literal like "2.54", "-0.01" or "1.5e-3" exactly.
    static ExactRational from_decimal(std::string_view s);

    ExactRational& operator+=(const ExactRational& o) {
        mpq_add(v_, v_, o.v_);
        return *this;
    }
    ExactRational& operator-=(const ExactRational& o) {
        mpq_sub(v_, v_, o.v_);
        return *this;
    }
    ExactRational& operator*=(const ExactRational& o) {
        mpq_mul(v_, v_, o.v_);
        return *this;
    }
    ExactRational& operator/=(const ExactRational& o);
    friend ExactRational operator+(ExactRational a, const ExactRational& b) { return a += b; }
    friend ExactRational operator-(ExactRational a, const ExactRational& b) { return a -= b; }
    friend ExactRational operator*(ExactRational a, const ExactRational& b) { return a *= b; }
    friend ExactRational operator/(ExactRational a, const ExactRational& b) { return a /= b; }
    ExactRational operator-() const {
        ExactRational r(*this);
        mpq_neg(r.v_, r.v_);
        return r;
    }
    ExactRational abs() const {
        ExactRational r(*this);
        mpq_abs(r.v_, r.v_);
        return r;
    }
    friend bool operator==(const ExactRational& a, const ExactRational& b) {
        return mpq_equal(a.v_, b.v_) != 0;
    }
    friend auto operator<=>(const ExactRational& a, const ExactRational& b) {
        return mpq_cmp(a.v_, b.v_) <=> 0;
    }

    int sign() const { return mpq_sgn(v_); }
    BigInt numerator() const {
        BigInt r;
        mpz_set(r.raw(), mpq_numref(v_));
        return r;
    }
    BigInt denominator() const {
        BigInt r;
        mpz_set(r.raw(), mpq_denref(v_));
        return r;
    }
    // log2(|value|), as a double; -inf for 0. Exact enough for budgeting.
    double log2_abs() const;
    std::string to_string() const;  // "num/den", or "num" when den == 1

    mpq_srcptr raw() const { return v_; }
    mpq_ptr raw() { return v_; }

  private:
    mpq_t v_;
};

// Floating-point real carried at an explicit binary precision (MPFR).
// Values are immutable under the public arithmetic API; every operation
// rounds once to the result's precision (MPFR round-to-nearest), so the
// relative error of a single operation is at most 2^(1-prec).
class HPReal {
  public:
    static constexpr long kMinPrec = MPFR_PREC_MIN;

    HPReal() { mpfr_init2(v_, 64); }  // NaN at 64 bits
    explicit HPReal(long prec) { mpfr_init2(v_, prec); }
    HPReal(const HPReal& o) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    HPReal(HPReal&& o) noexcept {
        mpfr_init2(v_, 64);
        mpfr_swap(v_, o.v_);
    }
    HPReal& operator=(const HPReal& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    HPReal& operator=(HPReal&& o) noexcept {
        mpfr_swap(v_, o.v_);
        return *this;
    }
    ~HPReal() { mpfr_clear(v_); }

    static HPReal from_long(long v, long prec) {
        HPReal r(prec);
        mpfr_set_si(r.v_, v, MPFR_RNDN);
        return r;
    }
    static HPReal from_double(double v, long prec) {
        HPReal r(prec);
        mpfr_set_d(r.v_, v, MPFR_RNDN);
        return r;
    }
    static HPReal from_rational(const ExactRational& q, long prec) {
        HPReal r(prec);
        mpfr_set_q(r.v_, q.raw(), MPFR_RNDN);
        return r;
    }
    // One rounding at `prec`; accepts "1.25e-7"-style decimal strings.
    static HPReal from_decimal(std::string_view s, long prec);

    long precision() const { return mpfr_get_prec(v_); }
    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
    // Exact conversion: every finite binary float is rational.
    ExactRational to_rational_exact() const;
    // Scientific decimal string with `sig_digits` significant digits,
    // formatted like 5.60961512572e-1. Locale-independent.
    std::string to_decimal(int sig_digits) const;

    bool is_nan() const { return mpfr_nan_p(v_) != 0; }
    bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    int sign() const { return mpfr_sgn(v_); }
    // Exponent e with |value| in [2^(e-1), 2^e); only valid for nonzero finite values.
    long exponent2() const { return mpfr_get_exp(v_); }

    friend HPReal operator+(const HPReal& a, const HPReal& b) { return binop(mpfr_add, a, b); }
    friend HPReal operator-(const HPReal& a, const HPReal& b) { return binop(mpfr_sub, a, b); }
    friend HPReal operator*(const HPReal& a, const HPReal& b) { return binop(mpfr_mul, a, b); }
    friend HPReal operator/(const HPReal& a, const HPReal& b) { return binop(mpfr_div, a, b); }
    HPReal operator-() const {
        HPReal r(precision());
        mpfr_neg(r.v_, v_, MPFR_RNDN);
        return r;
    }
    friend bool operator==(const HPReal& a, const HPReal& b) { return mpfr_cmp(a.v_, b.v_) == 0; }
    friend auto operator<=>(const HPReal& a, const HPReal& b) { return mpfr_cmp(a.v_, b.v_) <=> 0; }

    mpfr_srcptr raw() const { return v_; }
    mpfr_ptr raw() { return v_; }

  private:
    using BinFn = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t);
    static HPReal binop(BinFn fn, const HPReal& a, const HPReal& b) {
        HPReal r(std::max(mpfr_get_prec(a.v_), mpfr_get_prec(b.v_)));
        fn(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    mpfr_t v_;
};

// Unary functions; result carries the argument's precision unless an
// explicit `prec` is given.
HPReal exp(const HPReal& x);
HPReal exp(const HPReal& x, long prec);
HPReal log(const HPReal& x);
HPReal log(const HPReal& x, long prec);
HPReal sqrt(const HPReal& x);
HPReal sqrt(const HPReal& x, long prec);
HPReal abs(const HPReal& x);
HPReal pow_int(const HPReal& x, long e);

// Working-precision policy shared by every high-precision operation.
// Immutable after construction; cheap to copy (the constant cache is
// shared). The cache is write-once-then-read-only per precision key.
class PrecisionContext {
  public:
    static constexpr long kDefaultBits = 4000;
    static constexpr long kMinBits = 64;

    long bits() const { return bits_; }

    // An operation anticipating `cancellation_bits` of cancellation runs
    // at this precision and rounds once at the end.
    long working_bits(long cancellation_bits = 0) const {
        return bits_ + (cancellation_bits > 0 ? cancellation_bits : 0) + kGuardSlack;
    }

    // Cached constants at >= prec bits (rounded to the cache granularity).
    HPReal euler(long prec) const { return constant(Kind::kEuler, prec); }
    HPReal pi(long prec) const { return constant(Kind::kPi, prec); }
    HPReal ln2(long prec) const { return constant(Kind::kLn2, prec); }

  private:
    friend PrecisionContext make_context(long bits);
    static constexpr long kGuardSlack = 32;

    enum class Kind { kEuler, kPi, kLn2 };
    struct Cache {
        std::mutex mu;
        std::map<std::pair<int, long>, HPReal> values;
    };

    explicit PrecisionContext(long bits) : bits_(bits), cache_(std::make_shared<Cache>()) {}
    HPReal constant(Kind kind, long prec) const;

    long bits_;
    std::shared_ptr<Cache> cache_;
};

// bits >= 64 or DomainError. Defaulted argument gives the 4000-bit
// operating point used throughout.
PrecisionContext make_context(long bits = PrecisionContext::kDefaultBits);

}  // namespace bm
