#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bm/precision.hpp"
#include "bm/rng.hpp"

using namespace bm;

TEST_CASE("make_context enforces the 64-bit floor and the 4000-bit default") {
    CHECK(make_context().bits() == 4000);
    CHECK(make_context(64).bits() == 64);
    CHECK_THROWS_AS(make_context(32), DomainError);
    CHECK_THROWS_AS(make_context(63), DomainError);
}

TEST_CASE("guard policy adds cancellation bits plus slack") {
    PrecisionContext ctx = make_context(128);
    CHECK(ctx.working_bits() == 160);
    CHECK(ctx.working_bits(100) == 260);
    CHECK(ctx.working_bits(-5) == 160);  // guard bits never negative
}

TEST_CASE("binomial small exact cases") {
    CHECK(binomial(4, 2) == BigInt(6));
    CHECK(binomial(0, 0) == BigInt(1));
    CHECK(binomial(17, 0) == BigInt(1));
    CHECK(binomial(1000, 0) == BigInt(1));
    CHECK(binomial(3, 5) == BigInt(0));
}

namespace {

// Pascal-recurrence oracle, independent of GMP's binomial.
BigInt pascal(unsigned n, unsigned m) {
    if (m > n) return BigInt(0);
    std::vector<BigInt> row(n + 1, BigInt(0));
    row[0] = BigInt(1);
    for (unsigned i = 1; i <= n; ++i)
        for (unsigned j = std::min(i, m); j >= 1; --j) row[j] = row[j] + row[j - 1];
    return row[m];
}

}  // namespace

TEST_CASE("binomial matches the Pascal recurrence") {
    RngStream rng(0xb1u, 7);
    for (int trial = 0; trial < 200; ++trial) {
        unsigned n = static_cast<unsigned>(rng.next_u64() % 65);
        unsigned m = n == 0 ? 0 : static_cast<unsigned>(rng.next_u64() % (n + 1));
        CHECK(binomial(n, m) == pascal(n, m));
    }
    // 160-bit-scale value
    BigInt big = binomial(200, 100);
    CHECK(big == pascal(200, 100));
    CHECK(big.bit_length() >= 150);
}

TEST_CASE("rational round-trip through HPReal stays within 2^(1-p)") {
    RngStream rng(42, 0);
    for (long p : {64L, 128L, 333L}) {
        for (int trial = 0; trial < 50; ++trial) {
            long num = static_cast<long>(rng.next_u64() % 2000000) - 1000000;
            unsigned long den = 1 + rng.next_u64() % 999983;
            if (num == 0) num = 17;
            ExactRational q(num, den);
            HPReal h = HPReal::from_rational(q, p);
            ExactRational back = h.to_rational_exact();
            ExactRational rel = (back - q) / q;
            double r = std::fabs(HPReal::from_rational(rel, 64).to_double());
            CHECK(r <= std::ldexp(1.0, static_cast<int>(1 - p)));
        }
    }
}

TEST_CASE("exp(ln z) = z within 4 ulp across 60 orders of magnitude") {
    PrecisionContext ctx = make_context(256);
    RngStream rng(7, 1);
    for (int trial = 0; trial < 300; ++trial) {
        // log-uniform z in (1e-30, 1e30)
        double e = (rng.uniform01() * 60.0) - 30.0;
        HPReal z = HPReal::from_double(std::pow(10.0, e), ctx.bits());
        HPReal w = exp(log(z));
        HPReal ulp_err = abs(w - z) / z;
        CHECK(ulp_err.to_double() <= std::ldexp(4.0, -256));
    }
}

TEST_CASE("ExactRational arithmetic is exact and canonical") {
    ExactRational a(1, 3), b(1, 6);
    CHECK(a + b == ExactRational(1, 2));
    CHECK(a - b == ExactRational(1, 6));
    CHECK(a * b == ExactRational(1, 18));
    CHECK(a / b == ExactRational(2));
    CHECK((a + b).denominator() == BigInt(2));  // reduced form
    CHECK(ExactRational(-4, 8).to_string() == "-1/2");
    CHECK_THROWS_AS(a / ExactRational(0), DomainError);
}

TEST_CASE("decimal parsing is exact") {
    CHECK(ExactRational::from_decimal("2.54") == ExactRational(254, 100));
    CHECK(ExactRational::from_decimal("0.01") == ExactRational(1, 100));
    CHECK(ExactRational::from_decimal("-1.5e-3") == ExactRational(-15, 10000));
    CHECK(ExactRational::from_decimal("33") == ExactRational(33));
    CHECK(ExactRational::from_decimal("1E2") == ExactRational(100));
    CHECK_THROWS_AS(ExactRational::from_decimal("abc"), FormatError);
    CHECK_THROWS_AS(ExactRational::from_decimal("1.2.3"), FormatError);
}

TEST_CASE("decimal rendering round-trips the paper's table format") {
    HPReal v = HPReal::from_decimal("5.60961512572e-1", 256);
    CHECK(v.to_decimal(12) == "5.60961512572e-1");
    HPReal tiny = HPReal::from_decimal("9.24257424322e-12", 256);
    CHECK(tiny.to_decimal(12) == "9.24257424322e-12");
    HPReal neg = HPReal::from_decimal("-1.5", 64);
    CHECK(neg.to_decimal(3) == "-1.50e0");
    CHECK(HPReal::from_long(0, 64).to_decimal(12) == "0");
}

TEST_CASE("cached constants agree across precisions") {
    PrecisionContext ctx = make_context(128);
    HPReal g1 = ctx.euler(128);
    HPReal g2 = ctx.euler(1024);
    CHECK(abs(g1 - g2).to_double() <= std::ldexp(1.0, -126));
    CHECK(ctx.pi(256).to_double() == doctest::Approx(3.14159265358979));
    CHECK(ctx.ln2(256).to_double() == doctest::Approx(0.693147180559945));
}
