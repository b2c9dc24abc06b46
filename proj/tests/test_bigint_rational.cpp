#include "doctest.h"

#include <cstdint>
#include <limits>
#include <random>

#include "nn2flow/bigint.hpp"
#include "nn2flow/rational.hpp"

using nn2flow::BigInt;
using nn2flow::Rational;

namespace {

BigInt big_from_i128(__int128 v) { return BigInt::from_i128(v); }

__int128 rand_i128(std::mt19937_64& rng, int bits) {
    unsigned __int128 m = 0;
    for (int i = 0; i < bits; i += 32) m = (m << 32) | static_cast<std::uint32_t>(rng());
    m &= (static_cast<unsigned __int128>(1) << bits) - 1;
    __int128 v = static_cast<__int128>(m);
    if (rng() & 1) v = -v;
    return v;
}

}  // namespace

TEST_CASE("bigint small arithmetic matches native") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 2000; ++i) {
        std::int64_t a = static_cast<std::int64_t>(rng()) >> (rng() % 40);
        std::int64_t b = static_cast<std::int64_t>(rng()) >> (rng() % 40);
        BigInt A(a), B(b);
        CHECK((A + B) == big_from_i128(static_cast<__int128>(a) + b));
        CHECK((A - B) == big_from_i128(static_cast<__int128>(a) - b));
        CHECK((A * B) == big_from_i128(static_cast<__int128>(a) * b));
        if (b != 0) {
            auto [q, r] = BigInt::divmod(A, B);
            __int128 nq = static_cast<__int128>(a) / b;
            __int128 nr = static_cast<__int128>(a) % b;
            CHECK(q == big_from_i128(nq));
            CHECK(r == big_from_i128(nr));
        }
        CHECK((a < b) == (A < B));
        CHECK((a == b) == (A == B));
    }
}

TEST_CASE("bigint int64 boundary cases") {
    std::int64_t mn = std::numeric_limits<std::int64_t>::min();
    std::int64_t mx = std::numeric_limits<std::int64_t>::max();
    BigInt a(mn), b(mx);
    CHECK((a + b) == BigInt(-1));
    CHECK((-a) == big_from_i128(-static_cast<__int128>(mn)));
    CHECK((b + BigInt(1)) == big_from_i128(static_cast<__int128>(mx) + 1));
    CHECK((a - BigInt(1)) == big_from_i128(static_cast<__int128>(mn) - 1));
    auto [q, r] = BigInt::divmod(a, BigInt(-1));
    CHECK(q == big_from_i128(-static_cast<__int128>(mn)));
    CHECK(r == BigInt(0));
    CHECK(a.to_string() == "-9223372036854775808");
    CHECK(b.to_string() == "9223372036854775807");
}

TEST_CASE("bigint wide products and divmod identities") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 500; ++i) {
        __int128 a = rand_i128(rng, 100);
        __int128 b = rand_i128(rng, 60);
        BigInt A = big_from_i128(a), B = big_from_i128(b);
        BigInt P = A * B;
        if (b != 0) {
            auto [q, r] = BigInt::divmod(P + big_from_i128(b / 3), B);
            // a*b + c = q*b + r with |r| < |b| and sign(r) == sign of dividend
            CHECK((q * B + r) == (P + big_from_i128(b / 3)));
            CHECK(r.abs() < B.abs());
        }
        CHECK((P + (-P)) == BigInt(0));
    }
    // 2^256 via repeated squaring, checked against decimal string
    BigInt big(2);
    for (int i = 0; i < 8; ++i) big = big * big;
    CHECK(big.to_string() ==
          "115792089237316195423570985008687907853269984665640564039457584007913129639936");
}

TEST_CASE("bigint gcd") {
    CHECK(BigInt::gcd(BigInt(0), BigInt(0)) == BigInt(0));
    CHECK(BigInt::gcd(BigInt(0), BigInt(-6)) == BigInt(6));
    CHECK(BigInt::gcd(BigInt(12), BigInt(18)) == BigInt(6));
    std::mt19937_64 rng(99);
    for (int i = 0; i < 200; ++i) {
        __int128 g = rand_i128(rng, 40);
        if (g < 0) g = -g;
        if (g == 0) g = 1;
        __int128 a = g * (rng() % 100000), b = g * (rng() % 100000);
        BigInt G = BigInt::gcd(big_from_i128(a), big_from_i128(b));
        if (a != 0 || b != 0) {
            CHECK((big_from_i128(a) % G) == BigInt(0));
            CHECK((big_from_i128(b) % G) == BigInt(0));
            CHECK((G % big_from_i128(g)) == BigInt(0));
        }
    }
}

TEST_CASE("rational canonical form") {
    Rational a(BigInt(4), BigInt(-6));
    CHECK(a.num() == BigInt(-2));
    CHECK(a.den() == BigInt(3));
    Rational z(BigInt(0), BigInt(-5));
    CHECK(z.num() == BigInt(0));
    CHECK(z.den() == BigInt(1));
    CHECK(Rational(BigInt(7), BigInt(7)) == Rational(1));
}

TEST_CASE("rational field identities on randoms") {
    std::mt19937_64 rng(5);
    auto rnd = [&]() {
        std::int64_t n = static_cast<std::int64_t>(rng() % 2001) - 1000;
        std::int64_t d = static_cast<std::int64_t>(rng() % 999) + 1;
        return Rational(BigInt(n), BigInt(d));
    };
    for (int i = 0; i < 500; ++i) {
        Rational a = rnd(), b = rnd(), c = rnd();
        CHECK((a + b) - b == a);
        CHECK(a * (b + c) == a * b + a * c);
        if (!b.is_zero()) CHECK((a / b) * b == a);
        CHECK((a - a).is_zero());
    }
}

TEST_CASE("rational ordering, floor and ceil") {
    Rational half(BigInt(1), BigInt(2));
    Rational neg_half(BigInt(-1), BigInt(2));
    CHECK(half > neg_half);
    CHECK(half.floor() == BigInt(0));
    CHECK(half.ceil() == BigInt(1));
    CHECK(neg_half.floor() == BigInt(-1));
    CHECK(neg_half.ceil() == BigInt(0));
    CHECK(Rational(3).floor() == BigInt(3));
    CHECK(Rational(-3).ceil() == BigInt(-3));
}

TEST_CASE("rational string rendering") {
    CHECK(Rational(BigInt(-2), BigInt(3)).to_string() == "-2/3");
    CHECK(Rational(5).to_string() == "5");
    CHECK(Rational(BigInt(1), BigInt(2)).to_decimal(1) == "0.5");
    CHECK(Rational(BigInt(-1), BigInt(3)).to_decimal(2) == "-0.33");
    CHECK(Rational(BigInt(149), BigInt(1000)).to_decimal(1) == "0.1");
    CHECK(Rational(BigInt(151), BigInt(1000)).to_decimal(1) == "0.2");
    CHECK(Rational(BigInt(15), BigInt(100)).to_decimal(1) == "0.2");  // half away from zero
    CHECK(Rational(BigInt(-15), BigInt(100)).to_decimal(1) == "-0.2");
    CHECK(Rational(522, 10).to_decimal(1) == "52.2");
    CHECK(Rational(0).to_decimal(2) == "0.00");
}
