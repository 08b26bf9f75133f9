// test_weight.cpp - exact weight domain and operator laws
#include "treeproj/weight.hpp"

#include "treeproj/errors.hpp"

#include <doctest.h>

#include <random>
#include <vector>

using namespace treeproj;

TEST_CASE("rational parsing and exact decimal round-trips") {
    CHECK(parse_rational("3") == Rational(3));
    CHECK(parse_rational("-3.25") == Rational(-13, 4));
    CHECK(parse_rational("0.1") == Rational(1, 10));
    CHECK(parse_rational("3/4") == Rational(3, 4));
    CHECK(rational_to_string(Rational(-13, 4)) == "-3.25");
    CHECK(rational_to_string(Rational(1, 3)) == "1/3");
    CHECK(rational_to_string(Rational(7)) == "7");
    CHECK(parse_rational(rational_to_string(Rational(123456789, 128))) ==
          Rational(123456789, 128));
    CHECK_THROWS_AS(parse_rational("abc"), NonNumericToken);
    CHECK_THROWS_AS(parse_rational("1.2.3"), NonNumericToken);
}

TEST_CASE("weight order: bottom below everything, posinf above") {
    Weight b = Weight::bottom();
    Weight w0 = Weight::finite(0);
    Weight w1 = Weight::finite(Rational(1, 2));
    Weight inf = Weight::pos_inf();
    CHECK(b < w0);
    CHECK(w0 < w1);
    CHECK(w1 < inf);
    CHECK(weight_max(b, w1) == w1);
    CHECK(weight_min(b, w1) == b);
}

TEST_CASE("weight token round-trip") {
    for (const auto& t : {"-3.25", "7", "0.5", "%bot%", "%inf%"}) {
        Weight w = Weight::from_token(t);
        CHECK(Weight::from_token(w.to_token()) == w);
    }
    // non-decimal rationals survive via the fraction form
    Weight third = Weight::finite(Rational(1, 3));
    CHECK(Weight::from_token(third.to_token()) == third);
}

TEST_CASE("operator laws on sampled rationals") {
    std::mt19937_64 rng(5);
    auto sample = [&](bool non_negative) {
        long num = static_cast<long>(rng() % 41) - (non_negative ? 0 : 20);
        long den = 1 + static_cast<long>(rng() % 8);
        return Weight::finite(Rational(num, den));
    };
    for (OperatorKind op : {OperatorKind::Sum, OperatorKind::Product, OperatorKind::Min}) {
        bool nn = op == OperatorKind::Product;
        for (int i = 0; i < 300; ++i) {
            Weight a = sample(nn), b = sample(nn), c = sample(nn);
            CHECK(apply(op, a, b) == apply(op, b, a));
            CHECK(apply(op, apply(op, a, b), c) == apply(op, a, apply(op, b, c)));
            // distributivity over max
            CHECK(apply(op, a, weight_max(b, c)) ==
                  weight_max(apply(op, a, b), apply(op, a, c)));
            // bottom absorbs
            CHECK(apply(op, a, Weight::bottom()).is_bottom());
            CHECK(apply(op, Weight::bottom(), a).is_bottom());
        }
        // neutral element
        for (int i = 0; i < 50; ++i) {
            Weight a = sample(nn);
            CHECK(apply(op, a, neutral(op)) == a);
            CHECK(apply(op, neutral(op), a) == a);
        }
    }
}

TEST_CASE("negation is involutive and order-reversing") {
    Weight a = Weight::finite(Rational(3, 2));
    Weight b = Weight::finite(Rational(-1, 2));
    CHECK(a.negated().negated() == a);
    CHECK(b < a);
    CHECK(a.negated() < b.negated());
    CHECK(Weight::bottom().negated().is_bottom());
}
