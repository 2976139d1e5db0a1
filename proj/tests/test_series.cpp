// Exact-arithmetic core: rationals, truncated multivariate series, dense
// matrices over them, and finite Laurent objects in u = (q-1)^{-1}.

#include <catch2/catch_amalgamated.hpp>

#include "qkh/matrix.hpp"
#include "qkh/rational.hpp"
#include "qkh/series.hpp"
#include "qkh/ulaurent.hpp"

using namespace qkh;

namespace {
TruncSeries vvar(int i, int nv = 2, int capv = 8) { return TruncSeries::v_var(i, 0, nv, 0, capv); }
TruncSeries cnum(const Rat& c, int nv = 2, int capv = 8) {
    return TruncSeries::constant(c, 0, nv, 0, capv);
}
} // namespace

TEST_CASE("rational helpers") {
    CHECK(rat(4, 6) == rat(2, 3));
    CHECK(to_string(rat(-8, 6)) == "-4/3");
    CHECK(factorial(6) == 720);
    CHECK(binomial(9, 6) == 84);
    CHECK(binomial(5, 0) == 1);
    CHECK(binomial(3, 5) == 0);
    CHECK(pow(rat(2, 3), -2) == rat(9, 4));
}

TEST_CASE("series ring laws on sample elements") {
    TruncSeries a = vvar(0) + cnum(rat(1, 2)) * vvar(1) * vvar(1);
    TruncSeries b = cnum(3) - vvar(1);
    TruncSeries c = vvar(0) * vvar(1) + cnum(rat(-2, 7));
    CHECK(a * b == b * a);
    CHECK((a + b) * c == a * c + b * c);
    CHECK(a - a == TruncSeries(0, 2, 0, 8));
    CHECK((a * b) * c == a * (b * c));
}

TEST_CASE("series truncation drops over-cap monomials") {
    TruncSeries v = TruncSeries::v_var(0, 0, 1, 0, 8);
    TruncSeries p = v;
    for (int k = 1; k < 5; ++k) p = p * v; // v^5
    CHECK(p.max_vdeg() == 5);
    CHECK((p * p).is_zero());                 // v^10 beyond capv = 8
    CHECK(!(p * v * v * v).is_zero());        // v^8 survives exactly at the cap
    CHECK((p * v * v * v * v).is_zero());     // v^9 dropped
    CHECK(p.truncated(0, 4).is_zero());
    CHECK(p.truncated_total(5) == p);
}

TEST_CASE("series inversion is exact to the cap") {
    TruncSeries one = cnum(1);
    TruncSeries a = cnum(rat(2, 3)) + vvar(0) + cnum(rat(1, 5)) * vvar(1);
    CHECK(a * a.invert() == one);
    CHECK_THROWS_AS(vvar(0).invert(), not_a_unit);
}

TEST_CASE("differentiation and integration") {
    TruncSeries a = vvar(0) * vvar(0) * vvar(1) + cnum(4) * vvar(1);
    CHECK(a.diff(0) == cnum(2) * vvar(0) * vvar(1));
    CHECK(a.diff(0).integrate(0) == vvar(0) * vvar(0) * vvar(1));
    CHECK(a.integrate(1).diff(1) == a);
    // Leibniz rule.
    TruncSeries b = cnum(rat(1, 3)) + vvar(0) * vvar(0);
    CHECK((a * b).diff(0) == a.diff(0) * b + a * b.diff(0));
}

TEST_CASE("composition substitutes coordinate images") {
    // f(v0, v1) = v0^2 + v1 evaluated at v0 -> x + y, v1 -> x*y.
    TruncSeries f = vvar(0) * vvar(0) + vvar(1);
    TruncSeries x = vvar(0), y = vvar(1);
    TruncSeries got = f.compose({x + y, x * y});
    CHECK(got == x * x + cnum(3) * x * y + y * y);
    CHECK_THROWS_AS(f.compose({x}), arity_mismatch);
}

TEST_CASE("exp and log1p invert one another") {
    TruncSeries a = vvar(0) + cnum(rat(2, 3)) * vvar(1) * vvar(1);
    TruncSeries e = series_exp(a);
    CHECK(e.constant_term() == 1);
    CHECK(series_log1p(e - cnum(1)) == a);
    // exp turns sums into products.
    TruncSeries b = cnum(rat(-1, 4)) * vvar(1);
    CHECK(series_exp(a + b) == series_exp(a) * series_exp(b));
    CHECK_THROWS_AS(series_exp(cnum(1)), error);
}

TEST_CASE("Novikov specialization and evaluation") {
    TruncSeries s(1, 1, 3, 4);
    s += TruncSeries::q_var(0, 1, 1, 3, 4) * TruncSeries::v_var(0, 1, 1, 3, 4);
    s += TruncSeries::constant(rat(1, 2), 1, 1, 3, 4);
    TruncSeries sp = s.specialize_q({rat(2)});
    CHECK(sp.nq() == 0);
    CHECK(sp == TruncSeries::v_var(0, 0, 1, 0, 4) * rat(2) +
                    TruncSeries::constant(rat(1, 2), 0, 1, 0, 4));
    CHECK(s.evaluate_rat({rat(3)}, {rat(1, 3)}) == rat(3, 2));
}

TEST_CASE("rational matrix inverse is exact") {
    RatMat m(3, 3, Rat(0));
    m(0, 0) = 2; m(0, 1) = rat(1, 3); m(0, 2) = 1;
    m(1, 0) = 0; m(1, 1) = 5;         m(1, 2) = rat(-2, 7);
    m(2, 0) = 1; m(2, 1) = 1;         m(2, 2) = 4;
    CHECK(rat_inverse(m) * m == rat_identity(3));
    RatMat sing(2, 2, Rat(1));
    CHECK_THROWS_AS(rat_inverse(sing), not_a_unit);
}

TEST_CASE("series matrix inverse handles non-identity constant part") {
    int capv = 6;
    TruncSeries v0 = TruncSeries::v_var(0, 0, 2, 0, capv);
    TruncSeries v1 = TruncSeries::v_var(1, 0, 2, 0, capv);
    auto kc = [&](const Rat& c) { return TruncSeries::constant(c, 0, 2, 0, capv); };
    SeriesMat m(2, 2, TruncSeries(0, 2, 0, capv));
    m(0, 0) = kc(2) + v0;
    m(0, 1) = v1 * v1;
    m(1, 0) = kc(rat(1, 3)) + v0 * v1;
    m(1, 1) = kc(-1) + v1;
    SeriesMat inv = series_mat_inverse(m);
    CHECK(mat_is_zero(m * inv - series_identity(2, 0, 2, 0, capv)));
    CHECK(mat_is_zero(inv * m - series_identity(2, 0, 2, 0, capv)));
}

TEST_CASE("u-Laurent plus part, residue, and q-inversion") {
    int ucap = 8;
    TruncSeries zero(0, 1, 0, 4);
    auto kc = [&](const Rat& c) { return TruncSeries::constant(c, 0, 1, 0, 4); };
    UScalar a(ucap, zero);
    a.set_coeff(-2, kc(5));  // 5 (q-1)^2
    a.set_coeff(0, kc(7));
    a.set_coeff(3, kc(rat(1, 2)));
    CHECK(a.residue_at_infinity(2) == kc(rat(1, 2)));
    CHECK(a.residue_at_infinity(0).is_zero());
    UScalar plus = a.plus_part();
    CHECK(plus.coeff(-2) == kc(5));
    CHECK(plus.coeff(0) == kc(7));
    CHECK(plus.coeff(3).is_zero());
    CHECK(a.plus_part_at_one() == kc(7));

    // u -> -(1+u) is an involution on the polynomial (k >= 0) part.
    UScalar p(ucap, zero);
    p.set_coeff(0, kc(3));
    p.set_coeff(2, kc(rat(-2, 9)));
    p.set_coeff(4, kc(1));
    CHECK(p.substitute_qinv().substitute_qinv() == p);
    // and a ring map: check multiplicativity on low-degree data where the
    // product stays below the cap.
    UScalar q1(ucap, zero), q2(ucap, zero);
    q1.set_coeff(1, kc(2));
    q2.set_coeff(0, kc(1));
    q2.set_coeff(2, kc(rat(1, 3)));
    UScalar lhs = (q1 * q2).substitute_qinv();
    UScalar rhs = q1.substitute_qinv() * q2.substitute_qinv();
    for (int k = 0; k <= ucap - 1; ++k) CHECK(lhs.coeff(k) == rhs.coeff(k));

    // Evaluation at a rational q-point matches the closed form.
    CHECK(a.evaluate_at_q(rat(3)) == kc(5 * 4 + 7) + kc(rat(1, 2)) * pow(rat(1, 2), 3));
    CHECK_THROWS_AS(a.evaluate_at_q(rat(1)), pole_at_one);
}

TEST_CASE("2/(1+q) expansion multiplies back to 2") {
    int ucap = 8;
    TruncSeries zero(0, 1, 0, 4);
    auto kc = [&](const Rat& c) { return TruncSeries::constant(c, 0, 1, 0, 4); };
    UScalar f = two_over_one_plus_q(ucap, 0, 1, 0, 4);
    UScalar oneplusq(ucap, zero); // 1 + q = 2 + (q-1)
    oneplusq.set_coeff(0, kc(2));
    oneplusq.set_coeff(-1, kc(1));
    UScalar prod = oneplusq * f;
    CHECK(prod.coeff(0) == kc(2));
    for (int k = 1; k <= ucap - 1; ++k) CHECK(prod.coeff(k).is_zero());
    CHECK(prod.min_power() == 0);
}

TEST_CASE("u-series inversion terminates and is two-sided") {
    int ucap = 6;
    TruncSeries zero(0, 1, 0, 4);
    auto kc = [&](const Rat& c) { return TruncSeries::constant(c, 0, 1, 0, 4); };
    UScalar a(ucap, zero);
    a.set_coeff(0, kc(rat(3, 2)));
    a.set_coeff(1, kc(-1));
    a.set_coeff(3, kc(rat(2, 5)));
    UScalar inv = ulaurent_invert(a, [](const TruncSeries& t) { return t.invert(); });
    UScalar prod = a * inv;
    CHECK(prod.coeff(0) == kc(1));
    for (int k = 1; k <= ucap; ++k) CHECK(prod.coeff(k).is_zero());
    UScalar neg(ucap, zero);
    neg.set_coeff(-1, kc(1));
    CHECK_THROWS_AS(ulaurent_invert(neg, [](const TruncSeries& t) { return t.invert(); }),
                    not_a_unit);
}
