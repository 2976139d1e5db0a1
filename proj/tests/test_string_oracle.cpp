#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "qkh/string_oracle.hpp"

using namespace qkh;

namespace {

OracleInsertion unit() { return {Rat(1)}; }

OracleInsertion ypow(int k) {
    OracleInsertion f(static_cast<std::size_t>(k) + 1, Rat(0));
    f[static_cast<std::size_t>(k)] = Rat(1);
    return f;
}

} // namespace

TEST_CASE("three-point values are products at the trivial class") {
    REQUIRE(string_oracle_point({unit(), unit(), unit()}) == Rat(1));
    REQUIRE(string_oracle_point({unit(), ypow(1), unit()}) == Rat(0));
    REQUIRE(string_oracle_point({{rat(1, 2)}, {Rat(3)}, {Rat(2), Rat(5)}}) == Rat(3));
}

TEST_CASE("string equation reduces higher-point values") {
    REQUIRE(string_oracle_point({unit(), unit(), unit(), unit()}) == Rat(1));
    REQUIRE(string_oracle_point({unit(), unit(), unit(), ypow(1)}) == Rat(1));
    REQUIRE(string_oracle_point({unit(), unit(), unit(), ypow(2)}) == Rat(0));
    REQUIRE(string_oracle_point({unit(), unit(), unit(), unit(), ypow(1)}) == Rat(2));
    REQUIRE(string_oracle_point({unit(), unit(), ypow(1), ypow(1)}) == Rat(0));
}

TEST_CASE("values are linear in each insertion") {
    OracleInsertion mix = {Rat(0), Rat(3), Rat(2)}; // 3y + 2y^2
    Rat lhs = string_oracle_point({unit(), unit(), unit(), mix});
    Rat rhs = Rat(3) * string_oracle_point({unit(), unit(), unit(), ypow(1)}) +
              Rat(2) * string_oracle_point({unit(), unit(), unit(), ypow(2)});
    REQUIRE(lhs == rhs);
}

TEST_CASE("a vanishing constant insertion kills the value") {
    REQUIRE(string_oracle_point({{Rat(0)}, unit(), unit(), ypow(1)}) == Rat(0));
}

TEST_CASE("the oracle rejects fewer than three insertions") {
    REQUIRE_THROWS_AS(string_oracle_point({unit(), unit()}), oracle_incomplete);
}

TEST_CASE("correlators whose insertions all vanish at the trivial class are zero") {
    REQUIRE(string_oracle_point(std::vector<OracleInsertion>(4, ypow(1))) == Rat(0));
    REQUIRE(string_oracle_point(std::vector<OracleInsertion>(5, ypow(2))) == Rat(0));
    REQUIRE(string_oracle_point({ypow(1), ypow(2), ypow(1), ypow(1), ypow(2)}) == Rat(0));
}

namespace {

// L^a = (1 + y)^a as a coefficient vector.
OracleInsertion lpow(int a) {
    OracleInsertion f(static_cast<std::size_t>(a) + 1, Rat(0));
    Rat c(1);
    for (int k = 0; k <= a; ++k) {
        f[static_cast<std::size_t>(k)] = c;
        c = c * Rat(a - k) / Rat(k + 1);
    }
    return f;
}

} // namespace

TEST_CASE("four-point values match line bundle Euler characteristics") {
    // The four-point moduli space is the projective line and each cotangent
    // line has degree one, so the Euler characteristic of
    // L_1^{a_1} x ... x L_4^{a_4} is a_1 + a_2 + a_3 + a_4 + 1.
    for (int a1 = 0; a1 <= 3; ++a1)
        for (int a2 = 0; a2 <= 2; ++a2)
            for (int a3 = 0; a3 <= 2; ++a3)
                for (int a4 = 0; a4 <= 1; ++a4)
                    REQUIRE(string_oracle_point({lpow(a1), lpow(a2), lpow(a3), lpow(a4)}) ==
                            Rat(a1 + a2 + a3 + a4 + 1));
}

TEST_CASE("the oracle satisfies the dilaton identity") {
    // Appending one insertion y multiplies an m-point value by m - 2; the
    // oracle never applies this rule, so agreement is a genuine check.
    std::vector<std::vector<OracleInsertion>> bases = {
        {unit(), unit(), unit()},
        {unit(), unit(), ypow(1), ypow(2)},
        {lpow(2), lpow(1), unit(), ypow(1), lpow(3)},
        {{Rat(2), Rat(-1)}, {rat(1, 3), Rat(0), Rat(1)}, unit(), lpow(2)},
    };
    for (const auto& base : bases) {
        auto extended = base;
        extended.push_back(ypow(1));
        REQUIRE(string_oracle_point(extended) ==
                Rat(static_cast<int>(base.size()) - 2) * string_oracle_point(base));
    }
}
