#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "qkh/model.hpp"
#include "qkh/smatrix.hpp"
#include "qkh/string_oracle.hpp"
#include "qkh/topo.hpp"

using namespace qkh;

namespace {

// y^k as an oracle insertion (y = L - 1).
OracleInsertion ypow(int k) {
    OracleInsertion f(static_cast<std::size_t>(k) + 1, Rat(0));
    f[static_cast<std::size_t>(k)] = Rat(1);
    return f;
}

TruncSeries arena_const(const DescendantArena& ar, const Rat& c) {
    return TruncSeries::constant(c, ar.nq, ar.nt(), ar.capq, ar.dt);
}

} // namespace

TEST_CASE("without descendants the fixed point is the coordinate itself") {
    FrobeniusModel m = pt_model(10, 0);
    SMatrixData sm = solve_s(m, 4);
    DescendantArena ar{0, 5, m.dim, m.rank, m.capq};
    std::vector<TruncSeries> tau = solve_tau(m, sm, ar);
    REQUIRE(tau[0] == ar.t_var(0, 0));
}

TEST_CASE("first-descendant fixed point is the geometric sum") {
    FrobeniusModel m = pt_model(10, 0);
    SMatrixData sm = solve_s(m, 4);
    DescendantArena ar{1, 5, m.dim, m.rank, m.capq};
    std::vector<TruncSeries> tau = solve_tau(m, sm, ar);
    // tau = t0 + tau * t1 resolves to t0 (1 + t1 + t1^2 + ...) within the cap.
    TruncSeries expected = ar.zero();
    TruncSeries t1pow = arena_const(ar, Rat(1));
    for (int k = 0; k + 1 <= ar.dt; ++k) {
        expected += ar.t_var(0, 0) * t1pow;
        t1pow = t1pow * ar.t_var(1, 0);
    }
    REQUIRE(tau[0] == expected);
}

TEST_CASE("fixed point needs the S-matrix solved deep enough") {
    FrobeniusModel m = pt_model(10, 0);
    SMatrixData sm = solve_s(m, 2);
    DescendantArena ar{3, 4, m.dim, m.rank, m.capq};
    REQUIRE_THROWS_AS(solve_tau(m, sm, ar), error);
}

TEST_CASE("Laurent plus-projection at one reproduces the fixed point") {
    FrobeniusModel m = pt_model(10, 0);
    SMatrixData sm = solve_s(m, 8);
    DescendantArena ar{2, 5, m.dim, m.rank, m.capq};
    std::vector<TruncSeries> tau = solve_tau(m, sm, ar);
    std::vector<TruncSeries> proj = plus_project_at_one(m, sm, ar, tau);
    for (int a = 0; a < m.dim; ++a) REQUIRE(proj[a] == tau[a]);
}

TEST_CASE("plus-projection refuses models with an incomplete pole structure") {
    FrobeniusModel m = load_model("models/nov2.json");
    SMatrixData sm = solve_s(m, 3);
    DescendantArena ar{1, 3, m.dim, m.rank, m.capq};
    std::vector<TruncSeries> tau = solve_tau(m, sm, ar);
    REQUIRE_THROWS_AS(plus_project_at_one(m, sm, ar, tau), incomplete_poles);
}

TEST_CASE("hierarchy flows move the fixed point") {
    FrobeniusModel pt = pt_model(10, 0);
    SMatrixData smp = solve_s(pt, 8);
    DescendantArena arp{2, 5, pt.dim, pt.rank, pt.capq};
    std::vector<TruncSeries> taup = solve_tau(pt, smp, arp);
    for (const auto& [name, ok] : verify_descendant_flows(pt, smp, arp, taup, 2).checks) {
        INFO(name);
        REQUIRE(ok);
    }
    REQUIRE_THROWS_AS(verify_descendant_flows(pt, smp, arp, taup, 9), error);

    FrobeniusModel m2 = pt2_model(10, 0);
    SMatrixData sm2 = solve_s(m2, 8);
    DescendantArena ar2{2, 4, m2.dim, m2.rank, m2.capq};
    std::vector<TruncSeries> tau2 = solve_tau(m2, sm2, ar2);
    for (const auto& [name, ok] : verify_descendant_flows(m2, sm2, ar2, tau2, 2).checks) {
        INFO(name);
        REQUIRE(ok);
    }
}

TEST_CASE("primary-only topological solution is the exponential") {
    FrobeniusModel m = pt_model(10, 0);
    SMatrixData sm = solve_s(m, 8);
    DescendantArena ar{0, 6, m.dim, m.rank, m.capq};
    std::vector<TruncSeries> tau = solve_tau(m, sm, ar);
    std::vector<TruncSeries> w = topological_solution(m, sm, ar, tau);
    TruncSeries expected = series_exp(ar.t_var(0, 0)) - arena_const(ar, Rat(1));
    REQUIRE(w[0] == expected);
}

TEST_CASE("descendant solution matches the insertion oracle through degree five") {
    FrobeniusModel m = pt_model(10, 0);
    SMatrixData sm = solve_s(m, 8);
    DescendantArena ar{2, 5, m.dim, m.rank, m.capq};
    std::vector<TruncSeries> tau = solve_tau(m, sm, ar);
    std::vector<TruncSeries> w = topological_solution(m, sm, ar, tau);

    // Every coefficient of w is a correlator with two extra unit insertions,
    // weighted by the product of multiplicities' factorials.
    TruncSeries expected = ar.zero();
    for (int m0 = 0; m0 <= 5; ++m0)
        for (int m1 = 0; m0 + m1 <= 5; ++m1)
            for (int m2 = 0; m0 + m1 + m2 <= 5; ++m2) {
                if (m0 + m1 + m2 == 0) continue;
                std::vector<OracleInsertion> ins = {{Rat(1)}, {Rat(1)}};
                for (int c = 0; c < m0; ++c) ins.push_back(ypow(0));
                for (int c = 0; c < m1; ++c) ins.push_back(ypow(1));
                for (int c = 0; c < m2; ++c) ins.push_back(ypow(2));
                Rat coeff = string_oracle_point(ins) /
                            (factorial(m0) * factorial(m1) * factorial(m2));
                if (coeff == 0) continue;
                TruncSeries mono = arena_const(ar, coeff);
                for (int c = 0; c < m0; ++c) mono = mono * ar.t_var(0, 0);
                for (int c = 0; c < m1; ++c) mono = mono * ar.t_var(1, 0);
                for (int c = 0; c < m2; ++c) mono = mono * ar.t_var(2, 0);
                expected += mono;
            }
    REQUIRE(w[0] == expected);
}

TEST_CASE("derivative along the unit direction") {
    FrobeniusModel m = pt2_model(10, 0);
    DescendantArena ar{1, 4, m.dim, m.rank, m.capq};
    TruncSeries f = ar.t_var(0, 0) * ar.t_var(0, 0) + ar.t_var(0, 1) * ar.t_var(1, 0);
    TruncSeries d = unit_direction_derivative(m, ar, f);
    REQUIRE(d == ar.t_var(0, 0) * Rat(2) + ar.t_var(1, 0));
}
