#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "qkh/model.hpp"
#include "qkh/smatrix.hpp"
#include "qkh/topo.hpp"

using namespace qkh;

TEST_CASE("descendant recursion holds on the point model") {
    FrobeniusModel m = pt_model(10, 0);
    SMatrixData sm = solve_s(m, 8);
    MetricData md = metric(m, sm);
    DescendantArena ar{3, 5, m.dim, m.rank, m.capq};
    std::vector<TruncSeries> tau = solve_tau(m, sm, ar);

    for (int k = 1; k <= 3; ++k)
        for (int k2 = 0; k2 <= 1; ++k2)
            for (int k3 = 0; k3 <= 1; ++k3) {
                CheckReport rep = verify_trr(m, sm, md, ar, tau, k, k2, k3, 0, 0);
                for (const auto& [name, ok] : rep.checks) {
                    INFO("k=" << k << " k2=" << k2 << " k3=" << k3 << ": " << name);
                    REQUIRE(ok);
                }
            }
}

TEST_CASE("descendant recursion holds on the split two-point model") {
    FrobeniusModel m = pt2_model(10, 0);
    SMatrixData sm = solve_s(m, 8);
    MetricData md = metric(m, sm);
    DescendantArena ar{1, 4, m.dim, m.rank, m.capq};
    std::vector<TruncSeries> tau = solve_tau(m, sm, ar);
    for (int j2 = 0; j2 < 2; ++j2) {
        CheckReport rep = verify_trr(m, sm, md, ar, tau, 1, 0, 0, j2, 1 - j2);
        for (const auto& [name, ok] : rep.checks) {
            INFO("j2=" << j2 << ": " << name);
            REQUIRE(ok);
        }
    }
}

TEST_CASE("descendant recursion rejects out-of-range orders") {
    FrobeniusModel m = pt_model(10, 0);
    SMatrixData sm = solve_s(m, 6);
    MetricData md = metric(m, sm);
    DescendantArena ar{2, 4, m.dim, m.rank, m.capq};
    std::vector<TruncSeries> tau = solve_tau(m, sm, ar);
    REQUIRE_THROWS_AS(verify_trr(m, sm, md, ar, tau, 0, 0, 0, 0, 0), error);
    REQUIRE_THROWS_AS(verify_trr(m, sm, md, ar, tau, 3, 0, 0, 0, 0), error);
}
