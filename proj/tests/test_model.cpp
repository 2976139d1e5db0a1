// Model ingestion: built-ins, the JSON schema, structural validation, and
// Novikov specialization.

#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include "qkh/model.hpp"

using namespace qkh;
using nlohmann::json;

namespace {
json base_pt2_json() {
    return json::parse(R"({
      "schema_version": 1,
      "name": "j",
      "dim": 2,
      "novikov_rank": 0,
      "caps": {"v": 10, "q": 0},
      "unit_vector": ["1", "1"],
      "pairing_g": [["1", "0"], ["0", "1"]],
      "omega": [
        [{"matrix": [["1", "0"], ["0", "0"]]}],
        [{"matrix": [["0", "0"], ["0", "1"]]}]
      ]
    })");
}
} // namespace

TEST_CASE("built-in models validate") {
    CHECK_NOTHROW(validate_model(pt_model()));
    CHECK_NOTHROW(validate_model(pt2_model()));
    FrobeniusModel pt = pt_model(7);
    CHECK(pt.dim == 1);
    CHECK(pt.capv == 7);
    CHECK(pt.unit_omega() == pt.identity_mat());
    FrobeniusModel pt2 = pt2_model();
    CHECK(pt2.omega[0] + pt2.omega[1] == pt2.identity_mat());
}

TEST_CASE("file model reproduces the built-in two-point model") {
    FrobeniusModel file = load_model("models/pt2_file.json");
    FrobeniusModel builtin = pt2_model();
    CHECK(file.dim == builtin.dim);
    CHECK(file.rank == builtin.rank);
    CHECK(file.capv == builtin.capv);
    CHECK(file.capq == builtin.capq);
    CHECK(file.unit == builtin.unit);
    CHECK(file.g == builtin.g);
    REQUIRE(file.omega.size() == builtin.omega.size());
    for (std::size_t l = 0; l < file.omega.size(); ++l) CHECK(file.omega[l] == builtin.omega[l]);
    CHECK(file.pole_structure_complete);
}

TEST_CASE("rank-one file model ingests Novikov data") {
    FrobeniusModel m = load_model("models/nov2.json");
    CHECK(m.dim == 2);
    CHECK(m.rank == 1);
    CHECK(m.capq == 3);
    CHECK_FALSE(m.pole_structure_complete);
    CHECK(m.unit_index.has_value());
    // Phi_1 column structure: Phi_1 * Phi_0 = Phi_1, Phi_1 * Phi_1 = Q Phi_0.
    TruncSeries q = TruncSeries::q_var(0, 1, 2, 3, 6);
    CHECK(m.omega[1](0, 1) == q);
    CHECK(m.omega[1](1, 0) == m.const_series(Rat(1)));
    CHECK(m.omega[1](0, 0).is_zero());
    CHECK(m.omega[1](1, 1).is_zero());
    // Declared origin data has Novikov valuation >= order.
    CHECK(m.origin_valuations_ok());
    CHECK(m.s_origin_of(1)(0, 1) == q * q);
    CHECK(m.s_origin_of(1)(1, 0) == q);
    CHECK(m.s_origin_of(3) == m.zero_mat(2, 2));
}

TEST_CASE("loader rejects malformed models") {
    CHECK_THROWS_AS(load_model("models/no_such_file.json"), bad_model);

    json j = base_pt2_json();
    j["schema_version"] = 2;
    CHECK_THROWS_AS(load_model_json(j), bad_model);

    j = base_pt2_json();
    j["pairing_g"] = json::parse(R"([["1","2"],["3","1"]])"); // not symmetric
    CHECK_THROWS_AS(load_model_json(j), bad_model);

    j = base_pt2_json();
    j["pairing_g"] = json::parse(R"([["1","1"],["1","1"]])"); // singular
    CHECK_THROWS_AS(load_model_json(j), not_a_unit);

    j = base_pt2_json();
    j["unit_vector"] = {"1", "0"}; // unit axiom fails: Omega sum != Id
    CHECK_THROWS_AS(load_model_json(j), bad_model);

    j = base_pt2_json();
    j["omega"][1][0]["matrix"] = json::parse(R"([["0","1"],["0","1"]])"); // breaks commutativity
    CHECK_THROWS_AS(load_model_json(j), bad_model);

    j = base_pt2_json();
    j["omega"] = json::array({j["omega"][0]}); // wrong count
    CHECK_THROWS_AS(load_model_json(j), bad_model);
}

TEST_CASE("associativity violations are rejected") {
    // Symmetric structure constants (commutativity and the unit axiom hold)
    // with Phi_1^2 = Phi_2 and Phi_2^2 = Phi_1 but Phi_1 Phi_2 = 0: then
    // (Phi_2 Phi_2) Phi_1 = Phi_1 Phi_1 = Phi_2 while Phi_2 (Phi_2 Phi_1) = 0.
    json j = json::parse(R"({
      "schema_version": 1,
      "name": "bad",
      "dim": 3,
      "novikov_rank": 0,
      "caps": {"v": 4, "q": 0},
      "unit_index": 0,
      "pairing_g": [["0", "0", "1"], ["0", "1", "0"], ["1", "0", "0"]],
      "omega": [
        [{"matrix": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]}],
        [{"matrix": [["0", "0", "0"], ["1", "0", "0"], ["0", "1", "0"]]}],
        [{"matrix": [["0", "0", "0"], ["0", "0", "1"], ["1", "0", "0"]]}]
      ]
    })");
    CHECK_THROWS_AS(load_model_json(j), bad_model);
}

TEST_CASE("Novikov specialization produces a rank-zero model") {
    FrobeniusModel m = load_model("models/nov2.json");
    FrobeniusModel s = specialize_novikov(m, {rat(1, 2)});
    CHECK(s.rank == 0);
    CHECK(s.capq == 0);
    CHECK(s.omega[1](0, 1) == TruncSeries::constant(rat(1, 2), 0, 2, 0, m.capv));
    CHECK_NOTHROW(validate_model(s));
    CHECK(s.s_origin_of(2)(0, 0) == TruncSeries::constant(rat(1, 16), 0, 2, 0, m.capv));
}
