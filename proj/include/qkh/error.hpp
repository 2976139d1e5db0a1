#pragma once

#include <stdexcept>
#include <string>

namespace qkh {

struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Inversion requested on an element whose constant term is not a unit.
struct not_a_unit : error {
    explicit not_a_unit(const std::string& msg) : error("not a unit: " + msg) {}
};

// Binary operation on series over different variable sets.
struct arity_mismatch : error {
    explicit arity_mismatch(const std::string& msg) : error("arity mismatch: " + msg) {}
};

// Evaluation of a u-series at q0 = 1, where u = 1/(q0-1) is undefined.
struct pole_at_one : error {
    pole_at_one() : error("evaluation at q = 1 hits the pole of u = 1/(q-1)") {}
};

// Model failed an ingestion or structural check.
struct bad_model : error {
    explicit bad_model(const std::string& msg) : error("invalid model: " + msg) {}
};

// Quantum multiplication at the chosen specialization is not split semisimple.
struct not_semisimple : error {
    explicit not_semisimple(const std::string& msg) : error("not semisimple: " + msg) {}
};

// Staircase integration produced a solution violating one of the remaining equations.
struct incompatible_system : error {
    explicit incompatible_system(const std::string& msg) : error("incompatible system: " + msg) {}
};

// Correlator cannot be reduced to the 3-point base case by the string relation.
struct oracle_incomplete : error {
    explicit oracle_incomplete(const std::string& msg) : error("oracle incomplete: " + msg) {}
};

// Operation requires the full pole structure but the value is flagged as truncated.
struct incomplete_poles : error {
    explicit incomplete_poles(const std::string& msg) : error("possibly incomplete pole structure: " + msg) {}
};

// Numerical run left the resolvable regime (gradient blow-up or NaN).
struct blowup_detected : error {
    explicit blowup_detected(const std::string& msg) : error("blow-up detected: " + msg) {}
};

} // namespace qkh
