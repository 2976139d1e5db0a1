#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qkh/error.hpp"
#include "qkh/matrix.hpp"
#include "qkh/rational.hpp"
#include "qkh/series.hpp"

namespace qkh {

// Small quantum-K model over a fixed basis (Phi_0..Phi_{dim-1}):
// constant pairing g, quantum multiplication operators Omega_l(Q, v)
// (Omega_l = operator of Phi_l-multiplication, entries (Omega_l)^k_j in
// row k, column j), and the origin values s_origin[n] = S_n(v=0) used to
// pin integration constants. The unit 1 = sum_l unit[l] Phi_l need not be
// a basis vector (the two-point model is handled in its idempotent basis),
// so the unit axiom is sum_l unit[l] Omega_l = Id.
struct FrobeniusModel {
    std::string name;
    int dim = 1;
    int rank = 0; // Novikov rank
    int capq = 0;
    int capv = 10;
    std::optional<int> unit_index;
    std::vector<Rat> unit;
    RatMat g;
    std::vector<SeriesMat> omega;
    // s_origin[n-1] = S_n(0) for n = 1..s_origin.size(); missing entries are 0.
    std::vector<SeriesMat> s_origin;
    bool pole_structure_complete = true;

    TruncSeries zero_series() const { return TruncSeries(rank, dim, capq, capv); }
    TruncSeries const_series(const Rat& c) const {
        return TruncSeries::constant(c, rank, dim, capq, capv);
    }
    TruncSeries v_series(int i) const { return TruncSeries::v_var(i, rank, dim, capq, capv); }
    SeriesMat zero_mat(int rows, int cols) const { return SeriesMat(rows, cols, zero_series()); }
    SeriesMat identity_mat() const { return series_identity(dim, rank, dim, capq, capv); }

    // sum_l x[l] Omega_l for a constant vector x.
    SeriesMat omega_of(const std::vector<Rat>& x) const {
        SeriesMat acc = zero_mat(dim, dim);
        for (int l = 0; l < dim; ++l) acc = acc + omega[l].scaled(x[l]);
        return acc;
    }
    SeriesMat unit_omega() const { return omega_of(unit); }

    SeriesMat s_origin_of(int n) const {
        if (n >= 1 && n <= static_cast<int>(s_origin.size())) return s_origin[n - 1];
        return zero_mat(dim, dim);
    }

    // True when every declared s_origin[n] has Novikov valuation >= n; then
    // S_n has total valuation >= n and evaluations at fixed q are exact to
    // total degree = solved u-order.
    bool origin_valuations_ok() const {
        for (std::size_t n = 1; n <= s_origin.size(); ++n)
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j)
                    for (const auto& [e, c] : s_origin[n - 1](i, j).terms())
                        if (s_origin[n - 1](i, j).qdeg(e) < static_cast<int>(n)) return false;
        return true;
    }
};

inline FrobeniusModel pt_model(int capv = 10, int capq = 0) {
    FrobeniusModel m;
    m.name = "pt";
    m.dim = 1;
    m.rank = 0;
    m.capq = capq;
    m.capv = capv;
    m.unit_index = 0;
    m.unit = {Rat(1)};
    m.g = RatMat(1, 1, Rat(1));
    m.omega = {m.identity_mat()};
    return m;
}

// Two disjoint points in the idempotent basis: g = Id, componentwise product.
inline FrobeniusModel pt2_model(int capv = 10, int capq = 0) {
    FrobeniusModel m;
    m.name = "pt2";
    m.dim = 2;
    m.rank = 0;
    m.capq = capq;
    m.capv = capv;
    m.unit = {Rat(1), Rat(1)};
    m.g = rat_identity(2);
    for (int l = 0; l < 2; ++l) {
        SeriesMat e = m.zero_mat(2, 2);
        e(l, l) = m.const_series(Rat(1));
        m.omega.push_back(e);
    }
    return m;
}

namespace detail {

inline RatMat parse_rat_matrix(const nlohmann::json& j, int rows, int cols, const char* what) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows)
        throw bad_model(std::string(what) + ": expected " + std::to_string(rows) + " rows");
    RatMat m(rows, cols, Rat(0));
    for (int i = 0; i < rows; ++i) {
        if (!j[i].is_array() || static_cast<int>(j[i].size()) != cols)
            throw bad_model(std::string(what) + ": row " + std::to_string(i) + " shape");
        for (int k = 0; k < cols; ++k) m(i, k) = parse_rat(j[i][k].get<std::string>());
    }
    return m;
}

inline SeriesMat parse_series_matrix(const nlohmann::json& jterms, const FrobeniusModel& m,
                                     bool allow_vdep, const char* what) {
    SeriesMat acc = m.zero_mat(m.dim, m.dim);
    for (const auto& t : jterms) {
        Expo e(m.rank + m.dim, 0);
        if (t.contains("q_exp")) {
            auto q = t["q_exp"];
            if (static_cast<int>(q.size()) != m.rank) throw bad_model(std::string(what) + ": q_exp length");
            for (int j = 0; j < m.rank; ++j) e[j] = q[j].get<int>();
        }
        if (t.contains("v_exp")) {
            auto v = t["v_exp"];
            if (static_cast<int>(v.size()) != m.dim) throw bad_model(std::string(what) + ": v_exp length");
            if (!allow_vdep)
                for (const auto& x : v)
                    if (x.get<int>() != 0) throw bad_model(std::string(what) + ": unexpected v dependence");
            for (int i = 0; i < m.dim; ++i) e[m.rank + i] = v[i].get<int>();
        }
        RatMat coef = parse_rat_matrix(t["matrix"], m.dim, m.dim, what);
        for (int i = 0; i < m.dim; ++i)
            for (int j = 0; j < m.dim; ++j) acc(i, j).add_term(e, coef(i, j));
    }
    return acc;
}

} // namespace detail

struct CheckReport {
    std::vector<std::pair<std::string, bool>> checks;
    bool ok() const {
        for (const auto& [n, b] : checks)
            if (!b) return false;
        return true;
    }
    void add(const std::string& n, bool b) { checks.emplace_back(n, b); }
};

// Structural ingestion checks: pairing, unit axiom, commutativity,
// associativity, flatness. Throws bad_model on the first violation.
inline void validate_model(const FrobeniusModel& m) {
    if (m.dim < 1) throw bad_model("dim must be positive");
    if (static_cast<int>(m.omega.size()) != m.dim) throw bad_model("need one Omega per basis element");
    if (static_cast<int>(m.unit.size()) != m.dim) throw bad_model("unit vector length");
    for (int i = 0; i < m.dim; ++i)
        for (int j = 0; j < i; ++j)
            if (m.g(i, j) != m.g(j, i)) throw bad_model("pairing g not symmetric");
    rat_inverse(m.g); // throws if singular
    if (m.unit_index) {
        std::vector<Rat> e(m.dim, Rat(0));
        e[*m.unit_index] = 1;
        if (e != m.unit) throw bad_model("unit_index inconsistent with unit vector");
    }
    if (m.unit_omega() != m.identity_mat())
        throw bad_model("unit axiom fails: sum_l unit[l] Omega_l != Id");
    for (int i = 0; i < m.dim; ++i)
        for (int j = 0; j < m.dim; ++j)
            for (int k = 0; k < m.dim; ++k)
                if (m.omega[i](k, j) != m.omega[j](k, i))
                    throw bad_model("product not commutative");
    for (int i = 0; i < m.dim; ++i)
        for (int j = 0; j < m.dim; ++j) {
            SeriesMat lhs = m.omega[i] * m.omega[j];
            SeriesMat rhs = m.zero_mat(m.dim, m.dim);
            for (int k = 0; k < m.dim; ++k) rhs = rhs + m.omega[k] * m.omega[i](k, j);
            if (!mat_is_zero(mat_truncated_total(lhs - rhs, m.capq + m.capv)))
                throw bad_model("product not associative");
        }
    for (int i = 0; i < m.dim; ++i)
        for (int j = 0; j < i; ++j)
            for (int r = 0; r < m.dim; ++r)
                for (int c = 0; c < m.dim; ++c)
                    if (m.omega[j](r, c).diff(i) != m.omega[i](r, c).diff(j))
                        throw bad_model("Omega family not flat (mixed derivatives differ)");
}

inline FrobeniusModel load_model_json(const nlohmann::json& j) {
    FrobeniusModel m;
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1)
        throw bad_model("unsupported schema_version");
    m.name = j.value("name", std::string("unnamed"));
    m.dim = j.at("dim").get<int>();
    m.rank = j.value("novikov_rank", 0);
    if (j.contains("caps")) {
        m.capv = j["caps"].value("v", 10);
        m.capq = j["caps"].value("q", 0);
    }
    m.pole_structure_complete = j.value("pole_structure_complete", true);
    if (j.contains("unit_index")) {
        m.unit_index = j["unit_index"].get<int>();
        if (*m.unit_index < 0 || *m.unit_index >= m.dim) throw bad_model("unit_index range");
        m.unit.assign(m.dim, Rat(0));
        m.unit[*m.unit_index] = 1;
    }
    if (j.contains("unit_vector")) {
        if (static_cast<int>(j["unit_vector"].size()) != m.dim) throw bad_model("unit_vector length");
        m.unit.clear();
        for (const auto& s : j["unit_vector"]) m.unit.push_back(parse_rat(s.get<std::string>()));
    }
    if (m.unit.empty()) throw bad_model("need unit_index or unit_vector");
    m.g = detail::parse_rat_matrix(j.at("pairing_g"), m.dim, m.dim, "pairing_g");
    if (static_cast<int>(j.at("omega").size()) != m.dim) throw bad_model("omega: need dim entries");
    for (const auto& one : j["omega"])
        m.omega.push_back(detail::parse_series_matrix(one, m, true, "omega"));
    if (j.contains("s_origin"))
        for (const auto& one : j["s_origin"])
            m.s_origin.push_back(detail::parse_series_matrix(one, m, false, "s_origin"));
    validate_model(m);
    return m;
}

// Loads a built-in name ("pt", "pt2") or a schema file path.
inline FrobeniusModel load_model(const std::string& name_or_path, int capv = 10, int capq = 4) {
    if (name_or_path == "pt") return pt_model(capv);
    if (name_or_path == "pt2") return pt2_model(capv);
    std::ifstream in(name_or_path);
    if (!in) throw bad_model("cannot open model file: " + name_or_path);
    nlohmann::json j;
    in >> j;
    return load_model_json(j);
}

// Sets the Novikov variables to exact numeric values (rank drops to 0).
inline FrobeniusModel specialize_novikov(const FrobeniusModel& m, const std::vector<Rat>& qvals) {
    FrobeniusModel r = m;
    r.rank = 0;
    r.capq = 0;
    auto conv_mat = [&](const SeriesMat& a) {
        SeriesMat out(m.dim, m.dim, TruncSeries(0, m.dim, 0, m.capv));
        for (int i = 0; i < m.dim; ++i)
            for (int j = 0; j < m.dim; ++j) out(i, j) = a(i, j).specialize_q(qvals);
        return out;
    };
    r.omega.clear();
    for (const auto& o : m.omega) r.omega.push_back(conv_mat(o));
    r.s_origin.clear();
    for (const auto& s : m.s_origin) r.s_origin.push_back(conv_mat(s));
    return r;
}

} // namespace qkh
