#pragma once

#include <vector>

#include "qkh/error.hpp"
#include "qkh/matrix.hpp"
#include "qkh/model.hpp"
#include "qkh/rational.hpp"
#include "qkh/series.hpp"
#include "qkh/ulaurent.hpp"

namespace qkh {

// Fundamental solution S(v,q) = Id + sum_{n>=1} S_n(v) u^n of the flat system
// (q-1) d_i S = Omega_i S, solved to u-order ucap.
struct SMatrixData {
    int ucap = 0;
    std::vector<SeriesMat> s; // s[n], n = 0..ucap; s[0] = Id
    // Every solved S_n has (Novikov + coordinate) valuation >= n; evaluations
    // at a fixed q are then exact to total degree ucap.
    bool val_ok = true;

    const SeriesMat& order(int n) const { return s.at(n); }
};

namespace detail {

// Restriction of a series to v_{i+1} = ... = v_{dim-1} = 0.
inline TruncSeries zero_coords_above(const TruncSeries& a, int i) {
    TruncSeries r(a.nq(), a.nv(), a.capq(), a.capv());
    for (const auto& [e, c] : a.terms()) {
        bool keep = true;
        for (int j = i + 1; j < a.nv() && keep; ++j)
            if (e[a.nq() + j] != 0) keep = false;
        if (keep) r.add_term(e, c);
    }
    return r;
}

inline bool series_eq_to_vdeg(const TruncSeries& a, const TruncSeries& b, int d) {
    return a.truncated(a.capq(), d) == b.truncated(b.capq(), d);
}

inline int min_total_valuation(const SeriesMat& m) {
    int best = -1;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            for (const auto& [e, c] : m(i, j).terms()) {
                int d = m(i, j).qdeg(e) + m(i, j).vdeg(e);
                if (best < 0 || d < best) best = d;
            }
    return best; // -1 for the zero matrix
}

} // namespace detail

// Solves the flat system order by order: S_{n+1} is the staircase primitive
// of the closed family (Omega_i S_n)_i plus the declared origin value, and the
// full gradient is re-verified afterwards (throws incompatible_system).
inline SMatrixData solve_s(const FrobeniusModel& m, int ucap) {
    SMatrixData out;
    out.ucap = ucap;
    out.s.push_back(m.identity_mat());
    if (!m.origin_valuations_ok()) out.val_ok = false;
    for (int n = 0; n < ucap; ++n) {
        std::vector<SeriesMat> rhs;
        rhs.reserve(m.dim);
        for (int i = 0; i < m.dim; ++i) rhs.push_back(m.omega[i] * out.s[n]);
        SeriesMat next = m.s_origin_of(n + 1);
        for (int i = 0; i < m.dim; ++i) {
            for (int r = 0; r < m.dim; ++r)
                for (int c = 0; c < m.dim; ++c)
                    next(r, c) += detail::zero_coords_above(rhs[i](r, c), i).integrate(i);
        }
        for (int i = 0; i < m.dim; ++i)
            for (int r = 0; r < m.dim; ++r)
                for (int c = 0; c < m.dim; ++c)
                    if (!detail::series_eq_to_vdeg(next(r, c).diff(i), rhs[i](r, c), m.capv - 1))
                        throw incompatible_system("flat system gradient mismatch at order " +
                                                  std::to_string(n + 1));
        if (detail::min_total_valuation(next) >= 0 && detail::min_total_valuation(next) < n + 1)
            out.val_ok = false;
        out.s.push_back(next);
    }
    return out;
}

// QDE residual d_i S_{n+1} - Omega_i S_n, checked to v-degree capv - 1.
inline bool check_qde(const FrobeniusModel& m, const SMatrixData& sm) {
    for (int n = 0; n + 1 <= sm.ucap; ++n)
        for (int i = 0; i < m.dim; ++i) {
            SeriesMat want = m.omega[i] * sm.s[n];
            for (int r = 0; r < m.dim; ++r)
                for (int c = 0; c < m.dim; ++c)
                    if (!detail::series_eq_to_vdeg(sm.s[n + 1](r, c).diff(i), want(r, c), m.capv - 1))
                        return false;
        }
    return true;
}

inline UMat umat_of(const SMatrixData& sm) {
    UMat u(sm.ucap, sm.s[0].scaled(Rat(0)));
    for (int n = 0; n <= sm.ucap; ++n) u.set_coeff(n, sm.s[n]);
    return u;
}

inline UMat umat_transposed(const UMat& a) {
    UMat r(a.ucap(), a.zero_coeff().transposed());
    for (const auto& [k, c] : a.terms()) r.set_coeff(k, c.transposed());
    return r;
}

// Multiplies every u-coefficient by a constant matrix on the left.
inline UMat umat_lmul(const SeriesMat& g, const UMat& a) {
    UMat r(a.ucap(), g * a.zero_coeff());
    for (const auto& [k, c] : a.terms()) r.set_coeff(k, g * c);
    return r;
}

// Multiplies every u-coefficient by a constant matrix on the right.
inline UMat umat_rmul(const UMat& a, const SeriesMat& g) {
    UMat r(a.ucap(), a.zero_coeff() * g);
    for (const auto& [k, c] : a.terms()) r.set_coeff(k, c * g);
    return r;
}

// a * u^shift, scaled.
template <class C>
ULaurent<C> ushift(const ULaurent<C>& a, int shift, const Rat& scale) {
    ULaurent<C> r(a.ucap(), a.zero_coeff());
    for (const auto& [k, c] : a.terms()) r.add_coeff(k + shift, c * scale);
    return r;
}

// Value S(v, q0) as a series matrix; exact to total degree ucap when val_ok.
inline SeriesMat evaluate_S_at_q(const SMatrixData& sm, const Rat& q0) {
    return umat_of(sm).evaluate_at_q(q0);
}

// Metric data G = g S(v,0)^{-1} together with its inverse and the Christoffel
// family Gamma^j_{sk} = 1/2 sum_l G^{jl} G(Phi_s * Phi_k, Phi_l).
struct MetricData {
    SeriesMat G;
    SeriesMat Ginv;
    std::vector<SeriesMat> gamma; // gamma[s](j, k)
    int exact_total_deg = 0;      // comparisons beyond this degree are not meaningful
};

inline MetricData metric(const FrobeniusModel& m, const SMatrixData& sm) {
    MetricData md;
    SeriesMat s0 = evaluate_S_at_q(sm, Rat(0));
    SeriesMat gmat = series_mat(m.g, m.rank, m.dim, m.capq, m.capv);
    md.G = gmat * series_mat_inverse(s0);
    md.Ginv = series_mat_inverse(md.G);
    for (int s = 0; s < m.dim; ++s) md.gamma.push_back((md.Ginv * md.G * m.omega[s]).scaled(Rat(1, 2)));
    // An origin value of order n with total valuation w < n delays exactness:
    // its (n - w) missing degrees propagate through every later order, so the
    // evaluation at fixed q is only complete to total degree ucap - deficit.
    int deficit = 0;
    for (std::size_t n = 1; n <= m.s_origin.size(); ++n) {
        int w = detail::min_total_valuation(m.s_origin[n - 1]);
        if (w >= 0) deficit = std::max(deficit, static_cast<int>(n) - w);
    }
    md.exact_total_deg = std::max(0, std::min(sm.ucap - deficit, m.capq + m.capv));
    return md;
}

// g(a, S(v,q^{-1})^{-1} b) = G(S(v,q) a, b), i.e. g S(v,q^{-1})^{-1} = S(v,q)^T G,
// compared entrywise per u-order to total degree deg.
inline bool check_symplectic(const FrobeniusModel& m, const SMatrixData& sm, const MetricData& md,
                             int deg) {
    UMat u = umat_of(sm);
    UMat sqinv_inv = ulaurent_invert(u.substitute_qinv(), series_mat_inverse);
    SeriesMat gmat = series_mat(m.g, m.rank, m.dim, m.capq, m.capv);
    UMat lhs = umat_lmul(gmat, sqinv_inv);
    UMat rhs = umat_rmul(umat_transposed(u), md.G);
    UMat d = lhs - rhs;
    for (const auto& [k, c] : d.terms())
        if (!mat_is_zero(mat_truncated_total(c, deg))) return false;
    return true;
}

// J(v,q) = (1-q) S(v,q)^{-1} 1, a column vector over the u-ring.
inline UMat j_function(const FrobeniusModel& m, const SMatrixData& sm) {
    UMat sinv = ulaurent_invert(umat_of(sm), series_mat_inverse);
    SeriesMat unit(m.dim, 1, m.zero_series());
    for (int i = 0; i < m.dim; ++i) unit(i, 0) = m.const_series(m.unit[i]);
    UMat ju(sinv.ucap(), sinv.zero_coeff() * unit);
    for (const auto& [k, c] : sinv.terms()) ju.set_coeff(k, c * unit);
    return ushift(ju, -1, Rat(-1)); // (1-q) = -u^{-1}
}

// <Phi_i / (1 - qL)>_{0,1}(v) = g(Phi_i, J(v,q) - (1-q) 1 - v); optionally with
// q replaced by q^{-1} (u -> -(1+u)).
inline UScalar one_point_correlator(const FrobeniusModel& m, const SMatrixData& sm, int i,
                                    bool at_q_inverse) {
    UMat j = j_function(m, sm);
    // subtract (1-q) * unit = -u^{-1} * unit
    for (int a = 0; a < m.dim; ++a) {
        SeriesMat c = j.coeff(-1);
        c(a, 0) += m.const_series(m.unit[a]);
        j.set_coeff(-1, c);
    }
    SeriesMat c0 = j.coeff(0);
    for (int a = 0; a < m.dim; ++a) c0(a, 0) -= m.v_series(a);
    j.set_coeff(0, c0);
    UScalar r(j.ucap(), m.zero_series());
    for (const auto& [k, c] : j.terms()) {
        TruncSeries acc = m.zero_series();
        for (int a = 0; a < m.dim; ++a) acc += c(a, 0) * m.g(i, a);
        r.add_coeff(k, acc);
    }
    return at_q_inverse ? r.substitute_qinv() : r;
}

// [x^p] of S(v, x^{-1}) = Id + sum_n S_n x^n (1-x)^{-n}.
inline SeriesMat s_xinv_coeff(const FrobeniusModel& m, const SMatrixData& sm, int p) {
    if (p == 0) return m.identity_mat();
    if (p > sm.ucap) throw error("s_xinv_coeff: order beyond solved S-matrix");
    SeriesMat acc = m.zero_mat(m.dim, m.dim);
    for (int n = 1; n <= p; ++n) acc = acc + sm.s[n].scaled(binomial(p - 1, p - n));
    return acc;
}

// <Phi_a L1^p, Phi_b L2^p'>_{0,2}(v): coefficient [x^p y^p'] of
// (S(v,y^{-1})^T G S(v,x^{-1}) - g)/(1 - xy). The xy = 1 locus of the
// numerator is the symplectic identity, which makes the division regular.
inline SeriesMat two_point_coeff(const FrobeniusModel& m, const SMatrixData& sm,
                                 const MetricData& md, int p, int pp) {
    SeriesMat acc = m.zero_mat(m.dim, m.dim);
    for (int j = 0; j <= std::min(p, pp); ++j) {
        SeriesMat nterm =
            s_xinv_coeff(m, sm, pp - j).transposed() * md.G * s_xinv_coeff(m, sm, p - j);
        acc = acc + nterm.transposed(); // index order (a,b) = (first slot, second slot)
    }
    if (p == pp) acc = acc - series_mat(m.g, m.rank, m.dim, m.capq, m.capv);
    return acc;
}

} // namespace qkh
