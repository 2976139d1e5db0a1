#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qkh/error.hpp"
#include "qkh/jets.hpp"
#include "qkh/matrix.hpp"
#include "qkh/model.hpp"
#include "qkh/rational.hpp"
#include "qkh/series.hpp"
#include "qkh/smatrix.hpp"
#include "qkh/ulaurent.hpp"

namespace qkh {

// An evolutionary flow d/dt v_a = components[a](v, dv, ...).
struct Flow {
    std::vector<JetPoly> components;
    int n = -1, i = -1; // hierarchy labels when applicable
};

namespace detail {

inline std::vector<TruncSeries> mat_column(const SeriesMat& m, int j) {
    std::vector<TruncSeries> c;
    c.reserve(m.rows());
    for (int r = 0; r < m.rows(); ++r) c.push_back(m(r, j));
    return c;
}

inline std::vector<TruncSeries> mat_apply_vector(const FrobeniusModel& m, const SeriesMat& a,
                                                 const std::vector<Rat>& x) {
    std::vector<TruncSeries> c(a.rows(), m.zero_series());
    for (int r = 0; r < a.rows(); ++r)
        for (int j = 0; j < a.cols(); ++j) c[r] += a(r, j) * x[j];
    return c;
}

// dv * c: the tangent field sum_a v_a^(1) Phi_a multiplied into the algebra
// against the field c, expanded through the structure constants.
inline std::vector<JetPoly> tangent_product(const FrobeniusModel& m,
                                            const std::vector<TruncSeries>& c) {
    std::vector<JetPoly> out(m.dim, JetPoly(m.rank, m.dim, m.capq, m.capv));
    for (int a = 0; a < m.dim; ++a)
        for (int b = 0; b < m.dim; ++b) {
            TruncSeries s = m.zero_series();
            for (int k = 0; k < m.dim; ++k) s += m.omega[a](b, k) * c[k];
            if (s.is_zero()) continue;
            JetPoly t(m.rank, m.dim, m.capq, m.capv);
            t.add_term({{a, 1}}, s);
            out[b] += t;
        }
    return out;
}

} // namespace detail

// Closed-form hierarchy flow: d/dt_{n,i} v = dv * S_n(v) Phi_i, expanded
// through the structure constants. Exact to the full caps.
inline Flow flow(const FrobeniusModel& m, const SMatrixData& sm, int n, int i) {
    if (n > sm.ucap) throw error("flow: order beyond solved S-matrix");
    Flow f;
    f.components = detail::tangent_product(m, detail::mat_column(sm.s[n], i));
    f.n = n;
    f.i = i;
    return f;
}

// The same flow through the residue bookkeeping: the generating family over u
// has coefficients D(S_m Phi_i) at u^m (total x-derivative of a jet-free
// column), and the (q-1)^n residue at q = infinity picks the u^{n+1} slot,
// i.e. D(S_{n+1} Phi_i). Independent of the structure-constant route; the two
// must agree.
inline Flow flow_via_residue(const FrobeniusModel& m, const SMatrixData& sm, int n, int i) {
    if (n + 1 > sm.ucap) throw error("flow_via_residue: order beyond solved S-matrix");
    std::vector<TruncSeries> col = detail::mat_column(sm.s[n + 1], i);
    Flow f;
    f.components.reserve(m.dim);
    for (int a = 0; a < m.dim; ++a)
        f.components.push_back(JetPoly::from_series(col[a]).total_derivative());
    f.n = n;
    f.i = i;
    return f;
}

// H_i(v,q) = (2/(1+q)) ( g(v, Phi_i) + <Phi_i / (1 - q^{-1} L)>_{0,1}(v) )
// as a u-series with jet-free coefficients.
inline UScalar hamiltonian_family(const FrobeniusModel& m, const SMatrixData& sm, int i) {
    UScalar h = one_point_correlator(m, sm, i, true);
    TruncSeries gv = m.zero_series();
    for (int a = 0; a < m.dim; ++a) gv += m.v_series(a) * m.g(a, i);
    h.add_coeff(0, gv);
    return two_over_one_plus_q(h.ucap(), m.rank, m.dim, m.capq, m.capv) * h;
}

// H_{n,i}: the (q-1)^n residue slice of H_i(v,q).
inline TruncSeries hamiltonian_density(const FrobeniusModel& m, const SMatrixData& sm, int n,
                                       int i) {
    if (n + 1 > sm.ucap) throw error("hamiltonian_density: order beyond solved S-matrix");
    return hamiltonian_family(m, sm, i).residue_at_infinity(n);
}

// First-order Poisson operator A^{ij} = G^{ij} D - sum_{s,k} G^{is} Gamma^j_{sk} (dv_k).
inline JetPoly poisson_apply(const MetricData& md, int i, int j, const JetPoly& a) {
    JetPoly r = a.total_derivative().scaled_series(md.Ginv(i, j));
    int dim = md.Ginv.rows();
    for (int k = 0; k < dim; ++k) {
        TruncSeries c(a.nq(), a.nv(), a.capq(), a.capv());
        for (int s = 0; s < dim; ++s) c += md.Ginv(i, s) * md.gamma[s](j, k);
        if (c.is_zero()) continue;
        JetPoly jet(a.nq(), a.nv(), a.capq(), a.capv());
        jet.add_term({{k, 1}}, c);
        r -= jet * a;
    }
    return r;
}

// Hamiltonian vector field X_H(v_i) = sum_j A^{ij}( dH/dv_j ).
inline Flow hamiltonian_derivation(const MetricData& md, const JetPoly& h) {
    int dim = md.Ginv.rows();
    Flow f;
    for (int i = 0; i < dim; ++i) {
        JetPoly acc(h.nq(), h.nv(), h.capq(), h.capv());
        for (int j = 0; j < dim; ++j) acc += poisson_apply(md, i, j, variational_derivative(h, j));
        f.components.push_back(acc);
    }
    return f;
}

// Bracket density sum_{ij} (dh1/dv_i) A^{ij}( dh2/dv_j ); the bracket of the
// functionals is its class modulo exact densities.
inline JetPoly bracket_density(const MetricData& md, const JetPoly& h1, const JetPoly& h2) {
    int dim = md.Ginv.rows();
    JetPoly r(h1.nq(), h1.nv(), h1.capq(), h1.capv());
    for (int i = 0; i < dim; ++i) {
        JetPoly d1 = variational_derivative(h1, i);
        if (d1.is_zero()) continue;
        for (int j = 0; j < dim; ++j)
            r += d1 * poisson_apply(md, i, j, variational_derivative(h2, j));
    }
    return r;
}

// Prolongation of the evolutionary field with characteristics F applied to h.
inline JetPoly prolong_apply(const std::vector<JetPoly>& F, const JetPoly& h) {
    JetPoly r(h.nq(), h.nv(), h.capq(), h.capv());
    int kmax = h.max_order();
    for (int i = 0; i < h.nv(); ++i) {
        r += h.coeff_partial(i) * F[i];
        JetPoly dk = F[i];
        for (int k = 1; k <= kmax; ++k) {
            dk = dk.total_derivative();
            JetPoly p = h.jet_partial(i, k);
            if (!p.is_zero()) r += p * dk;
        }
    }
    return r;
}

// Componentwise equality of evolutionary systems up to coefficient v-degree d.
inline bool flows_equal_to(const Flow& a, const Flow& b, int d) {
    if (a.components.size() != b.components.size()) return false;
    for (std::size_t k = 0; k < a.components.size(); ++k)
        if (!jetpoly_vtruncated(a.components[k] - b.components[k], d).is_zero()) return false;
    return true;
}

// Commutator of evolutionary flows, componentwise X1(F2_a) - X2(F1_a).
inline Flow flow_commutator(const Flow& f1, const Flow& f2) {
    Flow c;
    for (std::size_t a = 0; a < f1.components.size(); ++a)
        c.components.push_back(prolong_apply(f1.components, f2.components[a]) -
                               prolong_apply(f2.components, f1.components[a]));
    return c;
}

// True iff the flows commute with every commutator coefficient zero up to
// v-degree vdeg_check.
inline bool check_commute(const Flow& f1, const Flow& f2, int vdeg_check) {
    Flow c = flow_commutator(f1, f2);
    for (const auto& comp : c.components)
        if (!jetpoly_vtruncated(comp, vdeg_check).is_zero()) return false;
    return true;
}

// The exactness witness identity behind involution, at exact rational
// (q1, q2) off the singular locus q1 q2 = 1:
//   S(v,q2^{-1})^{-1} Omega_l S(v,q1)
//     = d/dv_l [ ((q1-1)(q2-1)/(q1 q2 - 1)) (S(v,q2^{-1})^{-1} S(v,q1) - Id) ].
inline bool involution_witness_identity(const FrobeniusModel& m, const SMatrixData& sm,
                                        const Rat& q1, const Rat& q2, int vdeg_check) {
    if (q1 * q2 == 1) throw error("involution witness: singular sample q1*q2 = 1");
    if (q2 == 0) throw error("involution witness: q2 = 0 has no inverse");
    SeriesMat m1 = evaluate_S_at_q(sm, q1);
    SeriesMat m2inv = series_mat_inverse(evaluate_S_at_q(sm, Rat(1) / q2));
    Rat c = (q1 - 1) * (q2 - 1) / (q1 * q2 - 1);
    SeriesMat inner = (m2inv * m1).scaled(c);
    for (int d = 0; d < m.dim; ++d) inner(d, d) -= m.const_series(c);
    for (int l = 0; l < m.dim; ++l) {
        SeriesMat lhs = m2inv * m.omega[l] * m1;
        for (int r = 0; r < m.dim; ++r)
            for (int cc = 0; cc < m.dim; ++cc)
                if (!detail::series_eq_to_vdeg(lhs(r, cc), inner(r, cc).diff(l), vdeg_check))
                    return false;
    }
    return true;
}

// Involution of H_{n1,i1} and H_{n2,i2}: the bracket density is exact to the
// stated degree, and the witness identity holds at pinned rational samples.
inline bool check_involution(const FrobeniusModel& m, const SMatrixData& sm, const MetricData& md,
                             int n1, int i1, int n2, int i2, int exact_deg) {
    JetPoly h1 = JetPoly::from_series(hamiltonian_density(m, sm, n1, i1));
    JetPoly h2 = JetPoly::from_series(hamiltonian_density(m, sm, n2, i2));
    if (!is_exact_to(bracket_density(md, h1, h2), exact_deg)) return false;
    const std::pair<Rat, Rat> samples[] = {{Rat(2), Rat(3)}, {Rat(3), Rat(5)}, {Rat(-2), Rat(5)}};
    for (const auto& [q1, q2] : samples)
        if (!involution_witness_identity(m, sm, q1, q2, exact_deg)) return false;
    return true;
}

// Decision procedure for "the jet-free density f Poisson-commutes with the
// whole Hamiltonian family": the second-order system
//   d_i d_a f = sum_k (Omega_i)^k_a E_k,   E_k = sum_l unit^l d_l d_k f,
// checked to v-degree capv - 2.
inline bool conserved_density_check(const FrobeniusModel& m, const TruncSeries& f) {
    std::vector<TruncSeries> e;
    e.reserve(m.dim);
    for (int k = 0; k < m.dim; ++k) {
        TruncSeries acc = m.zero_series();
        for (int l = 0; l < m.dim; ++l) {
            if (m.unit[l] == 0) continue;
            acc += f.diff(l).diff(k) * m.unit[l];
        }
        e.push_back(acc);
    }
    for (int i = 0; i < m.dim; ++i)
        for (int a = 0; a < m.dim; ++a) {
            TruncSeries rhs = m.zero_series();
            for (int k = 0; k < m.dim; ++k) rhs += m.omega[i](k, a) * e[k];
            if (!detail::series_eq_to_vdeg(f.diff(i).diff(a), rhs, m.capv - 2)) return false;
        }
    return true;
}

inline bool conserved_density_check(const FrobeniusModel& m, const JetPoly& f) {
    for (const auto& [mono, c] : f.terms())
        if (!mono.empty()) throw error("conserved_density_check: density must be jet-free");
    return conserved_density_check(m, f.coeff({}));
}

// Residue flow of a q-polynomial section C(q) = sum_d coeffs[d] q^d with
// constant vector coefficients, plus its decomposition into hierarchy flows:
// expanding C in powers of (q-1) with gamma_m = sum_d C(d,m) coeffs[d] gives
// X_C = sum_m flow(m, gamma_m).
struct FlowDecomposition {
    Flow total;                                     // computed by the residue route
    std::vector<std::pair<int, std::vector<Rat>>> parts; // (order m, vector gamma_m)
};

inline FlowDecomposition flow_from_C(const FrobeniusModel& m, const SMatrixData& sm,
                                     const std::vector<std::vector<Rat>>& coeffs) {
    int degc = static_cast<int>(coeffs.size()) - 1;
    if (degc + 1 > sm.ucap) throw error("flow_from_C: polynomial degree beyond solved S-matrix");
    FlowDecomposition out;
    out.total.components.assign(m.dim, JetPoly(m.rank, m.dim, m.capq, m.capv));
    for (int mm = 0; mm <= degc; ++mm) {
        std::vector<Rat> gamma(m.dim, Rat(0));
        bool nonzero = false;
        for (int d = mm; d <= degc; ++d) {
            Rat b = binomial(d, mm);
            for (int a = 0; a < m.dim; ++a) {
                gamma[a] += b * coeffs[d][a];
            }
        }
        for (const Rat& g : gamma) nonzero = nonzero || g != 0;
        if (!nonzero) continue;
        out.parts.push_back({mm, gamma});
        std::vector<TruncSeries> col = detail::mat_apply_vector(m, sm.s[mm + 1], gamma);
        for (int a = 0; a < m.dim; ++a)
            out.total.components[a] += JetPoly::from_series(col[a]).total_derivative();
    }
    return out;
}

// Inverse of a coordinate change w = M(v) with zero constant term and
// invertible linear part, as series v(w) to the caps.
inline std::vector<TruncSeries> invert_coordinate_map(const std::vector<TruncSeries>& M) {
    int dim = static_cast<int>(M.size());
    int nq = M[0].nq(), capq = M[0].capq(), capv = M[0].capv();
    RatMat lin(dim, dim, Rat(0));
    for (int b = 0; b < dim; ++b) {
        for (const auto& [e, c] : M[b].terms()) {
            int vd = M[b].vdeg(e), qd = M[b].qdeg(e);
            if (vd == 0) throw error("coordinate map must vanish at the origin");
            if (vd == 1 && qd == 0)
                for (int a = 0; a < dim; ++a)
                    if (e[nq + a] == 1) lin(b, a) = c;
        }
    }
    RatMat lin_inv = rat_inverse(lin); // throws not_a_unit when singular
    std::vector<TruncSeries> v(dim, TruncSeries(nq, dim, capq, capv));
    auto linear_solve = [&](const std::vector<TruncSeries>& rhs) {
        std::vector<TruncSeries> x(dim, TruncSeries(nq, dim, capq, capv));
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b) x[a] += rhs[b] * lin_inv(a, b);
        return x;
    };
    for (int it = 0; it <= capv; ++it) {
        // v <- lin^{-1} ( w - (M(v) - lin v) ); gains one correct degree per pass
        std::vector<TruncSeries> rhs;
        rhs.reserve(dim);
        for (int b = 0; b < dim; ++b) {
            TruncSeries t = TruncSeries::v_var(b, nq, dim, capq, capv) - M[b].compose(v);
            for (int a = 0; a < dim; ++a) t += lin(b, a) * v[a];
            rhs.push_back(t);
        }
        v = linear_solve(rhs);
    }
    return v;
}

// Substitutes v = images(w) into a jet polynomial: coefficients compose,
// jet factors v_i^{(k)} become D^k of the jet-free image.
inline JetPoly jetpoly_substitute(const JetPoly& p, const std::vector<TruncSeries>& images) {
    int nq = images[0].nq(), nv = static_cast<int>(images.size());
    int capq = images[0].capq(), capv = images[0].capv();
    std::vector<std::vector<JetPoly>> dk(nv); // dk[i][k-1] = D^k images[i]
    JetPoly r(nq, nv, capq, capv);
    for (const auto& [m, c] : p.terms()) {
        JetPoly acc = JetPoly::from_series(c.compose(images));
        for (const auto& [i, k] : m) {
            auto& cache = dk[i];
            while (static_cast<int>(cache.size()) < k) {
                JetPoly base = cache.empty() ? JetPoly::from_series(images[i]) : cache.back();
                cache.push_back(base.total_derivative());
            }
            acc = acc * cache[k - 1];
        }
        r += acc;
    }
    return r;
}

// Pushes a flow through the coordinate change w = M(v):
// d/dt w_b = sum_a (dM_b/dv_a)(v(w)) P_a[v(w)].
inline Flow miura_push(const Flow& f, const std::vector<TruncSeries>& M) {
    std::vector<TruncSeries> vw = invert_coordinate_map(M);
    int dim = static_cast<int>(M.size());
    Flow out;
    out.n = f.n;
    out.i = f.i;
    std::vector<JetPoly> sub;
    sub.reserve(dim);
    for (int a = 0; a < dim; ++a) sub.push_back(jetpoly_substitute(f.components[a], vw));
    for (int b = 0; b < dim; ++b) {
        JetPoly acc(M[0].nq(), dim, M[0].capq(), M[0].capv());
        for (int a = 0; a < dim; ++a)
            acc += sub[a].scaled_series(M[b].diff(a).compose(vw));
        out.components.push_back(acc);
    }
    return out;
}

} // namespace qkh
