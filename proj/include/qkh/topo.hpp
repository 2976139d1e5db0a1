#pragma once

#include <string>
#include <vector>

#include "qkh/error.hpp"
#include "qkh/hierarchy.hpp"
#include "qkh/matrix.hpp"
#include "qkh/model.hpp"
#include "qkh/rational.hpp"
#include "qkh/series.hpp"
#include "qkh/smatrix.hpp"
#include "qkh/ulaurent.hpp"

namespace qkh {

// Coefficient arena for the descendant variables t_{k,i}, 0 <= k <= kt,
// 0 <= i < dim: truncated series in (Q, t) with total t-degree cap dt.
struct DescendantArena {
    int kt;   // highest descendant order carried by t(q)
    int dt;   // total degree cap in the t-variables
    int dim;  // number of basis directions
    int nq;   // Novikov rank
    int capq; // Novikov degree cap

    int nt() const { return (kt + 1) * dim; }
    int slot(int k, int i) const { return k * dim + i; }
    TruncSeries zero() const { return TruncSeries(nq, nt(), capq, dt); }
    TruncSeries t_var(int k, int i) const {
        return TruncSeries::v_var(slot(k, i), nq, nt(), capq, dt);
    }
};

namespace detail {

// Composes every entry of a v-series matrix at the point v = images.
inline Mat<TruncSeries> mat_compose(const SeriesMat& m, const std::vector<TruncSeries>& images) {
    Mat<TruncSeries> r(m.rows(), m.cols(), images[0] - images[0]);
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) r(i, j) = m(i, j).compose(images);
    return r;
}

} // namespace detail

// One pass of the fixed-point map tau -> sum_{n <= kt} S_n(tau) t_n.
inline std::vector<TruncSeries> tau_fixed_point_map(const FrobeniusModel& m, const SMatrixData& sm,
                                                    const DescendantArena& ar,
                                                    const std::vector<TruncSeries>& tau) {
    std::vector<TruncSeries> next(m.dim, ar.zero());
    for (int n = 0; n <= ar.kt; ++n) {
        Mat<TruncSeries> sn = detail::mat_compose(sm.s[n], tau);
        for (int a = 0; a < m.dim; ++a)
            for (int i = 0; i < m.dim; ++i) {
                if (sn(a, i).is_zero()) continue;
                next[a] += sn(a, i) * ar.t_var(n, i);
            }
    }
    return next;
}

// Solves tau = sum_n S_n(tau) t_n by iteration from 0; each pass fixes one
// more total t-degree, and the residual is re-checked afterwards.
inline std::vector<TruncSeries> solve_tau(const FrobeniusModel& m, const SMatrixData& sm,
                                          const DescendantArena& ar) {
    if (ar.kt > sm.ucap) throw error("solve_tau: descendant order beyond solved S-matrix");
    std::vector<TruncSeries> tau(m.dim, ar.zero());
    for (int pass = 0; pass < ar.dt; ++pass) tau = tau_fixed_point_map(m, sm, ar, tau);
    std::vector<TruncSeries> again = tau_fixed_point_map(m, sm, ar, tau);
    for (int a = 0; a < m.dim; ++a)
        if (again[a] != tau[a]) throw error("solve_tau: fixed point did not stabilize");
    return tau;
}

// [S(tau,q) t(q)]_+ evaluated at q = 1, computed through the honest Laurent
// bookkeeping: the (a)-component collects (S_n(tau))_{ai} t_{k,i} u^{n-k},
// the projection keeps u-powers <= 0, and at q = 1 only u^0 survives. The
// reduced form sum_n S_n(tau) t_n must agree (tested).
inline std::vector<TruncSeries> plus_project_at_one(const FrobeniusModel& m, const SMatrixData& sm,
                                                    const DescendantArena& ar,
                                                    const std::vector<TruncSeries>& tau) {
    if (!m.pole_structure_complete)
        throw incomplete_poles("projection onto Laurent polynomials needs the full pole "
                               "structure; model is flagged incomplete");
    std::vector<TruncSeries> out;
    out.reserve(m.dim);
    for (int a = 0; a < m.dim; ++a) {
        UScalar acc(sm.ucap, ar.zero());
        for (int n = 0; n <= sm.ucap; ++n) {
            Mat<TruncSeries> sn = detail::mat_compose(sm.s[n], tau);
            for (int k = 0; k <= ar.kt; ++k)
                for (int i = 0; i < m.dim; ++i) acc.add_coeff(n - k, sn(a, i) * ar.t_var(k, i));
        }
        out.push_back(acc.plus_part().plus_part_at_one());
    }
    return out;
}

// w(t) = J(tau, 0) - 1 in the dual basis: w_a = sum_b g_ab (S(tau,0)^{-1} u - u)^b.
inline std::vector<TruncSeries> topological_solution(const FrobeniusModel& m, const SMatrixData& sm,
                                                     const DescendantArena& ar,
                                                     const std::vector<TruncSeries>& tau) {
    SeriesMat ainv = series_mat_inverse(evaluate_S_at_q(sm, Rat(0)));
    std::vector<TruncSeries> col(m.dim, m.zero_series());
    for (int b = 0; b < m.dim; ++b) {
        for (int c = 0; c < m.dim; ++c) col[b] += ainv(b, c) * m.unit[c];
        col[b] -= m.const_series(m.unit[b]);
    }
    std::vector<TruncSeries> w(m.dim, ar.zero());
    for (int a = 0; a < m.dim; ++a)
        for (int b = 0; b < m.dim; ++b) w[a] += col[b].compose(tau) * m.g(a, b);
    return w;
}

// Derivative along the unit direction of the t_{0,*} slots (the x-coordinate
// of the hierarchy: x = t_{0,0} whenever the unit is a basis vector).
inline TruncSeries unit_direction_derivative(const FrobeniusModel& m, const DescendantArena& ar,
                                             const TruncSeries& f) {
    TruncSeries r = ar.zero();
    for (int l = 0; l < m.dim; ++l) {
        if (m.unit[l] == 0) continue;
        r += f.diff(ar.slot(0, l)) * m.unit[l];
    }
    return r;
}

// Checks d/dt_{n,i} tau_a = P_{n,i}(tau, d_x tau)_a for all n <= nmax, to
// t-degree dt - 1; one report row per (n, i).
inline CheckReport verify_descendant_flows(const FrobeniusModel& m, const SMatrixData& sm,
                                            const DescendantArena& ar,
                                            const std::vector<TruncSeries>& tau, int nmax) {
    if (nmax > sm.ucap) throw error("verify_descendant_flows: order beyond solved S-matrix");
    CheckReport rep;
    std::vector<TruncSeries> xtau;
    xtau.reserve(m.dim);
    for (int b = 0; b < m.dim; ++b) xtau.push_back(unit_direction_derivative(m, ar, tau[b]));
    std::vector<Mat<TruncSeries>> omega_tau;
    omega_tau.reserve(m.dim);
    for (int b = 0; b < m.dim; ++b) omega_tau.push_back(detail::mat_compose(m.omega[b], tau));
    for (int n = 0; n <= nmax; ++n) {
        Mat<TruncSeries> sn = detail::mat_compose(sm.s[n], tau);
        for (int i = 0; i < m.dim; ++i) {
            bool ok = true;
            for (int a = 0; a < m.dim && ok; ++a) {
                TruncSeries rhs = ar.zero();
                for (int b = 0; b < m.dim; ++b) {
                    TruncSeries inner = ar.zero();
                    for (int k = 0; k < m.dim; ++k) inner += omega_tau[b](a, k) * sn(k, i);
                    rhs += inner * xtau[b];
                }
                TruncSeries lhs = tau[a].diff(ar.slot(n, i));
                ok = lhs.truncated(ar.capq, ar.dt - 1) == rhs.truncated(ar.capq, ar.dt - 1);
            }
            rep.add("flow (" + std::to_string(n) + "," + std::to_string(i) + ") moves tau", ok);
        }
    }
    return rep;
}

// <Phi_i f(L), Phi_a>_{0,2}(t) at tau for a polynomial f with f(0) = 0,
// composed from the fixed-bidegree two-point values.
inline Mat<TruncSeries> two_point_poly_at_tau(const FrobeniusModel& m, const SMatrixData& sm,
                                              const MetricData& md, const DescendantArena& ar,
                                              const std::vector<TruncSeries>& tau,
                                              const std::vector<Rat>& fcoeffs) {
    Mat<TruncSeries> acc(m.dim, m.dim, ar.zero());
    for (std::size_t p = 0; p < fcoeffs.size(); ++p) {
        if (fcoeffs[p] == 0) continue;
        if (p == 0) throw error("two-point polynomial must vanish at L = 0");
        SeriesMat wp = two_point_coeff(m, sm, md, static_cast<int>(p), 0);
        Mat<TruncSeries> wt = detail::mat_compose(wp, tau);
        for (int i = 0; i < m.dim; ++i)
            for (int a = 0; a < m.dim; ++a) acc(i, a) += wt(i, a) * fcoeffs[p];
    }
    return acc;
}

// Genus-0 topological recursion: for every i, with F(t) = <Phi_{j2} L^{k2},
// Phi_{j3} L^{k3}>_{0,2}(tau(t)),
//   d/dt_{k,i} F = sum_{a,b} <Phi_i L(L-1)^{k-1}, Phi_a>_{0,2}(tau)
//                  G^{ab}(tau) d/dt_{0,b} F,
// checked to t-degree dt - 1; one report row per i.
inline CheckReport verify_trr(const FrobeniusModel& m, const SMatrixData& sm, const MetricData& md,
                              const DescendantArena& ar, const std::vector<TruncSeries>& tau,
                              int k, int k2, int k3, int j2, int j3) {
    if (k < 1) throw error("verify_trr: descendant order k must be >= 1");
    if (k > ar.kt) throw error("verify_trr: k beyond the descendant arena");
    CheckReport rep;
    TruncSeries f = detail::mat_compose(two_point_coeff(m, sm, md, k2, k3), tau)(j2, j3);
    std::vector<TruncSeries> dbf;
    dbf.reserve(m.dim);
    for (int b = 0; b < m.dim; ++b) dbf.push_back(f.diff(ar.slot(0, b)));
    Mat<TruncSeries> ginv_tau = detail::mat_compose(md.Ginv, tau);
    // f(x) = x (x-1)^{k-1}
    std::vector<Rat> fc(static_cast<std::size_t>(k) + 1, Rat(0));
    for (int j = 0; j <= k - 1; ++j) {
        Rat b = binomial(k - 1, j);
        if ((k - 1 - j) % 2) b = -b;
        fc[static_cast<std::size_t>(j) + 1] = b;
    }
    Mat<TruncSeries> two_pt = two_point_poly_at_tau(m, sm, md, ar, tau, fc);
    for (int i = 0; i < m.dim; ++i) {
        TruncSeries rhs = ar.zero();
        for (int a = 0; a < m.dim; ++a) {
            if (two_pt(i, a).is_zero()) continue;
            for (int b = 0; b < m.dim; ++b) rhs += two_pt(i, a) * ginv_tau(a, b) * dbf[b];
        }
        TruncSeries lhs = f.diff(ar.slot(k, i));
        bool ok = lhs.truncated(ar.capq, ar.dt - 1) == rhs.truncated(ar.capq, ar.dt - 1);
        rep.add("descendant recursion in direction " + std::to_string(i), ok);
    }
    return rep;
}

} // namespace qkh
