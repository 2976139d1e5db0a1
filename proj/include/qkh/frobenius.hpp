#pragma once

#include <random>
#include <string>
#include <vector>

#include "qkh/error.hpp"
#include "qkh/matrix.hpp"
#include "qkh/model.hpp"
#include "qkh/rational.hpp"
#include "qkh/series.hpp"
#include "qkh/smatrix.hpp"

namespace qkh {

namespace detail {

// --- exact polynomial helpers over the rationals (coefficients low-to-high) ---

using RatPoly = std::vector<Rat>;

inline void poly_trim(RatPoly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

inline RatPoly poly_derivative(const RatPoly& p) {
    RatPoly d;
    for (std::size_t k = 1; k < p.size(); ++k) d.push_back(p[k] * Rat(static_cast<long>(k)));
    poly_trim(d);
    return d;
}

// Euclidean remainder a mod b; b must be nonzero.
inline RatPoly poly_mod(RatPoly a, const RatPoly& b) {
    poly_trim(a);
    while (a.size() >= b.size() && !a.empty()) {
        Rat f = a.back() / b.back();
        std::size_t off = a.size() - b.size();
        for (std::size_t k = 0; k < b.size(); ++k) a[off + k] -= f * b[k];
        poly_trim(a);
    }
    return a;
}

inline bool poly_coprime(RatPoly a, RatPoly b) {
    poly_trim(a);
    poly_trim(b);
    while (!b.empty()) {
        RatPoly r = poly_mod(a, b);
        a = b;
        b = r;
    }
    return a.size() == 1;
}

inline Rat poly_eval(const RatPoly& p, const Rat& x) {
    Rat acc(0);
    for (std::size_t k = p.size(); k-- > 0;) acc = acc * x + p[k];
    return acc;
}

// Characteristic polynomial of a square rational matrix by the
// trace recursion: exact, O(n^4).
inline RatPoly char_poly(const RatMat& a) {
    int n = a.rows();
    RatPoly c(static_cast<std::size_t>(n) + 1, Rat(0));
    c[n] = 1;
    RatMat b = rat_identity(n);
    for (int k = 1; k <= n; ++k) {
        RatMat ak = a * b;
        Rat tr(0);
        for (int i = 0; i < n; ++i) tr += ak(i, i);
        c[n - k] = -tr / Rat(k);
        b = ak;
        for (int i = 0; i < n; ++i) b(i, i) += c[n - k];
    }
    return c;
}

// All positive divisors of |z|, by trial division; throws when the search
// exceeds the iteration bound (coefficients far outside the working range).
inline std::vector<Int> int_divisors(Int z) {
    if (z < 0) z = -z;
    std::vector<Int> ds;
    if (z == 0) return ds;
    long bound = 2000000;
    Int d(1);
    for (long it = 0; d * d <= z; ++d, ++it) {
        if (it > bound) throw not_semisimple("eigenvalue search exceeded the divisor bound");
        if (z % d == 0) {
            ds.push_back(d);
            if (d * d != z) ds.push_back(z / d);
        }
    }
    return ds;
}

// Roots of a squarefree rational polynomial, provided they are all rational;
// empty optional-style failure is signalled by returning fewer roots than deg.
inline std::vector<Rat> rational_roots(const RatPoly& p) {
    RatPoly q = p;
    poly_trim(q);
    std::vector<Rat> roots;
    if (q.size() <= 1) return roots;
    // Factor out x = 0.
    std::size_t val = 0;
    while (val < q.size() && q[val] == 0) ++val;
    if (val > 0) {
        roots.push_back(Rat(0));
        q.erase(q.begin(), q.begin() + static_cast<long>(val));
    }
    if (q.size() <= 1) return roots;
    Int den(1);
    for (const Rat& c : q) den = lcm(den, c.get_den());
    std::vector<Int> zc;
    zc.reserve(q.size());
    for (const Rat& c : q) {
        Rat w = c * Rat(den);
        zc.push_back(w.get_num());
    }
    std::vector<Int> nums = int_divisors(zc.front());
    std::vector<Int> dens = int_divisors(zc.back());
    for (const Int& nu : nums)
        for (const Int& de : dens) {
            if (gcd(nu, de) != 1) continue;
            for (int sgn : {1, -1}) {
                Rat cand(nu * sgn, de);
                cand.canonicalize();
                if (poly_eval(q, cand) == 0) roots.push_back(cand);
            }
        }
    return roots;
}

inline int min_total_degree(const TruncSeries& s) {
    int best = -1;
    for (const auto& [e, c] : s.terms()) {
        int d = s.qdeg(e) + s.vdeg(e);
        if (best < 0 || d < best) best = d;
    }
    return best;
}

// sum_a x[a] Omega_a(v) for series coefficients x[a].
inline SeriesMat omega_of_series(const FrobeniusModel& m, const std::vector<TruncSeries>& x) {
    SeriesMat acc = m.zero_mat(m.dim, m.dim);
    for (int a = 0; a < m.dim; ++a)
        for (int r = 0; r < m.dim; ++r)
            for (int c = 0; c < m.dim; ++c) acc(r, c) += x[a] * m.omega[a](r, c);
    return acc;
}

inline std::vector<TruncSeries> mat_vec(const SeriesMat& a, const std::vector<TruncSeries>& x) {
    std::vector<TruncSeries> r(a.rows(), x[0] - x[0]);
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) r[i] += a(i, j) * x[j];
    return r;
}

} // namespace detail

// Structural report for the product / pairing / connection identities.
// Everything involving the v-dependent pairing G is compared through
// total degree md.exact_total_deg (the order to which G itself is exact).
inline CheckReport verify_frobenius(const FrobeniusModel& m, const MetricData& md) {
    CheckReport rep;
    int gd = md.exact_total_deg;

    bool comm = true;
    for (int i = 0; i < m.dim && comm; ++i)
        for (int j = 0; j < i && comm; ++j)
            for (int k = 0; k < m.dim && comm; ++k)
                comm = m.omega[i](k, j) == m.omega[j](k, i);
    rep.add("product is commutative", comm);

    bool assoc = true;
    for (int i = 0; i < m.dim && assoc; ++i)
        for (int j = 0; j <= i && assoc; ++j) {
            SeriesMat lhs = m.omega[i] * m.omega[j];
            SeriesMat rhs = m.zero_mat(m.dim, m.dim);
            for (int k = 0; k < m.dim; ++k) rhs = rhs + m.omega[k].scaled(m.omega[i](k, j));
            assoc = mat_is_zero(lhs - rhs);
        }
    rep.add("product is associative", assoc);

    bool tsym = true;
    auto big_t = [&](int i, int j, int k) {
        TruncSeries acc = m.zero_series();
        for (int e = 0; e < m.dim; ++e) acc += m.omega[i](e, j) * md.G(e, k);
        return acc.truncated_total(gd);
    };
    for (int i = 0; i < m.dim && tsym; ++i)
        for (int j = 0; j < m.dim && tsym; ++j)
            for (int k = 0; k < m.dim && tsym; ++k)
                tsym = big_t(i, j, k) == big_t(j, i, k) && big_t(i, j, k) == big_t(i, k, j);
    rep.add("pairing of products is totally symmetric", tsym);

    bool flat_mixed = true;
    for (int i = 0; i < m.dim && flat_mixed; ++i)
        for (int j = 0; j < i && flat_mixed; ++j)
            for (int r = 0; r < m.dim && flat_mixed; ++r)
                for (int c = 0; c < m.dim && flat_mixed; ++c)
                    flat_mixed = m.omega[j](r, c).diff(i) == m.omega[i](r, c).diff(j);
    rep.add("pencil is flat: mixed partials agree", flat_mixed);

    bool flat_comm = true;
    for (int i = 0; i < m.dim && flat_comm; ++i)
        for (int j = 0; j < i && flat_comm; ++j)
            flat_comm = mat_is_zero(m.omega[i] * m.omega[j] - m.omega[j] * m.omega[i]);
    rep.add("pencil is flat: operators commute", flat_comm);

    bool gsym = true;
    for (int s = 0; s < m.dim && gsym; ++s)
        for (int k = 0; k < s && gsym; ++k)
            for (int j = 0; j < m.dim && gsym; ++j)
                gsym = md.gamma[s](j, k).truncated_total(gd) ==
                       md.gamma[k](j, s).truncated_total(gd);
    rep.add("connection symbols are symmetric", gsym);

    // The derivative of G is reliable only below the coordinate cap (its top
    // v-degree would need dropped content), hence the extra truncation.
    bool lc = true;
    int lcdeg = std::min(gd, m.capv) - 1;
    for (int k = 0; k < m.dim && lc; ++k)
        for (int i = 0; i < m.dim && lc; ++i)
            for (int j = 0; j < m.dim && lc; ++j) {
                TruncSeries rhs = m.zero_series();
                for (int l = 0; l < m.dim; ++l)
                    rhs += md.gamma[k](l, i) * md.G(l, j) + md.gamma[k](l, j) * md.G(i, l);
                lc = md.G(i, j).diff(k).truncated_total(lcdeg) == rhs.truncated_total(lcdeg);
            }
    rep.add("connection is compatible with the pairing", lc);
    return rep;
}

// The diagonalizing frame: orthogonal idempotent vector fields e_i with
// e_i * e_j = delta_ij e_j, their pairing normalizations Delta_i = G(e_i, e_i),
// and the Jacobian Psi whose column i is e_i.
struct IdempotentFrame {
    std::vector<std::vector<TruncSeries>> e;
    std::vector<TruncSeries> delta;
    SeriesMat psi;
};

// Computes the idempotent frame by exact spectral splitting of a random
// product operator at the series origin, then a Newton lift order-by-order.
// The spectrum is probed at v = 0 with the Novikov variables specialized to
// q_point (all zero when omitted); the lift itself stays formal in (Q, v).
inline IdempotentFrame idempotent_frame(const FrobeniusModel& m, const MetricData& md,
                                        unsigned long seed = 7,
                                        const std::vector<Rat>& q_point = {}) {
    std::vector<Rat> qs = q_point;
    if (qs.empty()) qs.assign(static_cast<std::size_t>(m.rank), Rat(0));
    if (static_cast<int>(qs.size()) != m.rank)
        throw error("idempotent_frame: Novikov point has wrong length");
    std::vector<Rat> zero_v(static_cast<std::size_t>(m.dim), Rat(0));

    // Product operators at the probed origin, as rational matrices.
    std::vector<RatMat> om0;
    om0.reserve(m.dim);
    for (int l = 0; l < m.dim; ++l) {
        RatMat a(m.dim, m.dim, Rat(0));
        for (int r = 0; r < m.dim; ++r)
            for (int c = 0; c < m.dim; ++c) a(r, c) = m.omega[l](r, c).evaluate_rat(qs, zero_v);
        om0.push_back(a);
    }

    // Probe for a product operator with simple rational spectrum.
    std::mt19937_64 rng(seed);
    std::vector<Rat> eigs;
    RatMat gen(m.dim, m.dim, Rat(0));
    bool found = false;
    for (int attempt = 0; attempt < 16 && !found; ++attempt) {
        RatMat a(m.dim, m.dim, Rat(0));
        for (int l = 0; l < m.dim; ++l) {
            Rat c(static_cast<long>(rng() % 1000) + 1);
            a = a + om0[l].scaled(c);
        }
        detail::RatPoly chi = detail::char_poly(a);
        if (!detail::poly_coprime(chi, detail::poly_derivative(chi))) continue;
        std::vector<Rat> roots = detail::rational_roots(chi);
        if (static_cast<int>(roots.size()) != m.dim) continue;
        eigs = roots;
        gen = a;
        found = true;
    }
    if (!found)
        throw not_semisimple("no probed product operator has simple rational spectrum at the "
                             "series origin");

    // Spectral projectors applied to the unit give the constant-term frame.
    std::vector<std::vector<Rat>> seeds;
    for (int i = 0; i < m.dim; ++i) {
        RatMat p = rat_identity(m.dim);
        for (int j = 0; j < m.dim; ++j) {
            if (j == i) continue;
            RatMat f = gen;
            for (int d = 0; d < m.dim; ++d) f(d, d) -= eigs[j];
            p = f.scaled(Rat(1) / (eigs[i] - eigs[j])) * p;
        }
        std::vector<Rat> s(static_cast<std::size_t>(m.dim), Rat(0));
        for (int r = 0; r < m.dim; ++r)
            for (int c = 0; c < m.dim; ++c) s[r] += p(r, c) * m.unit[c];
        seeds.push_back(s);
    }

    IdempotentFrame fr;
    fr.psi = m.zero_mat(m.dim, m.dim);
    SeriesMat ident = m.identity_mat();
    for (int i = 0; i < m.dim; ++i) {
        std::vector<TruncSeries> e;
        e.reserve(m.dim);
        for (int a = 0; a < m.dim; ++a) e.push_back(m.const_series(seeds[i][a]));
        // Newton: each step doubles the vanishing order of e*e - e.
        int max_steps = 2;
        while ((1 << max_steps) <= m.capq + m.capv + 1) ++max_steps;
        for (int step = 0; step <= max_steps; ++step) {
            SeriesMat op = detail::omega_of_series(m, e);
            std::vector<TruncSeries> res = detail::mat_vec(op, e);
            bool done = true;
            for (int a = 0; a < m.dim; ++a) {
                res[a] -= e[a];
                if (!res[a].is_zero()) done = false;
            }
            if (done) break;
            if (step == max_steps) {
                int bad = m.capq + m.capv;
                for (int a = 0; a < m.dim; ++a) {
                    int d = detail::min_total_degree(res[a]);
                    if (d >= 0 && d < bad) bad = d;
                }
                throw not_semisimple("Newton lift stalled at order " + std::to_string(bad));
            }
            SeriesMat jac = op.scaled(Rat(2)) - ident;
            SeriesMat jinv;
            try {
                jinv = series_mat_inverse(jac);
            } catch (const not_a_unit&) {
                throw not_semisimple("Newton linearization is singular at the series origin "
                                     "(repeated eigenvalue at order 0)");
            }
            std::vector<TruncSeries> h = detail::mat_vec(jinv, res);
            for (int a = 0; a < m.dim; ++a) e[a] -= h[a];
        }
        TruncSeries d = m.zero_series();
        for (int a = 0; a < m.dim; ++a)
            for (int b = 0; b < m.dim; ++b) d += e[a] * e[b] * md.G(a, b);
        for (int a = 0; a < m.dim; ++a) fr.psi(a, i) = e[a];
        fr.e.push_back(std::move(e));
        fr.delta.push_back(d);
    }
    return fr;
}

// The defining identities of the frame, plus simultaneous diagonalization
// of every product operator by Psi.
inline CheckReport verify_idempotent_frame(const FrobeniusModel& m, const MetricData& md,
                                           const IdempotentFrame& fr) {
    CheckReport rep;
    int gd = md.exact_total_deg;

    bool prod = true;
    for (int i = 0; i < m.dim && prod; ++i) {
        SeriesMat op = detail::omega_of_series(m, fr.e[i]);
        for (int j = 0; j < m.dim && prod; ++j) {
            std::vector<TruncSeries> r = detail::mat_vec(op, fr.e[j]);
            for (int a = 0; a < m.dim && prod; ++a) {
                TruncSeries want = i == j ? fr.e[j][a] : m.zero_series();
                prod = r[a] == want;
            }
        }
    }
    rep.add("frame vectors are orthogonal idempotents", prod);

    bool unit_ok = true;
    for (int a = 0; a < m.dim && unit_ok; ++a) {
        TruncSeries acc = m.zero_series();
        for (int i = 0; i < m.dim; ++i) acc += fr.e[i][a];
        unit_ok = acc == m.const_series(m.unit[a]);
    }
    rep.add("frame sums to the unit", unit_ok);

    bool pair_ok = true;
    for (int i = 0; i < m.dim && pair_ok; ++i)
        for (int j = 0; j < m.dim && pair_ok; ++j) {
            TruncSeries acc = m.zero_series();
            for (int a = 0; a < m.dim; ++a)
                for (int b = 0; b < m.dim; ++b) acc += fr.e[i][a] * fr.e[j][b] * md.G(a, b);
            TruncSeries want = i == j ? fr.delta[i] : m.zero_series();
            pair_ok = acc.truncated_total(gd) == want.truncated_total(gd);
        }
    rep.add("pairing is diagonal on the frame", pair_ok);

    bool lie = true;
    for (int i = 0; i < m.dim && lie; ++i)
        for (int j = 0; j < i && lie; ++j)
            for (int a = 0; a < m.dim && lie; ++a) {
                TruncSeries acc = m.zero_series();
                for (int b = 0; b < m.dim; ++b)
                    acc += fr.e[i][b] * fr.e[j][a].diff(b) - fr.e[j][b] * fr.e[i][a].diff(b);
                lie = acc.truncated(m.capq, m.capv - 1).is_zero();
            }
    rep.add("frame vector fields commute", lie);

    bool diag = true;
    SeriesMat psi_inv = series_mat_inverse(fr.psi);
    for (int l = 0; l < m.dim && diag; ++l) {
        SeriesMat d = psi_inv * m.omega[l] * fr.psi;
        for (int r = 0; r < m.dim && diag; ++r)
            for (int c = 0; c < m.dim && diag; ++c)
                if (r != c) diag = d(r, c).is_zero();
    }
    rep.add("product operators diagonalize in the frame", diag);
    return rep;
}

} // namespace qkh
