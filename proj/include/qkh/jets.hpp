#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qkh/error.hpp"
#include "qkh/rational.hpp"
#include "qkh/series.hpp"

namespace qkh {

// A jet monomial: multiset of (coordinate, order) factors v_i^{(k)}, k >= 1,
// kept sorted. Order-0 dependence lives in the series coefficient.
using JetMono = std::vector<std::pair<int, int>>;

inline std::string jet_mono_str(const JetMono& m) {
    std::string s;
    for (const auto& [i, k] : m) {
        if (!s.empty()) s += " ";
        s += "v" + std::to_string(i) + "^(" + std::to_string(k) + ")";
    }
    return s.empty() ? "1" : s;
}

// Polynomial in the jet variables with truncated-series coefficients in
// (Q, v); the arena for densities, currents, and evolutionary flows.
class JetPoly {
public:
    JetPoly(int nq, int nv, int capq, int capv) : nq_(nq), nv_(nv), capq_(capq), capv_(capv) {}

    static JetPoly from_series(const TruncSeries& c) {
        JetPoly p(c.nq(), c.nv(), c.capq(), c.capv());
        p.add_term({}, c);
        return p;
    }
    static JetPoly jet_var(int i, int k, int nq, int nv, int capq, int capv) {
        JetPoly p(nq, nv, capq, capv);
        p.add_term({{i, k}}, TruncSeries::constant(Rat(1), nq, nv, capq, capv));
        return p;
    }

    int nq() const { return nq_; }
    int nv() const { return nv_; }
    int capq() const { return capq_; }
    int capv() const { return capv_; }
    const std::map<JetMono, TruncSeries>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    TruncSeries zero_series() const { return TruncSeries(nq_, nv_, capq_, capv_); }

    void add_term(JetMono m, const TruncSeries& c) {
        if (c.is_zero()) return;
        std::sort(m.begin(), m.end());
        auto it = terms_.find(m);
        if (it == terms_.end()) {
            terms_.emplace(std::move(m), c);
        } else {
            it->second += c;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    TruncSeries coeff(const JetMono& m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? zero_series() : it->second;
    }

    JetPoly& operator+=(const JetPoly& o) {
        for (const auto& [m, c] : o.terms_) add_term(m, c);
        return *this;
    }
    JetPoly& operator-=(const JetPoly& o) {
        for (const auto& [m, c] : o.terms_) add_term(m, -c);
        return *this;
    }
    friend JetPoly operator+(JetPoly a, const JetPoly& b) { return a += b; }
    friend JetPoly operator-(JetPoly a, const JetPoly& b) { return a -= b; }
    JetPoly operator-() const {
        JetPoly r(nq_, nv_, capq_, capv_);
        for (const auto& [m, c] : terms_) r.add_term(m, -c);
        return r;
    }

    friend JetPoly operator*(const JetPoly& a, const JetPoly& b) {
        JetPoly r(a.nq_, a.nv_, a.capq_, a.capv_);
        for (const auto& [ma, ca] : a.terms_)
            for (const auto& [mb, cb] : b.terms_) {
                JetMono m = ma;
                m.insert(m.end(), mb.begin(), mb.end());
                r.add_term(std::move(m), ca * cb);
            }
        return r;
    }
    JetPoly scaled(const Rat& c) const {
        JetPoly r(nq_, nv_, capq_, capv_);
        for (const auto& [m, s] : terms_) r.add_term(m, s * c);
        return r;
    }
    JetPoly scaled_series(const TruncSeries& c) const {
        JetPoly r(nq_, nv_, capq_, capv_);
        for (const auto& [m, s] : terms_) r.add_term(m, s * c);
        return r;
    }

    bool operator==(const JetPoly& o) const { return terms_ == o.terms_; }
    bool operator!=(const JetPoly& o) const { return !(*this == o); }

    int max_order() const {
        int k = 0;
        for (const auto& [m, c] : terms_)
            for (const auto& f : m) k = std::max(k, f.second);
        return k;
    }
    int max_coeff_vdeg() const {
        int d = 0;
        for (const auto& [m, c] : terms_) d = std::max(d, c.max_vdeg());
        return d;
    }

    // d/dv_i^{(k)}, k >= 1, with multiplicity.
    JetPoly jet_partial(int i, int k) const {
        JetPoly r(nq_, nv_, capq_, capv_);
        for (const auto& [m, c] : terms_) {
            int mult = 0;
            for (const auto& f : m)
                if (f == std::make_pair(i, k)) ++mult;
            if (mult == 0) continue;
            JetMono rest = m;
            rest.erase(std::find(rest.begin(), rest.end(), std::make_pair(i, k)));
            r.add_term(std::move(rest), c * Rat(mult));
        }
        return r;
    }

    // Derivative in the order-0 coordinate through the coefficients.
    JetPoly coeff_partial(int i) const {
        JetPoly r(nq_, nv_, capq_, capv_);
        for (const auto& [m, c] : terms_) r.add_term(m, c.diff(i));
        return r;
    }

    // Total x-derivative: coefficients pick up first jets, each jet factor is
    // raised one order.
    JetPoly total_derivative() const {
        JetPoly r(nq_, nv_, capq_, capv_);
        for (const auto& [m, c] : terms_) {
            for (int i = 0; i < nv_; ++i) {
                TruncSeries dc = c.diff(i);
                if (dc.is_zero()) continue;
                JetMono mm = m;
                mm.push_back({i, 1});
                r.add_term(std::move(mm), dc);
            }
            for (std::size_t t = 0; t < m.size(); ++t) {
                if (t > 0 && m[t] == m[t - 1]) continue; // distinct pairs once
                int mult = 0;
                for (const auto& f : m)
                    if (f == m[t]) ++mult;
                JetMono mm = m;
                mm[t].second += 1;
                r.add_term(std::move(mm), c * Rat(mult));
            }
        }
        return r;
    }

    double evaluate_double(const std::vector<double>& qv, const std::vector<double>& vv,
                           const std::vector<std::vector<double>>& jets) const {
        double acc = 0.0;
        for (const auto& [m, c] : terms_) {
            double t = c.evaluate_double(qv, vv);
            for (const auto& [i, k] : m) t *= jets.at(i).at(k - 1);
            acc += t;
        }
        return acc;
    }

    std::string str() const {
        if (terms_.empty()) return "0";
        std::string s;
        for (const auto& [m, c] : terms_) {
            if (!s.empty()) s += "  +  ";
            s += "(" + c.str() + ") * " + jet_mono_str(m);
        }
        return s;
    }

private:
    int nq_, nv_, capq_, capv_;
    std::map<JetMono, TruncSeries> terms_;
};

// Higher Euler operator E_i^{(j)}(p) = sum_{k>=j} C(k,j) (-D)^{k-j} d p / d v_i^{(k)}.
// j = 0 is the variational derivative.
inline JetPoly euler_operator(const JetPoly& p, int i, int j) {
    JetPoly r(p.nq(), p.nv(), p.capq(), p.capv());
    int kmax = p.max_order();
    for (int k = std::max(j, 1); k <= kmax; ++k) {
        JetPoly t = p.jet_partial(i, k);
        for (int s = 0; s < k - j; ++s) t = -t.total_derivative();
        r += t.scaled(binomial(k, j));
    }
    if (j == 0) r += p.coeff_partial(i);
    return r;
}

inline JetPoly variational_derivative(const JetPoly& p, int i) { return euler_operator(p, i, 0); }

// Truncates every coefficient to v-degree d.
inline JetPoly jetpoly_vtruncated(const JetPoly& p, int d) {
    JetPoly r(p.nq(), p.nv(), p.capq(), p.capv());
    for (const auto& [m, c] : p.terms()) r.add_term(m, c.truncated(p.capq(), d));
    return r;
}

// p lies in the image of the total derivative iff every variational
// derivative vanishes and the jet-free part is zero. Decided on the stored
// content; no truncation slack.
inline bool is_exact(const JetPoly& p) {
    if (!p.coeff({}).is_zero()) return false;
    for (int i = 0; i < p.nv(); ++i)
        if (!variational_derivative(p, i).is_zero()) return false;
    return true;
}

// Exactness decided up to coefficient v-degree d: for densities assembled
// from capped products, content above the product's trusted degree is noise
// and must not influence the verdict.
inline bool is_exact_to(const JetPoly& p, int d) {
    if (!p.coeff({}).truncated(p.capq(), d).is_zero()) return false;
    for (int i = 0; i < p.nv(); ++i)
        if (!jetpoly_vtruncated(variational_derivative(p, i), d).is_zero()) return false;
    return true;
}

// Explicit primitive f with Df = p, via the scaling homotopy: on the layer of
// joint degree d (coefficient v-degree + number of jet factors),
// f_d = (1/d) sum_i sum_{j>=1} D^{j-1}( v_i * E_i^{(j)}(p_d) ).
// The result is re-verified against p before returning.
inline JetPoly witness(const JetPoly& p) {
    if (p.max_coeff_vdeg() >= p.capv())
        throw error("witness needs coefficient degree below the v-cap (degree " +
                    std::to_string(p.max_coeff_vdeg()) + " at cap " + std::to_string(p.capv()) +
                    ")");
    if (!is_exact(p)) throw error("witness: density is not a total x-derivative");
    std::map<int, JetPoly> layers;
    for (const auto& [m, c] : p.terms())
        for (const auto& [e, r] : c.terms()) {
            int d = static_cast<int>(m.size()) + c.vdeg(e);
            auto it = layers.try_emplace(d, p.nq(), p.nv(), p.capq(), p.capv()).first;
            TruncSeries mono(p.nq(), p.nv(), p.capq(), p.capv());
            mono.add_term(e, r);
            it->second.add_term(m, mono);
        }
    JetPoly f(p.nq(), p.nv(), p.capq(), p.capv());
    for (const auto& [d, pd] : layers) {
        if (d == 0) throw error("witness: jet-free constant term survived exactness check");
        int jmax = pd.max_order();
        for (int i = 0; i < p.nv(); ++i) {
            JetPoly vi = JetPoly::from_series(
                TruncSeries::v_var(i, p.nq(), p.nv(), p.capq(), p.capv()));
            for (int j = 1; j <= jmax; ++j) {
                JetPoly t = vi * euler_operator(pd, i, j);
                for (int s = 0; s < j - 1; ++s) t = t.total_derivative();
                f += t.scaled(Rat(1, d));
            }
        }
    }
    if (f.total_derivative() != p) throw error("witness: homotopy verification failed");
    return f;
}

} // namespace qkh
