#pragma once

#include <map>

#include "qkh/error.hpp"
#include "qkh/matrix.hpp"
#include "qkh/rational.hpp"
#include "qkh/series.hpp"

namespace qkh {

namespace detail {
inline bool coeff_is_zero(const TruncSeries& t) { return t.is_zero(); }
inline bool coeff_is_zero(const SeriesMat& m) { return mat_is_zero(m); }
} // namespace detail

// Finite Laurent object in u = (q-1)^{-1}: powers of u up to ucap, finitely
// many negative powers (powers of (q-1) itself). Coefficients live in C, a
// truncated-series ring or a matrix over one. Objects appearing here have
// poles in q only at q = 1; monomials beyond ucap are dropped silently.
template <class C>
class ULaurent {
public:
    ULaurent() : ucap_(0) {}
    explicit ULaurent(int ucap, const C& zero = C()) : ucap_(ucap), zero_(zero) {}

    int ucap() const { return ucap_; }
    const C& zero_coeff() const { return zero_; }
    const std::map<int, C>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void set_coeff(int k, const C& c) {
        if (k > ucap_) return;
        if (detail::coeff_is_zero(c)) terms_.erase(k);
        else terms_[k] = c;
    }
    void add_coeff(int k, const C& c) {
        if (k > ucap_ || detail::coeff_is_zero(c)) return;
        auto it = terms_.find(k);
        if (it == terms_.end()) {
            terms_.emplace(k, c);
        } else {
            it->second = it->second + c;
            if (detail::coeff_is_zero(it->second)) terms_.erase(it);
        }
    }
    C coeff(int k) const {
        auto it = terms_.find(k);
        return it == terms_.end() ? zero_ : it->second;
    }
    int min_power() const { return terms_.empty() ? 0 : terms_.begin()->first; }
    int max_power() const { return terms_.empty() ? 0 : terms_.rbegin()->first; }

    ULaurent& operator+=(const ULaurent& o) {
        ucap_ = std::min(ucap_, o.ucap_);
        prune();
        for (const auto& [k, c] : o.terms_) add_coeff(k, c);
        return *this;
    }
    ULaurent& operator-=(const ULaurent& o) {
        ucap_ = std::min(ucap_, o.ucap_);
        prune();
        for (const auto& [k, c] : o.terms_) add_coeff(k, Rat(-1) * c);
        return *this;
    }
    friend ULaurent operator+(ULaurent a, const ULaurent& b) { return a += b; }
    friend ULaurent operator-(ULaurent a, const ULaurent& b) { return a -= b; }

    friend ULaurent operator*(const ULaurent& a, const ULaurent& b) {
        ULaurent r(std::min(a.ucap_, b.ucap_), a.zero_ * b.zero_);
        for (const auto& [ka, ca] : a.terms_)
            for (const auto& [kb, cb] : b.terms_) {
                if (ka + kb > r.ucap_) continue;
                r.add_coeff(ka + kb, ca * cb);
            }
        return r;
    }

    template <class S>
    ULaurent scaled(const S& c) const {
        ULaurent r(ucap_, zero_);
        for (const auto& [k, v] : terms_) r.add_coeff(k, v * c);
        return r;
    }

    bool operator==(const ULaurent& o) const { return terms_ == o.terms_; }
    bool operator!=(const ULaurent& o) const { return !(*this == o); }

    // u -> -(1+u), the image of u under q -> q^{-1}; negative powers expand
    // as geometric series truncated at ucap.
    ULaurent substitute_qinv() const {
        ULaurent r(ucap_, zero_);
        for (const auto& [k, c] : terms_) {
            if (k >= 0) {
                // (-(1+u))^k, a polynomial.
                for (int j = 0; j <= k; ++j) {
                    Rat b = binomial(k, j);
                    if (k % 2) b = -b;
                    r.add_coeff(j, c * b);
                }
            } else {
                // (-1)^k (1+u)^k with k < 0: sum_j C(-k-1+j, j) (-1)^j u^j.
                int m = -k;
                for (int j = 0; j <= ucap_; ++j) {
                    Rat b = binomial(m - 1 + j, j);
                    if ((m + j) % 2) b = -b;
                    r.add_coeff(j, c * b);
                }
            }
        }
        return r;
    }

    // Value at q = q0, i.e. u = 1/(q0 - 1). Exact per stored monomial.
    C evaluate_at_q(const Rat& q0) const {
        if (q0 == 1) throw pole_at_one();
        Rat u0 = Rat(1) / (q0 - 1);
        C acc = zero_;
        for (const auto& [k, c] : terms_) acc = acc + c * pow(u0, k);
        return acc;
    }

    // -Res_{q=inf} (q-1)^n a(q) dq = coefficient of u^{n+1}.
    C residue_at_infinity(int n) const { return coeff(n + 1); }

    // Projection onto the Laurent-polynomial part K[q, q^{-1}]: powers
    // (q-1)^m with m >= 0 survive (u-powers <= 0); (q-1)^{-n} proper tails drop.
    ULaurent plus_part() const {
        ULaurent r(ucap_, zero_);
        for (const auto& [k, c] : terms_)
            if (k <= 0) r.add_coeff(k, c);
        return r;
    }

    // Value of the plus part at q = 1: only the u^0 term survives.
    C plus_part_at_one() const { return coeff(0); }

private:
    void prune() {
        for (auto it = terms_.begin(); it != terms_.end();)
            if (it->first > ucap_) it = terms_.erase(it);
            else ++it;
    }

    int ucap_;
    C zero_;
    std::map<int, C> terms_;
};

using UScalar = ULaurent<TruncSeries>;
using UMat = ULaurent<SeriesMat>;

// Inverse of a u-series whose u^0 coefficient is invertible in the base ring
// (inverted by inv0); the rest has u-valuation >= 1, so the Neumann series
// terminates at ucap.
template <class C, class Inv0>
ULaurent<C> ulaurent_invert(const ULaurent<C>& a, Inv0 inv0) {
    if (a.min_power() < 0) throw not_a_unit("u-series with negative powers");
    C b = inv0(a.coeff(0));
    ULaurent<C> binv(a.ucap(), a.zero_coeff());
    binv.set_coeff(0, b);
    ULaurent<C> rem = binv * a;  // 1 + (u-valuation >= 1)
    C one = rem.coeff(0);        // b * a0 = 1 in the truncated base ring
    rem.set_coeff(0, rem.zero_coeff());
    ULaurent<C> acc(a.ucap(), a.zero_coeff());
    acc.set_coeff(0, one);
    ULaurent<C> pw = acc;
    for (int k = 1; k <= a.ucap(); ++k) {
        pw = pw * rem;
        if (pw.is_zero()) break;
        if (k % 2 == 1) acc -= pw;
        else acc += pw;
    }
    return acc * binv;
}

// 2/(1+q) expanded in u: 2u(1+2u)^{-1} = sum_{k>=1} 2(-2)^{k-1} u^k.
inline UScalar two_over_one_plus_q(int ucap, int nq, int nv, int capq, int capv) {
    UScalar r(ucap, TruncSeries(nq, nv, capq, capv));
    Rat c(2);
    for (int k = 1; k <= ucap; ++k) {
        r.set_coeff(k, TruncSeries::constant(c, nq, nv, capq, capv));
        c *= -2;
    }
    return r;
}

} // namespace qkh
