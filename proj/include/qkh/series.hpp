#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qkh/error.hpp"
#include "qkh/rational.hpp"

namespace qkh {

// Exponent vector: nq Novikov exponents followed by nv coordinate exponents.
using Expo = std::vector<int>;

// Sparse multivariate power series over Rat, truncated by total degree
// separately in the Novikov block (capq) and the coordinate block (capv).
// Canonical form: no zero coefficients, no over-cap monomials; over-cap
// products of in-cap terms are dropped silently.
class TruncSeries {
public:
    TruncSeries() : nq_(0), nv_(0), capq_(0), capv_(0) {}
    TruncSeries(int nq, int nv, int capq, int capv)
        : nq_(nq), nv_(nv), capq_(capq), capv_(capv) {}

    static TruncSeries constant(const Rat& c, int nq, int nv, int capq, int capv) {
        TruncSeries s(nq, nv, capq, capv);
        if (c != 0) s.terms_[Expo(nq + nv, 0)] = c;
        return s;
    }
    // Novikov variable Q_j, j in [0, nq).
    static TruncSeries q_var(int j, int nq, int nv, int capq, int capv) {
        TruncSeries s(nq, nv, capq, capv);
        Expo e(nq + nv, 0);
        e[j] = 1;
        if (capq >= 1) s.terms_[e] = 1;
        return s;
    }
    // Coordinate variable v_i, i in [0, nv).
    static TruncSeries v_var(int i, int nq, int nv, int capq, int capv) {
        TruncSeries s(nq, nv, capq, capv);
        Expo e(nq + nv, 0);
        e[nq + i] = 1;
        if (capv >= 1) s.terms_[e] = 1;
        return s;
    }

    int nq() const { return nq_; }
    int nv() const { return nv_; }
    int capq() const { return capq_; }
    int capv() const { return capv_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }
    const std::map<Expo, Rat>& terms() const { return terms_; }

    int qdeg(const Expo& e) const {
        int d = 0;
        for (int j = 0; j < nq_; ++j) d += e[j];
        return d;
    }
    int vdeg(const Expo& e) const {
        int d = 0;
        for (int i = 0; i < nv_; ++i) d += e[nq_ + i];
        return d;
    }

    Rat coeff(const Expo& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? Rat(0) : it->second;
    }
    Rat constant_term() const { return coeff(Expo(nq_ + nv_, 0)); }

    void add_term(const Expo& e, const Rat& c) {
        if (c == 0) return;
        if (qdeg(e) > capq_ || vdeg(e) > capv_) return;
        auto it = terms_.find(e);
        if (it == terms_.end()) {
            terms_.emplace(e, c);
        } else {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    TruncSeries& operator+=(const TruncSeries& o) {
        check_shape(o);
        merge_caps(o);
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }
    TruncSeries& operator-=(const TruncSeries& o) {
        check_shape(o);
        merge_caps(o);
        for (const auto& [e, c] : o.terms_) add_term(e, -c);
        return *this;
    }
    friend TruncSeries operator+(TruncSeries a, const TruncSeries& b) { return a += b; }
    friend TruncSeries operator-(TruncSeries a, const TruncSeries& b) { return a -= b; }
    TruncSeries operator-() const {
        TruncSeries r(*this);
        for (auto& [e, c] : r.terms_) c = -c;
        return r;
    }

    friend TruncSeries operator*(const TruncSeries& a, const TruncSeries& b) {
        a.check_shape(b);
        TruncSeries r(a.nq_, a.nv_, std::min(a.capq_, b.capq_), std::min(a.capv_, b.capv_));
        Expo e(a.nq_ + a.nv_);
        for (const auto& [ea, ca] : a.terms_) {
            for (const auto& [eb, cb] : b.terms_) {
                for (std::size_t k = 0; k < e.size(); ++k) e[k] = ea[k] + eb[k];
                r.add_term(e, ca * cb);
            }
        }
        return r;
    }
    TruncSeries& operator*=(const TruncSeries& o) { return *this = *this * o; }

    TruncSeries& operator*=(const Rat& c) {
        if (c == 0) {
            terms_.clear();
        } else {
            for (auto& [e, v] : terms_) v *= c;
        }
        return *this;
    }
    friend TruncSeries operator*(TruncSeries a, const Rat& c) { return a *= c; }
    friend TruncSeries operator*(const Rat& c, TruncSeries a) { return a *= c; }

    bool operator==(const TruncSeries& o) const {
        return nq_ == o.nq_ && nv_ == o.nv_ && terms_ == o.terms_;
    }
    bool operator!=(const TruncSeries& o) const { return !(*this == o); }

    // Multiplicative inverse; requires an invertible (nonzero) constant term.
    // Neumann series in the augmentation ideal, terminates at capq + capv.
    TruncSeries invert() const {
        Rat c0 = constant_term();
        if (c0 == 0) throw not_a_unit("series has zero constant term");
        TruncSeries m = *this * (Rat(1) / c0);
        m.add_term(Expo(nq_ + nv_, 0), Rat(-1)); // m = a/c0 - 1, valuation >= 1
        TruncSeries acc = constant(Rat(1), nq_, nv_, capq_, capv_);
        TruncSeries pw = acc;
        for (int k = 1; k <= capq_ + capv_; ++k) {
            pw = pw * m;
            if (pw.is_zero()) break;
            if (k % 2 == 1) acc -= pw;
            else acc += pw;
        }
        return acc * (Rat(1) / c0);
    }

    // d/dv_i.
    TruncSeries diff(int i) const {
        TruncSeries r(nq_, nv_, capq_, capv_);
        Expo e(nq_ + nv_);
        for (const auto& [ea, c] : terms_) {
            int p = ea[nq_ + i];
            if (p == 0) continue;
            e = ea;
            e[nq_ + i] = p - 1;
            r.add_term(e, c * p);
        }
        return r;
    }

    // Antiderivative in v_i with zero integration constant; the exact result
    // is truncated back to capv (terms raised past the cap are dropped).
    TruncSeries integrate(int i) const {
        TruncSeries r(nq_, nv_, capq_, capv_);
        Expo e(nq_ + nv_);
        for (const auto& [ea, c] : terms_) {
            e = ea;
            e[nq_ + i] += 1;
            r.add_term(e, c / Rat(e[nq_ + i]));
        }
        return r;
    }

    // Substitutes images[i] for v_i; Novikov variables pass through unchanged.
    // All images must share one shape with nq equal to this series' nq.
    TruncSeries compose(const std::vector<TruncSeries>& images) const {
        if (static_cast<int>(images.size()) != nv_)
            throw arity_mismatch("compose: wrong number of images");
        int tnq = nq_, tnv = 0, tcapq = capq_, tcapv = capv_;
        if (nv_ > 0) {
            tnq = images[0].nq_;
            tnv = images[0].nv_;
            tcapq = images[0].capq_;
            tcapv = images[0].capv_;
            if (tnq != nq_) throw arity_mismatch("compose: Novikov rank differs");
            for (const auto& im : images)
                if (im.nq_ != tnq || im.nv_ != tnv) throw arity_mismatch("compose: image shapes differ");
        }
        std::vector<std::vector<TruncSeries>> pw(nv_);
        for (int i = 0; i < nv_; ++i)
            pw[i].push_back(TruncSeries::constant(Rat(1), tnq, tnv, tcapq, tcapv));
        TruncSeries r(tnq, tnv, tcapq, tcapv);
        for (const auto& [e, c] : terms_) {
            TruncSeries term = TruncSeries::constant(c, tnq, tnv, tcapq, tcapv);
            Expo qe(tnq + tnv, 0);
            for (int j = 0; j < nq_; ++j) qe[j] = e[j];
            term = term.mul_monomial(qe, Rat(1));
            for (int i = 0; i < nv_ && !term.is_zero(); ++i) {
                int p = e[nq_ + i];
                if (p == 0) continue;
                while (static_cast<int>(pw[i].size()) <= p) pw[i].push_back(pw[i].back() * images[i]);
                term = term * pw[i][p];
            }
            r += term;
        }
        return r;
    }

    TruncSeries mul_monomial(const Expo& m, const Rat& c) const {
        TruncSeries r(nq_, nv_, capq_, capv_);
        Expo e(nq_ + nv_);
        for (const auto& [ea, ca] : terms_) {
            for (std::size_t k = 0; k < e.size(); ++k) e[k] = ea[k] + m[k];
            r.add_term(e, ca * c);
        }
        return r;
    }

    // Copy truncated to tighter caps.
    TruncSeries truncated(int capq, int capv) const {
        TruncSeries r(nq_, nv_, std::min(capq, capq_), std::min(capv, capv_));
        for (const auto& [e, c] : terms_) r.add_term(e, c);
        return r;
    }

    // Drops every monomial of total (Novikov + coordinate) degree > d.
    TruncSeries truncated_total(int d) const {
        TruncSeries r(nq_, nv_, capq_, capv_);
        for (const auto& [e, c] : terms_)
            if (qdeg(e) + vdeg(e) <= d) r.add_term(e, c);
        return r;
    }

    // Sets Q_j = qvals[j] exactly; result has Novikov rank 0.
    TruncSeries specialize_q(const std::vector<Rat>& qvals) const {
        if (static_cast<int>(qvals.size()) != nq_)
            throw arity_mismatch("specialize_q: wrong value count");
        TruncSeries r(0, nv_, 0, capv_);
        Expo e(nv_);
        for (const auto& [ea, c] : terms_) {
            Rat f = c;
            for (int j = 0; j < nq_; ++j) f *= pow(qvals[j], ea[j]);
            for (int i = 0; i < nv_; ++i) e[i] = ea[nq_ + i];
            r.add_term(e, f);
        }
        return r;
    }

    double evaluate_double(const std::vector<double>& qv, const std::vector<double>& vv) const {
        double acc = 0;
        for (const auto& [e, c] : terms_) {
            double t = to_double(c);
            for (int j = 0; j < nq_; ++j)
                for (int k = 0; k < e[j]; ++k) t *= qv[j];
            for (int i = 0; i < nv_; ++i)
                for (int k = 0; k < e[nq_ + i]; ++k) t *= vv[i];
            acc += t;
        }
        return acc;
    }

    Rat evaluate_rat(const std::vector<Rat>& qv, const std::vector<Rat>& vv) const {
        Rat acc(0);
        for (const auto& [e, c] : terms_) {
            Rat t = c;
            for (int j = 0; j < nq_; ++j) t *= pow(qv[j], e[j]);
            for (int i = 0; i < nv_; ++i) t *= pow(vv[i], e[nq_ + i]);
            acc += t;
        }
        return acc;
    }

    int max_vdeg() const {
        int d = 0;
        for (const auto& [e, c] : terms_) d = std::max(d, vdeg(e));
        return d;
    }

    // Rendering like "1/2 Q0^2 v1" with '+' separators; variables named Q<j>, v<i>.
    std::string str() const {
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [e, c] : terms_) {
            if (!first) os << " + ";
            first = false;
            os << to_string(c);
            for (int j = 0; j < nq_; ++j) {
                if (e[j] == 0) continue;
                os << " Q" << j;
                if (e[j] > 1) os << "^" << e[j];
            }
            for (int i = 0; i < nv_; ++i) {
                if (e[nq_ + i] == 0) continue;
                os << " v" << i;
                if (e[nq_ + i] > 1) os << "^" << e[nq_ + i];
            }
        }
        return os.str();
    }

private:
    void check_shape(const TruncSeries& o) const {
        if (nq_ != o.nq_ || nv_ != o.nv_)
            throw arity_mismatch("series over different variable sets");
    }
    void merge_caps(const TruncSeries& o) {
        if (o.capq_ < capq_ || o.capv_ < capv_) {
            capq_ = std::min(capq_, o.capq_);
            capv_ = std::min(capv_, o.capv_);
            for (auto it = terms_.begin(); it != terms_.end();) {
                if (qdeg(it->first) > capq_ || vdeg(it->first) > capv_) it = terms_.erase(it);
                else ++it;
            }
        }
    }

    int nq_, nv_, capq_, capv_;
    std::map<Expo, Rat> terms_;
};

// exp of a series with zero constant term, to the caps of the argument.
inline TruncSeries series_exp(const TruncSeries& a) {
    if (a.constant_term() != 0) throw error("series_exp needs zero constant term");
    TruncSeries acc = TruncSeries::constant(Rat(1), a.nq(), a.nv(), a.capq(), a.capv());
    TruncSeries pw = acc;
    for (int k = 1; k <= a.capq() + a.capv(); ++k) {
        pw = pw * a;
        if (pw.is_zero()) break;
        acc += pw * (Rat(1) / factorial(k));
    }
    return acc;
}

// log(1 + a) for a with zero constant term.
inline TruncSeries series_log1p(const TruncSeries& a) {
    if (a.constant_term() != 0) throw error("series_log1p needs zero constant term");
    TruncSeries acc(a.nq(), a.nv(), a.capq(), a.capv());
    TruncSeries pw = TruncSeries::constant(Rat(1), a.nq(), a.nv(), a.capq(), a.capv());
    for (int k = 1; k <= a.capq() + a.capv(); ++k) {
        pw = pw * a;
        if (pw.is_zero()) break;
        acc += pw * (Rat((k % 2) ? 1 : -1, k));
    }
    return acc;
}

} // namespace qkh
