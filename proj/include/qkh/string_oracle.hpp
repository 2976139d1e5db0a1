#pragma once

#include <vector>

#include "qkh/error.hpp"
#include "qkh/rational.hpp"

namespace qkh {

// Genus-0 correlator oracle for the one-point target space, independent of
// the series engine. An insertion is a polynomial in y = L - 1 given by its
// coefficient vector (index = power of y). Values are computed from three
// classical facts about the n-point genus-0 moduli spaces:
//   1. the three-point space is a point with trivial cotangent lines, so the
//      value is the product of the insertions at L = 1;
//   2. the string equation for stripping a constant insertion,
//        <1, f_1, ..., f_m> = <f_1, ..., f_m> + sum_t <f_1, ..., Df_t, ..., f_m>,
//      where (Df)(L) = (f(L) - f(1)) / (L - 1) shifts the y-coefficients down;
//   3. a vanishing bound: by Riemann-Roch, the Euler characteristic of
//      L_1^{e_1} x ... x L_n^{e_n} on the n-point space is a polynomial of
//      total degree <= n - 3 in (e_1, ..., e_n), and a correlator whose every
//      insertion vanishes at L = 1 is an n-fold finite difference of it in n
//      distinct variables, which kills all monomials of degree < n. Hence any
//      correlator with all insertions divisible by y is zero.
// Splitting an insertion as f = f(1) * 1 + (f - f(1)) reduces every correlator
// to these cases, so the oracle is total.
using OracleInsertion = std::vector<Rat>;

namespace detail {

inline bool oracle_is_constant(const OracleInsertion& f) {
    for (std::size_t j = 1; j < f.size(); ++j)
        if (f[j] != 0) return false;
    return true;
}

inline Rat oracle_at_one(const OracleInsertion& f) { return f.empty() ? Rat(0) : f[0]; }

inline OracleInsertion oracle_shift(const OracleInsertion& f) {
    if (f.size() <= 1) return {};
    return OracleInsertion(f.begin() + 1, f.end());
}

} // namespace detail

inline Rat string_oracle_point(const std::vector<OracleInsertion>& ins) {
    if (ins.size() < 3) throw oracle_incomplete("correlator needs at least 3 insertions");
    if (ins.size() == 3) {
        Rat v(1);
        for (const auto& f : ins) v *= detail::oracle_at_one(f);
        return v;
    }
    int unit_pos = -1;
    for (std::size_t t = 0; t < ins.size(); ++t)
        if (detail::oracle_is_constant(ins[t])) {
            unit_pos = static_cast<int>(t);
            break;
        }
    if (unit_pos < 0) {
        // No constant insertion: split the first one with a nonzero value at
        // L = 1 into its constant and y-divisible parts; if there is none,
        // the correlator vanishes by the finite-difference degree bound.
        int split_pos = -1;
        for (std::size_t t = 0; t < ins.size(); ++t)
            if (detail::oracle_at_one(ins[t]) != 0) {
                split_pos = static_cast<int>(t);
                break;
            }
        if (split_pos < 0) return Rat(0);
        Rat at_one = detail::oracle_at_one(ins[split_pos]);
        std::vector<OracleInsertion> with_unit = ins;
        with_unit[split_pos] = {Rat(1)};
        std::vector<OracleInsertion> divisible = ins;
        divisible[split_pos][0] = Rat(0);
        return string_oracle_point(with_unit) * at_one + string_oracle_point(divisible);
    }
    Rat scale = detail::oracle_at_one(ins[unit_pos]);
    if (scale == 0) return Rat(0);
    std::vector<OracleInsertion> rest;
    rest.reserve(ins.size() - 1);
    for (std::size_t t = 0; t < ins.size(); ++t)
        if (static_cast<int>(t) != unit_pos) rest.push_back(ins[t]);
    Rat acc = string_oracle_point(rest);
    for (std::size_t t = 0; t < rest.size(); ++t) {
        OracleInsertion shifted = detail::oracle_shift(rest[t]);
        bool zero = true;
        for (const Rat& c : shifted) zero = zero && c == 0;
        if (zero) continue;
        std::vector<OracleInsertion> next = rest;
        next[t] = shifted;
        acc += string_oracle_point(next);
    }
    return acc * scale;
}

} // namespace qkh
