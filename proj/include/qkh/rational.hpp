#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

#include "qkh/error.hpp"

namespace qkh {

// Exact rational scalar. All ring coefficients in the library are of this type;
// floating point appears only in the numerical loop simulator.
using Rat = mpq_class;
using Int = mpz_class;

inline Rat rat(long num, long den = 1) {
    if (den == 0) throw error("rational with zero denominator");
    Rat r(num, den);
    r.canonicalize();
    return r;
}

// Parses "p", "-p" or "p/q". Used by the model-file reader and tests.
inline Rat parse_rat(const std::string& s) {
    if (s.empty()) throw error("empty rational literal");
    Rat r;
    if (r.set_str(s, 10) != 0) throw error("bad rational literal: '" + s + "'");
    if (r.get_den() == 0) throw error("zero denominator in literal: '" + s + "'");
    r.canonicalize();
    return r;
}

// Canonical "p/q" (or "p" when q = 1) form, exactly what artifacts emit.
inline std::string to_string(const Rat& r) { return r.get_str(); }

inline Rat pow(const Rat& base, long e) {
    if (e < 0) {
        if (base == 0) throw not_a_unit("0^negative");
        return Rat(1) / pow(base, -e);
    }
    Rat acc(1), b = base;
    while (e > 0) {
        if (e & 1) acc *= b;
        b *= b;
        e >>= 1;
    }
    return acc;
}

inline Rat binomial(long n, long k) {
    if (k < 0) return Rat(0);
    Rat acc(1);
    for (long j = 0; j < k; ++j) acc *= rat(n - j, j + 1);
    return acc;
}

inline Rat factorial(long n) {
    Rat acc(1);
    for (long j = 2; j <= n; ++j) acc *= j;
    return acc;
}

inline double to_double(const Rat& r) { return r.get_d(); }

} // namespace qkh
