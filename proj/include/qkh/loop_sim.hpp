#pragma once

// The only floating-point module: pseudo-spectral integration of the
// hierarchy PDEs on the circle. Everything upstream stays exact; flows are
// compiled once into double-coefficient evaluators here.

#include <fftw3.h>

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qkh/error.hpp"
#include "qkh/hierarchy.hpp"
#include "qkh/jets.hpp"
#include "qkh/model.hpp"
#include "qkh/series.hpp"

namespace qkh {

// Real spectral differentiation on M equispaced samples of [0,1).
// Owns its FFTW buffers and plans; not thread-safe, not copyable.
class SpectralGrid {
public:
    explicit SpectralGrid(int m) : m_(m) {
        if (m < 4 || (m & (m - 1)) != 0) throw error("grid size must be a power of two >= 4");
        re_ = fftw_alloc_real(static_cast<std::size_t>(m));
        cx_ = fftw_alloc_complex(static_cast<std::size_t>(m) / 2 + 1);
        fwd_ = fftw_plan_dft_r2c_1d(m, re_, cx_, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r_1d(m, cx_, re_, FFTW_ESTIMATE);
    }
    SpectralGrid(const SpectralGrid&) = delete;
    SpectralGrid& operator=(const SpectralGrid&) = delete;
    ~SpectralGrid() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(re_);
        fftw_free(cx_);
    }

    int size() const { return m_; }
    double node(int i) const { return static_cast<double>(i) / m_; }

    // d/dx by Fourier multiplier 2*pi*i*k; the Nyquist mode is dropped.
    std::vector<double> derivative(const std::vector<double>& f) {
        load(f);
        fftw_execute(fwd_);
        int half = m_ / 2;
        for (int k = 0; k <= half; ++k) {
            double w = 2.0 * pi() * k;
            double re = cx_[k][0], im = cx_[k][1];
            cx_[k][0] = -w * im;
            cx_[k][1] = w * re;
        }
        cx_[half][0] = 0.0;
        cx_[half][1] = 0.0;
        return unload();
    }

    // 2/3-rule low-pass: zero every mode with k > M/3.
    void dealias(std::vector<double>& f) {
        load(f);
        fftw_execute(fwd_);
        int keep = m_ / 3;
        for (int k = keep + 1; k <= m_ / 2; ++k) cx_[k][0] = cx_[k][1] = 0.0;
        f = unload();
    }

    static double pi() { return 3.14159265358979323846; }

private:
    void load(const std::vector<double>& f) {
        if (static_cast<int>(f.size()) != m_) throw arity_mismatch("grid sample count");
        for (int i = 0; i < m_; ++i) re_[i] = f[i];
    }
    std::vector<double> unload() {
        fftw_execute(bwd_);
        std::vector<double> out(static_cast<std::size_t>(m_));
        for (int i = 0; i < m_; ++i) out[i] = re_[i] / m_;
        return out;
    }

    int m_;
    double* re_;
    fftw_complex* cx_;
    fftw_plan fwd_, bwd_;
};

// Loop-space point: one sample row per coordinate component.
struct LoopState {
    double t = 0.0;
    std::vector<std::vector<double>> v;

    int dim() const { return static_cast<int>(v.size()); }
    int samples() const { return v.empty() ? 0 : static_cast<int>(v[0].size()); }
};

inline LoopState sample_loop(int dim, const SpectralGrid& grid,
                             const std::function<double(int, double)>& f) {
    LoopState s;
    s.v.assign(static_cast<std::size_t>(dim), std::vector<double>(grid.size()));
    for (int a = 0; a < dim; ++a)
        for (int i = 0; i < grid.size(); ++i) s.v[a][i] = f(a, grid.node(i));
    return s;
}

// Root-mean-square distance between two states with the same shape.
inline double l2_distance(const LoopState& x, const LoopState& y) {
    double acc = 0.0;
    long n = 0;
    for (int a = 0; a < x.dim(); ++a)
        for (int i = 0; i < x.samples(); ++i) {
            double d = x.v[a][i] - y.v[a][i];
            acc += d * d;
            ++n;
        }
    return std::sqrt(acc / static_cast<double>(n));
}

// Polynomial in the v-components with double coefficients; the Novikov
// variables are specialized at compilation time.
struct PolyEval {
    struct Term {
        double c;
        std::vector<int> expo;
    };
    std::vector<Term> terms;

    double operator()(const std::vector<double>& v) const {
        double acc = 0.0;
        for (const auto& t : terms) {
            double w = t.c;
            for (std::size_t a = 0; a < t.expo.size(); ++a)
                for (int k = 0; k < t.expo[a]; ++k) w *= v[a];
            acc += w;
        }
        return acc;
    }
};

inline PolyEval compile_series(const TruncSeries& s, const std::vector<double>& qvals) {
    if (static_cast<int>(qvals.size()) != s.nq()) throw arity_mismatch("Novikov value count");
    PolyEval p;
    for (const auto& [e, c] : s.terms()) {
        PolyEval::Term t;
        t.c = to_double(c);
        for (int j = 0; j < s.nq(); ++j)
            for (int k = 0; k < e[j]; ++k) t.c *= qvals[j];
        t.expo.assign(e.begin() + s.nq(), e.end());
        p.terms.push_back(std::move(t));
    }
    return p;
}

// First-order quasilinear system dv_b/dt = sum_a coeff[b][a](v) d_x v_a.
struct NumericFlow {
    std::string label;
    std::vector<std::vector<std::function<double(const std::vector<double>&)>>> coeff;

    int dim() const { return static_cast<int>(coeff.size()); }
};

// Compiles an exact hierarchy flow; rejects anything beyond first-order jets
// (the integrator handles hydrodynamic systems only).
inline NumericFlow compile_flow(const FrobeniusModel& m, const Flow& f,
                                const std::vector<double>& qvals) {
    NumericFlow nf;
    nf.label = "flow(" + std::to_string(f.n) + "," + std::to_string(f.i) + ")";
    nf.coeff.resize(static_cast<std::size_t>(m.dim));
    for (int b = 0; b < m.dim; ++b) {
        std::vector<TruncSeries> parts(static_cast<std::size_t>(m.dim), m.zero_series());
        for (const auto& [mono, s] : f.components[b].terms()) {
            if (mono.empty()) {
                if (!s.is_zero()) throw error("flow has a source term; not hydrodynamic");
                continue;
            }
            if (mono.size() != 1 || mono[0].second != 1)
                throw error("flow is not hydrodynamic (higher jets present)");
            parts[static_cast<std::size_t>(mono[0].first)] += s;
        }
        for (int a = 0; a < m.dim; ++a) {
            PolyEval p = compile_series(parts[a], qvals);
            nf.coeff[b].push_back([p](const std::vector<double>& v) { return p(v); });
        }
    }
    return nf;
}

inline double max_gradient(SpectralGrid& grid, const LoopState& s) {
    double mx = 0.0;
    for (int a = 0; a < s.dim(); ++a) {
        std::vector<double> d = grid.derivative(s.v[a]);
        for (double x : d) mx = std::max(mx, std::abs(x));
    }
    return mx;
}

namespace detail {

inline std::vector<std::vector<double>> flow_rhs(SpectralGrid& grid, const NumericFlow& f,
                                                 const std::vector<std::vector<double>>& v) {
    int dim = static_cast<int>(v.size());
    int m = grid.size();
    std::vector<std::vector<double>> dv;
    dv.reserve(v.size());
    for (int a = 0; a < dim; ++a) dv.push_back(grid.derivative(v[a]));
    std::vector<std::vector<double>> rhs(v.size(), std::vector<double>(m, 0.0));
    std::vector<double> point(v.size());
    for (int i = 0; i < m; ++i) {
        for (int a = 0; a < dim; ++a) point[a] = v[a][i];
        for (int b = 0; b < dim; ++b)
            for (int a = 0; a < dim; ++a) {
                double c = f.coeff[b][a](point);
                if (c != 0.0) rhs[b][i] += c * dv[a][i];
            }
    }
    for (int b = 0; b < dim; ++b) grid.dealias(rhs[b]);
    return rhs;
}

inline std::vector<std::vector<double>> axpy(const std::vector<std::vector<double>>& v,
                                             double h, const std::vector<std::vector<double>>& k) {
    std::vector<std::vector<double>> r = v;
    for (std::size_t a = 0; a < r.size(); ++a)
        for (std::size_t i = 0; i < r[a].size(); ++i) r[a][i] += h * k[a][i];
    return r;
}

} // namespace detail

// One classical 4th-order step.
inline LoopState rk4_step(SpectralGrid& grid, const NumericFlow& f, const LoopState& s,
                          double dt) {
    auto k1 = detail::flow_rhs(grid, f, s.v);
    auto k2 = detail::flow_rhs(grid, f, detail::axpy(s.v, dt / 2, k1));
    auto k3 = detail::flow_rhs(grid, f, detail::axpy(s.v, dt / 2, k2));
    auto k4 = detail::flow_rhs(grid, f, detail::axpy(s.v, dt, k3));
    LoopState out = s;
    out.t += dt;
    for (int a = 0; a < s.dim(); ++a)
        for (int i = 0; i < s.samples(); ++i) {
            out.v[a][i] += dt / 6 * (k1[a][i] + 2 * k2[a][i] + 2 * k3[a][i] + k4[a][i]);
            if (!std::isfinite(out.v[a][i]))
                throw blowup_detected("non-finite sample at t = " + std::to_string(out.t));
        }
    return out;
}

// Advances by t_span with fixed steps (one short final step when t_span is
// not a multiple of dt). Aborts once max |d_x v| exceeds 10x its initial
// value: the solution is steepening toward gradient catastrophe.
inline LoopState run_flow(SpectralGrid& grid, const NumericFlow& f, LoopState s, double t_span,
                          double dt,
                          const std::function<void(const LoopState&)>& observer = nullptr) {
    double g0 = max_gradient(grid, s);
    double limit = 10.0 * std::max(g0, 1e-12);
    if (observer) observer(s);
    double remaining = t_span;
    while (remaining > 1e-14) {
        double h = std::min(dt, remaining);
        s = rk4_step(grid, f, s, h);
        remaining -= h;
        if (max_gradient(grid, s) > limit)
            throw blowup_detected("gradient grew 10x by t = " + std::to_string(s.t));
        if (observer) observer(s);
    }
    return s;
}

// Spectral quadrature of a sampled density: the plain mean over nodes.
inline double loop_integral(const std::vector<double>& samples) {
    double acc = 0.0;
    for (double x : samples) acc += x;
    return acc / static_cast<double>(samples.size());
}

struct DriftRow {
    std::string label;
    double initial = 0.0;
    double max_drift = 0.0; // max |I(t) - I(0)| / max(1, |I(0)|) over the run
};

// Integrates the flow and tracks functionals int density(v) dx at every step.
inline std::vector<DriftRow> conserved_drift(
    SpectralGrid& grid, const NumericFlow& f, const LoopState& s0, double t_span, double dt,
    const std::vector<std::pair<std::string, PolyEval>>& densities) {
    std::vector<DriftRow> rows;
    rows.reserve(densities.size());
    for (const auto& [label, den] : densities) rows.push_back({label, 0.0, 0.0});
    bool first = true;
    std::vector<double> point;
    auto observe = [&](const LoopState& s) {
        for (std::size_t d = 0; d < densities.size(); ++d) {
            std::vector<double> vals(static_cast<std::size_t>(s.samples()));
            point.assign(static_cast<std::size_t>(s.dim()), 0.0);
            for (int i = 0; i < s.samples(); ++i) {
                for (int a = 0; a < s.dim(); ++a) point[a] = s.v[a][i];
                vals[static_cast<std::size_t>(i)] = densities[d].second(point);
            }
            double val = loop_integral(vals);
            if (first) rows[d].initial = val;
            double rel = std::abs(val - rows[d].initial) / std::max(1.0, std::abs(rows[d].initial));
            rows[d].max_drift = std::max(rows[d].max_drift, rel);
        }
        first = false;
    };
    run_flow(grid, f, s0, t_span, dt, observe);
    return rows;
}

// || (A for t_a, then B for t_b) - (B, then A) ||_{L^2}.
inline double commute_defect(SpectralGrid& grid, const NumericFlow& fa, const NumericFlow& fb,
                             const LoopState& s0, double t_a, double t_b, double dt) {
    LoopState ab = run_flow(grid, fb, run_flow(grid, fa, s0, t_a, dt), t_b, dt);
    LoopState ba = run_flow(grid, fa, run_flow(grid, fb, s0, t_b, dt), t_a, dt);
    return l2_distance(ab, ba);
}

// Method-of-characteristics solution of the scalar flow dv/dt = speed(v) d_x v:
// v(x, t) solves v = f(x + t*speed(v)), unique pre-shock; Newton per node.
inline std::vector<double> characteristic_oracle(const SpectralGrid& grid,
                                                 const std::function<double(double)>& f,
                                                 const std::function<double(double)>& fprime,
                                                 const std::function<double(double)>& speed,
                                                 const std::function<double(double)>& dspeed,
                                                 double t) {
    std::vector<double> out(static_cast<std::size_t>(grid.size()));
    for (int i = 0; i < grid.size(); ++i) {
        double x = grid.node(i);
        double v = f(x);
        for (int it = 0; it < 64; ++it) {
            double arg = x + t * speed(v);
            double res = v - f(arg);
            double der = 1.0 - t * fprime(arg) * dspeed(v);
            double step = res / der;
            v -= step;
            if (std::abs(step) < 1e-15) break;
        }
        out[static_cast<std::size_t>(i)] = v;
    }
    return out;
}

} // namespace qkh
