// Command-line surface: flows / verify / tau / invariants / simulate / trr.
// Every emitted rational is exact "p/q"; floating values appear only in
// `simulate` output, which carries a format-version tag.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "qkh/frobenius.hpp"
#include "qkh/hierarchy.hpp"
#include "qkh/loop_sim.hpp"
#include "qkh/model.hpp"
#include "qkh/smatrix.hpp"
#include "qkh/string_oracle.hpp"
#include "qkh/topo.hpp"

namespace {

using namespace qkh;

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Monomial rendering: Novikov variables as Q<j>, coordinates named by `vn`.
std::string mono_str(const TruncSeries& s, const Expo& e,
                     const std::function<std::string(int)>& vn) {
    std::string out;
    auto app = [&out](const std::string& base, int p) {
        if (p == 0) return;
        if (!out.empty()) out += "*";
        out += base;
        if (p > 1) out += "^" + std::to_string(p);
    };
    for (int j = 0; j < s.nq(); ++j) app("Q" + std::to_string(j), e[j]);
    for (int i = 0; i < s.nv(); ++i) app(vn(i), e[s.nq() + i]);
    return out.empty() ? "1" : out;
}

std::string coord_name(int i) { return "v" + std::to_string(i); }

std::ofstream open_out(const std::string& dir, const std::string& file) {
    std::string path = dir.empty() || dir == "." ? file : dir + "/" + file;
    std::ofstream out(path);
    if (!out) throw error("cannot write artifact: " + path);
    return out;
}

struct CommonOpts {
    std::string model = "pt";
    std::string out_dir = ".";
    int capv = 10;
    int nu = 8;
    unsigned long seed = 7;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--model", c.model, "built-in name (pt, pt2) or model file path");
    cmd->add_option("--out-dir", c.out_dir, "artifact directory");
    cmd->add_option("--cap-v", c.capv, "coordinate degree cap for built-ins")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--nu", c.nu, "solved S-matrix order")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", c.seed, "seed recorded in reports");
}

struct Workspace {
    FrobeniusModel m;
    SMatrixData sm;
    MetricData md;
};

Workspace make_workspace(const CommonOpts& c) {
    Workspace w{load_model(c.model, c.capv), {}, {}};
    w.sm = solve_s(w.m, c.nu);
    w.md = metric(w.m, w.sm);
    return w;
}

void emit_flow_rows(std::ostream& out, const FrobeniusModel& m, const Flow& f) {
    for (std::size_t b = 0; b < f.components.size(); ++b)
        for (const auto& [mono, s] : f.components[b].terms())
            for (const auto& [e, c] : s.terms())
                out << f.n << "," << f.i << "," << b << "," << jet_mono_str(mono) << ","
                    << mono_str(s, e, coord_name) << "," << to_string(c) << "\n";
}

int cmd_flows(const CommonOpts& c, int maxn) {
    Workspace w = make_workspace(c);
    std::ofstream out = open_out(c.out_dir, "flows_" + w.m.name + ".csv");
    out << "n,i,component,jet,monomial,value\n";
    for (int n = 0; n <= maxn; ++n)
        for (int i = 0; i < w.m.dim; ++i) {
            Flow f = flow(w.m, w.sm, n, i);
            emit_flow_rows(out, w.m, f);
            std::size_t nterms = 0;
            for (const auto& comp : f.components) nterms += comp.terms().size();
            std::cout << "flow(" << n << "," << i << "): " << nterms << " jet term(s)\n";
        }
    std::cout << "wrote flows_" << w.m.name << ".csv\n";
    return 0;
}

int cmd_verify(const CommonOpts& c, int maxn) {
    Workspace w = make_workspace(c);
    const FrobeniusModel& m = w.m;
    CheckReport rep;
    validate_model(m);
    rep.add("model structure valid", true);
    rep.add("qde residual vanishes", check_qde(m, w.sm));
    rep.add("S is a symplectomorphism", check_symplectic(m, w.sm, w.md, w.md.exact_total_deg));
    rep.add("metric inverse consistent",
            mat_is_zero(mat_truncated_total(w.md.G * w.md.Ginv - m.identity_mat(),
                                            m.capq + m.capv)));
    for (const auto& [name, ok] : verify_frobenius(m, w.md).checks) rep.add(name, ok);

    int hdeg = std::min(w.sm.ucap, m.capv) - 2;
    int hmax = std::min(maxn, w.sm.ucap - 1);
    for (int n = 0; n <= hmax; ++n)
        for (int i = 0; i < m.dim; ++i) {
            JetPoly h = JetPoly::from_series(hamiltonian_density(m, w.sm, n, i));
            bool ok = flows_equal_to(hamiltonian_derivation(w.md, h), flow(m, w.sm, n, i), hdeg);
            rep.add("hamiltonian route matches flow (" + std::to_string(n) + "," +
                        std::to_string(i) + ")",
                    ok);
        }

    bool comm = true;
    for (int n1 = 0; n1 <= maxn && comm; ++n1)
        for (int n2 = n1; n1 + n2 <= maxn && comm; ++n2)
            for (int i1 = 0; i1 < m.dim && comm; ++i1)
                for (int i2 = 0; i2 < m.dim && comm; ++i2)
                    comm = check_commute(flow(m, w.sm, n1, i1), flow(m, w.sm, n2, i2),
                                         m.capv - 1);
    rep.add("budgeted flows commute", comm);

    int bdeg = std::min(w.sm.ucap, m.capv) - 2;
    bool invol = true;
    int imax = std::min(maxn, w.sm.ucap - 1);
    for (int n1 = 0; n1 <= imax && invol; ++n1)
        for (int n2 = n1; n2 <= imax && n1 + n2 <= maxn && invol; ++n2)
            for (int i1 = 0; i1 < m.dim && invol; ++i1)
                for (int i2 = 0; i2 < m.dim && invol; ++i2)
                    invol = check_involution(m, w.sm, w.md, n1, i1, n2, i2, bdeg);
    rep.add("hamiltonians in involution", invol);

    std::ofstream out = open_out(c.out_dir, "verify_" + m.name + ".txt");
    out << "# verify report: model=" << m.name << " cap_v=" << m.capv << " cap_q=" << m.capq
        << " nu=" << c.nu << " max_n=" << maxn << " seed=" << c.seed << "\n";
    for (const auto& [name, ok] : rep.checks) out << (ok ? "ok   " : "FAIL ") << name << "\n";
    for (const auto& [name, ok] : rep.checks)
        if (!ok) std::cout << "FAIL " << name << "\n";
    std::cout << (rep.ok() ? "verify: all checks passed\n" : "verify: FAILURES\n");
    return rep.ok() ? 0 : 1;
}

int cmd_tau(const CommonOpts& c, int kt, int degt) {
    Workspace w = make_workspace(c);
    DescendantArena ar{kt, degt, w.m.dim, w.m.rank, w.m.capq};
    auto tname = [&](int s) {
        return "t" + std::to_string(s / ar.dim) + "_" + std::to_string(s % ar.dim);
    };
    std::vector<TruncSeries> tau = solve_tau(w.m, w.sm, ar);
    std::vector<TruncSeries> wsol = topological_solution(w.m, w.sm, ar, tau);
    std::ofstream tf = open_out(c.out_dir, "tau_" + w.m.name + ".csv");
    tf << "component,monomial,value\n";
    for (int a = 0; a < w.m.dim; ++a)
        for (const auto& [e, r] : tau[a].terms())
            tf << a << "," << mono_str(tau[a], e, tname) << "," << to_string(r) << "\n";
    std::ofstream wf = open_out(c.out_dir, "w_" + w.m.name + ".csv");
    wf << "component,monomial,value\n";
    for (int a = 0; a < w.m.dim; ++a)
        for (const auto& [e, r] : wsol[a].terms())
            wf << a << "," << mono_str(wsol[a], e, tname) << "," << to_string(r) << "\n";
    std::cout << "wrote tau_" << w.m.name << ".csv and w_" << w.m.name << ".csv\n";
    return 0;
}

std::string correlator_str(const std::vector<int>& ks) {
    std::string s = "<1,1";
    for (int k : ks) {
        s += ",";
        if (k == 0) s += "1";
        else if (k == 1) s += "(L-1)";
        else s += "(L-1)^" + std::to_string(k);
    }
    return s + ">";
}

void enumerate_invariants(std::ostream& out, std::vector<int>& ks, int weight, int maxdeg) {
    if (!ks.empty()) {
        std::vector<OracleInsertion> ins(2, OracleInsertion{Rat(1)});
        for (int k : ks) {
            OracleInsertion f(static_cast<std::size_t>(k) + 1, Rat(0));
            f[static_cast<std::size_t>(k)] = 1;
            ins.push_back(f);
        }
        out << correlator_str(ks) << "," << to_string(string_oracle_point(ins)) << "\n";
    }
    int low = ks.empty() ? 0 : ks.back();
    for (int k = low; weight + k + 1 <= maxdeg; ++k) {
        ks.push_back(k);
        enumerate_invariants(out, ks, weight + k + 1, maxdeg);
        ks.pop_back();
    }
}

int cmd_invariants(const CommonOpts& c, int maxdeg) {
    std::ofstream out = open_out(c.out_dir, "invariants.csv");
    out << "correlator,value\n";
    std::vector<int> ks;
    enumerate_invariants(out, ks, 0, maxdeg);
    std::cout << "wrote invariants.csv (point-target correlators, weight <= "
              << maxdeg << ")\n";
    return 0;
}

int cmd_trr(const CommonOpts& c, int k, int k2, int k3, int j2, int j3, int degt) {
    Workspace w = make_workspace(c);
    DescendantArena ar{std::max(k, 1), degt, w.m.dim, w.m.rank, w.m.capq};
    std::vector<TruncSeries> tau = solve_tau(w.m, w.sm, ar);
    CheckReport rep = verify_trr(w.m, w.sm, w.md, ar, tau, k, k2, k3, j2, j3);
    std::ofstream out = open_out(c.out_dir, "trr_" + w.m.name + ".txt");
    out << "# trr report: model=" << w.m.name << " k=" << k << " k2=" << k2 << " k3=" << k3
        << " j2=" << j2 << " j3=" << j3 << " deg_t=" << degt << " seed=" << c.seed << "\n";
    for (const auto& [name, ok] : rep.checks) {
        out << (ok ? "ok   " : "FAIL ") << name << "\n";
        std::cout << (ok ? "ok   " : "FAIL ") << name << "\n";
    }
    return rep.ok() ? 0 : 1;
}

int cmd_simulate(const CommonOpts& c, int n, int i, int msamp, double dt, double tend,
                 double amplitude, double offset, int maxh) {
    Workspace w = make_workspace(c);
    const FrobeniusModel& m = w.m;
    if (m.rank != 0) throw error("simulate needs a Novikov-free model (specialize first)");
    SpectralGrid grid(msamp);
    NumericFlow nf = compile_flow(m, flow(m, w.sm, n, i), {});
    LoopState s0 = sample_loop(m.dim, grid, [&](int, double x) {
        return offset + amplitude * std::sin(2 * SpectralGrid::pi() * x);
    });

    std::vector<std::pair<std::string, PolyEval>> densities;
    for (int mm = 0; mm <= maxh && mm + 1 <= w.sm.ucap; ++mm)
        densities.emplace_back("H_" + std::to_string(mm) + "_0",
                               compile_series(hamiltonian_density(m, w.sm, mm, 0), {}));

    std::ofstream series = open_out(c.out_dir, "sim_series.csv");
    series << "# sim-format 1\n";
    series << "t,max_gradient";
    for (const auto& [label, den] : densities) series << "," << label;
    series << "\n";
    std::vector<double> point(static_cast<std::size_t>(m.dim));
    LoopState fin = run_flow(grid, nf, s0, tend, dt, [&](const LoopState& s) {
        series << fmt_double(s.t) << "," << fmt_double(max_gradient(grid, s));
        for (const auto& [label, den] : densities) {
            std::vector<double> vals(static_cast<std::size_t>(s.samples()));
            for (int x = 0; x < s.samples(); ++x) {
                for (int a = 0; a < s.dim(); ++a) point[a] = s.v[a][x];
                vals[static_cast<std::size_t>(x)] = den(point);
            }
            series << "," << fmt_double(loop_integral(vals));
        }
        series << "\n";
    });

    std::ofstream snap = open_out(c.out_dir, "sim_snapshot.csv");
    snap << "# sim-format 1\n";
    snap << "x,t";
    for (int a = 0; a < m.dim; ++a) snap << ",v" << a;
    snap << "\n";
    for (int x = 0; x < fin.samples(); ++x) {
        snap << fmt_double(grid.node(x)) << "," << fmt_double(fin.t);
        for (int a = 0; a < m.dim; ++a) snap << "," << fmt_double(fin.v[a][x]);
        snap << "\n";
    }
    std::cout << "simulated " << nf.label << " to t = " << fmt_double(fin.t)
              << "; wrote sim_series.csv, sim_snapshot.csv\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"genus-0 quantum K-theory hierarchy toolkit"};
    app.require_subcommand(1);

    CommonOpts c;
    int maxn = 6, kt = 3, degt = 5, maxdeg = 5;
    int k = 1, k2 = 0, k3 = 0, j2 = 0, j3 = 0;
    int sim_n = 1, sim_i = 0, msamp = 256, maxh = 4;
    double dt = 1e-4, tend = 0.1, amplitude = 0.1, offset = 0.0;

    CLI::App* flows = app.add_subcommand("flows", "emit hierarchy flows as term tables");
    add_common(flows, c);
    flows->add_option("--max-n", maxn, "highest flow order");

    CLI::App* verify = app.add_subcommand("verify", "run the identity ledger");
    add_common(verify, c);
    verify->add_option("--max-n", maxn, "flow-order budget");

    CLI::App* tau = app.add_subcommand("tau", "solve the descendant fixed point, emit tau and w");
    add_common(tau, c);
    tau->add_option("--kt", kt, "highest descendant order");
    tau->add_option("--deg-t", degt, "total t-degree cap");

    CLI::App* inv = app.add_subcommand("invariants", "string-oracle table of point correlators");
    inv->add_option("--out-dir", c.out_dir, "artifact directory");
    inv->add_option("--max-degree", maxdeg, "weight bound: #insertions + descendant order");

    CLI::App* trr = app.add_subcommand("trr", "verify the descendant recursion");
    add_common(trr, c);
    trr->add_option("--k", k, "descendant order on the raised insertion");
    trr->add_option("--k2", k2);
    trr->add_option("--k3", k3);
    trr->add_option("--j2", j2);
    trr->add_option("--j3", j3);
    trr->add_option("--deg-t", degt, "total t-degree cap");

    CLI::App* sim = app.add_subcommand("simulate", "pseudo-spectral loop-space run");
    add_common(sim, c);
    sim->add_option("--n", sim_n, "flow order");
    sim->add_option("--i", sim_i, "flow direction");
    sim->add_option("--samples", msamp, "grid size (power of two)");
    sim->add_option("--dt", dt, "time step");
    sim->add_option("--t-end", tend, "horizon");
    sim->add_option("--amplitude", amplitude, "initial wave amplitude");
    sim->add_option("--offset", offset, "initial mean value");
    sim->add_option("--max-h", maxh, "track conserved H_(m,0) for m <= max-h");

    CLI11_PARSE(app, argc, argv);

    try {
        if (flows->parsed()) return cmd_flows(c, maxn);
        if (verify->parsed()) return cmd_verify(c, maxn);
        if (tau->parsed()) return cmd_tau(c, kt, degt);
        if (inv->parsed()) return cmd_invariants(c, maxdeg);
        if (trr->parsed()) return cmd_trr(c, k, k2, k3, j2, j3, degt);
        if (sim->parsed()) return cmd_simulate(c, sim_n, sim_i, msamp, dt, tend, amplitude,
                                               offset, maxh);
    } catch (const qkh::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
