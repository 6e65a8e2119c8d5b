// perfprism command-line front end.  Every subcommand reads JSON documents,
// writes one JSON result (stdout or --out) and optional CSV/SVG artifacts.
// Exit codes: 0 success, 2 precision failure, 3 input schema error,
// 4 non-convergence, 1 any other mathematical obstruction or failed property.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "json_io.hpp"
#include "suite.hpp"

using namespace perfprism;
using io::json;

namespace {

struct Globals {
    std::optional<int> precision;  // --precision-p
    std::optional<int> denom_exp;  // --denom-exp
    std::string window;            // --window lo:hi
    u64 seed = 20240611;
    std::string json_in, csv_out, svg_out, out;
    std::vector<std::string> inputs;
};

Globals G;

int exit_code(errc e) {
    switch (e) {
    case errc::precision_exhausted:
    case errc::insufficient_precision:
    case errc::guard_insufficient:
    case errc::window_too_narrow:
    case errc::window_mismatch:
    case errc::denominator_overflow:
        return 2;
    case errc::schema_error:
    case errc::invalid_argument:
        return 3;
    case errc::no_convergence:
    case errc::max_iter_exceeded:
    case errc::not_contracting:
    case errc::hensel_failure:
    case errc::search_exhausted:
        return 4;
    default:
        return 1;
    }
}

std::vector<std::string> input_paths() {
    std::vector<std::string> v;
    if (!G.json_in.empty()) v.push_back(G.json_in);
    v.insert(v.end(), G.inputs.begin(), G.inputs.end());
    return v;
}

json input(std::size_t i = 0) {
    auto v = input_paths();
    if (i >= v.size()) io::schema("missing input document " + std::to_string(i + 1));
    return io::load(v[i]);
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(errc::invalid_argument, "cannot write '" + path + "'");
    f << text;
}

void emit(const json& j) {
    std::string text = j.dump(2) + "\n";
    if (G.out.empty()) std::cout << text;
    else write_file(G.out, text);
}

void emit_polygon_files(const Polygon& P) {
    if (!G.csv_out.empty()) write_file(G.csv_out, P.csv());
    if (!G.svg_out.empty()) write_file(G.svg_out, P.svg());
}

std::optional<io::Window> window_override() {
    if (G.window.empty()) return std::nullopt;
    auto colon = G.window.find(':');
    if (colon == std::string::npos) io::schema("--window expects lo:hi");
    io::Window w{parse_rat(G.window.substr(0, colon)), parse_rat(G.window.substr(colon + 1))};
    if (w.hi <= w.lo) io::schema("--window needs lo < hi");
    return w;
}

// --precision-p lowers the digit count, --window narrows the digit-0 window.
WittTrunc witt_input(std::size_t i) {
    WittTrunc x = io::witt_from(input(i));
    int plen = x.plen();
    Rat H = x.H();
    if (G.precision) {
        require(*G.precision >= 1 && *G.precision <= plen, errc::insufficient_precision,
                "--precision-p exceeds the digits of the input");
        plen = *G.precision;
    }
    if (auto w = window_override()) {
        require(w->lo == x.lo(), errc::window_mismatch, "--window must start at the lower bound of the input");
        require(w->hi - w->lo <= H, errc::insufficient_precision, "--window is wider than the input window");
        H = w->hi - w->lo;
    }
    return x.truncated(plen, H);
}

PhiModule phimod_input(const json& j) {
    PhiModule M = io::phimod_from(j);
    if (G.precision) M = at_precision(M, *G.precision);
    return M;
}

json rat_vec(const std::vector<Rat>& v) {
    json out = json::array();
    for (auto& r : v) out.push_back(io::rat_to(r));
    return out;
}

// ------------------------------------------------------------------ witt

void cmd_witt(const std::string& op) {
    WittTrunc x = witt_input(0);
    if (op == "ghost") {
        auto gx = ghost(x);
        json comps = json::array();
        for (auto& g : gx) comps.push_back(io::zq_to(g));
        json out = {{"ghost", comps}};
        if (input_paths().size() > 1) {
            // oracle comparison: the ghost map of a sum and a product against
            // componentwise arithmetic in Z_q / p^(n+1)
            WittTrunc y = witt_input(1);
            auto gy = ghost(y), gs = ghost(x + y), gp = ghost(x * y);
            bool add_ok = gs.size() == gx.size(), mul_ok = gp.size() == gx.size();
            json sum = json::array(), prod = json::array();
            for (std::size_t n = 0; n < gx.size() && n < gy.size(); ++n) {
                const ZqRing& R = *gx[n].R;
                auto s = R.truncate(R.add(gx[n].c, gy[n].c), int(n) + 1);
                auto p = R.truncate(R.mul(gx[n].c, gy[n].c), int(n) + 1);
                add_ok = add_ok && n < gs.size() && gs[n].c == s;
                mul_ok = mul_ok && n < gp.size() && gp[n].c == p;
                sum.push_back(io::zq_to(gs[n]));
                prod.push_back(io::zq_to(gp[n]));
            }
            json other = json::array();
            for (auto& g : gy) other.push_back(io::zq_to(g));
            out = {{"ghost_a", comps}, {"ghost_b", other}, {"ghost_sum", sum}, {"ghost_product", prod},
                   {"sum_matches_oracle", add_ok}, {"product_matches_oracle", mul_ok}};
        }
        emit(out);
        return;
    }
    WittTrunc y = witt_input(1);
    emit(io::witt_to(op == "add" ? x + y : x * y));
}

// ------------------------------------------------------------------ period

void cmd_norm(const std::vector<std::string>& radii) {
    WittTrunc x = witt_input(0);
    json rows = json::array();
    for (auto& s : radii) {
        Rat r = parse_rat(s);
        GaussNorm n = gauss_norm(x, r);
        json row = {{"r", io::rat_to(r)}, {"zero", n.zero}};
        if (!n.zero) {
            row["log_p"] = io::rat_to(n.log);
            row["argmax"] = n.argmax;
        }
        row["may_hide"] = n.may_hide;
        rows.push_back(row);
    }
    emit({{"gauss_norm", rows}});
}

void cmd_divide(const std::string& mode, const std::string& eps, int m, const std::string& zpath) {
    WittTrunc x = witt_input(0);
    WittTrunc z = zpath.empty() ? standard_primitive(x.field(), x.plen(), x.H()) : io::witt_from(io::load(zpath));
    DivisionMode dm;
    if (mode == "b") {
        dm.kind = DivisionMode::b;
        dm.eps = parse_rat(eps);
        dm.m = m;
    } else if (mode != "a") {
        io::schema("--mode must be a or b");
    }
    auto r = primitive_divide(x, z, dm);
    emit({{"w", io::witt_to(r.w)}, {"y", io::witt_to(r.y)}, {"iterations", r.iterations}, {"certified", r.certified},
          {"defect", rat_vec(r.defect)}});
}

void cmd_theta(int guard, int M) {
    WittTrunc x = witt_input(0);
    ThetaOptions opt{M, guard, G.denom_exp ? *G.denom_exp : -1};
    UntiltElem t = theta(x, opt);
    json out = io::untilt_ring_to(t.ring());
    out["value"] = io::untilt_to(t);
    emit(out);
}

// ------------------------------------------------------------------ polygons and slopes

void cmd_polygon_newton() {
    json j = input();
    Polygon P = lower_hull(io::points_from(j.is_object() ? io::field(j, "points") : j));
    emit_polygon_files(P);
    emit({{"polygon", io::polygon_to(P)}});
}

void cmd_polygon_hn() {
    json j = input();
    std::vector<PhiModule> blocks;
    for (auto& b : io::array_field(j, "blocks")) blocks.push_back(phimod_input(b));
    std::map<std::pair<std::size_t, std::size_t>, Matrix<ZqElem>> glue;
    if (j.contains("glue"))
        for (auto& g : io::array_field(j, "glue")) {
            std::size_t bi = std::size_t(io::int_field(g, "i")), bj = std::size_t(io::int_field(g, "j"));
            if (bj >= blocks.size()) io::schema("glue index out of range");
            const ZqRing& R = *blocks[bj].Z;
            glue[{bi, bj}] = io::matrix_from<ZqElem>(io::field(g, "entries"), [&](const json& x) { return io::zq_from(R, x); });
        }
    HNCheck h = hn_filtration_check(blocks, glue);
    emit_polygon_files(h.polygon);
    emit({{"polygon", io::polygon_to(h.polygon)},
          {"block_polygon", io::polygon_to(h.block_polygon)},
          {"matches", h.matches},
          {"admissible_orderings", h.admissible_orderings}});
}

void cmd_slopes() {
    PhiModule M = phimod_input(input());
    Polygon P = newton_slopes(M);
    json out = {{"rank", M.rank()}, {"slopes", rat_vec(P.slope_list())}, {"polygon", io::polygon_to(P)}};
    auto ds = degree_slope(M);
    out["degree"] = io::rat_to(ds.deg);
    out["mu"] = io::rat_to(ds.mu);
    out["pure"] = P.slopes.size() == 1;
    emit_polygon_files(P);
    emit(out);
}

void cmd_cohomology() {
    PhiModule M = phimod_input(input());
    auto h = phi_cohomology_typeA(M);
    auto fmt = [&](const std::vector<int>& v) {
        json out = json::array();
        for (int k : v) out.push_back({{"cyclic_exponent", k}, {"order", "p^" + std::to_string(k)}});
        return out;
    };
    emit({{"coeff", io::zq_ring_to(*M.Z)}, {"H0", fmt(h.H0)}, {"H1", fmt(h.H1)}});
}

void cmd_lang() {
    json j = input();
    const Fq& F = io::field_from(j, "f");
    int a = int(io::int_field(j, "a", 1));
    auto A = io::matrix_from<fq_t>(io::field(j, "entries"), [&](const json& x) { return io::fq_from(F, x); });
    io::require_square(A.size(), A[0].size());
    auto r = lang_trivialize(F, A, a);
    emit({{"k", r.k},
          {"field", {{"p", r.field->p}, {"a", r.field->a}}},
          {"U", io::matrix_to(r.U, [&](fq_t x) { return io::fq_to(*r.field, x); })}});
}

// ------------------------------------------------------------------ gamma

void cmd_gamma_contract(const std::string& tower, int n, int p, int a, int d, i64 chi) {
    TowerDescriptor T;
    if (tower == "cyclo" || tower == "cyclotomic") T.kind = TowerDescriptor::Kind::cyclotomic;
    else if (tower == "toric") T.kind = TowerDescriptor::Kind::toric;
    else io::schema("--tower must be cyclo or toric");
    io::check_field_params(p, a);
    if (n < 0 || n > 6) io::schema("--n out of range");
    if (d < 1 || d > 3) io::schema("--d out of range");
    T.p = p;
    T.a = a;
    T.d = T.kind == TowerDescriptor::Kind::cyclotomic ? 1 : d;
    bool cyc = T.kind == TowerDescriptor::Kind::cyclotomic;
    T.H = Rat(ipow(p, cyc ? n + 2 : n) + 2);  // wide enough for the pi summand too
    if (auto w = window_override()) {
        require(w->lo == Rat(0), errc::window_mismatch, "coefficient windows start at 0");
        T.H = w->hi;
    }
    std::vector<std::vector<int>> summands;
    if (cyc) {
        for (int i = 0; i < p; ++i) summands.push_back({i});
    } else {
        std::vector<int> e(std::size_t(T.d), 0);
        while (true) {
            summands.push_back(e);
            std::size_t k = 0;
            while (k < e.size() && ++e[k] == p) e[k++] = 0;
            if (k == e.size()) break;
        }
    }
    json rows = json::array();
    std::ostringstream csv;
    csv << "tower,p,n,summand,valuation,norm\n";
    for (auto& s : summands) {
        Rat v = contraction_norm(T, n, s, chi);
        std::string sname;
        for (std::size_t i = 0; i < s.size(); ++i) sname += (i ? ";" : "") + std::to_string(s[i]);
        std::string norm = "p^-" + to_string(v);
        json sv = json::array();
        for (int x : s) sv.push_back(x);
        rows.push_back({{"summand", sv}, {"valuation", io::rat_to(v)}, {"norm", norm}});
        csv << (cyc ? "cyclo" : "toric") << ',' << p << ',' << n << ',' << sname << ',' << to_string(v) << ',' << norm << '\n';
    }
    if (!G.csv_out.empty()) write_file(G.csv_out, csv.str());
    emit({{"tower", cyc ? "cyclo" : "toric"}, {"p", p}, {"a", a}, {"d", T.d}, {"n", n}, {"H", io::rat_to(T.H)}, {"rows", rows}});
}

void cmd_gamma_decomplete(const std::string& in, const std::string& logpath, int level, int max_iter) {
    json j = in.empty() ? input() : io::load(in);
    ToricMatrix Gm = io::toric_matrix_from(j);
    auto r = decomplete(Gm, level, max_iter);
    json steps = json::array();
    std::ostringstream csv;
    csv << "step,defect,v_N,v_c,predicted,next\n";
    for (std::size_t k = 0; k < r.log.size(); ++k) {
        auto& s = r.log[k];
        std::string next = s.next ? to_string(*s.next) : "inf";
        steps.push_back({{"defect", io::rat_to(s.defect)},
                         {"v_N", io::rat_to(s.v_N)},
                         {"v_c", io::rat_to(s.v_c)},
                         {"predicted", io::rat_to(s.predicted)},
                         {"next", s.next ? io::rat_to(*s.next) : json("inf")}});
        csv << k << ',' << to_string(s.defect) << ',' << to_string(s.v_N) << ',' << to_string(s.v_c) << ','
            << to_string(s.predicted) << ',' << next << '\n';
    }
    if (!logpath.empty()) write_file(logpath, csv.str());
    emit({{"U", io::toric_matrix_to(r.U)}, {"G0", io::toric_matrix_to(r.G0)}, {"steps", steps}});
}

// ------------------------------------------------------------------ robba

void cmd_prep_factor() {
    PuiseuxPoly x = io::puiseux_from(input());
    auto r = prepared_factor(x);
    emit({{"unit", io::puiseux_to(r.unit)},
          {"prep", io::puiseux_to(r.prep)},
          {"width", io::rat_to(r.width)},
          {"iterations", r.iterations},
          {"prepared", is_prepared(r.prep, r.width)}});
}

void cmd_zeros_separate() {
    json j = input();
    PuiseuxPoly x = io::puiseux_from(io::field(j, "poly"));
    const UntiltRing& R = x.ring();
    UntiltElem mu = io::untilt_from(R, io::field(j, "mu"));
    std::vector<UntiltElem> lambda;
    for (auto& l : io::array_field(j, "lambda")) lambda.push_back(io::untilt_from(R, l));
    auto r = separate_zeroes(x, mu, lambda);
    json factors = json::array();
    for (auto& f : r.factors) factors.push_back(io::puiseux_to(f));
    emit({{"factors", factors}, {"multiplicity", r.multiplicity}, {"rest", io::puiseux_to(r.rest)}, {"hensel_log", r.hensel_log}});
}

// ------------------------------------------------------------------ fitting

void cmd_fitting(const std::string& pres, int upto) {
    json j = pres.empty() ? input() : io::load(pres);
    auto M = io::presentation_from(j);
    if (G.precision) {
        const ZqRing& R = ZqRing::get(M.zero.R->p, M.zero.R->a, *G.precision);
        require(*G.precision <= M.zero.R->L, errc::insufficient_precision, "precision can only be lowered");
        M = base_change(M, [&](const ZqElem& x) { return ZqElem(R, x.R->change_precision(x.c, R)); });
    }
    if (upto < 0) io::schema("--upto must be nonnegative");
    int L = M.zero.R->L;
    auto ideals = fitting_ideals(M, std::size_t(upto));
    json rows = json::array();
    for (std::size_t k = 0; k < ideals.size(); ++k) {
        int e = zq_ideal_exponent(ideals[k], L);
        std::string gen = e >= L ? "0" : e == 0 ? "1" : "p^" + std::to_string(e);
        rows.push_back({{"j", k}, {"exponent", e}, {"ideal", "(" + gen + ")"}, {"minors", ideals[k].gens.size()}});
    }
    emit({{"coeff", io::zq_ring_to(*M.zero.R)}, {"n", M.n}, {"relations", M.relations()}, {"fitting", rows}});
}

// ------------------------------------------------------------------ suite

int cmd_suite(const std::string& name, bool timing) {
    json rows = json::array();
    bool all_pass = true, found = false;
    for (const auto& e : suite::registry()) {
        if (name != "all" && name != e.name && name != std::to_string(e.id)) continue;
        found = true;
        auto o = suite::run(e, G.seed);
        json row = {{"id", e.id}, {"name", e.name}, {"pass", o.pass}, {"detail", o.detail}};
        if (timing) row["seconds"] = o.seconds;
        rows.push_back(row);
        all_pass = all_pass && o.pass;
    }
    if (!found) io::schema("unknown suite '" + name + "'");
    emit({{"seed", G.seed}, {"results", rows}});
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"perfprism: exact finite-precision arithmetic for perfect rings, Witt vectors and phi-modules"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--precision-p", G.precision, "p-adic precision override (digit count)");
    app.add_option("--denom-exp", G.denom_exp, "denominator exponent override");
    app.add_option("--window", G.window, "exponent window lo:hi override");
    app.add_option("--seed", G.seed, "random seed");
    app.add_option("--json", G.json_in, "primary input document");
    app.add_option("--csv", G.csv_out, "CSV artifact path");
    app.add_option("--svg", G.svg_out, "SVG artifact path");
    app.add_option("--out", G.out, "result path (default stdout)");

    auto inputs = [](CLI::App* sub) { sub->add_option("inputs", G.inputs, "input documents"); };
    int rc = 0;
    std::function<void()> action;

    auto* witt = app.add_subcommand("witt", "Witt vector arithmetic")->require_subcommand(1);
    for (const char* op : {"add", "mul", "ghost"}) {
        auto* s = witt->add_subcommand(op, std::string("witt ") + op);
        inputs(s);
        std::string o = op;
        s->callback([&action, o] { action = [o] { cmd_witt(o); }; });
    }

    auto* norm = app.add_subcommand("norm", "Gauss norms")->require_subcommand(1);
    auto* gauss = norm->add_subcommand("gauss", "log_p of the Gauss norm");
    std::vector<std::string> radii{"1"};
    gauss->add_option("--r", radii, "radius exponent(s), comma separated or repeated")->delimiter(',')->allow_extra_args(false);
    inputs(gauss);
    gauss->callback([&] { action = [&] { cmd_norm(radii); }; });

    auto* divide = app.add_subcommand("divide", "division by a primitive element");
    std::string mode = "a", eps = "0", zpath;
    int mm = 0;
    divide->add_option("--mode", mode, "a or b");
    divide->add_option("--eps", eps, "mode b: valuation of epsilon");
    divide->add_option("--m", mm, "mode b: Frobenius-root factors");
    divide->add_option("--z", zpath, "primitive element (default p - [t])");
    inputs(divide);
    divide->callback([&] { action = [&] { cmd_divide(mode, eps, mm, zpath); }; });

    auto* th = app.add_subcommand("theta", "untilting map");
    int guard = -1, tM = 0;
    th->add_option("--guard", guard, "root depth");
    th->add_option("--M", tM, "p-adic precision of the target");
    inputs(th);
    th->callback([&] { action = [&] { cmd_theta(guard, tM); }; });

    auto* poly = app.add_subcommand("polygon", "polygons")->require_subcommand(1);
    auto* newton = poly->add_subcommand("newton", "lower convex hull of points");
    inputs(newton);
    newton->callback([&] { action = cmd_polygon_newton; });
    auto* hn = poly->add_subcommand("hn", "HN polygon of a block extension");
    inputs(hn);
    hn->callback([&] { action = cmd_polygon_hn; });

    auto* slopes = app.add_subcommand("slopes", "Newton slopes of a phi-module");
    inputs(slopes);
    slopes->callback([&] { action = cmd_slopes; });

    auto* coh = app.add_subcommand("cohomology", "phi-cohomology")->require_subcommand(1);
    auto* typeA = coh->add_subcommand("typeA", "torsion cohomology over Z_q/p^L");
    inputs(typeA);
    typeA->callback([&] { action = cmd_cohomology; });

    auto* lang = app.add_subcommand("lang", "Lang trivialization over a finite field");
    inputs(lang);
    lang->callback([&] { action = cmd_lang; });

    auto* gam = app.add_subcommand("gamma", "Gamma-tower arithmetic")->require_subcommand(1);
    auto* contract = gam->add_subcommand("contract", "valuation table of gamma^(p^n) - 1");
    std::string tower = "cyclo";
    int cn = 0, cp = 2, ca = 1, cd = 1;
    i64 chi = 0;
    contract->add_option("--tower", tower, "cyclo or toric");
    contract->add_option("--n", cn, "level n");
    contract->add_option("--p", cp, "residue characteristic");
    contract->add_option("--a", ca, "residue degree");
    contract->add_option("--d", cd, "toric dimension");
    contract->add_option("--chi", chi, "cyclotomic character value of gamma (default 1 + p^2)");
    contract->callback([&] { action = [&] { cmd_gamma_contract(tower, cn, cp, ca, cd, chi); }; });
    auto* decomp = gam->add_subcommand("decomplete", "descend a toric Gamma-matrix");
    std::string din, dlog;
    int level = 0, max_iter = 64;
    decomp->add_option("--in", din, "Gamma-matrix document");
    decomp->add_option("--log", dlog, "CSV trace of the iteration");
    decomp->add_option("--level", level, "target exponent level");
    decomp->add_option("--max-iter", max_iter, "iteration bound");
    inputs(decomp);
    decomp->callback([&] { action = [&] { cmd_gamma_decomplete(din, dlog, level, max_iter); }; });

    auto* prep = app.add_subcommand("prep", "Weierstrass preparation")->require_subcommand(1);
    auto* factor = prep->add_subcommand("factor", "unit times prepared factor");
    inputs(factor);
    factor->callback([&] { action = cmd_prep_factor; });

    auto* zeros = app.add_subcommand("zeros", "zero separation")->require_subcommand(1);
    auto* sep = zeros->add_subcommand("separate", "split off zeros near 1 - lambda mu");
    inputs(sep);
    sep->callback([&] { action = cmd_zeros_separate; });

    auto* fit = app.add_subcommand("fitting", "Fitting ideals of a presentation");
    std::string pres;
    int upto = 0;
    fit->add_option("--presentation", pres, "presentation document");
    fit->add_option("--upto", upto, "largest j");
    inputs(fit);
    fit->callback([&] { action = [&] { cmd_fitting(pres, upto); }; });

    auto* su = app.add_subcommand("suite", "run a property suite");
    std::string suite_name = "all";
    bool timing = false;
    su->add_option("name", suite_name, "suite name, id or all");
    su->add_flag("--timing", timing, "include wall-clock seconds (not deterministic)");
    su->callback([&] { action = [&] { rc = cmd_suite(suite_name, timing); }; });

    auto report = [](const char* name, const std::string& msg) {
        json e = {{"error", name}, {"message", msg}};
        std::cerr << e.dump() << "\n";
    };
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report("SchemaError", e.what());
        return 3;
    }
    try {
        if (action) action();
    } catch (const error& e) {
        std::string msg = e.what(), prefix = std::string(errc_name(e.kind())) + ": ";
        if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
        report(errc_name(e.kind()), msg);
        return exit_code(e.kind());
    } catch (const json::exception& e) {
        report("SchemaError", e.what());
        return 3;
    }
    return rc;
}
