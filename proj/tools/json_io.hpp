#pragma once
// JSON codecs for the command-line front end.  Every decoder throws
// schema_error on malformed input so the CLI can map it to one exit code.
//
// Conventions shared by all documents:
//   rational      integer, "n/d" string, or [n, d]
//   F_q element   integer code (base-p digits, least significant first) or a digit list
//   Z_q element   integer or a coordinate list over the power basis of Z_q

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "perfprism/perfprism.hpp"

namespace perfprism::io {

using json = nlohmann::ordered_json;

[[noreturn]] inline void schema(const std::string& msg) { fail(errc::schema_error, msg); }

inline const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) schema(std::string("missing field '") + key + "'");
    return j.at(key);
}

inline i64 get_int(const json& j, const char* what) {
    if (!j.is_number_integer()) schema(std::string(what) + " must be an integer");
    return j.get<i64>();
}

inline i64 int_field(const json& j, const char* key) { return get_int(field(j, key), key); }

inline i64 int_field(const json& j, const char* key, i64 dflt) {
    return j.is_object() && j.contains(key) ? get_int(j.at(key), key) : dflt;
}

inline const json& array_field(const json& j, const char* key) {
    const json& a = field(j, key);
    if (!a.is_array()) schema(std::string("field '") + key + "' must be an array");
    return a;
}

inline json load(const std::string& path) {
    std::ifstream in(path);
    if (!in) schema("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        schema("'" + path + "' is not valid JSON: " + e.what());
    }
}

// ------------------------------------------------------------------ scalars

inline Rat rat_from(const json& j) {
    if (j.is_number_integer()) return Rat(j.get<i64>());
    if (j.is_string()) return parse_rat(j.get<std::string>());
    if (j.is_array() && j.size() == 2 && j[0].is_number_integer() && j[1].is_number_integer()) {
        if (j[1].get<i64>() == 0) schema("zero denominator");
        return Rat(j[0].get<i64>(), j[1].get<i64>());
    }
    schema("expected a rational (integer, \"n/d\" or [n, d])");
}

inline json rat_to(const Rat& r) {
    if (r.denominator() == 1) return r.numerator();
    return to_string(r);
}

inline void check_field_params(int p, int a) {
    if (p < 2 || a < 1 || ipow(p, a) > (i64(1) << 24)) schema("unsupported field parameters");
    for (int d = 2; d * d <= p; ++d)
        if (p % d == 0) schema("p must be prime");
}

inline const Fq& field_from(const json& j, const char* akey = "a") {
    int p = int(int_field(j, "p")), a = int(int_field(j, akey, 1));
    check_field_params(p, a);
    return Fq::get(p, a);
}

inline fq_t fq_from(const Fq& F, const json& j) {
    if (j.is_number_integer()) {
        i64 v = j.get<i64>();
        if (v < 0 || u64(v) >= F.q) schema("field element code out of range");
        return fq_t(v);
    }
    if (j.is_array()) {
        if (j.size() > std::size_t(F.a)) schema("field element has too many digits");
        std::vector<int> d;
        for (auto& x : j) d.push_back(int(get_int(x, "field digit")));
        d.resize(std::size_t(F.a), 0);
        return F.encode(d);
    }
    schema("expected a field element");
}

inline json fq_to(const Fq& F, fq_t x) {
    if (F.a == 1) return i64(x);
    return F.digits(x);
}

inline const ZqRing& zq_ring_from(const json& coeff) {
    int p = int(int_field(coeff, "p")), f = int(int_field(coeff, "f", 1)), L = int(int_field(coeff, "L"));
    check_field_params(p, f);
    if (L < 1 || L > max_pow_exp(p)) schema("precision L out of range");
    return ZqRing::get(p, f, L);
}

inline json zq_ring_to(const ZqRing& R) { return {{"p", R.p}, {"f", R.a}, {"L", R.L}}; }

inline ZqElem zq_from(const ZqRing& R, const json& j) {
    if (j.is_number_integer()) return ZqElem::from_int(R, j.get<i64>());
    if (j.is_array()) {
        if (j.size() > std::size_t(R.a)) schema("Z_q element has too many coordinates");
        ZqElem r = ZqElem::zero(R);
        for (std::size_t i = 0; i < j.size(); ++i) {
            std::vector<i64> e(std::size_t(R.a), 0);
            e[i] = 1;
            r = r + ZqElem(R, e) * ZqElem::from_int(R, get_int(j[i], "Z_q coordinate"));
        }
        return r;
    }
    schema("expected a Z_q element");
}

inline json zq_to(const ZqElem& x) {
    if (x.R->a == 1) return x.c[0];
    return x.c;
}

template <class T, class F>
Matrix<T> matrix_from(const json& j, F elem) {
    if (!j.is_array() || j.empty()) schema("matrix must be a nonempty array of rows");
    Matrix<T> M;
    for (auto& row : j) {
        if (!row.is_array() || row.size() != j[0].size()) schema("matrix rows must be arrays of equal length");
        std::vector<T> r;
        for (auto& x : row) r.push_back(elem(x));
        M.push_back(std::move(r));
    }
    return M;
}

template <class T, class F>
json matrix_to(const Matrix<T>& M, F elem) {
    json out = json::array();
    for (auto& row : M) {
        json r = json::array();
        for (auto& x : row) r.push_back(elem(x));
        out.push_back(r);
    }
    return out;
}

inline void require_square(std::size_t rows, std::size_t cols) {
    if (rows != cols) schema("matrix must be square");
}

// ------------------------------------------------------------------ series

// Terms of a series as [[exponent, coefficient], ...] into s.
inline void series_terms_from(PerfSeries& s, const json& terms) {
    if (!terms.is_array()) schema("series terms must be an array");
    for (auto& t : terms) {
        if (!t.is_array() || t.size() != 2) schema("series term must be [exponent, coefficient]");
        Rat e = rat_from(t[0]);
        if (pdenom_exp(e, s.p()) < 0 || pdenom_exp(e, s.p()) > s.K())
            fail(errc::denominator_overflow, "exponent " + to_string(e) + " needs a larger denominator exponent");
        if (e < s.lo()) fail(errc::window_mismatch, "exponent " + to_string(e) + " below the window");
        if (e >= s.hi()) continue;  // beyond the precision of the document
        fq_t c = fq_from(s.field(), t[1]);
        s.set(e, s.field().add(s.coeff(e), c));
    }
}

inline json series_terms_to(const PerfSeries& s) {
    json out = json::array();
    for (auto& [num, c] : s.terms()) out.push_back(json::array({rat_to(s.exponent(num)), fq_to(s.field(), c)}));
    return out;
}

struct Window {
    Rat lo, hi;
};

// {"p", "a", "denom_exp", "window": [lo, hi], "scale"?, "terms"}
inline PerfSeries series_from(const json& j) {
    const Fq& F = field_from(j);
    int K = int(int_field(j, "denom_exp", 0));
    const json& w = array_field(j, "window");
    if (w.size() != 2) schema("window must be [lo, hi]");
    Rat scale = j.contains("scale") ? rat_from(j.at("scale")) : Rat(1);
    PerfSeries s(F, K, rat_from(w[0]), rat_from(w[1]), scale);
    series_terms_from(s, array_field(j, "terms"));
    return s;
}

inline json series_to(const PerfSeries& s) {
    json out = {{"p", s.p()}, {"a", s.field().a}, {"denom_exp", s.K()}, {"window", {rat_to(s.lo()), rat_to(s.hi())}}};
    if (s.scale() != Rat(1)) out["scale"] = rat_to(s.scale());
    out["terms"] = series_terms_to(s);
    return out;
}

// ------------------------------------------------------------------ Witt vectors

// smallest K with every exponent of the term list in p^-K Z
inline int needed_denom_exp(int p, const json& terms) {
    int K = 0;
    if (!terms.is_array()) schema("series terms must be an array");
    for (auto& t : terms) {
        if (!t.is_array() || t.size() != 2) schema("series term must be [exponent, coefficient]");
        int k = pdenom_exp(rat_from(t[0]), p);
        if (k < 0) fail(errc::denominator_overflow, "exponent is not a p-power fraction");
        K = std::max(K, k);
    }
    return K;
}

// The denominator exponent of each digit is the larger of "denom_exp" and what
// its exponents need.
// {"p", "a", "n_lo", "plen", "lo", "H", "denom_exp"?, "terms": [[n, digit], ...]}
// where each digit is a term list or an object with a "terms" field.
inline WittTrunc witt_from(const json& j) {
    const Fq& F = field_from(j);
    int n_lo = int(int_field(j, "n_lo", 0));
    int plen = int(int_field(j, "plen"));
    if (plen < 1 || plen > 16) schema("plen out of range");
    Rat lo = j.contains("lo") ? rat_from(j.at("lo")) : Rat(0);
    Rat H = rat_from(field(j, "H"));
    int K = int(int_field(j, "denom_exp", 0));
    WittTrunc x(F, n_lo, plen, lo, H, Rat(1), K);
    for (auto& t : array_field(j, "terms")) {
        if (!t.is_array() || t.size() != 2) schema("Witt term must be [n, digit]");
        int n = int(get_int(t[0], "digit index"));
        if (n < n_lo) fail(errc::window_mismatch, "digit index below n_lo");
        if (n >= x.top()) continue;
        const json& d = t[1].is_object() ? field(t[1], "terms") : t[1];
        int dK = std::max(K, needed_denom_exp(F.p, d));
        if (t[1].is_object()) dK = std::max(dK, int(int_field(t[1], "denom_exp", 0)));
        if (dK > default_kmax(F.p)) fail(errc::denominator_overflow, "denominator exponent out of range");
        PerfSeries y(F, std::max(K, dK), lo, x.digit_hi(n));
        series_terms_from(y, d);
        PerfSeries sum = x.digit(n).with_K(std::max(K, dK)) + y;
        x.set_digit(n, sum);
    }
    return x;
}

inline json witt_to(const WittTrunc& x) {
    json terms = json::array();
    int K = x.K();
    for (auto& [n, d] : x.digits()) {
        terms.push_back(json::array({n, series_terms_to(d)}));
        K = std::max(K, d.K());
    }
    return {{"p", x.p()}, {"a", x.field().a}, {"n_lo", x.n_lo()}, {"plen", x.plen()}, {"lo", rat_to(x.lo())},
            {"H", rat_to(x.H())}, {"denom_exp", K}, {"terms", terms}};
}

// ------------------------------------------------------------------ untilt ring

inline const UntiltRing& untilt_ring_from(const json& j) {
    int p = int(int_field(j, "p")), a = int(int_field(j, "a", 1)), M = int(int_field(j, "M")), K = int(int_field(j, "K"));
    check_field_params(p, a);
    if (M < 1 || M > max_pow_exp(p) || K < 0 || K > 12) schema("untilt ring parameters out of range");
    return UntiltRing::get(p, a, M, K);
}

inline json untilt_ring_to(const UntiltRing& R) { return {{"p", R.p}, {"a", R.a}, {"M", R.M}, {"K", R.K}}; }

// integer (a constant) or [[j, c], ...] meaning sum c u^j with u^N = p
inline UntiltElem untilt_from(const UntiltRing& R, const json& j) {
    if (j.is_number_integer()) return UntiltElem::from_zq(R, R.Z->from_int(j.get<i64>()));
    if (!j.is_array()) schema("expected an untilt element");
    UntiltElem x(R);
    for (auto& t : j) {
        if (!t.is_array() || t.size() != 2) schema("untilt term must be [u-exponent, coefficient]");
        i64 e = get_int(t[0], "u-exponent");
        if (e < 0) schema("negative u-exponent");
        x = x + UntiltElem::monomial(R, zq_from(*R.Z, t[1]).c, e);
    }
    return x;
}

inline json untilt_to(const UntiltElem& x) {
    const UntiltRing& R = x.ring();
    json terms = json::array();
    for (i64 i = 0; i < R.N; ++i) {
        const auto& c = x.coeffs()[std::size_t(i)];
        if (!R.Z->is_zero(c)) terms.push_back(json::array({i, zq_to(ZqElem(*R.Z, c))}));
    }
    return {{"terms", terms}, {"precision", x.precision()}};
}

// {"p", "a", "M", "K", "terms": [[exponent, untilt element], ...]}
inline PuiseuxPoly puiseux_from(const json& j) {
    const UntiltRing& R = untilt_ring_from(j);
    PuiseuxPoly x(R);
    for (auto& t : array_field(j, "terms")) {
        if (!t.is_array() || t.size() != 2) schema("Puiseux term must be [exponent, coefficient]");
        x.add_term(rat_from(t[0]), untilt_from(R, t[1]));
    }
    return x;
}

inline json puiseux_to(const PuiseuxPoly& x) {
    json terms = json::array();
    for (auto& [e, c] : x.terms()) terms.push_back(json::array({rat_to(e), untilt_to(c)["terms"]}));
    json out = untilt_ring_to(x.ring());
    out["terms"] = terms;
    return out;
}

// ------------------------------------------------------------------ phi-modules

// {"coeff": {"p", "f", "L"}, "a", "twist", "entries": [[Z_q], ...]}
inline PhiModule phimod_from(const json& j) {
    const ZqRing& R = zq_ring_from(field(j, "coeff"));
    int a = int(int_field(j, "a", 1)), tw = int(int_field(j, "twist", 0));
    if (a < 1) schema("a must be positive");
    auto A = matrix_from<ZqElem>(field(j, "entries"), [&](const json& x) { return zq_from(R, x); });
    require_square(A.size(), A[0].size());
    return PhiModule(R, A, a, tw);
}

inline json phimod_to(const PhiModule& M) {
    return {{"coeff", zq_ring_to(*M.Z)}, {"a", M.a}, {"twist", M.twist}, {"entries", matrix_to(M.A, zq_to)}};
}

inline json polygon_to(const Polygon& P) {
    json v = json::array(), s = json::array();
    for (auto& [x, y] : P.vertices) v.push_back(json::array({rat_to(x), rat_to(y)}));
    for (auto& [sl, m] : P.slopes) s.push_back({{"slope", rat_to(sl)}, {"multiplicity", rat_to(m)}});
    return {{"vertices", v}, {"slopes", s}};
}

inline std::vector<Point> points_from(const json& j) {
    if (!j.is_array() || j.empty()) schema("points must be a nonempty array");
    std::vector<Point> pts;
    for (auto& pt : j) {
        if (!pt.is_array() || pt.size() != 2) schema("point must be [x, y]");
        pts.emplace_back(rat_from(pt[0]), rat_from(pt[1]));
    }
    return pts;
}

// ------------------------------------------------------------------ toric Gamma-matrices

// {"p", "a", "d"?, "H", "entries": [[ [[exponent vector, coefficient terms], ...] ]]}
// Coefficients are cyclotomic series in pi with nonnegative exponents.
inline ToricMatrix toric_matrix_from(const json& j) {
    const Fq& F = field_from(j);
    int d = int(int_field(j, "d", 1));
    if (d < 1 || d > 4) schema("toric dimension out of range");
    Rat H = rat_from(field(j, "H"));
    if (H <= Rat(0)) schema("H must be positive");
    int K = int(int_field(j, "denom_exp", default_kmax(F.p)));
    auto elem = [&](const json& x) {
        ToricSeries s(F, d, H);
        if (!x.is_array()) schema("toric entry must be a term list");
        for (auto& t : x) {
            if (!t.is_array() || t.size() != 2 || !t[0].is_array() || t[0].size() != std::size_t(d))
                schema("toric term must be [exponent vector, coefficient terms]");
            ToricSeries::Exp e;
            for (auto& c : t[0]) e.push_back(rat_from(c));
            PerfSeries c(F, K, Rat(0), H, cyclotomic_scale(F.p));
            series_terms_from(c, t[1]);
            s.add_term(e, c.with_K(c.minimal_K()));
        }
        return s;
    };
    auto G = matrix_from<ToricSeries>(field(j, "entries"), elem);
    require_square(G.size(), G[0].size());
    return G;
}

inline json toric_to(const ToricSeries& x) {
    json out = json::array();
    for (auto& [e, c] : x.terms()) {
        json ev = json::array();
        for (auto& r : e) ev.push_back(rat_to(r));
        out.push_back(json::array({ev, series_terms_to(c)}));
    }
    return out;
}

inline json toric_matrix_to(const ToricMatrix& G) {
    const ToricSeries& e = G[0][0];
    return {{"p", e.p()}, {"a", e.field().a}, {"d", e.dim()}, {"H", rat_to(e.H())}, {"entries", matrix_to(G, toric_to)}};
}

// ------------------------------------------------------------------ presentations

// {"coeff": {"p", "f", "L"}, "n", "relations": [[Z_q], ...]}
inline PresentedModule<ZqElem> presentation_from(const json& j) {
    const ZqRing& R = zq_ring_from(field(j, "coeff"));
    i64 n = int_field(j, "n");
    if (n < 0 || n > 12) schema("generator count out of range");
    const json& rels = array_field(j, "relations");
    Matrix<ZqElem> rel;
    for (auto& row : rels) {
        if (!row.is_array() || row.size() != std::size_t(n)) schema("relation rows must have n entries");
        std::vector<ZqElem> r;
        for (auto& x : row) r.push_back(zq_from(R, x));
        rel.push_back(std::move(r));
    }
    if (rel.size() > 12) schema("too many relations");
    return presented(rel, std::size_t(n), ZqElem::zero(R), ZqElem::one(R));
}

} // namespace perfprism::io
