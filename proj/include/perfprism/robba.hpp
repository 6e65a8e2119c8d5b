#pragma once
#include <map>
#include <optional>
#include <vector>

#include "period.hpp"
#include "polygon.hpp"

namespace perfprism {

// ------------------------------------------------------------ Robba slices

// Truncated element of the slice ring for the closed interval [s, r] of
// radii exponents.  Negative digit indices are allowed (p inverted).
struct RobbaElem {
    WittTrunc x;
    Rat s, r;

    RobbaElem(WittTrunc w, Rat s_, Rat r_) : x(std::move(w)), s(s_), r(r_) {
        require(s > Rat(0) && s <= r, errc::invalid_argument, "slice interval must satisfy 0 < s <= r");
    }

    bool integral() const { return x.n_lo() >= 0; }

    RobbaElem restrict(Rat s2, Rat r2) const {
        require(s <= s2 && s2 <= r2 && r2 <= r, errc::out_of_interval, "restriction must be to a subinterval");
        return RobbaElem(x, s2, r2);
    }

    friend RobbaElem operator+(const RobbaElem& a, const RobbaElem& b) { return {a.x + b.x, std::max(a.s, b.s), std::min(a.r, b.r)}; }
    friend RobbaElem operator-(const RobbaElem& a, const RobbaElem& b) { return {a.x - b.x, std::max(a.s, b.s), std::min(a.r, b.r)}; }
    friend RobbaElem operator*(const RobbaElem& a, const RobbaElem& b) { return {a.x * b.x, std::max(a.s, b.s), std::min(a.r, b.r)}; }
    RobbaElem operator-() const { return {-x, s, r}; }
};

// log_p of lambda(alpha^u)(x) for u in [s, r].
inline GaussNorm slice_norm(const RobbaElem& x, Rat u) {
    require(u >= x.s && u <= x.r, errc::out_of_interval, "radius outside the slice interval");
    return gauss_norm(x.x, u);
}

// log_p of the slice norm max(lambda(alpha^s), lambda(alpha^r)).
inline GaussNorm slice_sup_norm(const RobbaElem& x) {
    GaussNorm a = slice_norm(x, x.s), b = slice_norm(x, x.r);
    if (a.zero) return b;
    if (b.zero) return a;
    GaussNorm out = a.log >= b.log ? a : b;
    out.may_hide = a.may_hide || b.may_hide;
    return out;
}

// Lower convex hull of the points (n, v(x_n)), up to its leftmost lowest
// vertex.  Edges further right have nonnegative slope and are invisible to
// every Gauss norm, so they are dropped.
inline Polygon valuation_polygon(const RobbaElem& x) {
    std::vector<Point> pts;
    for (auto& [n, d] : x.x.digits()) pts.push_back({Rat(n), d.tnorm().v});
    require(!pts.empty(), errc::zero_element, "valuation polygon of zero");
    Polygon h = lower_hull(pts);
    std::vector<Point> v;
    for (auto& pt : h.vertices) {
        v.push_back(pt);
        if (v.size() > 1 && pt.second >= v[v.size() - 2].second) {
            v.pop_back();
            break;
        }
    }
    return Polygon::from_vertices(v);
}

// Support function of a valuation polygon: max over vertices of -n - u v.
inline Rat polygon_support(const Polygon& P, Rat u) {
    Rat best = -P.vertices.front().first - u * P.vertices.front().second;
    for (auto& [n, v] : P.vertices) best = std::max(best, -n - u * v);
    return best;
}

// p-adic valuation of x if one digit strictly dominates at both endpoints and
// no unseen term can compete; otherwise x is not a certified unit.
inline std::optional<int> unit_valuation(const RobbaElem& x) {
    std::optional<int> found;
    for (Rat u : {x.s, x.r}) {
        GaussNorm g = slice_norm(x, u);
        if (g.zero || g.may_hide) return std::nullopt;
        for (auto& [n, d] : x.x.digits())
            if (n != g.argmax && Rat(-n) - u * d.tnorm().v >= g.log) return std::nullopt;
        if (found && *found != g.argmax) return std::nullopt;
        found = g.argmax;
    }
    return found;
}

// --------------------------------------------------------- Puiseux polynomials

// Finite sum of c_e T^e with exponents in Z[1/p] and coefficients in the ring
// of integers of the untilt field, on the annulus of log-radii [ls, lr]
// (radius p^-l).  All coefficients share one untilt ring.
class PuiseuxPoly {
public:
    PuiseuxPoly() = default;
    explicit PuiseuxPoly(const UntiltRing& R, Rat ls = Rat(0), Rat lr = Rat(0)) : R_(&R), ls_(ls), lr_(lr) {
        require(lr <= ls, errc::invalid_argument, "annulus needs inner log-radius >= outer log-radius");
    }

    static PuiseuxPoly monomial(const UntiltRing& R, const UntiltElem& c, Rat e) {
        PuiseuxPoly x(R);
        x.add_term(e, c);
        return x;
    }
    static PuiseuxPoly constant(const UntiltRing& R, const UntiltElem& c) { return monomial(R, c, Rat(0)); }

    const UntiltRing& ring() const { return *R_; }
    const std::map<Rat, UntiltElem>& terms() const { return t_; }
    Rat inner_log() const { return ls_; }
    Rat outer_log() const { return lr_; }

    UntiltElem coeff(Rat e) const {
        auto it = t_.find(e);
        return it == t_.end() ? UntiltElem(*R_) : it->second;
    }

    void add_term(Rat e, const UntiltElem& c) {
        require(&c.ring() == R_, errc::coeff_mismatch, "coefficient from another untilt ring");
        require(pdenom_exp(e, R_->p) >= 0, errc::denominator_overflow, "exponent is not in Z[1/p]");
        auto it = t_.find(e);
        UntiltElem s = it == t_.end() ? c : it->second + c;
        if (s.is_zero() && s.precision() >= R_->full_precision()) t_.erase(e);
        else t_[e] = s;
    }

    void erase(Rat e) { t_.erase(e); }

    bool integral_exponents() const {
        for (auto& [e, c] : t_)
            if (e.denominator() != 1) return false;
        return true;
    }

    // log_p of the norm at log-radius l: max(-v(c)/N - e l); nullopt if zero at precision
    std::optional<Rat> norm_log(Rat l) const {
        std::optional<Rat> best;
        for (auto& [e, c] : t_) {
            if (c.is_zero()) continue;
            Rat v = -Rat(c.valuation(), R_->N) - e * l;
            if (!best || v > *best) best = v;
        }
        return best;
    }

    friend PuiseuxPoly operator+(const PuiseuxPoly& x, const PuiseuxPoly& y) {
        PuiseuxPoly r = x;
        r.ls_ = std::min(x.ls_, y.ls_);
        r.lr_ = std::max(x.lr_, y.lr_);
        for (auto& [e, c] : y.t_) r.add_term(e, c);
        return r;
    }
    PuiseuxPoly operator-() const {
        PuiseuxPoly r = *this;
        for (auto& [e, c] : r.t_) c = -c;
        return r;
    }
    friend PuiseuxPoly operator-(const PuiseuxPoly& x, const PuiseuxPoly& y) { return x + (-y); }
    friend PuiseuxPoly operator*(const PuiseuxPoly& x, const PuiseuxPoly& y) {
        PuiseuxPoly r(*x.R_, std::min(x.ls_, y.ls_), std::max(x.lr_, y.lr_));
        for (auto& [e1, c1] : x.t_)
            for (auto& [e2, c2] : y.t_) r.add_term(e1 + e2, c1 * c2);
        return r;
    }
    PuiseuxPoly scaled(const UntiltElem& c) const {
        PuiseuxPoly r(*R_, ls_, lr_);
        for (auto& [e, d] : t_) r.add_term(e, d * c);
        return r;
    }
    PuiseuxPoly shifted(Rat s) const {
        PuiseuxPoly r(*R_, ls_, lr_);
        for (auto& [e, d] : t_) r.add_term(e + s, d);
        return r;
    }

    // every coefficient vanishes at its precision
    bool is_zero() const {
        for (auto& [e, c] : t_)
            if (!c.is_zero()) return false;
        return true;
    }

    // smallest valuation among coefficients (their precision when zero)
    i64 valuation() const {
        i64 v = R_->full_precision();
        for (auto& [e, c] : t_) v = std::min(v, c.valuation());
        return v;
    }

    bool equal_at_precision(const PuiseuxPoly& o) const { return (*this - o).is_zero(); }

private:
    const UntiltRing* R_ = nullptr;
    std::map<Rat, UntiltElem> t_;
    Rat ls_{0}, lr_{0};
};

// ------------------------------------------------------ Weierstrass preparation

struct PreparedFactorization {
    PuiseuxPoly unit, prep;
    Rat width{0};
    int iterations = 0;
};

// prepared: exponents in [0, e], extreme coefficients of norm 1, all others of norm <= 1
inline bool is_prepared(const PuiseuxPoly& x, Rat e) {
    if (x.terms().empty()) return false;
    if (x.terms().begin()->first != Rat(0) || x.terms().rbegin()->first != e) return false;
    return x.terms().begin()->second.is_unit() && x.terms().rbegin()->second.is_unit();
}

namespace detail {

// E = q P + r with r supported in [0, e]; P has unit coefficients at 0 and e
inline std::pair<PuiseuxPoly, PuiseuxPoly> prepared_division(const PuiseuxPoly& E, const PuiseuxPoly& P, Rat e) {
    const UntiltRing& R = P.ring();
    UntiltElem top_inv = P.coeff(e).inv(), low_inv = P.coeff(Rat(0)).inv();
    PuiseuxPoly W = E, q(R);
    auto step = [&](Rat j, const UntiltElem& w, const UntiltElem& pinv, Rat shift) {
        UntiltElem c = w * pinv;
        PuiseuxPoly m = PuiseuxPoly::monomial(R, c, shift);
        q = q + m;
        W = W - m * P;
        W.erase(j);  // the leading term cancels exactly
    };
    while (!W.terms().empty() && W.terms().rbegin()->first > e) {
        auto [j, w] = *W.terms().rbegin();
        if (w.is_zero()) W.erase(j);
        else step(j, w, top_inv, j - e);
    }
    while (!W.terms().empty() && W.terms().begin()->first < Rat(0)) {
        auto [j, w] = *W.terms().begin();
        if (w.is_zero()) W.erase(j);
        else step(j, w, low_inv, j);
    }
    return {q, W};
}

} // namespace detail

// x = unit * prep on the unit circle, with prep prepared of width e and
// normalized to constant coefficient 1.
inline PreparedFactorization prepared_factor(const PuiseuxPoly& x, int max_iter = 1000) {
    require(x.inner_log() == Rat(0) && x.outer_log() == Rat(0), errc::invalid_argument,
            "preparation is implemented on the unit circle");
    const UntiltRing& R = x.ring();
    i64 vmin = -1;
    for (auto& [e, c] : x.terms())
        if (!c.is_zero() && (vmin < 0 || c.valuation() < vmin)) vmin = c.valuation();
    require(vmin >= 0, errc::precision_exhausted, "element is zero at precision");
    for (auto& [e, c] : x.terms())
        require(!c.is_zero() || c.precision() > vmin, errc::precision_exhausted, "dominant term ambiguous at precision");
    Rat lo, hi;
    bool first = true;
    for (auto& [e, c] : x.terms())
        if (!c.is_zero() && c.valuation() == vmin) {
            if (first) lo = e;
            hi = e;
            first = false;
        }
    Rat e = hi - lo;
    UntiltElem a = x.coeff(lo).div_u(vmin);
    UntiltElem ainv = a.inv();

    // x' = x / (a u^vmin T^lo): coefficients integral, norm 1 at exponents 0 and e
    PuiseuxPoly xn(R);
    for (auto& [ex, c] : x.terms()) xn.add_term(ex - lo, c.div_u(vmin) * ainv);
    PuiseuxPoly P(R), U = PuiseuxPoly::constant(R, UntiltElem::one(R));
    for (auto& [ex, c] : xn.terms())
        if (ex >= Rat(0) && ex <= e) P.add_term(ex, c);

    PreparedFactorization out;
    PuiseuxPoly E = xn - U * P;
    i64 vE = E.valuation();
    while (!E.is_zero()) {
        require(++out.iterations <= max_iter, errc::max_iter_exceeded, "preparation did not converge");
        auto [q, r] = detail::prepared_division(E, P, e);
        U = U + q;
        P = P + r;
        E = xn - U * P;
        i64 v = E.valuation();
        require(E.is_zero() || v > vE, errc::precision_exhausted, "preparation residual stopped contracting");
        vE = v;
    }
    // normalize prep_0 = 1
    UntiltElem c0 = P.coeff(Rat(0));
    UntiltElem c0inv = c0.inv();
    P = P.scaled(c0inv);
    U = U.scaled(c0);
    UntiltElem lead = UntiltElem::monomial(R, R.Z->one(), vmin) * a;
    out.unit = U.scaled(lead).shifted(lo);
    out.prep = P;
    out.width = e;
    return out;
}

// ------------------------------------------------------ Hensel zero separation

struct ZeroSeparation {
    std::vector<PuiseuxPoly> factors;  // x_i, monic in T, zeros near 1 - lambda_i mu
    std::vector<int> multiplicity;     // degree of x_i
    PuiseuxPoly rest;                  // y
    std::vector<std::vector<i64>> hensel_log;  // residual valuations per factor and step
};

namespace detail {

using UPoly = std::vector<UntiltElem>;  // dense, index = degree

inline void trim(UPoly& f) {
    while (!f.empty() && f.back().is_zero() && f.back().precision() >= f.back().ring().full_precision()) f.pop_back();
}

inline UPoly padd(const UPoly& f, const UPoly& g) {
    const UntiltRing& R = f.empty() ? g.front().ring() : f.front().ring();
    UPoly r(std::max(f.size(), g.size()), UntiltElem(R));
    for (std::size_t i = 0; i < f.size(); ++i) r[i] = r[i] + f[i];
    for (std::size_t i = 0; i < g.size(); ++i) r[i] = r[i] + g[i];
    return r;
}

inline UPoly pneg(UPoly f) {
    for (auto& c : f) c = -c;
    return f;
}

inline UPoly pmul(const UPoly& f, const UPoly& g) {
    if (f.empty() || g.empty()) return {};
    UPoly r(f.size() + g.size() - 1, UntiltElem(f.front().ring()));
    for (std::size_t i = 0; i < f.size(); ++i)
        for (std::size_t j = 0; j < g.size(); ++j) r[i + j] = r[i + j] + f[i] * g[j];
    return r;
}

// division by a monic polynomial
inline std::pair<UPoly, UPoly> pdivmod(UPoly f, const UPoly& g) {
    std::size_t dg = g.size() - 1;
    const UntiltRing& R = g.front().ring();
    if (f.size() <= dg) return {UPoly{}, f};
    UPoly q(f.size() - dg, UntiltElem(R));
    for (std::size_t k = f.size(); k-- > dg;) {
        UntiltElem c = f[k];
        q[k - dg] = c;
        for (std::size_t i = 0; i <= dg; ++i) f[k - dg + i] = f[k - dg + i] - c * g[i];
    }
    f.resize(dg);
    return {q, f};
}

inline i64 pval(const UPoly& f, const UntiltRing& R) {
    i64 v = R.full_precision();
    for (auto& c : f) v = std::min(v, c.valuation());
    return v;
}

inline bool pzero(const UPoly& f) {
    for (auto& c : f)
        if (!c.is_zero()) return false;
    return true;
}

// residue-field polynomials
using FPoly = std::vector<fq_t>;

inline void ftrim(FPoly& f) {
    while (!f.empty() && f.back() == 0) f.pop_back();
}

inline FPoly fmul(const Fq& F, const FPoly& a, const FPoly& b) {
    if (a.empty() || b.empty()) return {};
    FPoly r(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] = F.add(r[i + j], F.mul(a[i], b[j]));
    ftrim(r);
    return r;
}

inline std::pair<FPoly, FPoly> fdivmod(const Fq& F, FPoly a, const FPoly& b) {
    ftrim(a);
    FPoly q;
    std::size_t db = b.size() - 1;
    fq_t linv = F.inv(b.back());
    if (a.size() > db) q.assign(a.size() - db, 0);
    while (a.size() > db) {
        std::size_t k = a.size() - 1;
        fq_t c = F.mul(a[k], linv);
        q[k - db] = c;
        for (std::size_t i = 0; i <= db; ++i) a[k - db + i] = F.sub(a[k - db + i], F.mul(c, b[i]));
        ftrim(a);
        if (a.size() > k) a.pop_back();
    }
    return {q, a};
}

inline FPoly fsub(const Fq& F, FPoly a, const FPoly& b) {
    if (a.size() < b.size()) a.resize(b.size(), 0);
    for (std::size_t i = 0; i < b.size(); ++i) a[i] = F.sub(a[i], b[i]);
    ftrim(a);
    return a;
}

// inverse of a modulo m (coprime) by the extended Euclidean algorithm
inline FPoly finv_mod(const Fq& F, const FPoly& a, const FPoly& m) {
    FPoly r0 = m, r1 = fdivmod(F, a, m).second, s0{}, s1{1};
    while (!r1.empty()) {
        auto [q, r] = fdivmod(F, r0, r1);
        FPoly s = fsub(F, s0, fmul(F, q, s1));
        r0 = r1; r1 = r;
        s0 = s1; s1 = s;
    }
    require(r0.size() == 1, errc::hensel_failure, "factors are not coprime modulo the maximal ideal");
    fq_t c = F.inv(r0[0]);
    for (auto& x : s0) x = F.mul(x, c);
    return fdivmod(F, s0, m).second;
}

inline FPoly reduce(const UPoly& f) {
    FPoly r;
    for (auto& c : f) r.push_back(c.reduce_mod_u());
    ftrim(r);
    return r;
}

inline UPoly lift(const UntiltRing& R, const FPoly& f) {
    UPoly r;
    for (fq_t c : f) r.push_back(UntiltElem::from_zq(R, R.Z->teichmuller(c)));
    return r;
}

} // namespace detail

// Factor x = x_1 ... x_m y where the zeros of x_i are the zeros of x in the disc
// |T - (1 - lambda_i mu)| < |mu|.  Integral exponents only.
inline ZeroSeparation separate_zeroes(const PuiseuxPoly& x, const UntiltElem& mu, const std::vector<UntiltElem>& lambda,
                                      int max_iter = 200) {
    using namespace detail;
    const UntiltRing& R = x.ring();
    const Fq& F = *R.Z->F;
    require(x.integral_exponents(), errc::invalid_argument, "zero separation needs integral exponents");
    require(!x.terms().empty() && x.terms().begin()->first >= Rat(0), errc::invalid_argument, "zero separation needs a polynomial");
    require(!mu.is_zero() && mu.valuation() > 0, errc::invalid_argument, "mu must be a nonzero element of the maximal ideal");
    for (std::size_t i = 0; i < lambda.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            require(lambda[i].reduce_mod_u() != lambda[j].reduce_mod_u(), errc::residue_collision, "lambda residues collide");

    i64 deg = x.terms().rbegin()->first.numerator();
    UPoly xs(std::size_t(deg + 1), UntiltElem(R));
    for (auto& [e, c] : x.terms()) xs[std::size_t(e.numerator())] = c;

    // g(S) = x(1 - mu S), then normalize to content 1
    UPoly lin{UntiltElem::one(R), -mu}, g;
    for (i64 k = deg; k >= 0; --k) g = padd(pmul(g, lin), UPoly{xs[std::size_t(k)]});
    i64 vmin = -1;
    for (auto& c : g)
        if (!c.is_zero() && (vmin < 0 || c.valuation() < vmin)) vmin = c.valuation();
    require(vmin >= 0, errc::precision_exhausted, "substituted polynomial is zero at precision");
    for (auto& c : g) {
        require(!c.is_zero() || c.precision() > vmin, errc::precision_exhausted, "content ambiguous at precision");
        c = c.div_u(vmin);
    }

    ZeroSeparation out;
    UPoly cur = g;
    PuiseuxPoly prod = PuiseuxPoly::constant(R, UntiltElem::one(R));
    for (auto& lam : lambda) {
        fq_t lbar = lam.reduce_mod_u();
        FPoly lin_bar{F.neg(lbar), 1};
        FPoly cbar = reduce(cur);
        int m = 0;
        while (!cbar.empty()) {
            auto [q, r] = fdivmod(F, cbar, lin_bar);
            if (!r.empty()) break;
            cbar = q;
            ++m;
        }
        out.multiplicity.push_back(m);
        std::vector<i64> log;
        UPoly gi{UntiltElem::one(R)};
        if (m > 0) {
            UPoly base{-lam, UntiltElem::one(R)};
            for (int k = 0; k < m; ++k) gi = pmul(gi, base);
            FPoly gibar = reduce(gi);
            i64 prev = -1;
            for (int it = 0;; ++it) {
                auto [q, r] = pdivmod(cur, gi);
                if (pzero(r)) {
                    cur = q;
                    break;
                }
                i64 v = pval(r, R);
                log.push_back(v);
                require(prev < 0 || v > prev, errc::hensel_failure, "Hensel step did not contract");
                require(it < max_iter, errc::hensel_failure, "Hensel iteration limit reached");
                prev = v;
                UPoly s = lift(R, finv_mod(F, reduce(q), gibar));
                UPoly b = pdivmod(pmul(s, r), gi).second;
                b.resize(gi.size() - 1, UntiltElem(R));
                for (std::size_t i = 0; i < b.size(); ++i) gi[i] = gi[i] + b[i];
            }
        }
        out.hensel_log.push_back(log);

        // x_i(T) = (-mu)^m g_i((1 - T)/mu) = sum_k c_k (-1)^m mu^(m-k) (1 - T)^k
        PuiseuxPoly xi(R);
        PuiseuxPoly one_minus_T = PuiseuxPoly::constant(R, UntiltElem::one(R)) -
                                  PuiseuxPoly::monomial(R, UntiltElem::one(R), Rat(1));
        PuiseuxPoly pw = PuiseuxPoly::constant(R, UntiltElem::one(R));
        for (int k = 0; k <= m; ++k) {
            UntiltElem c = gi[std::size_t(k)] * mu.pow(u64(m - k));
            if (m % 2) c = -c;
            xi = xi + pw.scaled(c);
            pw = pw * one_minus_T;
        }
        prod = prod * xi;
        out.factors.push_back(xi);
    }

    // y = x / prod by division by the monic polynomial prod
    i64 dp = prod.terms().rbegin()->first.numerator();
    UPoly pp(std::size_t(dp + 1), UntiltElem(R));
    for (auto& [e, c] : prod.terms()) pp[std::size_t(e.numerator())] = c;
    auto [y, r] = pdivmod(xs, pp);
    require(pzero(r), errc::hensel_failure, "separated factors do not divide x at precision");
    PuiseuxPoly rest(R);
    for (std::size_t i = 0; i < y.size(); ++i) rest.add_term(Rat(i64(i)), y[i]);
    out.rest = rest;
    return out;
}

// ---------------------------------------------------------- Artin-Schreier

struct ArtinSchreier {
    bool solvable = false;
    fq_t solution = 0;       // a root of x^p - x = a when solvable
    int obstruction = 0;     // trace of a to F_p, the class in the cokernel
    int cokernel_dim = 0;    // dimension over F_p of F_q / (x^p - x)
};

// Solvability of x^p - x = a in F_q by F_p-linear algebra.
inline ArtinSchreier artin_schreier_h1(const Fq& F, fq_t a) {
    int n = F.a, p = F.p;
    // matrix of x -> x^p - x on the basis X^j, columns are images
    std::vector<std::vector<int>> M(std::size_t(n), std::vector<int>(std::size_t(n) + 1, 0));
    for (int j = 0; j < n; ++j) {
        std::vector<int> e(std::size_t(n), 0);
        e[std::size_t(j)] = 1;
        fq_t b = F.encode(e);
        auto d = F.digits(F.sub(F.pow(b, u64(p)), b));
        for (int i = 0; i < n; ++i) M[std::size_t(i)][std::size_t(j)] = d[std::size_t(i)];
    }
    auto ad = F.digits(a);
    for (int i = 0; i < n; ++i) M[std::size_t(i)][std::size_t(n)] = ad[std::size_t(i)];
    // row reduction over F_p on the augmented matrix
    int rank = 0;
    std::vector<int> pivcol;
    for (int c = 0; c < n && rank < n; ++c) {
        int piv = -1;
        for (int r = rank; r < n; ++r)
            if (M[std::size_t(r)][std::size_t(c)]) { piv = r; break; }
        if (piv < 0) continue;
        std::swap(M[std::size_t(rank)], M[std::size_t(piv)]);
        i64 inv = inv_mod_ppow(M[std::size_t(rank)][std::size_t(c)], p, p);
        for (auto& v : M[std::size_t(rank)]) v = int(modnorm(v * inv, p));
        for (int r = 0; r < n; ++r) {
            if (r == rank || !M[std::size_t(r)][std::size_t(c)]) continue;
            int f = M[std::size_t(r)][std::size_t(c)];
            for (int k = 0; k <= n; ++k)
                M[std::size_t(r)][std::size_t(k)] = int(modnorm(M[std::size_t(r)][std::size_t(k)] - f * M[std::size_t(rank)][std::size_t(k)], p));
        }
        pivcol.push_back(c);
        ++rank;
    }
    ArtinSchreier out;
    out.cokernel_dim = n - rank;
    out.obstruction = F.trace(a);
    out.solvable = true;
    for (int r = rank; r < n; ++r)
        if (M[std::size_t(r)][std::size_t(n)]) out.solvable = false;
    if (out.solvable) {
        std::vector<int> x(std::size_t(n), 0);
        for (int r = 0; r < rank; ++r) x[std::size_t(pivcol[std::size_t(r)])] = M[std::size_t(r)][std::size_t(n)];
        out.solution = F.encode(x);
    }
    return out;
}

} // namespace perfprism
