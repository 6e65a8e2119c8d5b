#pragma once
// Property suites behind the acceptance criteria.  Each suite draws its inputs
// from a seeded generator, checks every instance with exact comparisons and
// reports a one-line summary.  Shared by the acceptance runner and the CLI.

#include <chrono>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "perfprism/perfprism.hpp"

namespace perfprism::suite {

using Rng = std::mt19937_64;

struct Outcome {
    bool pass = true;
    std::string detail;
    double seconds = 0;
    double limit = 0;  // 0: no time bound
};

// ------------------------------------------------------------------ inputs

inline fq_t rand_fq(Rng& g, const Fq& F, bool nonzero = false) {
    std::uniform_int_distribution<u64> d(nonzero ? 1 : 0, F.q - 1);
    return d(g);
}

inline PerfSeries rand_series(Rng& g, const Fq& F, int K, Rat lo, Rat hi, int terms, Rat scale = Rat(1)) {
    PerfSeries s(F, K, lo, hi, scale);
    i64 den = ipow(F.p, K);
    i64 a = ceil_rat(lo * Rat(den)), b = ceil_rat(hi * Rat(den));
    std::uniform_int_distribution<i64> d(a, b - 1);
    for (int i = 0; i < terms; ++i) s.set(Rat(d(g), den), rand_fq(g, F));
    return s;
}

inline WittTrunc rand_integral(Rng& g, const Fq& F, int plen, Rat H, int K, int terms) {
    WittTrunc w(F, 0, plen, Rat(0), H);
    for (int n = 0; n < plen; ++n) w.set_digit(n, rand_series(g, F, K, Rat(0), w.digit_hi(n), terms));
    return w;
}

inline WittTrunc constant_witt(const Fq& F, const std::vector<fq_t>& digits) {
    WittTrunc w(F, 0, int(digits.size()), Rat(0), Rat(1));
    for (std::size_t n = 0; n < digits.size(); ++n)
        if (digits[n]) w.set_digit(int(n), PerfSeries::monomial(F, digits[n], Rat(0), 0, Rat(0), w.digit_hi(int(n))));
    return w;
}

inline ZqElem rand_zq(Rng& g, const ZqRing& R) {
    std::vector<i64> v(std::size_t(R.a));
    std::uniform_int_distribution<i64> d(0, R.mod - 1);
    for (auto& x : v) x = d(g);
    return ZqElem(R, v);
}

inline ZqElem rand_zq_unit(Rng& g, const ZqRing& R) {
    while (true) {
        ZqElem x = rand_zq(g, R);
        if (!x.is_zero() && x.val() == 0) return x;
    }
}

// inverse of a unitriangular matrix as a finite geometric series
template <class T>
Matrix<T> unitriangular_inverse(const Matrix<T>& U, const T& zero, const T& one) {
    std::size_t n = U.size();
    auto I = mat_identity(n, zero, one);
    auto N = mat_sub(I, U);
    auto acc = I, pw = I;
    for (std::size_t k = 1; k < n; ++k) {
        pw = mat_mul(pw, N, zero);
        acc = mat_add(acc, pw);
    }
    return acc;
}

// random element of GL_n(Z_q) as Lo * Up, with its inverse
inline std::pair<Matrix<ZqElem>, Matrix<ZqElem>> rand_gl(Rng& g, const ZqRing& R, std::size_t n) {
    ZqElem zero = ZqElem::zero(R), one = ZqElem::one(R);
    auto Lo = mat_identity(n, zero, one), Up = Lo;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            Lo[i][j] = rand_zq(g, R);
            Up[j][i] = rand_zq(g, R);
        }
    auto U = mat_mul(Lo, Up, zero);
    auto Uinv = mat_mul(unitriangular_inverse(Up, zero, one), unitriangular_inverse(Lo, zero, one), zero);
    return {U, Uinv};
}

// the same phi-module in a random basis: U^-1 A sigma^a(U)
inline PhiModule rand_basis_change(Rng& g, const PhiModule& M) {
    auto [U, Uinv] = rand_gl(g, *M.Z, M.rank());
    ZqElem zero = ZqElem::zero(*M.Z);
    return PhiModule(*M.Z, mat_mul(mat_mul(Uinv, M.A, zero), sigma_matrix(U, M.a), zero), M.a, M.twist);
}

// diag(p^k_i units) twisted by t in a random basis: slopes t - k_i
inline PhiModule rand_diagonal_module(Rng& g, const ZqRing& R, const std::vector<int>& k, int t, int a = 1) {
    std::size_t n = k.size();
    Matrix<ZqElem> D(n, std::vector<ZqElem>(n, ZqElem::zero(R)));
    for (std::size_t i = 0; i < n; ++i) D[i][i] = rand_zq_unit(g, R).mul_pk(k[i]);
    return rand_basis_change(g, PhiModule(R, D, a, t));
}

// ------------------------------------------------------------------ helpers

class Tally {
public:
    void check(bool ok, const std::string& what) {
        ++checks_;
        if (!ok && first_.empty()) first_ = what;
        failed_ += !ok;
    }
    bool pass() const { return failed_ == 0; }
    std::string summary(const std::string& extra = "") const {
        std::ostringstream os;
        os << checks_ - failed_ << "/" << checks_ << " checks";
        if (!extra.empty()) os << ", " << extra;
        if (!first_.empty()) os << "; first failure: " << first_;
        return os.str();
    }

private:
    long checks_ = 0, failed_ = 0;
    std::string first_;
};

inline std::vector<Rat> sorted_desc(std::vector<Rat> v) {
    std::sort(v.begin(), v.end(), std::greater<Rat>());
    return v;
}

inline std::string str(const Rat& r) {
    std::ostringstream os;
    os << r.numerator();
    if (r.denominator() != 1) os << "/" << r.denominator();
    return os.str();
}

// ------------------------------------------------------------------- suites

// 1. ghost components turn Witt arithmetic into componentwise arithmetic
inline Outcome witt_ghost(Rng& g) {
    const Fq& F = Fq::get(2, 2);
    const int L = 4;
    Tally t;
    auto rand_const = [&] {
        std::vector<fq_t> d(L);
        for (auto& x : d) x = rand_fq(g, F);
        return constant_witt(F, d);
    };
    auto combine = [](const std::vector<ZqElem>& a, const std::vector<ZqElem>& b, bool mul) {
        std::vector<ZqElem> r;
        for (std::size_t i = 0; i < a.size(); ++i) {
            auto v = mul ? a[i] * b[i] : a[i] + b[i];
            r.push_back(ZqElem(*a[i].R, a[i].R->truncate(v.c, int(i) + 1)));
        }
        return r;
    };
    for (int i = 0; i < 1000; ++i) {
        auto x = rand_const(), y = rand_const();
        auto gx = ghost(x), gy = ghost(y);
        t.check(ghost(x + y) == combine(gx, gy, false), "sum, pair " + std::to_string(i));
        t.check(ghost(x * y) == combine(gx, gy, true), "product, pair " + std::to_string(i));
    }
    return {t.pass(), t.summary("1000 pairs over F_4, 4 digits"), 0, 10};
}

// 2. digit n of [lambda x] + [lambda y] is lambda times digit n of [x] + [y]
inline Outcome homogeneity(Rng& g) {
    Tally t;
    int nonempty = 0;
    for (int p : {2, 3}) {
        const Fq& F = Fq::get(p, 2);
        const int plen = 5;
        for (int i = 0; i < 200; ++i) {
            // window p^4 times the support, so that digit 4 still sees every carry
            Rat hi(4 * ipow(p, plen - 1));
            auto x = rand_series(g, F, 1, Rat(0), Rat(4), 3).with_window(Rat(0), hi);
            auto y = rand_series(g, F, 1, Rat(0), Rat(4), 3).with_window(Rat(0), hi);
            auto s = teichmuller(x, plen) + teichmuller(y, plen);
            for (fq_t lam = 0; lam < F.q; ++lam) {
                auto sl = teichmuller(x.scaled(lam), plen) + teichmuller(y.scaled(lam), plen);
                for (int n = 0; n < plen; ++n) {
                    nonempty += !s.digit(n).is_zero() && n == plen - 1 && lam == 1;
                    t.check(sl.digit(n).same_terms(s.digit(n).scaled(lam)),
                            "p=" + std::to_string(p) + " n=" + std::to_string(n) + " lambda=" + std::to_string(lam));
                }
            }
        }
    }
    t.check(nonempty > 100, "digit 4 is exercised");
    return {t.pass(), t.summary("200 pairs for p = 2, 3, digits 0..4, every lambda in F_q, " + std::to_string(nonempty) +
                                    " pairs with a nonzero digit 4"), 0, 0};
}

// 3. power multiplicativity and log-convexity of the Gauss norms
inline Outcome gauss_norm_laws(Rng& g) {
    Tally t;
    const std::vector<Rat> grid{Rat(1, 3), Rat(2, 3), Rat(1), Rat(4, 3), Rat(5, 3)};
    int n = 0;
    for (int i = 0; i < 200; ++i) {
        int p = i % 2 ? 3 : 2;
        const Fq& F = Fq::get(p, 2);
        // digits at levels 0 and 1 with exponents in [0, 1) and wide windows: the
        // norms of x and x^2 then exceed p^-5, so neither digits above the
        // truncation nor unseen window tails can carry the maximum
        WittTrunc x(F, 0, 5, Rat(0), Rat(64 * 81));
        for (int k = 0; k < 2; ++k) x.set_digit(k, rand_series(g, F, 2, Rat(0), Rat(1), 3));
        auto d0 = x.digit(0);
        if (d0.is_zero()) d0.set(Rat(std::uniform_int_distribution<int>(0, 3)(g), 4), rand_fq(g, F, true));
        x.set_digit(0, d0);
        ++n;
        auto x2 = x * x;
        std::vector<Rat> logs;
        for (Rat r : grid) {
            auto a = gauss_norm(x, r), b = gauss_norm(x2, r);
            t.check(!a.may_hide && !b.may_hide, "norm not certified at r=" + str(r));
            t.check(b.log == 2 * a.log, "power multiplicativity at r=" + str(r));
            logs.push_back(a.log);
        }
        // equally spaced grid: convexity is 2 f(r_i) <= f(r_(i-1)) + f(r_(i+1))
        for (std::size_t k = 1; k + 1 < logs.size(); ++k)
            t.check(2 * logs[k] <= logs[k - 1] + logs[k + 1], "log-convexity at r=" + str(grid[k]));
    }
    return {t.pass(), t.summary(std::to_string(n) + " elements, 5-point grid"), 0, 0};
}

// 4. division by the primitive element p - [t]
inline Outcome primitive_division(Rng& g) {
    Tally t;
    const Fq& F = Fq::get(2, 1);
    const int p = F.p;
    Rat H(64);
    auto z = standard_primitive(F, 3, H);
    Rat vz0 = z.digit(0).tnorm().v;
    auto reduced = [&](const WittTrunc& y) {
        // alpha(y_0) >= alpha(y_n): a nonzero y_n needs a nonzero y_0 of smaller or equal valuation
        for (int n = 1; n < y.top(); ++n) {
            if (y.digit(n).is_zero()) continue;
            if (y.digit(0).is_zero() || y.digit(0).tnorm().v > y.digit(n).tnorm().v) return false;
        }
        return true;
    };
    for (int i = 0; i < 100; ++i) {
        auto x = rand_integral(g, F, 3, H, 1, 4);
        auto res = primitive_divide(x, z);
        t.check((res.w * z + res.y).equal_at_precision(x), "x = wz + y");
        t.check(reduced(res.y), "mode a remainder");
        for (auto [eps, m] : {std::pair{2, 1}, {4, 2}}) {
            DivisionMode mode;
            mode.kind = DivisionMode::b;
            mode.eps = Rat(eps);
            mode.m = m;
            auto rb = primitive_divide(x, z, mode);
            const auto& y = rb.y;
            t.check((rb.w * z + y).equal_at_precision(x), "x = wz + y in mode b");
            t.check(reduced(y), "mode b remainder is reduced");
            // valuations: v(y_1) >= min(eps, v(z_0)(1/p + ... + 1/p^m) + v(y_0)), v(y_n) >= min(eps, v(y_0))
            Rat v0 = y.digit(0).is_zero() ? mode.eps : y.digit(0).tnorm().v;
            Rat root_sum(0);
            for (int j = 1; j <= m; ++j) root_sum += Rat(1, ipow(p, j));
            Rat b1 = std::min(mode.eps, vz0 * root_sum + v0), bn = std::min(mode.eps, v0);
            for (int n = 1; n < y.top(); ++n)
                if (!y.digit(n).is_zero())
                    t.check(y.digit(n).tnorm().v >= (n == 1 ? b1 : bn), "mode b bound, eps=" + std::to_string(eps));
        }
    }
    return {t.pass(), t.summary("100 dividends, z = p - [t], modes a and b"), 0, 5};
}

// 5. theta is a ring map with the expected kernel, and the sharp map round-trips
inline Outcome theta_map(Rng& g) {
    Tally t;
    const Fq& F = Fq::get(2, 2);
    Rat H(64);
    ThetaOptions opt;
    opt.M = 4;
    opt.guard = 3;
    opt.K = 6;  // input denominators 2^-2 plus guard roots, one ring for every value
    for (int i = 0; i < 200; ++i) {
        auto x = rand_integral(g, F, 4, H, 2, 3), y = rand_integral(g, F, 4, H, 2, 3);
        auto tx = theta(x, opt), ty = theta(y, opt);
        t.check(theta(x + y, opt).equal_at_precision(tx + ty), "theta(x + y)");
        t.check(theta(x * y, opt).equal_at_precision(tx * ty), "theta(x y)");
    }
    t.check(theta(standard_primitive(F, 4, H), opt).is_zero(), "theta(p - [t]) = 0");
    for (int i = 0; i < 20; ++i) {
        auto s = rand_series(g, F, 1, Rat(0), Rat(4), 4);
        auto sr = sharp_roundtrip(s, 2);
        t.check(sr.compatible && sr.reconstructed.same_terms(s), "sharp round trip");
    }
    return {t.pass(), t.summary("200 pairs at M = 4 with denominators 2^-2, guard 3"), 0, 10};
}

// 6. slopes of rank-one objects, standard pure objects and the slope calculus
inline Outcome slope_calculus(Rng& g) {
    Tally t;
    auto slopes = [](const PhiModule& M) { return newton_slopes(M).slope_list(); };
    // rank one against -v_p(norm)/a0
    const std::vector<std::tuple<int, int, int>> fields{{2, 2, 1}, {3, 2, 1}, {2, 4, 2}, {5, 1, 1}, {2, 3, 1}};
    for (int i = 0; i < 100; ++i) {
        auto [p, f, a] = fields[std::size_t(i) % fields.size()];
        const ZqRing& R = ZqRing::get(p, f, 10);
        std::uniform_int_distribution<int> dv(0, 2), dt(0, 4);
        ZqElem c = rand_zq_unit(g, R).mul_pk(dv(g));
        int tw = dt(g);
        PhiModule M(R, {{c}}, a, tw);
        int a0 = f / std::gcd(f, a);
        ZqElem norm = ZqElem::one(R);
        for (int k = 0; k < a0; ++k) norm = norm * c.sigma(i64(a) * k);
        t.check(slopes(M) == std::vector<Rat>{Rat(-norm.val(), a0) + Rat(tw)}, "rank one oracle");
    }
    // standard pure objects
    const ZqRing& R3 = ZqRing::get(3, 1, 10);
    for (auto [c, d] : {std::pair{1, 2}, {2, 3}, {-1, 2}}) {
        auto M = standard_pure(R3, c, d);
        t.check(slopes(M) == std::vector<Rat>(std::size_t(d), Rat(c, d)), "standard pure slopes");
        t.check(is_pure(M, c, d), "standard pure purity " + std::to_string(c) + "/" + std::to_string(d));
    }
    // slope laws on random pairs
    const ZqRing& R = ZqRing::get(2, 2, 40);
    const ZqRing& Rind = ZqRing::get(3, 2, 16);
    std::uniform_int_distribution<int> dk(0, 2), dt(-2, 2);
    for (int i = 0; i < 100; ++i) {
        std::vector<int> k1{dk(g), dk(g)}, k2{dk(g), dk(g)};
        int t1 = dt(g), t2 = dt(g);
        auto M = rand_diagonal_module(g, R, k1, t1), N = rand_diagonal_module(g, R, k2, t2);
        std::vector<Rat> tw, du, te, re;
        for (int x : k1) {
            Rat s(t1 - x);
            tw.push_back(s + Rat(5));
            du.push_back(-s);
            re.push_back(s * Rat(2));
            for (int y : k2) te.push_back(s + Rat(t2 - y));
        }
        t.check(slopes(twist(M, 5)) == sorted_desc(tw), "twist");
        t.check(slopes(dual(M)) == sorted_desc(du), "dual");
        t.check(slopes(tensor(M, N)) == sorted_desc(te), "tensor");
        t.check(slopes(restrict_Psi(M, 2)) == sorted_desc(re), "restrict");
        // induction of a phi^2-module halves the slopes
        auto P = rand_diagonal_module(g, Rind, k1, t1, 2);
        std::vector<Rat> half;
        for (int x : k1)
            for (int j = 0; j < 2; ++j) half.push_back(Rat(t1 - x) / Rat(2));
        t.check(slopes(induce_Psi(P, 2)) == sorted_desc(half), "induce");
    }
    return {t.pass(), t.summary("100 rank-one objects, 100 random pairs"), 0, 10};
}

// 7. no nonzero morphisms from a pure object to one of slope at least 1 lower
inline Outcome hom_vanishing(Rng& g) {
    Tally t;
    const ZqRing& R = ZqRing::get(2, 1, 6);
    const std::vector<std::pair<int, int>> objs{{0, 1}, {1, 1}, {-1, 1}, {2, 1}, {1, 2}, {-1, 2}, {3, 2}, {1, 3}, {-2, 3}};
    std::uniform_int_distribution<std::size_t> pick(0, objs.size() - 1);
    int n = 0;
    while (n < 50) {
        auto [c1, d1] = objs[pick(g)];
        auto [c2, d2] = objs[pick(g)];
        if (Rat(c1, d1) - Rat(c2, d2) < Rat(1)) continue;
        auto M1 = rand_basis_change(g, standard_pure(R, c1, d1));
        auto M2 = rand_basis_change(g, standard_pure(R, c2, d2));
        t.check(hom_dimension(M1, M2, 6).dim == 0,
                "Hom(" + std::to_string(c1) + "/" + std::to_string(d1) + ", " + std::to_string(c2) + "/" + std::to_string(d2) + ")");
        ++n;
    }
    auto T = PhiModule::trivial(R);
    t.check(hom_dimension(T, T, 6).dim == 1, "Hom(trivial, trivial)");
    return {t.pass(), t.summary("50 pure pairs at precision 6"), 0, 0};
}

// 8. H0 and H1 of the trivial rank-one module against exhaustive enumeration
inline Outcome torsion_cohomology(Rng&) {
    Tally t;
    for (auto [p, f, L] : {std::tuple{2, 1, 3}, {2, 2, 2}, {3, 1, 2}}) {
        const ZqRing& R = ZqRing::get(p, f, L);
        auto M = PhiModule::trivial(R);
        auto h = phi_cohomology_typeA(M);
        std::string tag = "q=" + std::to_string(ipow(p, f)) + " L=" + std::to_string(L);
        t.check(h.H0 == std::vector<int>{L} && h.H1 == std::vector<int>{L}, "Smith form, " + tag);
        // enumerate (Z_q/p^L): phi - 1 is x -> sigma(x) - x
        i64 total = ipow(R.mod, f);
        std::vector<ZqElem> kernel;
        std::vector<std::vector<i64>> image;
        for (i64 code = 0; code < total; ++code) {
            ZqElem v = ZqElem::zero(R);
            i64 c = code;
            for (int j = 0; j < f; ++j) {
                v.c[std::size_t(j)] = c % R.mod;
                c /= R.mod;
            }
            ZqElem w = v.sigma(1) - v;
            if (w.is_zero()) kernel.push_back(v);
            image.push_back(w.c);
        }
        for (int k = 1; k <= L; ++k) {
            // a cyclic group Z/p^L has p^min(k, L) elements killed by p^k and as many classes mod p^k
            i64 expect = ipow(p, std::min(k, L));
            i64 killed = 0;
            for (auto& v : kernel) killed += v.mul_pk(k).is_zero();
            i64 pk = ipow(p, k);
            std::set<std::vector<i64>> red;
            for (auto& w : image) {
                std::vector<i64> r;
                for (i64 x : w) r.push_back(x % pk);
                red.insert(r);
            }
            i64 coker = ipow(pk, f) / i64(red.size());
            t.check(killed == expect, "H0[p^" + std::to_string(k) + "], " + tag);
            t.check(coker == expect, "H1/p^" + std::to_string(k) + ", " + tag);
        }
    }
    return {t.pass(), t.summary("(q, L) in {(2,3), (4,2), (3,2)}"), 0, 30};
}

// 9. measured contraction of gamma^(p^n) - 1 on the summand generators
inline Outcome contraction(Rng&) {
    Tally t;
    using K = TowerDescriptor::Kind;
    for (auto [p, nmax] : {std::pair{2, 2}, {3, 1}}) {
        for (int n = 0; n <= nmax; ++n) {
            TowerDescriptor C{K::cyclotomic, p, 1, 1, Rat(ipow(p, n + 1) + 2)};
            for (int i = 1; i < p; ++i)
                t.check(contraction_norm(C, n, {i}) == Rat(ipow(p, n + 2), p - 1),
                        "cyclotomic p=" + std::to_string(p) + " n=" + std::to_string(n));
            TowerDescriptor T{K::toric, p, 1, 1, Rat(ipow(p, n) + 2)};
            for (int e = 1; e < p; ++e)
                t.check(contraction_norm(T, n, {e}) == Rat(ipow(p, n), p - 1),
                        "toric p=" + std::to_string(p) + " n=" + std::to_string(n));
        }
    }
    return {t.pass(), t.summary("p = 2, n <= 2 and p = 3, n <= 1"), 0, 5};
}

// 10. conjugates of imperfect Gamma-matrices are returned to imperfect form
inline Outcome decompletion(Rng& g) {
    Tally t;
    const Fq& F = Fq::get(2, 1);
    Rat H(16);
    Rat scale = cyclotomic_scale(2);
    auto pi_pow = [&](Rat e) { return PerfSeries::monomial(F, 1, e, pdenom_exp(e, 2), Rat(0), H, scale); };
    auto rand_toric = [&](int tden) {
        ToricSeries x(F, 1, H);
        std::uniform_int_distribution<int> ex(-2 * tden, 2 * tden);
        for (int i = 0; i < 2; ++i) x.add_term({Rat(ex(g), tden)}, rand_series(g, F, 1, Rat(0), H, 3, scale));
        return x;
    };
    int steps = 0, nontrivial = 0;
    for (int it = 0; it < 20; ++it) {
        // G0 = 1 + pi^2 (integral exponents), V = 1 + pi (half-integral exponents)
        auto I = toric_identity(F, 1, H, 2);
        auto G0 = I, V = I;
        for (auto& row : G0)
            for (auto& x : row) x = x + rand_toric(1).times(pi_pow(Rat(2)));
        for (auto& row : V)
            for (auto& x : row) x = x + rand_toric(2).times(pi_pow(Rat(1)));
        auto z = I[0][0].zero_like();
        auto G = mat_mul(mat_mul(neumann_inverse(V), G0, z), gamma_matrix_act({1}, V), z);
        auto r = decomplete(G);
        bool imperfect = true;
        for (auto& row : r.G0)
            for (auto& x : row) imperfect = imperfect && toric_split(x).equal_at_precision(x);
        t.check(imperfect, "result has integral exponents");
        auto back = mat_mul(mat_mul(neumann_inverse(r.U), G, z), gamma_matrix_act({1}, r.U), z);
        bool same = true;
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) same = same && back[i][j].equal_at_precision(r.G0[i][j]);
        t.check(same, "U^-1 G gamma(U) = G0");
        for (auto& s : r.log) {
            t.check(s.predicted > s.defect, "predicted contraction");
            t.check(!s.next || *s.next >= s.predicted, "measured defect meets prediction");
            ++steps;
        }
        nontrivial += !r.log.empty();
    }
    t.check(nontrivial >= 10, "at least half of the instances need correction");
    return {t.pass(), t.summary(std::to_string(nontrivial) + " nontrivial instances, " + std::to_string(steps) + " steps"), 0, 60};
}

// 11. perfect Weierstrass preparation on the unit circle
inline Outcome preparation(Rng& g) {
    Tally t;
    const UntiltRing& R = UntiltRing::get(2, 1, 3, 2);
    auto rand_untilt = [&](i64 vmin) {
        UntiltElem x(R);
        for (i64 j = vmin; j < vmin + R.N && j < R.full_precision(); ++j)
            x = x + UntiltElem::monomial(R, R.Z->teichmuller(rand_fq(g, *R.Z->F)), j);
        return x;
    };
    auto rand_puiseux = [&](int terms) {
        PuiseuxPoly x(R);
        std::uniform_int_distribution<int> ex(-8, 12), val(0, 3);
        for (int i = 0; i < terms; ++i) x = x + PuiseuxPoly::monomial(R, rand_untilt(val(g)), Rat(ex(g), 4));
        return x + PuiseuxPoly::monomial(R, UntiltElem::one(R), Rat(ex(g), 4));
    };
    for (int i = 0; i < 100; ++i) {
        auto x = rand_puiseux(5), y = rand_puiseux(4);
        auto fx = prepared_factor(x), fy = prepared_factor(y), fxy = prepared_factor(x * y);
        t.check((fx.unit * fx.prep).equal_at_precision(x), "x = unit * prep");
        t.check(is_prepared(fx.prep, fx.width), "extreme coefficients are units");
        t.check(fxy.width == fx.width + fy.width, "width additivity");
        t.check(fxy.prep.equal_at_precision(fx.prep * fy.prep), "prepared part is multiplicative");
    }
    return {t.pass(), t.summary("100 inputs over Q_2(p^(1/4)) mod p^3"), 0, 0};
}

// 12. Newton iteration towards an idempotent converges quadratically
inline Outcome projector(Rng& g) {
    Tally t;
    const int L = 6;
    for (int i = 0; i < 50; ++i) {
        const ZqRing& R = i % 2 ? ZqRing::get(3, 1, L) : ZqRing::get(2, 2, L);
        ZqElem zero = ZqElem::zero(R), one = ZqElem::one(R);
        std::size_t n = 3;
        auto D = mat_filled(n, n, zero);
        std::uniform_int_distribution<std::size_t> rk(1, n - 1);
        std::size_t r = rk(g);
        for (std::size_t k = 0; k < r; ++k) D[k][k] = one;
        auto [S, Sinv] = rand_gl(g, R, n);
        auto V = mat_mul(mat_mul(S, D, zero), Sinv, zero);
        for (auto& row : V)
            for (auto& x : row) x = x + rand_zq(g, R).mul_pk(1);
        auto res = projector_lift(V, L, [](const ZqElem& x) { return x.val(); });
        t.check(mat_sub(mat_mul(res.W, res.W, zero), res.W) == mat_filled(n, n, zero), "limit is idempotent");
        // |D'| <= |D|^2: the valuation at least doubles until the target
        for (std::size_t k = 1; k < res.defect_log.size(); ++k)
            t.check(res.defect_log[k] >= std::min(L, 2 * res.defect_log[k - 1]), "quadratic decay");
    }
    return {t.pass(), t.summary("50 perturbed idempotents over Z_q/p^6"), 0, 0};
}

// 13. Fitting ideals of engineered phi-stable torsion presentations
inline Outcome fitting_normal_form(Rng& g) {
    Tally t;
    const Fq& F = Fq::get(2, 2);
    const int plen = 3;
    const Rat H(3);
    for (int it = 0; it < 20; ++it) {
        std::size_t K = 2 + it % 2, n = 2 + (it / 2) % 2;
        std::vector<WittTrunc> shapes(K, WittTrunc(F, 0, plen, Rat(0), H));
        WittProduct zero = WittProduct::constant(shapes, 0), one = WittProduct::constant(shapes, 1);
        auto rand_elem = [&] {
            WittProduct r;
            for (std::size_t k = 0; k < K; ++k) r.c.push_back(rand_integral(g, F, plen, H, 1, 3));
            return r;
        };
        // block exponents per component, ascending
        std::uniform_int_distribution<int> dv(0, plen - 1);
        std::vector<std::vector<int>> d(K, std::vector<int>(n));
        for (auto& row : d) {
            for (auto& x : row) x = dv(g);
            std::sort(row.begin(), row.end());
        }
        auto D = mat_identity(n, zero, one);
        for (std::size_t i = 0; i < n; ++i) {
            WittProduct e = zero;
            for (std::size_t k = 0; k < K; ++k) e.c[k] = witt_from_int(ipow(2, d[k][i]), shapes[k]);
            D[i][i] = e;
        }
        auto P = mat_identity(n, zero, one), Q = P;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j) {
                P[i][j] = rand_elem();
                Q[j][i] = rand_elem();
            }
        auto sig = [](const WittProduct& x) { return x.frobenius(1); };
        auto M = presented(mat_mul(mat_mul(P, D, zero), Q, zero), n, zero, one);
        auto Phi = mat_mul(unitriangular_inverse(mat_map(Q, sig), zero, one), Q, zero);
        auto C = mat_mul(mat_map(P, sig), unitriangular_inverse(P, zero, one), zero);
        auto nf = phi_stable_normal_form(M, Phi, C, n);
        for (std::size_t j = 0; j <= n; ++j) {
            // Fitt_j is generated per component by p^(sum of the n - j smallest exponents)
            std::vector<int> expect(K);
            for (std::size_t k = 0; k < K; ++k) {
                int s = 0;
                for (std::size_t i = 0; i + j < n; ++i) s += d[k][i];
                expect[k] = std::min(s, plen);
            }
            t.check(nf[j].exponents == expect, "exponents of Fitt_" + std::to_string(j));
            // generators p^m [e_m] with e_m = indicator of {k : exponent <= m}
            bool form = true;
            for (auto& gen : nf[j].generators)
                for (std::size_t k = 0; k < K; ++k) form = form && gen.idempotent[k] == (expect[k] <= gen.n);
            std::set<int> levels;
            for (std::size_t k = 0; k < K; ++k)
                if (expect[k] < plen) levels.insert(expect[k]);
            form = form && nf[j].generators.size() == levels.size();
            t.check(form, "generator form of Fitt_" + std::to_string(j));
        }
    }
    return {t.pass(), t.summary("20 engineered presentations"), 0, 0};
}

// ------------------------------------------------------------------ registry

struct Entry {
    int id;
    const char* name;
    std::function<Outcome(Rng&)> run;
};

inline const std::vector<Entry>& registry() {
    static const std::vector<Entry> r{
        {1, "witt-ghost", witt_ghost},
        {2, "homogeneity", homogeneity},
        {3, "gauss-norm", gauss_norm_laws},
        {4, "primitive-division", primitive_division},
        {5, "theta", theta_map},
        {6, "slope-calculus", slope_calculus},
        {7, "hom-vanishing", hom_vanishing},
        {8, "typeA-cohomology", torsion_cohomology},
        {9, "contraction", contraction},
        {10, "decompletion", decompletion},
        {11, "preparation", preparation},
        {12, "projector", projector},
        {13, "fitting-normal-form", fitting_normal_form},
    };
    return r;
}

// Runs one suite with its own generator; errors count as failures and the time
// bound, when present, is part of the verdict.
inline Outcome run(const Entry& e, u64 seed) {
    Rng g(seed + u64(e.id));
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = e.run(g);
    } catch (const error& err) {
        o.pass = false;
        o.detail = std::string("error ") + err.what();
    }
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.limit > 0 && o.seconds > o.limit) {
        o.pass = false;
        o.detail += "; exceeded the time bound";
    }
    return o;
}

} // namespace perfprism::suite
