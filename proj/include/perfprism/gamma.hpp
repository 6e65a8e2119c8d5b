#pragma once
#include <map>
#include <optional>
#include <vector>

#include "matrix.hpp"
#include "perfseries.hpp"

namespace perfprism {

// Cyclotomic coordinate: series in pi = eps - 1 with v(pi) = p/(p-1).
inline Rat cyclotomic_scale(int p) { return Rat(p, p - 1); }

// (1 + x)^c for an integer c known modulo p^cprec (cprec < 0: exact), as the
// product over base-p digits of (1 + x^(p^i))^(c_i).  x must have positive
// valuation; the result is known modulo the window of x.
inline PerfSeries binomial_exp(const PerfSeries& x, i64 c, int cprec = -1) {
    const int p = x.p();
    require(x.is_zero() || x.min_exp() > Rat(0), errc::invalid_argument, "binomial exponential needs v(x) > 0");
    require(x.lo() >= Rat(0), errc::invalid_argument, "binomial exponential needs an integral window");
    PerfSeries one = PerfSeries::constant(x.field(), 1, x.K(), x.hi(), x.scale());
    if (x.is_zero()) return one;
    // digits needed until x^(p^M) vanishes in the window
    int M = 0;
    for (Rat e = x.min_exp(); e < x.hi(); e *= Rat(p)) ++M;
    require(cprec < 0 || cprec >= M, errc::precision_exhausted, "exponent known to too few p-adic digits");
    i64 mod = ipow(p, M);
    i64 r = modnorm(c, mod);
    PerfSeries out = one, xp = x;
    for (int i = 0; i < M; ++i) {
        int digit = int(r % p);
        r /= p;
        PerfSeries f = one + xp;
        for (int k = 0; k < digit; ++k) out = out * f;
        if (i + 1 < M) xp = xp.frobenius(1).with_window(x.lo(), x.hi());
        out = out.with_window(Rat(0), x.hi());
    }
    return out;
}

// (1 + pi)^c modulo pi^H for c in Z[1/p]; (1+pi)^(m/p^j) = Frob^-j((1+pi)^m).
inline PerfSeries eps_pow(const Fq& F, Rat c, Rat H) {
    int j = pdenom_exp(c, F.p);
    require(j >= 0, errc::denominator_overflow, "exponent is not a p-power fraction");
    Rat big = H * rat_pow(F.p, j);
    PerfSeries pi = PerfSeries::monomial(F, 1, Rat(1), 0, Rat(0), big, cyclotomic_scale(F.p));
    PerfSeries y = binomial_exp(pi, c.numerator());
    return j ? y.frobenius(-j) : y;
}

// valuation of a series in log_p units, nullopt when zero at precision
inline std::optional<Rat> series_val(const PerfSeries& x) {
    auto t = x.tnorm();
    if (t.zero_to_precision) return std::nullopt;
    return t.v;
}

// ------------------------------------------------------------ cyclotomic action

namespace detail {

// sum of c * g^n over the terms of x, with g^n computed incrementally
inline PerfSeries substitute_power(const PerfSeries& x, const PerfSeries& g) {
    PerfSeries out = PerfSeries::zero(x.field(), x.K(), x.lo(), x.hi(), x.scale());
    if (x.is_zero()) return out;
    PerfSeries ginv;
    bool have_inv = false;
    auto power = [&](i64 n) {
        if (n >= 0) return g.pow(u64(n));
        if (!have_inv) {
            ginv = g.inv();
            have_inv = true;
        }
        return ginv.pow(u64(-n));
    };
    i64 prev = x.terms().front().first;
    PerfSeries cur = power(prev);
    for (auto& [n, c] : x.terms()) {
        if (n != prev) {
            cur = cur * (n - prev >= 0 ? g.pow(u64(n - prev)) : power(n - prev));
            prev = n;
        }
        out = PerfSeries::add_trunc(out, cur.scaled(c), x.lo(), x.hi());
    }
    return out;
}

} // namespace detail

// Action of chi in Z_p^x on F_q((pi))^perf: pi -> (1+pi)^chi - 1, coefficients fixed.
inline PerfSeries gamma_cyclotomic(i64 chi, const PerfSeries& x, int cprec = -1) {
    const Fq& F = x.field();
    require(chi % F.p != 0, errc::invalid_argument, "cyclotomic character must be a unit");
    require(x.scale() == cyclotomic_scale(F.p), errc::window_mismatch, "not a cyclotomic series");
    if (x.is_zero()) return x;
    int K = x.K();
    Rat span = x.hi() - std::min(Rat(0), x.min_exp());
    Rat big = span * rat_pow(F.p, K);
    PerfSeries pi = PerfSeries::monomial(F, 1, Rat(1), 0, Rat(0), big + Rat(1), x.scale());
    PerfSeries G = binomial_exp(pi, chi, cprec) - PerfSeries::constant(F, 1, 0, big + Rat(1), x.scale());
    PerfSeries g = K ? G.frobenius(-K) : G;  // image of pi^(1/p^K)
    return detail::substitute_power(x.with_K(K), g);
}

// --------------------------------------------------------------- toric series

// Finite sum of c_e t^e over exponent vectors e in Z[1/p]^d with cyclotomic
// coefficients known modulo pi^H.  |t_i| = 1.
class ToricSeries {
public:
    using Exp = std::vector<Rat>;

    ToricSeries() = default;
    ToricSeries(const Fq& F, int d, Rat H) : F_(&F), d_(d), H_(H) {
        require(d >= 1, errc::invalid_argument, "toric dimension must be positive");
        require(H > Rat(0), errc::window_mismatch, "empty coefficient window");
    }

    static ToricSeries monomial(const Fq& F, int d, Rat H, const Exp& e, const PerfSeries& c) {
        ToricSeries x(F, d, H);
        x.add_term(e, c);
        return x;
    }
    static ToricSeries constant(const Fq& F, int d, Rat H, fq_t c = 1) {
        return monomial(F, d, H, Exp(std::size_t(d), Rat(0)), PerfSeries::constant(F, c, 0, H, cyclotomic_scale(F.p)));
    }
    ToricSeries zero_like() const { return ToricSeries(*F_, d_, H_); }

    const Fq& field() const { return *F_; }
    int p() const { return F_->p; }
    int dim() const { return d_; }
    Rat H() const { return H_; }
    const std::map<Exp, PerfSeries>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    // coefficient series with window [0, H)
    PerfSeries coeff_zero(int K = 0) const { return PerfSeries::zero(*F_, K, Rat(0), H_, cyclotomic_scale(F_->p)); }

    PerfSeries coeff(const Exp& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? coeff_zero() : it->second;
    }

    void add_term(const Exp& e, const PerfSeries& c) {
        require(e.size() == std::size_t(d_), errc::invalid_argument, "exponent vector has the wrong length");
        for (auto& x : e) require(pdenom_exp(x, F_->p) >= 0, errc::denominator_overflow, "exponent is not a p-power fraction");
        require(c.scale() == cyclotomic_scale(F_->p), errc::window_mismatch, "coefficient is not a cyclotomic series");
        require(c.is_zero() || c.min_exp() >= Rat(0), errc::window_mismatch, "coefficients must be integral");
        require(c.hi() >= H_, errc::window_mismatch, "coefficient known to less than the series window");
        PerfSeries cc = c.with_window(Rat(0), H_);
        auto it = terms_.find(e);
        PerfSeries sum = it == terms_.end() ? cc : PerfSeries::add_trunc(it->second, cc, Rat(0), H_);
        if (sum.is_zero()) {
            if (it != terms_.end()) terms_.erase(it);
            return;
        }
        terms_[e] = sum;
    }

    friend ToricSeries operator+(const ToricSeries& a, const ToricSeries& b) {
        a.check(b);
        ToricSeries r = a.rewindow(std::min(a.H_, b.H_));
        for (auto& [e, c] : b.terms_) r.add_term(e, c);
        return r;
    }
    ToricSeries operator-() const {
        ToricSeries r = *this;
        for (auto& [e, c] : r.terms_) c = -c;
        return r;
    }
    friend ToricSeries operator-(const ToricSeries& a, const ToricSeries& b) { return a + (-b); }

    friend ToricSeries operator*(const ToricSeries& a, const ToricSeries& b) {
        a.check(b);
        ToricSeries r(*a.F_, a.d_, std::min(a.H_, b.H_));
        for (auto& [ea, ca] : a.terms_)
            for (auto& [eb, cb] : b.terms_) {
                Exp e(ea.size());
                for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
                r.add_term(e, PerfSeries::mul_trunc(ca, cb, Rat(0), r.H_));
            }
        return r;
    }

    ToricSeries times(const PerfSeries& c) const {
        ToricSeries r = zero_like();
        for (auto& [e, x] : terms_) r.add_term(e, PerfSeries::mul_trunc(x, c, Rat(0), H_));
        return r;
    }

    ToricSeries rewindow(Rat H) const {
        ToricSeries r(*F_, d_, H);
        for (auto& [e, c] : terms_) r.add_term(e, c);
        return r;
    }

    // min valuation of the coefficients (log_p units), nullopt when zero
    std::optional<Rat> valuation() const {
        std::optional<Rat> v;
        for (auto& [e, c] : terms_) {
            auto cv = series_val(c);
            if (cv && (!v || *cv < *v)) v = cv;
        }
        return v;
    }

    // x -> x^(p^k): exponents times p^k, coefficients raised, window scaled
    ToricSeries frobenius(int k) const {
        ToricSeries r(*F_, d_, H_ * rat_pow(F_->p, k));
        for (auto& [e, c] : terms_) {
            Exp f(e);
            for (auto& x : f) x *= rat_pow(F_->p, k);
            r.add_term(f, c.frobenius(k));
        }
        return r;
    }

    bool equal_at_precision(const ToricSeries& o) const {
        Rat H = std::min(H_, o.H_);
        return (rewindow(H) - o.rewindow(H)).is_zero();
    }

private:
    const Fq* F_ = nullptr;
    int d_ = 1;
    Rat H_{1};
    std::map<Exp, PerfSeries> terms_;

    void check(const ToricSeries& o) const {
        require(F_ == o.F_ && d_ == o.d_, errc::window_mismatch, "toric series over different rings");
    }
};

inline Rat pairing(const std::vector<i64>& g, const ToricSeries::Exp& e) {
    Rat s = 0;
    for (std::size_t i = 0; i < e.size(); ++i) s += Rat(g[i]) * e[i];
    return s;
}

// Action of g in Z^d (a word in the commuting generators): t^e -> (1+pi)^<g,e> t^e.
inline ToricSeries gamma_toric(const std::vector<i64>& g, const ToricSeries& x) {
    require(g.size() == std::size_t(x.dim()), errc::invalid_argument, "group element has the wrong length");
    ToricSeries r = x.zero_like();
    std::map<Rat, PerfSeries> cache;
    for (auto& [e, c] : x.terms()) {
        Rat s = pairing(g, e);
        auto it = cache.find(s);
        if (it == cache.end()) it = cache.emplace(s, eps_pow(x.field(), s, x.H())).first;
        r.add_term(e, PerfSeries::mul_trunc(c, it->second, Rat(0), x.H()));
    }
    return r;
}

inline bool exponent_in_level(const ToricSeries::Exp& e, int p, int level) {
    for (auto& x : e)
        if (pdenom_exp(x, p) > level) return false;
    return true;
}

// Gamma-equivariant splitting at level n: keep exponents in p^-n Z^d.
inline ToricSeries toric_split(const ToricSeries& x, int level = 0) {
    ToricSeries r = x.zero_like();
    for (auto& [e, c] : x.terms())
        if (exponent_in_level(e, x.p(), level)) r.add_term(e, c);
    return r;
}

// x = sum over e in {0..p-1}^d of t^(e/p^(n+1)) x_e with x_e at level n.
inline std::map<std::vector<int>, ToricSeries> summand_decompose(const ToricSeries& x, int level = 0) {
    const int p = x.p();
    std::map<std::vector<int>, ToricSeries> out;
    Rat den = rat_pow(p, level + 1);
    for (auto& [e, c] : x.terms()) {
        require(exponent_in_level(e, p, level + 1), errc::denominator_overflow, "exponent needs more than one extra p");
        std::vector<int> cls(e.size());
        ToricSeries::Exp rest(e.size());
        for (std::size_t i = 0; i < e.size(); ++i) {
            Rat scaled = e[i] * den;  // integer
            i64 n = scaled.numerator();
            cls[i] = int(modnorm(n, p));
            rest[i] = e[i] - Rat(cls[i]) / den;
        }
        auto it = out.find(cls);
        if (it == out.end()) it = out.emplace(cls, x.zero_like()).first;
        it->second.add_term(rest, c);
    }
    return out;
}

inline ToricSeries summand_assemble(const std::map<std::vector<int>, ToricSeries>& parts, const ToricSeries& like, int level = 0) {
    ToricSeries r = like.zero_like();
    Rat den = rat_pow(like.p(), level + 1);
    for (auto& [cls, y] : parts) {
        ToricSeries::Exp e(cls.size());
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = Rat(cls[i]) / den;
        r = r + ToricSeries::monomial(like.field(), like.dim(), like.H(), e, PerfSeries::constant(like.field(), 1, 0, like.H(), cyclotomic_scale(like.p()))) * y;
    }
    return r;
}

// Cyclotomic summands: x with exponents in p^-1 Z written as
// sum over i in 0..p-1 of (1+pi)^(i/p) x_i with x_i integral-exponent series.
inline std::vector<PerfSeries> cyclotomic_decompose(const PerfSeries& x) {
    const Fq& F = x.field();
    const int p = F.p;
    require(x.representable(1), errc::denominator_overflow, "exponent needs more than one extra p");
    PerfSeries x1 = x.with_K(1);
    // x = sum s^i y_i with s = pi^(1/p)
    std::vector<PerfSeries> y(std::size_t(p), PerfSeries::zero(F, 0, x.lo(), x.hi(), x.scale()));
    for (auto& [n, c] : x1.terms()) {
        i64 i = modnorm(n, p);
        y[std::size_t(i)].set(Rat(n - i, p), c);
    }
    // s^i = sum_j binom(i, j) (-1)^(i-j) (1+s)^j
    std::vector<PerfSeries> out(std::size_t(p), PerfSeries::zero(F, 0, x.lo(), x.hi(), x.scale()));
    for (int i = 0; i < p; ++i) {
        for (int j = i; j >= 0; --j) {
            i64 bij = 1;
            for (int k = 0; k < j; ++k) bij = bij * (i - k) / (k + 1);
            i64 coef = ((i - j) % 2 ? -bij : bij);
            out[std::size_t(j)] = out[std::size_t(j)] + y[std::size_t(i)].scaled(F.from_int(coef));
        }
    }
    return out;
}

inline PerfSeries cyclotomic_assemble(const std::vector<PerfSeries>& parts) {
    require(!parts.empty(), errc::invalid_argument, "no summands");
    const Fq& F = parts[0].field();
    Rat hi = parts[0].hi();
    for (auto& x : parts) hi = std::min(hi, x.hi());
    PerfSeries out = PerfSeries::zero(F, 1, parts[0].lo(), hi, parts[0].scale());
    for (std::size_t i = 0; i < parts.size(); ++i) {
        PerfSeries b = eps_pow(F, Rat(i64(i), F.p), hi);
        out = out + PerfSeries::mul_trunc(b, parts[i], parts[0].lo(), hi);
    }
    return out;
}

// ----------------------------------------------------------- tower descriptors

struct TowerDescriptor {
    enum class Kind { cyclotomic, toric } kind = Kind::cyclotomic;
    int p = 2;
    int a = 1;     // residue field F_(p^a)
    int d = 1;     // toric dimension
    Rat H{16};     // coefficient window in pi-units

    const Fq& field() const { return Fq::get(p, a); }
};

// Operator valuation of (gamma^(p^n) - 1) measured on the generator of a summand,
// in log_p units.  Cyclotomic: gamma is chi (default 1 + p^2), summand i in 0..p-1
// is generated by (1+pi)^(i/p) (i = 0: by pi).  Toric: summand e in {0..p-1}^d is
// generated by t^(e/p) (e = 0: by t_j); the minimum over the generators acting
// nontrivially is returned.
inline Rat contraction_norm(const TowerDescriptor& T, int n, const std::vector<int>& summand, i64 chi = 0) {
    const Fq& F = T.field();
    const int p = T.p;
    Rat scale = cyclotomic_scale(p);
    auto measure = [&](const PerfSeries& y, const PerfSeries& gy) -> Rat {
        auto vy = series_val(y);
        auto vd = series_val(gy - y);
        require(vy.has_value() && vd.has_value(), errc::window_too_narrow, "window too narrow to see the contraction");
        return *vd - *vy;
    };
    if (T.kind == TowerDescriptor::Kind::cyclotomic) {
        require(summand.size() == 1 && summand[0] >= 0 && summand[0] < p, errc::invalid_argument, "cyclotomic summand index in 0..p-1");
        if (chi == 0) chi = 1 + p * p;
        int M = 1;
        for (Rat e = 1; e < T.H * Rat(p); e *= Rat(p)) ++M;
        M += n + 1;
        i64 mod = ipow(p, M);
        i64 c = powmod(modnorm(chi, mod), ipow(p, n), mod);
        PerfSeries y = summand[0] == 0 ? PerfSeries::monomial(F, 1, Rat(1), 0, Rat(0), T.H, scale)
                                       : eps_pow(F, Rat(summand[0], p), T.H);
        return measure(y, gamma_cyclotomic(c, y, M));
    }
    require(summand.size() == std::size_t(T.d), errc::invalid_argument, "toric summand has the wrong length");
    std::optional<Rat> best;
    for (int j = 0; j < T.d; ++j) {
        ToricSeries::Exp e(std::size_t(T.d), Rat(0));
        bool zero = true;
        for (int i = 0; i < T.d; ++i) {
            e[std::size_t(i)] = Rat(summand[std::size_t(i)], p);
            zero = zero && summand[std::size_t(i)] == 0;
        }
        if (zero) e[std::size_t(j)] = Rat(1);
        if (e[std::size_t(j)] == Rat(0)) continue;
        std::vector<i64> g(std::size_t(T.d), 0);
        g[std::size_t(j)] = ipow(p, n);
        auto y = ToricSeries::monomial(F, T.d, T.H, e, PerfSeries::constant(F, 1, 0, T.H, scale));
        auto gy = gamma_toric(g, y);
        Rat v = measure(y.coeff(e), gy.coeff(e));
        if (!best || v < *best) best = v;
    }
    require(best.has_value(), errc::invalid_argument, "summand generator is fixed by every generator");
    return *best;
}

// ------------------------------------------------------------ Gamma matrices

using ToricMatrix = Matrix<ToricSeries>;

inline ToricMatrix toric_identity(const Fq& F, int d, Rat H, std::size_t n) {
    ToricSeries z(F, d, H), o = ToricSeries::constant(F, d, H);
    return mat_identity(n, z, o);
}

inline ToricMatrix gamma_matrix_act(const std::vector<i64>& g, const ToricMatrix& A) {
    return mat_map(A, [&](const ToricSeries& x) { return gamma_toric(g, x); });
}

inline std::optional<Rat> matrix_val(const ToricMatrix& A) {
    std::optional<Rat> v;
    for (auto& row : A)
        for (auto& x : row) {
            auto xv = x.valuation();
            if (xv && (!v || *xv < *v)) v = xv;
        }
    return v;
}

// Inverse of 1 + X for v(X) > 0 by the Neumann series.
inline ToricMatrix neumann_inverse(const ToricMatrix& U) {
    const ToricSeries& e = U[0][0];
    std::size_t n = U.size();
    ToricMatrix I = toric_identity(e.field(), e.dim(), e.H(), n);
    ToricMatrix X = mat_sub(U, I);
    auto vx = matrix_val(X);
    if (!vx) return I;
    require(*vx > Rat(0), errc::not_a_unit, "Neumann inverse needs U = 1 + X with v(X) > 0");
    ToricMatrix out = I, term = I, mX = mat_map(X, [](const ToricSeries& x) { return -x; });
    while (true) {
        term = mat_mul(term, mX, e.zero_like());
        if (!matrix_val(term)) break;
        out = mat_add(out, term);
    }
    return out;
}

// A Gamma-module datum: one matrix per commuting toric generator, gamma_i(v) = G_i gamma_i(v).
struct GammaMatrix {
    TowerDescriptor tower;
    std::vector<ToricMatrix> generators;
};

// Cocycle condition for commuting generators: G_i gamma_i(G_j) = G_j gamma_j(G_i).
inline bool cocycle_consistent(const GammaMatrix& G) {
    std::size_t d = G.generators.size();
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            std::vector<i64> gi(d, 0), gj(d, 0);
            gi[i] = 1;
            gj[j] = 1;
            const auto& Gi = G.generators[i];
            const auto& Gj = G.generators[j];
            auto z = Gi[0][0].zero_like();
            auto lhs = mat_mul(Gi, gamma_matrix_act(gi, Gj), z);
            auto rhs = mat_mul(Gj, gamma_matrix_act(gj, Gi), z);
            for (std::size_t r = 0; r < lhs.size(); ++r)
                for (std::size_t c = 0; c < lhs.size(); ++c)
                    if (!lhs[r][c].equal_at_precision(rhs[r][c])) return false;
        }
    return true;
}

// Matrix of gamma^m from the matrix G of gamma (one generator): G gamma(G) ... gamma^(m-1)(G).
inline ToricMatrix gamma_power_matrix(const ToricMatrix& G, i64 m) {
    require(m >= 1, errc::invalid_argument, "power must be positive");
    const ToricSeries& e = G[0][0];
    require(e.dim() == 1, errc::invalid_argument, "one toric generator expected");
    ToricMatrix out = toric_identity(e.field(), e.dim(), e.H(), G.size());
    for (i64 k = 0; k < m; ++k) out = mat_mul(out, gamma_matrix_act({k}, G), e.zero_like());
    return out;
}

// -------------------------------------------------------------- decompletion

struct DecompletionStep {
    Rat defect;      // v(G - split(G)) before the step
    Rat v_N;         // v(G - 1)
    Rat v_c;         // largest v(eps^f - 1) over the exponents of the defect
    Rat predicted;   // lower bound for the next defect
    std::optional<Rat> next;  // measured next defect (nullopt: zero at precision)
};

struct DecompletionResult {
    ToricMatrix U, G0;
    std::vector<DecompletionStep> log;
};

// Find U with U^-1 G gamma(U) at the given level (exponents in p^-level Z) for a
// one-generator toric Gamma-matrix G = 1 + N.  Each step solves
// (gamma - 1) X = -E exactly on every summand t^f of the defect E and replaces G
// by (1+X)^-1 G gamma(1+X).  Second order terms give
//     v(E') >= v(E) + min(v(N), v(E) - v_c) - v_c,
// which is checked at every step.
inline DecompletionResult decomplete(const ToricMatrix& G, int level = 0, int max_iter = 64) {
    require(!G.empty() && G.size() == G[0].size(), errc::invalid_argument, "Gamma matrix must be square");
    const ToricSeries& e0 = G[0][0];
    require(e0.dim() == 1, errc::invalid_argument, "decompletion is implemented for one toric variable");
    const Fq& F = e0.field();
    const Rat H = e0.H();
    std::size_t n = G.size();
    ToricMatrix I = toric_identity(F, 1, H, n);
    DecompletionResult res;
    res.U = I;
    res.G0 = G;
    ToricSeries zero = e0.zero_like();
    for (int it = 0; it <= max_iter; ++it) {
        ToricMatrix E = mat_map(res.G0, [&](const ToricSeries& x) { return x - toric_split(x, level); });
        auto vE = matrix_val(E);
        if (!vE) {
            if (!res.log.empty()) res.log.back().next = std::nullopt;
            return res;
        }
        if (!res.log.empty()) {
            res.log.back().next = vE;
            require(*vE >= res.log.back().predicted, errc::not_contracting, "defect did not shrink as predicted");
        }
        require(it < max_iter, errc::max_iter_exceeded, "decompletion iteration limit reached");
        auto vN = matrix_val(mat_sub(res.G0, I));
        DecompletionStep step;
        step.defect = *vE;
        step.v_N = *vN;
        // contraction constant over the exponents of the defect
        Rat vc = 0;
        std::map<Rat, PerfSeries> inv_cache;
        PerfSeries one = PerfSeries::constant(F, 1, 0, H + Rat(1), cyclotomic_scale(F.p));
        for (auto& row : E)
            for (auto& x : row)
                for (auto& [f, coef] : x.terms()) {
                    if (inv_cache.count(f[0])) continue;
                    PerfSeries D = eps_pow(F, f[0], H + Rat(1)) - one;
                    vc = std::max(vc, *series_val(D));
                    inv_cache.emplace(f[0], D.inv());
                }
        step.v_c = vc;
        step.predicted = *vE + std::min(*vN, *vE - vc) - vc;
        require(step.predicted > *vE, errc::not_contracting, "defect too large for this level; raise the level");
        // solve (gamma - 1) X = -E per summand
        ToricMatrix X(n, std::vector<ToricSeries>(n, zero));
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c)
                for (auto& [f, coef] : E[r][c].terms())
                    X[r][c].add_term(f, -PerfSeries::mul_trunc(coef, inv_cache.at(f[0]), Rat(0), H));
        res.log.push_back(step);
        ToricMatrix U = mat_add(I, X);
        res.G0 = mat_mul(mat_mul(neumann_inverse(U), res.G0, zero), gamma_matrix_act({1}, U), zero);
        res.U = mat_mul(res.U, U, zero);
    }
    fail(errc::max_iter_exceeded, "decompletion iteration limit reached");
}

} // namespace perfprism
