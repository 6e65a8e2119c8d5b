#pragma once
#include <optional>
#include <vector>

#include "witt.hpp"

namespace perfprism {

// ---------------------------------------------------------------- Gauss norms

// log_p of lambda(alpha^r)(x) = max_n p^-n alpha(x_n)^r, i.e. max_n (-n - r v(x_n)).
struct GaussNorm {
    bool zero = false;       // every stored digit vanishes
    Rat log{0};              // valid when !zero
    int argmax = 0;          // digit index attaining the maximum
    bool may_hide = false;   // unseen terms beyond the windows could reach the maximum
};

inline GaussNorm gauss_norm(const WittTrunc& x, Rat r) {
    require(r > Rat(0), errc::invalid_argument, "Gauss norm radius must be positive");
    GaussNorm g;
    g.zero = true;
    for (auto& [n, d] : x.digits()) {
        Rat l = Rat(-n) - r * d.tnorm().v;
        if (g.zero || l > g.log) {
            g.log = l;
            g.argmax = n;
        }
        g.zero = false;
    }
    // bound for the unknown tail of every digit and for the digits above top
    auto beats = [&](Rat l) { return g.zero || l >= g.log; };
    for (int n = x.n_lo(); n < x.top(); ++n)
        if (beats(Rat(-n) - r * x.digit_hi(n) * x.scale())) g.may_hide = true;
    if (beats(Rat(-x.top()) - r * x.lo() * x.scale())) g.may_hide = true;
    return g;
}

// ------------------------------------------------------- primitive elements

struct PrimitiveWitness {
    bool primitive = false;
    Rat v0, v1;            // valuations of digits 0 and 1 (window bound when zero)
    bool z0_zero = false, z1_zero = false;
};

inline PrimitiveWitness is_primitive(const WittTrunc& z) {
    require(z.n_lo() <= 0 && z.top() >= 2, errc::insufficient_precision, "digits 0 and 1 must be inside the window");
    require(z.lo() >= Rat(0), errc::insufficient_precision, "primitive elements live in the integral ring");
    PrimitiveWitness w;
    auto d0 = z.digit(0).tnorm(), d1 = z.digit(1).tnorm();
    w.v0 = d0.v;
    w.v1 = d1.v;
    w.z0_zero = d0.zero_to_precision;
    w.z1_zero = d1.zero_to_precision;
    w.primitive = w.v0 > Rat(0) && !w.z1_zero && w.v1 == Rat(0);
    return w;
}

// p - [t] with the given shape data (the standard primitive element of the tilt pair)
inline WittTrunc standard_primitive(const Fq& F, int plen, Rat H) {
    WittTrunc like(F, 0, plen, Rat(0), H);
    WittTrunc t = WittTrunc::zero_like(like);
    t.set_digit(0, PerfSeries::monomial(F, 1, Rat(1), 0, Rat(0), like.digit_hi(0)));
    return witt_one(like).times_p().with_precision(plen, H) - t;
}

// --------------------------------------------------------- primitive division

struct DivisionMode {
    enum kind_t { a, b } kind = a;
    Rat eps{0};  // mode b: valuation of epsilon, i.e. epsilon = p^(-eps)
    int m = 0;   // mode b: number of Frobenius-root factors
};

struct DivisionResult {
    WittTrunc w, y;
    int iterations = 0;
    bool certified = false;   // the remainder condition holds for every lift, not only the representative
    std::vector<Rat> defect;  // -log_p of the sup norm of the digits n >= 1 of y, per iteration
};

namespace detail {

// certified lower bound for the valuation of digit n (window bound when zero)
inline Rat digit_val(const WittTrunc& y, int n) { return y.digit(n).tnorm().v; }

inline bool digit_zero(const WittTrunc& y, int n) { return y.digit(n).is_zero(); }

inline Rat tail_val(const WittTrunc& y) {
    Rat v = y.digit_hi(y.top() - 1) * y.scale();
    for (int n = 1; n < y.top(); ++n) v = std::min(v, digit_val(y, n));
    return v;
}

// Remainder conditions on the stored representative (absent digits are zero).
// With `all_lifts` the windows of absent digits must also reach the bound, so
// that the condition holds for every lift of the truncation.
inline bool digit_meets(const WittTrunc& y, int n, Rat bound, bool all_lifts) {
    if (digit_zero(y, n)) return !all_lifts || y.digit_hi(n) * y.scale() >= bound;
    return digit_val(y, n) >= bound;
}

inline bool condition_a(const WittTrunc& y, bool all_lifts = false) {
    bool y0_zero = digit_zero(y, 0);
    for (int n = 1; n < y.top(); ++n) {
        if (y0_zero ? !digit_zero(y, n) || all_lifts : !digit_meets(y, n, digit_val(y, 0), all_lifts)) return false;
    }
    return true;
}

inline bool condition_b(const WittTrunc& y, const WittTrunc& z, const DivisionMode& mode, bool all_lifts = false) {
    if (!condition_a(y, all_lifts)) return false;
    Rat v0 = digit_zero(y, 0) ? mode.eps : digit_val(y, 0);
    Rat root_sum(0);
    for (int j = 1; j <= mode.m; ++j) root_sum += rat_pow(y.p(), -j);
    Rat b1 = std::min(mode.eps, z.digit(0).tnorm().v * root_sum + v0);
    Rat bn = std::min(mode.eps, v0);
    for (int n = 1; n < y.top(); ++n)
        if (!digit_meets(y, n, n == 1 ? b1 : bn, all_lifts)) return false;
    return true;
}

} // namespace detail

// x = w z + y with y reduced.  Each step replaces the higher digits of y by
// their product with [z_0] u^-1, u = (z - [z_0]) / p, so they contract by the
// norm of z_0; w is kept as an exact representative and y is recomputed.
inline DivisionResult primitive_divide(const WittTrunc& x, const WittTrunc& z, DivisionMode mode = {},
                                       int max_iter = 256) {
    require(x.same_ring(z), errc::window_mismatch, "dividend and divisor over different rings");
    auto wit = is_primitive(z);
    require(wit.primitive, errc::not_primitive, "divisor is not primitive");
    require(z.n_lo() == 0 && z.lo() == Rat(0), errc::not_primitive, "divisor must be integral");
    require(x.n_lo() >= 0, errc::window_mismatch, "dividend must have nonnegative digit indices");
    WittTrunc X = x.with_n_lo(0);

    WittTrunc z0 = WittTrunc::zero_like(z);
    z0.set_digit(0, z.digit(0));
    // the quotient is taken on the represented truncation of z, so its stored
    // digits are treated as exact; this keeps u^-1 at the full window
    WittTrunc u = (z - z0).div_p().with_precision(z.plen(), z.H());
    WittTrunc uinv = u.inv_unit();

    DivisionResult res;
    res.w = WittTrunc::zero_like(X).with_lo(std::min(X.lo(), Rat(0)));
    res.y = X;
    auto done = [&](const WittTrunc& y) {
        return mode.kind == DivisionMode::a ? detail::condition_a(y) : detail::condition_b(y, z, mode);
    };
    for (int it = 0;; ++it) {
        res.defect.push_back(detail::tail_val(res.y));
        if (done(res.y)) {
            res.iterations = it;
            res.certified = mode.kind == DivisionMode::a ? detail::condition_a(res.y, true)
                                                         : detail::condition_b(res.y, z, mode, true);
            return res;
        }
        require(it < max_iter, errc::precision_exhausted, "division did not certify the remainder condition");
        WittTrunc y0 = WittTrunc::zero_like(res.y);
        y0.set_digit(0, res.y.digit(0));
        WittTrunc s = (res.y - y0).div_p().with_precision(res.y.plen(), res.y.H());
        WittTrunc step = uinv * s;
        WittTrunc w = res.w + step.with_precision(res.w.plen(), res.w.H());
        res.w = w.with_precision(X.plen(), X.H());
        WittTrunc ny = X - res.w * z;
        require(!(ny == res.y), errc::precision_exhausted, "division stalled before the remainder condition was certified");
        res.y = ny;
    }
}

// ------------------------------------------------------------ untilt ring

// (Z_q / p^M)[u] / (u^N - p) with N = p^K, i.e. the ring of integers of
// Q_q(p^(1/N)) modulo p^M.  Elements are stored as coefficient vectors of
// u^0 .. u^(N-1) together with a u-adic precision.
class UntiltRing {
public:
    int p, a, M, K;
    i64 N;
    const ZqRing* Z;

    static const UntiltRing& get(int p, int a, int M, int K) {
        static std::mutex mu;
        static std::map<std::tuple<int, int, int, int>, std::unique_ptr<UntiltRing>> cache;
        std::lock_guard<std::mutex> lock(mu);
        auto& slot = cache[{p, a, M, K}];
        if (!slot) slot.reset(new UntiltRing(p, a, M, K));
        return *slot;
    }

    i64 full_precision() const { return i64(M) * N; }

private:
    UntiltRing(int p_, int a_, int M_, int K_) : p(p_), a(a_), M(M_), K(K_), N(ipow(p_, K_)), Z(&ZqRing::get(p_, a_, M_)) {
        require(M_ >= 1 && K_ >= 0, errc::invalid_argument, "bad untilt ring parameters");
        require(N <= 4096, errc::denominator_overflow, "untilt ring degree too large");
    }
};

class UntiltElem {
public:
    using vec = ZqRing::vec;

    UntiltElem() = default;
    explicit UntiltElem(const UntiltRing& R) : R_(&R), c_(R.N, R.Z->zero()), prec_(R.full_precision()) {}

    static UntiltElem from_zq(const UntiltRing& R, const vec& c) {
        UntiltElem x(R);
        x.c_[0] = c;
        return x;
    }
    static UntiltElem one(const UntiltRing& R) { return from_zq(R, R.Z->one()); }

    // c * u^j for any j >= 0 (u^N = p)
    static UntiltElem monomial(const UntiltRing& R, const vec& c, i64 j) {
        UntiltElem x(R);
        i64 q = j / R.N, i = j % R.N;
        if (q < R.M) x.c_[i] = R.Z->mul_pk(c, int(q));
        return x;
    }

    const UntiltRing& ring() const { return *R_; }
    const std::vector<vec>& coeffs() const { return c_; }
    i64 precision() const { return prec_; }  // known modulo u^precision

    UntiltElem with_precision(i64 prec) const {
        UntiltElem r = *this;
        r.prec_ = std::min(prec_, std::max<i64>(0, prec));
        r.normalize();
        return r;
    }

    // u-adic valuation (precision when zero)
    i64 valuation() const {
        i64 v = prec_;
        for (i64 i = 0; i < R_->N; ++i)
            if (!R_->Z->is_zero(c_[i])) v = std::min(v, i64(R_->Z->val(c_[i])) * R_->N + i);
        return v;
    }

    bool is_zero() const { return valuation() >= prec_; }

    friend UntiltElem operator+(const UntiltElem& x, const UntiltElem& y) {
        UntiltElem r(*x.R_);
        for (i64 i = 0; i < x.R_->N; ++i) r.c_[i] = x.R_->Z->add(x.c_[i], y.c_[i]);
        r.prec_ = std::min(x.prec_, y.prec_);
        r.normalize();
        return r;
    }
    UntiltElem operator-() const {
        UntiltElem r = *this;
        for (auto& c : r.c_) c = R_->Z->neg(c);
        return r;
    }
    friend UntiltElem operator-(const UntiltElem& x, const UntiltElem& y) { return x + (-y); }

    friend UntiltElem operator*(const UntiltElem& x, const UntiltElem& y) {
        const UntiltRing& R = *x.R_;
        const ZqRing& Z = *R.Z;
        std::vector<vec> full(2 * R.N, Z.zero());
        for (i64 i = 0; i < R.N; ++i) {
            if (Z.is_zero(x.c_[i])) continue;
            for (i64 j = 0; j < R.N; ++j)
                if (!Z.is_zero(y.c_[j])) full[i + j] = Z.add(full[i + j], Z.mul(x.c_[i], y.c_[j]));
        }
        UntiltElem r(R);
        for (i64 i = 0; i < R.N; ++i) r.c_[i] = Z.add(full[i], Z.mul_pk(full[i + R.N], 1));
        r.prec_ = std::min({x.prec_ + y.valuation(), y.prec_ + x.valuation(), R.full_precision()});
        r.normalize();
        return r;
    }

    UntiltElem pow(u64 e) const {
        UntiltElem r = one(*R_), b = *this;
        while (e) {
            if (e & 1) r = r * b;
            e >>= 1;
            if (e) b = b * b;
        }
        return r;
    }

    // exact division by u^k of an element of valuation >= k; precision drops by k
    UntiltElem div_u(i64 k) const {
        require(k >= 0 && valuation() >= k, errc::invalid_argument, "division by a power of u that does not divide");
        const UntiltRing& R = *R_;
        UntiltElem r(R);
        for (i64 i = 0; i < R.N; ++i) {
            i64 j = modnorm(i - k, R.N);
            i64 q = (j + k - i) / R.N;
            r.c_[j] = q >= R.M ? R.Z->zero() : R.Z->div_pk(c_[i], int(q));
        }
        r.prec_ = prec_ - k;
        r.normalize();
        return r;
    }

    bool is_unit() const { return prec_ > 0 && R_->Z->reduce(c_[0]) != 0; }

    UntiltElem inv() const {
        require(is_unit(), errc::not_a_unit, "untilt element is not a unit");
        UntiltElem y = from_zq(*R_, R_->Z->inv(c_[0]));
        UntiltElem two = from_zq(*R_, R_->Z->from_int(2));
        for (i64 done = 1; done < prec_; done *= 2) y = y * (two - *this * y);
        y.prec_ = prec_;
        y.normalize();
        return y;
    }

    // reduction modulo u, an element of F_q
    fq_t reduce_mod_u() const { return R_->Z->reduce(c_[0]); }

    // equality in the coarser quotient
    bool equal_at_precision(const UntiltElem& o) const {
        require(R_ == o.R_, errc::window_mismatch, "untilt elements over different rings");
        i64 pr = std::min(prec_, o.prec_);
        return with_precision(pr).c_ == o.with_precision(pr).c_;
    }

    friend bool operator==(const UntiltElem& x, const UntiltElem& y) { return x.prec_ == y.prec_ && x.c_ == y.c_; }

private:
    const UntiltRing* R_ = nullptr;
    std::vector<vec> c_;
    i64 prec_ = 0;

    // canonical representative: coefficient i reduced modulo p^ceil((prec - i)/N)
    void normalize() {
        const ZqRing& Z = *R_->Z;
        for (i64 i = 0; i < R_->N; ++i) {
            i64 need = prec_ > i ? (prec_ - i + R_->N - 1) / R_->N : 0;
            if (need < R_->M) c_[i] = Z.truncate(c_[i], int(need));
        }
    }
};

// ------------------------------------------------------------------- theta

namespace detail {

// naive lift of y^(p^-k) truncated below exponent 1 (mod p the rest vanishes)
inline UntiltElem naive_root_lift(const UntiltRing& R, const PerfSeries& y, int k) {
    const Fq& F = y.field();
    UntiltElem r(R);
    const ZqRing& Z = *R.Z;
    for (auto& [num, c] : y.terms()) {
        Rat e = y.exponent(num) / Rat(ipow(F.p, k));  // exponent of the root
        if (e >= Rat(1)) break;
        Rat j = e * Rat(R.N);
        require(j.denominator() == 1, errc::guard_insufficient, "root exponent not visible in the untilt ring");
        r = r + UntiltElem::monomial(R, Z.teichmuller(F.frob(c, -k)), j.numerator());
    }
    return r;
}

} // namespace detail

struct ThetaOptions {
    int M = 0;       // p-adic precision of the target; 0 means the number of digits
    int guard = -1;  // root depth; -1 means M - 1
    int K = -1;      // untilt ring exponent; -1 means input denominators + guard + 1
};

namespace detail {

inline int series_K(const PerfSeries& s) { return s.minimal_K(); }

inline UntiltElem theta_at(const WittTrunc& x, const UntiltRing& R, int guard) {
    UntiltElem acc(R);
    for (auto& [n, y] : x.digits()) {
        if (n >= R.M) continue;
        int depth = std::max(0, guard - n);
        require(series_K(y) + depth <= R.K, errc::guard_insufficient, "denominators exceed the untilt ring");
        UntiltElem t = naive_root_lift(R, y, depth).pow(u64(ipow(R.p, depth)));
        // p^n [y] is certified modulo p^(guard + 1) after the root trick
        t = t.with_precision(i64(std::min(R.M, guard + 1 - n)) * R.N);
        acc = acc + UntiltElem::monomial(R, R.Z->one(), i64(n) * R.N) * t;
    }
    return acc;
}

} // namespace detail

// theta: W(F_q[[t^(1/p^inf)]]) -> Z_q[p^(1/p^K)] / p^M, [t] -> p.
inline UntiltElem theta(const WittTrunc& x, ThetaOptions opt = {}) {
    require(x.n_lo() >= 0 && x.lo() >= Rat(0), errc::window_mismatch, "theta needs an integral Witt vector");
    require(x.scale() == Rat(1), errc::window_mismatch, "theta is defined on the standard tilt");
    int M = opt.M > 0 ? opt.M : x.top();
    int guard = opt.guard >= 0 ? opt.guard : M - 1;
    int needK = 0;
    for (auto& [n, y] : x.digits())
        if (n < M) needK = std::max(needK, detail::series_K(y) + std::max(0, guard + 1 - n));
    int K = opt.K >= 0 ? opt.K : needK;
    require(K >= needK, errc::guard_insufficient, "untilt ring too small for the guard roots");
    const UntiltRing& R = UntiltRing::get(x.p(), x.field().a, M, K);

    // precision inherited from the truncation of x: the ideal p^n [t^(lo + H/p^(n-n_lo))]
    i64 prec = R.full_precision();
    prec = std::min(prec, i64(x.top()) * R.N);
    for (int n = x.n_lo(); n < x.top(); ++n) {
        Rat v = Rat(n) + x.digit_hi(n);
        prec = std::min(prec, ceil_rat(v * Rat(R.N)));
    }
    prec = std::min(prec, i64(std::min(M, guard + 1)) * R.N);

    UntiltElem r0 = detail::theta_at(x, R, guard).with_precision(prec);
    UntiltElem r1 = detail::theta_at(x, R, guard + 1).with_precision(prec);
    require(r0 == r1, errc::guard_insufficient, "consecutive guard levels disagree");
    return r0;
}

// -------------------------------------------------------------- sharp map

struct SharpRoundtrip {
    std::vector<UntiltElem> sequence;  // theta([x^(p^-j)]) for j = 0..depth
    PerfSeries reconstructed;          // x modulo t^min(hi, p^depth)
    bool compatible = true;            // y_(j+1)^p = y_j at precision for all j
};

inline SharpRoundtrip sharp_roundtrip(const PerfSeries& x, int depth, int M = 2) {
    require(depth >= 0, errc::invalid_argument, "negative depth");
    require(x.lo() >= Rat(0) && x.scale() == Rat(1), errc::window_mismatch, "sharp map needs the integral standard tilt");
    const Fq& F = x.field();
    int guard = M - 1;
    int K = x.minimal_K() + depth + guard + 1;
    SharpRoundtrip out;
    for (int j = 0; j <= depth; ++j) {
        PerfSeries root = x.frobenius(-j);
        WittTrunc w = teichmuller(root, M);
        out.sequence.push_back(theta(w, ThetaOptions{M, guard, K}));
    }
    for (int j = 0; j < depth; ++j)
        if (!out.sequence[j + 1].pow(u64(F.p)).equal_at_precision(out.sequence[j])) out.compatible = false;
    require(out.compatible, errc::guard_insufficient, "sharp sequence is not p-power compatible");

    // read y_depth modulo p as a series in t^(1/N), then raise to the p^depth power
    const UntiltElem& yk = out.sequence.back();
    const UntiltRing& R = yk.ring();
    Rat bound = std::min(x.hi(), Rat(ipow(F.p, depth)));
    PerfSeries root(F, K, Rat(0), Rat(1));
    for (i64 i = 0; i < std::min<i64>(R.N, yk.precision()); ++i) {
        fq_t c = R.Z->reduce(yk.coeffs()[i]);
        if (c) root.set(Rat(i, R.N), c);
    }
    PerfSeries rec = root.frobenius(depth);
    out.reconstructed = rec.with_window(Rat(0), std::min(bound, rec.hi()));
    return out;
}

} // namespace perfprism
