#pragma once
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "matrix.hpp"
#include "perfseries.hpp"
#include "zq.hpp"

namespace perfprism {

inline int default_law_cap() { return 8; }

// Carry polynomials for Teichmuller sums:
//   [x] + [y] = [x + y] + sum_{k>=1} p^k [P_k(x, y)],
//   P_k(x, y) = sum_i coeff[k][i] x^(i/p^k) y^((p^k - i)/p^k).
struct UniversalLaw {
    int p = 2, L = 1;
    std::vector<std::vector<int>> coeff;  // coeff[k] for 1 <= k < L; coeff[0] is unused

    const std::vector<int>& poly(int k) const { return coeff.at(k); }
};

namespace detail {

// homogeneous bivariate polynomials of fixed degree, coefficient of x^i y^(d-i)
using hpoly = std::vector<i64>;

inline hpoly hmul(const hpoly& f, const hpoly& g, i64 mod) {
    hpoly r(f.size() + g.size() - 1, 0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!f[i]) continue;
        for (std::size_t j = 0; j < g.size(); ++j)
            if (g[j]) r[i + j] = modnorm(r[i + j] + mulmod(f[i], g[j], mod), mod);
    }
    return r;
}

inline hpoly hpow(hpoly b, u64 e, i64 mod) {
    hpoly r{1};
    while (e) {
        if (e & 1) r = hmul(r, b, mod);
        e >>= 1;
        if (e) b = hmul(b, b, mod);
    }
    return r;
}

inline std::string law_cache_path(int p, int L) {
    const char* dir = std::getenv("PERFPRISM_CACHE");
    if (!dir || !*dir) return {};
    return std::string(dir) + "/laws_p" + std::to_string(p) + "_L" + std::to_string(L) + ".txt";
}

inline bool load_law(UniversalLaw& law) {
    std::string path = law_cache_path(law.p, law.L);
    if (path.empty()) return false;
    std::ifstream in(path);
    if (!in) return false;
    int p, L;
    if (!(in >> p >> L) || p != law.p || L != law.L) return false;
    law.coeff.assign(L, {});
    law.coeff[0] = {1};
    for (int k = 1; k < L; ++k) {
        i64 d = ipow(p, k);
        law.coeff[k].resize(d + 1);
        for (auto& c : law.coeff[k])
            if (!(in >> c)) return false;
    }
    return true;
}

inline void store_law(const UniversalLaw& law) {
    std::string path = law_cache_path(law.p, law.L);
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) return;
    out << law.p << ' ' << law.L << '\n';
    for (int k = 1; k < law.L; ++k) {
        for (int c : law.coeff[k]) out << c << ' ';
        out << '\n';
    }
}

inline UniversalLaw compute_law(int p, int L) {
    UniversalLaw law;
    law.p = p;
    law.L = L;
    law.coeff.assign(L, {});
    law.coeff[0] = {1};
    // s_m mod p, as integer polynomials with coefficients in [0, p)
    std::vector<hpoly> s;
    s.push_back(hpoly{1, 1});  // s_0 = x + y  (coefficient of x^0 y^1 then x^1 y^0)
    for (int n = 1; n < L; ++n) {
        i64 mod = ipow(p, n + 1);
        i64 deg = ipow(p, n);
        hpoly num(deg + 1, 0);
        num[0] = 1;
        num[deg] = 1;
        for (int m = 0; m < n; ++m) {
            hpoly t = hpow(s[m], u64(ipow(p, n - m)), mod);
            i64 pm = ipow(p, m);
            for (std::size_t i = 0; i < t.size(); ++i) num[i] = modnorm(num[i] - mulmod(pm, t[i], mod), mod);
        }
        hpoly sn(deg + 1);
        i64 pn = ipow(p, n);
        for (i64 i = 0; i <= deg; ++i) {
            require(num[i] % pn == 0, errc::invalid_argument, "ghost expansion not integral");
            sn[i] = (num[i] / pn) % p;
        }
        s.push_back(sn);
        law.coeff[n].assign(deg + 1, 0);
        for (i64 i = 0; i <= deg; ++i) law.coeff[n][i] = int(sn[i]);
    }
    return law;
}

} // namespace detail

// Laws are computed once per (p, L) and shared; with PERFPRISM_CACHE set they
// are also persisted as plain text.
inline const UniversalLaw& universal_laws(int p, int L) {
    require(L >= 1, errc::invalid_argument, "law length must be positive");
    require(L <= default_law_cap(), errc::invalid_argument, "law length beyond the configured cap");
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::unique_ptr<UniversalLaw>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{p, L}];
    if (!slot) {
        auto law = std::make_unique<UniversalLaw>();
        law->p = p;
        law->L = L;
        if (!detail::load_law(*law)) {
            *law = detail::compute_law(p, L);
            detail::store_law(*law);
        }
        slot = std::move(law);
    }
    return *slot;
}

// Truncated Witt vector sum_n p^n [y_n] over F_q((t^{1/p^inf})).
//
// Precision: digits live at n in [n_lo, n_lo + plen) and digit n is known
// modulo t^(lo + H / p^(n - n_lo)).  Because the carry polynomials are
// homogeneous of degree one these bounds describe an ideal, so arithmetic on
// the stored representatives is exact in the quotient.
class WittTrunc {
public:
    WittTrunc() = default;

    WittTrunc(const Fq& F, int n_lo, int plen, Rat lo, Rat H, Rat scale = Rat(1), int K = 0)
        : F_(&F), scale_(scale), n_lo_(n_lo), plen_(plen), lo_(lo), H_(H), K_(K) {
        require(plen >= 1, errc::invalid_argument, "plen must be positive");
        require(H > Rat(0), errc::window_mismatch, "empty digit window");
    }

    static WittTrunc zero_like(const WittTrunc& x) { return WittTrunc(*x.F_, x.n_lo_, x.plen_, x.lo_, x.H_, x.scale_, x.K_); }

    const Fq& field() const { return *F_; }
    int p() const { return F_->p; }
    int n_lo() const { return n_lo_; }
    int plen() const { return plen_; }
    int top() const { return n_lo_ + plen_; }
    Rat lo() const { return lo_; }
    Rat H() const { return H_; }
    Rat scale() const { return scale_; }
    int K() const { return K_; }
    const std::map<int, PerfSeries>& digits() const { return digits_; }
    bool is_zero() const { return digits_.empty(); }

    Rat digit_hi(int n) const { return lo_ + H_ / Rat(ipow(F_->p, n - n_lo_)); }

    PerfSeries empty_digit(int n) const { return PerfSeries(*F_, K_, lo_, digit_hi(n), scale_); }

    // digit n (zero series when absent)
    PerfSeries digit(int n) const {
        auto it = digits_.find(n);
        if (it != digits_.end()) return it->second;
        return empty_digit(n);
    }

    void set_digit(int n, const PerfSeries& y) {
        require(n >= n_lo_, errc::window_mismatch, "digit below n_lo");
        if (n >= top()) return;
        require(y.field().p == F_->p && &y.field() == F_ && y.scale() == scale_, errc::window_mismatch,
                "digit over a different ring");
        for (auto& t : y.terms())
            require(y.exponent(t.first) >= lo_, errc::window_mismatch, "digit term below the lower bound");
        PerfSeries d = PerfSeries(*F_, y.K(), lo_, digit_hi(n), scale_);
        for (auto& t : y.terms()) {
            Rat e = y.exponent(t.first);
            if (e < d.hi()) d.set(e, t.second);
        }
        d = d.with_K(d.minimal_K());
        if (d.is_zero()) digits_.erase(n);
        else digits_[n] = d;
    }

    // Representative choice: claim more digits or a wider window.  The stored
    // digits are kept as they are, which fixes one lift of the class.
    WittTrunc with_precision(int plen, Rat H) const {
        WittTrunc r(*F_, n_lo_, plen, lo_, H, scale_, K_);
        for (auto& [n, y] : digits_) r.set_digit(n, y);
        return r;
    }

    WittTrunc with_n_lo(int n_lo) const {
        // lower n_lo keeping top fixed; precision transforms as p^a J_H in J_{H p^a}
        require(n_lo <= n_lo_, errc::window_mismatch, "can only lower n_lo");
        int a = n_lo_ - n_lo;
        WittTrunc r(*F_, n_lo, plen_ + a, lo_, H_ * Rat(ipow(F_->p, a)), scale_, K_);
        for (auto& [n, y] : digits_) r.set_digit(n, y);
        return r;
    }

    WittTrunc with_lo(Rat lo) const {
        require(lo <= lo_, errc::window_mismatch, "can only lower lo");
        WittTrunc r(*F_, n_lo_, plen_, lo, H_ + (lo_ - lo), scale_, K_);
        for (auto& [n, y] : digits_) r.set_digit(n, y);
        return r;
    }

    WittTrunc truncated(int plen, Rat H) const {
        require(plen <= plen_ && H <= H_, errc::window_mismatch, "truncation must not gain precision");
        return with_precision(plen, H);
    }

    bool same_ring(const WittTrunc& o) const { return F_ == o.F_ && scale_ == o.scale_; }

    friend bool operator==(const WittTrunc& x, const WittTrunc& y) {
        if (!x.same_ring(y) || x.n_lo_ != y.n_lo_ || x.plen_ != y.plen_ || x.lo_ != y.lo_ || x.H_ != y.H_) return false;
        if (x.digits_.size() != y.digits_.size()) return false;
        for (auto& [n, d] : x.digits_) {
            auto it = y.digits_.find(n);
            if (it == y.digits_.end() || !d.same_terms(it->second)) return false;
        }
        return true;
    }

    // equality in the coarser of the two quotients
    bool equal_at_precision(const WittTrunc& o) const {
        if (!same_ring(o)) return false;
        auto [a, b] = common_form(*this, o);
        int t = std::min(a.top(), b.top());
        Rat H = std::min(a.H_, b.H_);
        return a.truncated(t - a.n_lo_, H) == b.truncated(t - b.n_lo_, H);
    }

    // Helpers shared by the arithmetic: bring two elements to a common (n_lo, lo).
    static std::pair<WittTrunc, WittTrunc> common_form(const WittTrunc& x, const WittTrunc& y) {
        int n_lo = std::min(x.n_lo_, y.n_lo_);
        Rat lo = std::min(x.lo_, y.lo_);
        WittTrunc a = x.with_n_lo(n_lo).with_lo(lo), b = y.with_n_lo(n_lo).with_lo(lo);
        return {a, b};
    }

    // sum of a list of Teichmuller terms (level, series) into the given shape
    static WittTrunc teich_sum(WittTrunc shape, std::vector<std::vector<PerfSeries>> levels);

    friend WittTrunc operator+(const WittTrunc& x, const WittTrunc& y) {
        require(x.same_ring(y), errc::window_mismatch, "Witt vectors over different rings");
        auto [a, b] = common_form(x, y);
        int top = std::min(a.top(), b.top());
        WittTrunc shape(*a.F_, a.n_lo_, top - a.n_lo_, a.lo_, std::min(a.H_, b.H_), a.scale_, std::max(a.K_, b.K_));
        std::vector<std::vector<PerfSeries>> lv(shape.plen_);
        for (auto* w : {&a, &b})
            for (auto& [n, d] : w->digits_)
                if (n < top) lv[n - shape.n_lo_].push_back(d);
        return teich_sum(shape, std::move(lv));
    }

    WittTrunc operator-() const {
        if (F_->p != 2) {
            WittTrunc r = *this;
            for (auto& [n, d] : r.digits_) d = -d;
            return r;
        }
        // -1 = sum_n 2^n [1] in W(F_2)
        std::vector<std::vector<PerfSeries>> lv(plen_);
        for (auto& [n, d] : digits_)
            for (int m = n; m < top(); ++m) lv[m - n_lo_].push_back(d);
        return teich_sum(zero_like(*this), std::move(lv));
    }

    friend WittTrunc operator-(const WittTrunc& x, const WittTrunc& y) { return x + (-y); }

    friend WittTrunc operator*(const WittTrunc& x, const WittTrunc& y) {
        require(x.same_ring(y), errc::window_mismatch, "Witt vectors over different rings");
        int n_lo = x.n_lo_ + y.n_lo_;
        int plen = std::min(x.plen_, y.plen_);
        WittTrunc shape(*x.F_, n_lo, plen, x.lo_ + y.lo_, std::min(x.H_, y.H_), x.scale_, std::max(x.K_, y.K_));
        std::vector<std::vector<PerfSeries>> lv(plen);
        for (auto& [n, a] : x.digits_)
            for (auto& [m, b] : y.digits_) {
                int l = n + m;
                if (l >= shape.top()) continue;
                PerfSeries prod = PerfSeries::mul_trunc(a, b, shape.lo_, shape.digit_hi(l));
                if (!prod.is_zero()) lv[l - n_lo].push_back(prod);
            }
        return teich_sum(shape, std::move(lv));
    }

    // multiplication by p: digits move up one level, the top digit is dropped
    WittTrunc times_p() const {
        WittTrunc r(*F_, n_lo_, plen_, lo_, H_ * Rat(F_->p), scale_, K_);
        for (auto& [n, d] : digits_) r.set_digit(n + 1, d);
        return r;
    }

    // exact division by p of an element whose digit n_lo vanishes; one digit
    // and a factor p of the window are lost
    WittTrunc div_p() const {
        require(!digits_.count(n_lo_), errc::invalid_argument, "division by p of a non-multiple");
        require(plen_ >= 2, errc::precision_exhausted, "no digits left after division by p");
        WittTrunc r(*F_, n_lo_, plen_ - 1, lo_, H_ / Rat(F_->p), scale_, K_);
        for (auto& [n, d] : digits_) r.set_digit(n - 1, d);
        return r;
    }

    WittTrunc frobenius(int k) const {
        Rat f = rat_pow(F_->p, k);
        WittTrunc r(*F_, n_lo_, plen_, lo_ * f, H_ * f, scale_, std::max(0, K_ - k));
        for (auto& [n, d] : digits_) r.set_digit(n, d.frobenius(k));
        return r;
    }

    // Inverse of an element with n_lo = 0, lo = 0 and a unit 0-th digit.
    WittTrunc inv_unit() const;

    // Witt coordinates a_n = y_n^(p^n) (only for n_lo = 0)
    std::vector<PerfSeries> witt_coordinates() const {
        std::vector<PerfSeries> out;
        for (int n = n_lo_; n < top(); ++n) out.push_back(digit(n).frobenius(n - n_lo_));
        return out;
    }

private:
    const Fq* F_ = nullptr;
    Rat scale_{1};
    int n_lo_ = 0, plen_ = 1;
    Rat lo_{0}, H_{1};
    int K_ = 0;
    std::map<int, PerfSeries> digits_;
};

namespace detail {

// P_k(a, b) truncated below hi, using homogeneity to shift both arguments to
// nonnegative exponents first.
inline PerfSeries carry_poly(const UniversalLaw& law, int k, const PerfSeries& a, const PerfSeries& b, Rat lo, Rat hi) {
    const Fq& F = a.field();
    Rat sh = lo;
    Rat bound = hi - sh;
    // a and b are known modulo t^(hi_n); their p^k-th roots are then known
    // exactly up to the (smaller) bound of level n + k
    PerfSeries ar = a.shifted(-sh).frobenius(-k).with_window(Rat(0), bound);
    PerfSeries br = b.shifted(-sh).frobenius(-k).with_window(Rat(0), bound);
    i64 d = ipow(F.p, k);
    const auto& c = law.poly(k);
    std::vector<PerfSeries> apow{PerfSeries::constant(F, 1, ar.K(), bound, a.scale())};
    std::vector<PerfSeries> bpow{PerfSeries::constant(F, 1, br.K(), bound, a.scale())};
    for (i64 i = 1; i <= d; ++i) {
        apow.push_back(PerfSeries::mul_trunc(apow.back(), ar, Rat(0), bound));
        bpow.push_back(PerfSeries::mul_trunc(bpow.back(), br, Rat(0), bound));
    }
    PerfSeries acc = PerfSeries::zero(F, ar.K(), Rat(0), bound, a.scale());
    for (i64 i = 0; i <= d; ++i) {
        if (!c[i]) continue;
        PerfSeries t = PerfSeries::mul_trunc(apow[i], bpow[d - i], Rat(0), bound).scaled(F.from_int(c[i]));
        acc = PerfSeries::add_trunc(acc, t, Rat(0), bound);
    }
    return acc.shifted(sh).with_window(lo, hi);
}

} // namespace detail

inline WittTrunc WittTrunc::teich_sum(WittTrunc shape, std::vector<std::vector<PerfSeries>> levels) {
    const UniversalLaw* law = shape.plen_ > 1 ? &universal_laws(shape.F_->p, shape.plen_) : nullptr;
    for (int m = 0; m < shape.plen_; ++m) {
        int n = shape.n_lo_ + m;
        Rat hi = shape.digit_hi(n);
        auto& lv = levels[m];
        if (lv.empty()) continue;
        PerfSeries acc = lv[0].with_window(shape.lo_, std::min(hi, lv[0].hi())).with_window(shape.lo_, hi);
        for (std::size_t j = 1; j < lv.size(); ++j) {
            PerfSeries b = lv[j].with_window(shape.lo_, std::min(hi, lv[j].hi())).with_window(shape.lo_, hi);
            if (b.is_zero()) continue;
            if (!acc.is_zero())
                for (int k = 1; m + k < shape.plen_; ++k) {
                    PerfSeries c = detail::carry_poly(*law, k, acc, b, shape.lo_, shape.digit_hi(n + k));
                    if (!c.is_zero()) levels[m + k].push_back(c);
                }
            acc = PerfSeries::add_trunc(acc, b, shape.lo_, hi);
        }
        shape.set_digit(n, acc);
    }
    return shape;
}

inline WittTrunc teichmuller(const PerfSeries& x, int plen) {
    WittTrunc w(x.field(), 0, plen, x.lo(), x.hi() - x.lo(), x.scale(), x.K());
    w.set_digit(0, x);
    return w;
}

// Witt vector of shape `like` with constant digits given by an element of Z_q/p^L
// (digits are the Teichmuller expansion).
inline WittTrunc witt_from_zq(const ZqElem& z, const WittTrunc& like) {
    const ZqRing& R = *z.R;
    require(R.a == like.field().a && R.p == like.p(), errc::window_mismatch, "coefficient field mismatch");
    require(R.L >= like.top(), errc::precision_exhausted, "p-adic precision below the digit window");
    WittTrunc w = WittTrunc::zero_like(like);
    auto r = z.c;
    for (int n = 0; n < std::min(R.L, like.top()); ++n) {
        fq_t d = R.reduce(r);
        require(n >= like.n_lo() || !d, errc::window_mismatch, "constant has digits below n_lo");
        if (d)
            w.set_digit(n, PerfSeries::monomial(like.field(), d, Rat(0), like.K(), like.lo(), like.digit_hi(n), like.scale()));
        r = R.sub(r, R.teichmuller(d));
        if (n + 1 < R.L) r = R.div_pk(r, 1);
    }
    return w;
}

inline WittTrunc witt_one(const WittTrunc& like) {
    WittTrunc w = WittTrunc::zero_like(like);
    if (like.n_lo() <= 0)
        w.set_digit(0, PerfSeries::monomial(like.field(), 1, Rat(0), like.K(), like.lo(), like.digit_hi(0), like.scale()));
    return w;
}

inline WittTrunc witt_from_int(i64 n, const WittTrunc& like) {
    const ZqRing& R = ZqRing::get(like.p(), like.field().a, std::max(1, like.top()));
    return witt_from_zq(ZqElem::from_int(R, n), like);
}

inline WittTrunc WittTrunc::inv_unit() const {
    require(n_lo_ == 0 && lo_ == Rat(0), errc::not_a_unit, "inverse needs an integral element");
    PerfSeries d0 = digit(0);
    require(!d0.is_zero() && d0.min_exp() == Rat(0), errc::not_a_unit, "0-th digit is not a unit of the plus ring");
    WittTrunc y = teichmuller(d0.inv().with_window(Rat(0), H_), plen_).with_precision(plen_, H_);
    WittTrunc one = witt_one(*this);
    WittTrunc two = one + one;
    for (int it = 0; it < 64; ++it) {
        WittTrunc ny = y * (two - (*this) * y);
        if (ny == y) return y;
        y = ny;
    }
    fail(errc::no_convergence, "Witt inverse did not stabilise");
}

// Ghost components of a Witt vector with constant digits.  Component n is
// returned in Z_q/p^(n+1) (reduced representative), which is the ring where
// the ghost map of Teichmuller-lifted coordinates is a homomorphism.
inline std::vector<ZqElem> ghost(const WittTrunc& x) {
    require(x.n_lo() >= 0, errc::invalid_argument, "ghost map needs nonnegative digit indices");
    const Fq& F = x.field();
    for (auto& [n, d] : x.digits())
        for (auto& t : d.terms())
            require(t.first == 0, errc::non_constant_coefficients, "ghost map needs constant digits");
    int L = x.top();
    const ZqRing& R = ZqRing::get(F.p, F.a, L);
    std::vector<ZqElem> w;
    for (int n = 0; n < L; ++n) {
        auto acc = R.zero();
        for (int m = 0; m <= n; ++m) {
            fq_t z = x.digit(m).coeff(Rat(0));
            if (!z) continue;
            fq_t am = F.frob(z, m);  // Witt coordinate a_m = z_m^(p^m)
            auto lift = R.lift(am);
            auto t = R.pow(lift, u64(ipow(F.p, n - m)));
            acc = R.add(acc, R.mul_pk(t, m));
        }
        acc = R.truncate(acc, n + 1);
        w.push_back(ZqElem(R, acc));
    }
    return w;
}

// Newton iteration W <- 3W^2 - 2W^3 towards an idempotent.
template <class T>
struct ProjectorResult {
    Matrix<T> W;
    std::vector<int> defect_log;  // valuation of W^2 - W per step
};

template <class T, class ValFn>
ProjectorResult<T> projector_lift(const Matrix<T>& V, int target, ValFn val, int max_steps = 64) {
    T zero = V[0][0] - V[0][0];
    auto defect = [&](const Matrix<T>& W) {
        Matrix<T> D = mat_sub(mat_mul(W, W, zero), W);
        int v = target;
        for (auto& row : D)
            for (auto& e : row) v = std::min(v, val(e));
        return v;
    };
    ProjectorResult<T> res;
    res.W = V;
    int d = defect(V);
    res.defect_log.push_back(d);
    for (int step = 0; step < max_steps && d < target; ++step) {
        Matrix<T> W2 = mat_mul(res.W, res.W, zero);
        Matrix<T> W3 = mat_mul(W2, res.W, zero);
        Matrix<T> N = W2;
        for (std::size_t i = 0; i < N.size(); ++i)
            for (std::size_t j = 0; j < N.size(); ++j) N[i][j] = W2[i][j] + W2[i][j] + W2[i][j] - W3[i][j] - W3[i][j];
        int nd = defect(N);
        require(nd > d, errc::no_convergence, "projector defect did not decrease");
        res.W = N;
        d = nd;
        res.defect_log.push_back(d);
    }
    require(d >= target, errc::no_convergence, "projector iteration exceeded the step bound");
    return res;
}

} // namespace perfprism
