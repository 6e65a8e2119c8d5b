#pragma once
#include <algorithm>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "fq.hpp"

namespace perfprism {

// Default bound on the denominator exponent: exponents are stored as numerators
// over p^K, so K is capped to keep p^K (times a modest exponent) inside 64 bits.
inline int default_kmax(int p) {
    int k = 0;
    i128 v = 1;
    while (v * p <= (i128(1) << 40)) { v *= p; ++k; }
    return k;
}

// Truncated element of F_q((t^{1/p^inf})).  Exponents are stored as integer
// numerators over p^K; the element is known modulo t^hi and its support lies in
// [lo, hi).  Windows are in exponent units; the valuation of t^e is e * scale.
class PerfSeries {
public:
    using term = std::pair<i64, fq_t>;

    PerfSeries() = default;

    PerfSeries(const Fq& F, int K, Rat lo, Rat hi, Rat scale = Rat(1))
        : F_(&F), scale_(scale), K_(K), lo_(lo), hi_(hi) {
        require(hi > lo, errc::window_mismatch, "empty window");
        require(K >= 0 && K <= default_kmax(F.p), errc::denominator_overflow, "denominator exponent out of range");
    }

    static PerfSeries zero(const Fq& F, int K, Rat lo, Rat hi, Rat scale = Rat(1)) { return PerfSeries(F, K, lo, hi, scale); }

    static PerfSeries monomial(const Fq& F, fq_t c, Rat e, int K, Rat lo, Rat hi, Rat scale = Rat(1)) {
        PerfSeries s(F, K, lo, hi, scale);
        s.set(e, c);
        return s;
    }

    static PerfSeries constant(const Fq& F, fq_t c, int K, Rat hi, Rat scale = Rat(1)) {
        return monomial(F, c, Rat(0), K, Rat(0), hi, scale);
    }

    // same ring and window, no terms
    PerfSeries empty_like() const { return PerfSeries(*F_, K_, lo_, hi_, scale_); }

    const Fq& field() const { return *F_; }
    int p() const { return F_->p; }
    int K() const { return K_; }
    Rat lo() const { return lo_; }
    Rat hi() const { return hi_; }
    Rat scale() const { return scale_; }
    i64 denom() const { return ipow(F_->p, K_); }
    const std::vector<term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    Rat exponent(i64 num) const { return Rat(num, denom()); }

    // set coefficient of t^e; the denominator exponent grows if e needs it
    void set(Rat e, fq_t c) {
        int k = pdenom_exp(e, F_->p);
        require(k >= 0, errc::denominator_overflow, "exponent is not a p-power fraction");
        if (k > K_) {
            if (c == 0) return;
            *this = with_K(k);
        }
        i64 n = to_num(e);
        if (e < lo_ || e >= hi_) {
            require(e >= lo_, errc::window_mismatch, "term below the window");
            return;  // above the window: invisible at this precision
        }
        auto it = std::lower_bound(terms_.begin(), terms_.end(), term{n, 0},
                                   [](const term& x, const term& y) { return x.first < y.first; });
        if (it != terms_.end() && it->first == n) {
            if (c == 0) terms_.erase(it);
            else it->second = c;
        } else if (c != 0) {
            terms_.insert(it, {n, c});
        }
    }

    fq_t coeff(Rat e) const {
        if (pdenom_exp(e, F_->p) < 0 || pdenom_exp(e, F_->p) > K_) return 0;
        i64 n = to_num(e);
        auto it = std::lower_bound(terms_.begin(), terms_.end(), term{n, 0},
                                   [](const term& x, const term& y) { return x.first < y.first; });
        return (it != terms_.end() && it->first == n) ? it->second : 0;
    }

    // minimal exponent of the support, or hi when zero to precision
    Rat min_exp() const { return terms_.empty() ? hi_ : exponent(terms_.front().first); }
    fq_t leading_coeff() const { return terms_.empty() ? 0 : terms_.front().second; }

    // valuation in the ring's normalization; zero reports hi*scale with the flag set
    struct valuation {
        Rat v;
        bool zero_to_precision;
    };
    valuation tnorm() const { return {min_exp() * scale_, terms_.empty()}; }

    bool same_ring(const PerfSeries& o) const { return F_ == o.F_ && scale_ == o.scale_; }

    void check_ring(const PerfSeries& o) const {
        require(F_ && o.F_, errc::window_mismatch, "uninitialised series");
        require(same_ring(o), errc::window_mismatch, "series over different rings");
    }

    // rewrite with a larger denominator exponent (exact)
    PerfSeries with_K(int K) const {
        if (K == K_) return *this;
        require(K >= K_ || representable(K), errc::denominator_overflow, "cannot lower denominator exponent");
        PerfSeries r(*F_, K, lo_, hi_, scale_);
        for (auto& [n, c] : terms_) r.terms_.push_back({rescale(n, K_, K), c});
        return r;
    }

    bool representable(int K) const {
        if (K >= K_) return true;
        i64 d = ipow(F_->p, K_ - K);
        for (auto& t : terms_)
            if (t.first % d) return false;
        return true;
    }

    // smallest K that represents the support (at least 0)
    int minimal_K() const {
        int k = K_;
        while (k > 0 && representable(k - 1)) --k;
        return k;
    }

    PerfSeries with_window(Rat lo, Rat hi) const {
        PerfSeries r(*F_, K_, lo, hi, scale_);
        for (auto& t : terms_) {
            Rat e = exponent(t.first);
            require(e >= lo, errc::window_mismatch, "term below new window");
            if (e < hi) r.terms_.push_back(t);
        }
        return r;
    }

    PerfSeries truncated(Rat hi) const { return with_window(lo_, std::min(hi, hi_)); }

    friend PerfSeries operator+(const PerfSeries& x, const PerfSeries& y) { return combine(x, y, false); }
    friend PerfSeries operator-(const PerfSeries& x, const PerfSeries& y) { return combine(x, y, true); }

    PerfSeries operator-() const {
        PerfSeries r = *this;
        for (auto& t : r.terms_) t.second = F_->neg(t.second);
        return r;
    }

    friend PerfSeries operator*(const PerfSeries& x, const PerfSeries& y) {
        x.check_ring(y);
        Rat hi = std::min(x.min_exp() + y.hi_, y.min_exp() + x.hi_);
        return mul_trunc(x, y, x.lo_ + y.lo_, hi);
    }

    PerfSeries scaled(fq_t c) const {
        PerfSeries r = empty_like();
        if (c == 0) return r;
        for (auto& t : terms_) r.terms_.push_back({t.first, F_->mul(t.second, c)});
        return r;
    }

    // multiply by t^e (exact, window shifted)
    PerfSeries shifted(Rat e) const {
        int k = std::max(K_, pdenom_exp(e, F_->p));
        require(pdenom_exp(e, F_->p) >= 0, errc::denominator_overflow, "shift is not a p-power fraction");
        PerfSeries base = with_K(k);
        PerfSeries r(*F_, k, lo_ + e, hi_ + e, scale_);
        i64 s = base.to_num(e);
        for (auto& t : base.terms_) r.terms_.push_back({t.first + s, t.second});
        return r;
    }

    // Product of representatives keeping only exponents < hi, with declared lower bound lo.
    static PerfSeries mul_trunc(const PerfSeries& x, const PerfSeries& y, Rat lo, Rat hi) {
        x.check_ring(y);
        int K = std::max(x.K_, y.K_);
        PerfSeries r(*x.F_, K, lo, hi, x.scale_);
        PerfSeries xa = x.with_K(K), ya = y.with_K(K);
        i64 bound = ceil_rat(hi * Rat(ipow(x.p(), K)));
        const Fq& F = *x.F_;
        if (xa.terms_.empty() || ya.terms_.empty()) return r;
        i64 base = xa.terms_.front().first + ya.terms_.front().first;
        if (base >= bound) return r;
        auto accumulate = [&](auto& acc, auto&& slot) {
            for (auto& [nx, cx] : xa.terms_) {
                if (nx + ya.terms_.front().first >= bound) break;
                for (auto& [ny, cy] : ya.terms_) {
                    i64 n = nx + ny;
                    if (n >= bound) break;
                    fq_t& c = slot(acc, n);
                    c = F.add(c, F.mul(cx, cy));
                }
            }
        };
        if (bound - base <= (i64(1) << 22)) {
            // dense accumulator over the reachable numerator range
            std::vector<fq_t> acc(std::size_t(bound - base), 0);
            accumulate(acc, [&](std::vector<fq_t>& a, i64 n) -> fq_t& { return a[std::size_t(n - base)]; });
            for (std::size_t i = 0; i < acc.size(); ++i)
                if (acc[i]) r.terms_.push_back({base + i64(i), acc[i]});
        } else {
            std::map<i64, fq_t> acc;
            accumulate(acc, [](std::map<i64, fq_t>& a, i64 n) -> fq_t& { return a[n]; });
            for (auto& [n, c] : acc)
                if (c) r.terms_.push_back({n, c});
        }
        return r;
    }

    // Sum of representatives truncated at hi.
    static PerfSeries add_trunc(const PerfSeries& x, const PerfSeries& y, Rat lo, Rat hi, bool subtract = false) {
        x.check_ring(y);
        int K = std::max(x.K_, y.K_);
        PerfSeries r(*x.F_, K, lo, hi, x.scale_);
        PerfSeries xa = x.with_K(K), ya = y.with_K(K);
        i64 bound = ceil_rat(hi * Rat(ipow(x.p(), K)));
        const Fq& F = *x.F_;
        std::size_t i = 0, j = 0;
        auto push = [&](i64 n, fq_t c) {
            if (c && n < bound) r.terms_.push_back({n, c});
        };
        while (i < xa.terms_.size() || j < ya.terms_.size()) {
            if (j == ya.terms_.size() || (i < xa.terms_.size() && xa.terms_[i].first < ya.terms_[j].first)) {
                push(xa.terms_[i].first, xa.terms_[i].second);
                ++i;
            } else if (i == xa.terms_.size() || ya.terms_[j].first < xa.terms_[i].first) {
                fq_t c = ya.terms_[j].second;
                push(ya.terms_[j].first, subtract ? F.neg(c) : c);
                ++j;
            } else {
                fq_t c = ya.terms_[j].second;
                push(xa.terms_[i].first, subtract ? F.sub(xa.terms_[i].second, c) : F.add(xa.terms_[i].second, c));
                ++i;
                ++j;
            }
        }
        return r;
    }

    // Inverse of a unit at truncation (leading term nonzero inside the window).
    PerfSeries inv() const {
        require(!terms_.empty(), errc::not_a_unit, "inverse of a series that is zero to precision");
        Rat e0 = min_exp();
        Rat rel = hi_ - e0;  // relative precision
        fq_t c0inv = F_->inv(leading_coeff());
        // u = x / (c0 t^e0) = 1 + h
        PerfSeries u = shifted(-e0).scaled(c0inv).with_window(Rat(0), rel);
        PerfSeries one = constant(*F_, 1, K_, rel, scale_);
        PerfSeries y = one;
        Rat prec = u.terms_.size() > 1 ? u.exponent(u.terms_[1].first) : rel;
        for (int it = 0; it < 200; ++it) {
            PerfSeries uy = mul_trunc(u, y, Rat(0), rel);
            PerfSeries two_minus = add_trunc(one + one, uy, Rat(0), rel, true);
            y = mul_trunc(y, two_minus, Rat(0), rel);
            if (prec >= rel) break;
            prec *= 2;
        }
        return y.scaled(c0inv).shifted(-e0).with_window(-e0, hi_ - 2 * e0);
    }

    // x -> x^(p^k): coefficients raised to p^k, exponents scaled by p^k
    PerfSeries frobenius(int k, int kmax = -1) const {
        if (kmax < 0) kmax = default_kmax(F_->p);
        int p = F_->p;
        int K = K_ - k;
        i64 mult = 1;
        if (K < 0) {
            mult = ipow(p, -K);
            K = 0;
        }
        require(K <= kmax, errc::denominator_overflow, "Frobenius inverse exceeds the denominator bound");
        Rat f = rat_pow(p, k);
        PerfSeries r(*F_, K, lo_ * f, hi_ * f, scale_);
        for (auto& [n, c] : terms_) r.terms_.push_back({n * mult, F_->frob(c, k)});
        return r;
    }

    PerfSeries pow(u64 e) const {
        if (e == 0) return constant(*F_, 1, K_, hi_ - std::min(lo_, min_exp()), scale_);
        PerfSeries r, b = *this;
        bool first = true;
        while (e) {
            if (e & 1) {
                r = first ? b : r * b;
                first = false;
            }
            e >>= 1;
            if (e) b = b * b;
        }
        return r;
    }

    // exact equality of supports (windows ignored)
    bool same_terms(const PerfSeries& o) const {
        if (!same_ring(o)) return false;
        int K = std::max(K_, o.K_);
        return with_K(K).terms_ == o.with_K(K).terms_;
    }

    // equality modulo t^min(hi, o.hi)
    bool equal_at_precision(const PerfSeries& o) const {
        Rat h = std::min(hi_, o.hi_);
        Rat l = std::min(lo_, o.lo_);
        return with_window(l, h).same_terms(o.with_window(l, h));
    }

    friend bool operator==(const PerfSeries& x, const PerfSeries& y) {
        return x.same_terms(y) && x.lo_ == y.lo_ && x.hi_ == y.hi_;
    }

    i64 to_num(Rat e) const {
        int k = pdenom_exp(e, F_->p);
        require(k >= 0 && k <= K_, errc::denominator_overflow, "exponent not representable at this denominator exponent");
        return e.numerator() * ipow(F_->p, K_ - k);
    }

private:
    const Fq* F_ = nullptr;
    Rat scale_{1};
    int K_ = 0;
    Rat lo_{0}, hi_{1};
    std::vector<term> terms_;

    i64 rescale(i64 n, int from, int to) const {
        if (to >= from) return n * ipow(F_->p, to - from);
        return n / ipow(F_->p, from - to);
    }

    static PerfSeries combine(const PerfSeries& x, const PerfSeries& y, bool subtract) {
        x.check_ring(y);
        return add_trunc(x, y, std::min(x.lo_, y.lo_), std::min(x.hi_, y.hi_), subtract);
    }
};

} // namespace perfprism
