#pragma once
#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "fq.hpp"

namespace perfprism {

// Z_q / p^L realised as (Z/p^L)[X]/(m~(X)), m~ the integer lift of the F_q modulus.
class ZqRing {
public:
    int p = 2, a = 1, L = 1;
    i64 mod = 2;
    const Fq* F = nullptr;

    static const ZqRing& get(int p, int a, int L) {
        static std::mutex mu;
        static std::map<std::tuple<int, int, int>, std::unique_ptr<ZqRing>> cache;
        std::lock_guard<std::mutex> lock(mu);
        auto& slot = cache[{p, a, L}];
        if (!slot) slot.reset(new ZqRing(p, a, L));
        return *slot;
    }

    using vec = std::vector<i64>;

    vec zero() const { return vec(a, 0); }
    vec one() const {
        vec r(a, 0);
        r[0] = 1 % mod;
        return r;
    }
    vec from_int(i64 n) const {
        vec r(a, 0);
        r[0] = modnorm(n, mod);
        return r;
    }

    vec add(const vec& x, const vec& y) const {
        vec r(a);
        for (int i = 0; i < a; ++i) r[i] = modnorm(x[i] + y[i], mod);
        return r;
    }
    vec sub(const vec& x, const vec& y) const {
        vec r(a);
        for (int i = 0; i < a; ++i) r[i] = modnorm(x[i] - y[i], mod);
        return r;
    }
    vec neg(const vec& x) const {
        vec r(a);
        for (int i = 0; i < a; ++i) r[i] = modnorm(-x[i], mod);
        return r;
    }
    vec scale(const vec& x, i64 c) const {
        vec r(a);
        for (int i = 0; i < a; ++i) r[i] = mulmod(x[i], modnorm(c, mod), mod);
        return r;
    }

    vec mul(const vec& x, const vec& y) const {
        if (a == 1) return {mulmod(x[0], y[0], mod)};
        std::vector<i128> t(2 * a - 1, 0);
        for (int i = 0; i < a; ++i) {
            if (!x[i]) continue;
            for (int j = 0; j < a; ++j) t[i + j] = (t[i + j] + i128(x[i]) * y[j]) % mod;
        }
        for (int k = 2 * a - 2; k >= a; --k) {
            i64 c = i64(t[k] % mod);
            if (!c) continue;
            for (int i = 0; i < a; ++i) t[k - a + i] = (t[k - a + i] - i128(c) * mt_[i]) % mod;
            t[k] = 0;
        }
        vec r(a);
        for (int i = 0; i < a; ++i) r[i] = modnorm(i64(t[i] % mod), mod);
        return r;
    }

    vec pow(vec x, u64 e) const {
        vec r = one();
        while (e) {
            if (e & 1) r = mul(r, x);
            x = mul(x, x);
            e >>= 1;
        }
        return r;
    }

    bool is_zero(const vec& x) const {
        return std::all_of(x.begin(), x.end(), [](i64 c) { return c == 0; });
    }

    // p-adic valuation, L for zero
    int val(const vec& x) const {
        int v = L;
        for (i64 c : x)
            if (c) v = std::min(v, vp_int(c, p));
        return v;
    }

    fq_t reduce(const vec& x) const {
        std::vector<int> d(a);
        for (int i = 0; i < a; ++i) d[i] = int(x[i] % p);
        return F->encode(d);
    }

    vec lift(fq_t c) const {
        auto d = F->digits(c);
        vec r(a);
        for (int i = 0; i < a; ++i) r[i] = d[i];
        return r;
    }

    vec teichmuller(fq_t c) const {
        vec x = lift(c);
        for (int i = 1; i < L; ++i) x = pow(x, F->q);
        return x;
    }

    vec inv(const vec& x) const {
        fq_t r = reduce(x);
        require(r != 0, errc::not_a_unit, "inverse of a non-unit in Z_q");
        vec y = lift(F->inv(r));
        vec two = from_int(2);
        for (int k = 1; k < 2 * L + 2; k *= 2) y = mul(y, sub(two, mul(x, y)));
        return y;
    }

    // exact division by p^k; the result is only meaningful modulo p^(L-k)
    vec div_pk(const vec& x, int k) const {
        i64 d = ipow(p, k);
        vec r(a);
        for (int i = 0; i < a; ++i) {
            require(x[i] % d == 0, errc::precision_exhausted, "division by p^k of a non-multiple");
            r[i] = x[i] / d;
        }
        return r;
    }

    vec mul_pk(const vec& x, int k) const { return scale(x, k >= L ? 0 : ipow(p, k)); }

    // arithmetic Frobenius sigma^k (lift of x -> x^p)
    vec sigma(const vec& x, i64 k = 1) const {
        i64 kk = modnorm(k, a);
        vec r = x;
        for (i64 s = 0; s < kk; ++s) {
            vec acc = zero();
            for (int i = a - 1; i >= 0; --i) {
                acc = mul(acc, xi_);
                acc[0] = modnorm(acc[0] + r[i], mod);
            }
            r = acc;
        }
        return r;
    }

    // reduce modulo p^k (k <= L)
    vec truncate(const vec& x, int k) const {
        if (k >= L) return x;
        i64 m = ipow(p, k);
        vec r(a);
        for (int i = 0; i < a; ++i) r[i] = x[i] % m;
        return r;
    }

    // map to another precision (drop or zero-extend)
    vec change_precision(const vec& x, const ZqRing& other) const {
        vec r(a);
        for (int i = 0; i < a; ++i) r[i] = modnorm(x[i], other.mod);
        return r;
    }

    // Z_p-coordinates of the element as a vector of length a (the X^i basis)
    const vec& frobenius_generator() const { return xi_; }

private:
    vec mt_;  // modulus lift without leading 1
    vec xi_;  // sigma(X)

    ZqRing(int p_, int a_, int L_) : p(p_), a(a_), L(L_) {
        require(L_ >= 1 && L_ <= max_pow_exp(p_), errc::invalid_argument, "p-adic precision out of range");
        mod = ipow(p, L);
        F = &Fq::get(p, a);
        mt_.assign(a, 0);
        for (int i = 0; i < a; ++i) mt_[i] = F->modulus[i];
        xi_ = zero();
        if (a == 1) {
            xi_[0] = 0;  // X is 0 in this presentation; sigma is the identity
        } else {
            // Newton iteration for the root of m~ congruent to X^p
            vec x(a, 0);
            x[1 % a] = 1;
            vec y = pow(x, u64(p));
            for (int it = 0; it < 2 * L + 4; ++it) {
                vec f = zero(), df = zero();
                // evaluate m~(y) and m~'(y)
                vec ypow = one();
                for (int i = 0; i <= a; ++i) {
                    i64 c = (i == a) ? 1 : mt_[i];
                    f = add(f, scale(ypow, c));
                    if (i + 1 <= a) {
                        i64 c1 = (i + 1 == a) ? 1 : mt_[i + 1];
                        df = add(df, scale(ypow, c1 * (i + 1)));
                    }
                    ypow = mul(ypow, y);
                }
                if (is_zero(f)) break;
                y = sub(y, mul(f, inv(df)));
            }
            xi_ = y;
        }
    }
};

// Value-type element of Z_q / p^L.
struct ZqElem {
    const ZqRing* R = nullptr;
    std::vector<i64> c;

    ZqElem() = default;
    ZqElem(const ZqRing& r, std::vector<i64> v) : R(&r), c(std::move(v)) {}
    static ZqElem zero(const ZqRing& r) { return {r, r.zero()}; }
    static ZqElem one(const ZqRing& r) { return {r, r.one()}; }
    static ZqElem from_int(const ZqRing& r, i64 n) { return {r, r.from_int(n)}; }

    friend ZqElem operator+(const ZqElem& x, const ZqElem& y) { return {*x.R, x.R->add(x.c, y.c)}; }
    friend ZqElem operator-(const ZqElem& x, const ZqElem& y) { return {*x.R, x.R->sub(x.c, y.c)}; }
    friend ZqElem operator*(const ZqElem& x, const ZqElem& y) { return {*x.R, x.R->mul(x.c, y.c)}; }
    ZqElem operator-() const { return {*R, R->neg(c)}; }
    ZqElem& operator+=(const ZqElem& y) { return *this = *this + y; }
    ZqElem& operator-=(const ZqElem& y) { return *this = *this - y; }
    ZqElem& operator*=(const ZqElem& y) { return *this = *this * y; }
    friend bool operator==(const ZqElem& x, const ZqElem& y) { return x.c == y.c; }
    friend bool operator!=(const ZqElem& x, const ZqElem& y) { return x.c != y.c; }
    bool is_zero() const { return R->is_zero(c); }
    int val() const { return R->val(c); }
    ZqElem inv() const { return {*R, R->inv(c)}; }
    ZqElem sigma(i64 k = 1) const { return {*R, R->sigma(c, k)}; }
    ZqElem pow(u64 e) const { return {*R, R->pow(c, e)}; }
    ZqElem mul_pk(int k) const { return {*R, R->mul_pk(c, k)}; }
    ZqElem div_pk(int k) const { return {*R, R->div_pk(c, k)}; }
};

// Smith normal form over Z/p^L of an integer matrix; returns the diagonal
// valuations (L meaning zero), one per min(rows, cols).
inline std::vector<int> snf_valuations(std::vector<std::vector<i64>> A, i64 p, int L) {
    i64 mod = ipow(p, L);
    std::size_t m = A.size(), n = m ? A[0].size() : 0;
    for (auto& row : A)
        for (auto& x : row) x = modnorm(x, mod);
    std::vector<int> out;
    std::size_t r = 0;
    for (; r < std::min(m, n); ++r) {
        // pivot of minimal valuation in the remaining block
        int best = L;
        std::size_t bi = r, bj = r;
        for (std::size_t i = r; i < m; ++i)
            for (std::size_t j = r; j < n; ++j)
                if (A[i][j]) {
                    int v = vp_int(A[i][j], p);
                    if (v < best) { best = v; bi = i; bj = j; }
                }
        if (best >= L) break;
        std::swap(A[r], A[bi]);
        for (auto& row : A) std::swap(row[r], row[bj]);
        i64 pv = ipow(p, best);
        i64 unit = A[r][r] / pv;
        i64 uinv = inv_mod_ppow(unit, p, mod);
        for (std::size_t i = r + 1; i < m; ++i) {
            if (!A[i][r]) continue;
            i64 f = mulmod(A[i][r] / pv, uinv, mod);
            for (std::size_t j = r; j < n; ++j) A[i][j] = modnorm(A[i][j] - mulmod(f, A[r][j], mod), mod);
        }
        for (std::size_t j = r + 1; j < n; ++j) {
            if (!A[r][j]) continue;
            i64 f = mulmod(A[r][j] / pv, uinv, mod);
            for (std::size_t i = r; i < m; ++i) A[i][j] = modnorm(A[i][j] - mulmod(f, A[i][r], mod), mod);
        }
        out.push_back(best);
    }
    for (; r < std::min(m, n); ++r) out.push_back(L);
    return out;
}

} // namespace perfprism
