#pragma once
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "rat.hpp"

namespace perfprism {

using fq_t = std::uint64_t;

namespace fp_poly {
// dense polynomials over F_p, low degree first, no trailing zeros

using poly = std::vector<int>;

inline void trim(poly& f) {
    while (!f.empty() && f.back() == 0) f.pop_back();
}

inline poly mul(const poly& f, const poly& g, int p) {
    if (f.empty() || g.empty()) return {};
    poly r(f.size() + g.size() - 1, 0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!f[i]) continue;
        for (std::size_t j = 0; j < g.size(); ++j) r[i + j] = (r[i + j] + f[i] * g[j]) % p;
    }
    trim(r);
    return r;
}

inline poly mod(poly f, const poly& m, int p) {
    trim(f);
    int inv_lead = int(powmod(m.back(), u64(p - 2), p));
    while (f.size() >= m.size()) {
        int c = f.back() * inv_lead % p;
        std::size_t sh = f.size() - m.size();
        for (std::size_t i = 0; i < m.size(); ++i) f[sh + i] = ((f[sh + i] - c * m[i]) % p + p) % p;
        trim(f);
    }
    return f;
}

inline poly sub(poly f, const poly& g, int p) {
    if (f.size() < g.size()) f.resize(g.size(), 0);
    for (std::size_t i = 0; i < g.size(); ++i) f[i] = ((f[i] - g[i]) % p + p) % p;
    trim(f);
    return f;
}

inline poly gcd(poly f, poly g, int p) {
    trim(f);
    trim(g);
    while (!g.empty()) {
        poly r = mod(f, g, p);
        f = std::move(g);
        g = std::move(r);
    }
    return f;
}

// X^(p^k) mod m
inline poly x_pow_pk(const poly& m, int p, int k) {
    poly x = mod(poly{0, 1}, m, p);
    for (int i = 0; i < k; ++i) {
        poly r{1};
        poly b = x;
        int e = p;
        while (e) {
            if (e & 1) r = mod(mul(r, b, p), m, p);
            b = mod(mul(b, b, p), m, p);
            e >>= 1;
        }
        x = r;
    }
    return x;
}

inline bool irreducible(const poly& m, int p) {
    int n = int(m.size()) - 1;
    if (n <= 0) return false;
    if (n == 1) return true;
    poly x = mod(poly{0, 1}, m, p);
    if (sub(x_pow_pk(m, p, n), x, p).size() != 0) return false;
    for (int r = 2; r <= n; ++r) {
        if (n % r) continue;
        bool prime = true;
        for (int s = 2; s * s <= r; ++s)
            if (r % s == 0) prime = false;
        if (!prime) continue;
        poly g = gcd(m, sub(x_pow_pk(m, p, n / r), x, p), p);
        if (g.size() != 1) return false;
    }
    return true;
}

} // namespace fp_poly

// The finite field F_p[X]/(m(X)) where m is the monic irreducible of degree a
// whose coefficient vector has the smallest base-p code.  Elements are coded
// as integers sum c_i p^i.
class Fq {
public:
    int p = 2, a = 1;
    u64 q = 2;
    std::vector<int> modulus;  // monic, size a+1

    static const Fq& get(int p, int a) {
        static std::mutex mu;
        static std::map<std::pair<int, int>, std::unique_ptr<Fq>> cache;
        std::lock_guard<std::mutex> lock(mu);
        auto& slot = cache[{p, a}];
        if (!slot) slot.reset(new Fq(p, a));
        return *slot;
    }

    std::vector<int> digits(fq_t x) const {
        std::vector<int> d(a);
        for (int i = 0; i < a; ++i) {
            d[i] = int(x % u64(p));
            x /= u64(p);
        }
        return d;
    }

    fq_t encode(const std::vector<int>& d) const {
        fq_t x = 0;
        for (int i = int(d.size()) - 1; i >= 0; --i) x = x * u64(p) + u64(((d[i] % p) + p) % p);
        return x;
    }

    fq_t from_int(i64 n) const { return fq_t(modnorm(n, p)); }
    fq_t one() const { return 1; }

    fq_t add(fq_t x, fq_t y) const {
        if (p == 2) return x ^ y;
        if (a == 1) return (x + y) % u64(p);
        fq_t r = 0, m = 1;
        while (x || y) {
            r += m * (((x % p) + (y % p)) % p);
            x /= p;
            y /= p;
            m *= p;
        }
        return r;
    }

    fq_t neg(fq_t x) const {
        if (p == 2) return x;
        fq_t r = 0, m = 1;
        while (x) {
            r += m * ((p - x % p) % p);
            x /= p;
            m *= p;
        }
        return r;
    }

    fq_t sub(fq_t x, fq_t y) const { return add(x, neg(y)); }

    fq_t mul(fq_t x, fq_t y) const {
        if (x == 0 || y == 0) return 0;
        if (!log_.empty()) {
            u64 s = log_[x] + log_[y];
            if (s >= q - 1) s -= q - 1;
            return exp_[s];
        }
        if (a == 1) return fq_t(mulmod(i64(x), i64(y), p));
        auto f = fp_poly::mul(trimmed(digits(x)), trimmed(digits(y)), p);
        return encode(fp_poly::mod(f, modulus, p));
    }

    fq_t pow(fq_t x, u64 e) const {
        fq_t r = 1;
        while (e) {
            if (e & 1) r = mul(r, x);
            x = mul(x, x);
            e >>= 1;
        }
        return r;
    }

    fq_t inv(fq_t x) const {
        require(x != 0, errc::not_a_unit, "inverse of zero in F_q");
        if (!log_.empty()) return exp_[(q - 1 - log_[x]) % (q - 1)];
        return pow(x, q - 2);
    }

    // x^(p^k), k of either sign; the Frobenius has order a
    fq_t frob(fq_t x, i64 k) const {
        i64 kk = modnorm(k, a);
        for (i64 i = 0; i < kk; ++i) x = pow(x, u64(p));
        return x;
    }

    int trace(fq_t x) const {
        fq_t s = 0, y = x;
        for (int i = 0; i < a; ++i) {
            s = add(s, y);
            y = pow(y, u64(p));
        }
        return int(s);
    }

    // generator of the multiplicative group (only when tables exist)
    fq_t generator() const { return gen_; }

private:
    std::vector<u64> log_, exp_;
    fq_t gen_ = 0;

    static std::vector<int> trimmed(std::vector<int> d) {
        fp_poly::trim(d);
        return d;
    }

    Fq(int p_, int a_) : p(p_), a(a_) {
        require(p_ >= 2 && a_ >= 1, errc::invalid_argument, "bad field parameters");
        i128 qq = 1;
        for (int i = 0; i < a; ++i) qq *= p;
        require(qq < (i128(1) << 62), errc::invalid_argument, "field too large");
        q = u64(qq);
        if (a == 1) {
            modulus = {0, 1};
        } else {
            for (u64 code = 0; code < q; ++code) {
                std::vector<int> m(a + 1);
                u64 c = code;
                for (int i = 0; i < a; ++i) {
                    m[i] = int(c % u64(p));
                    c /= u64(p);
                }
                m[a] = 1;
                if (fp_poly::irreducible(m, p)) {
                    modulus = m;
                    break;
                }
            }
        }
        if (q <= (1u << 16)) build_tables();
    }

    void build_tables() {
        if (q == 2) {
            log_ = {0, 0};
            exp_ = {1};
            gen_ = 1;
            return;
        }
        // find a generator by checking orders against prime factors of q-1
        u64 n = q - 1;
        std::vector<u64> primes;
        u64 t = n;
        for (u64 d = 2; d * d <= t; ++d)
            if (t % d == 0) {
                primes.push_back(d);
                while (t % d == 0) t /= d;
            }
        if (t > 1) primes.push_back(t);
        for (fq_t g = 2; g < q + 1; ++g) {
            fq_t cand = g % q;
            if (cand == 0) continue;
            bool ok = true;
            for (u64 r : primes)
                if (pow(cand, n / r) == 1) ok = false;
            if (ok) {
                gen_ = cand;
                break;
            }
        }
        std::vector<u64> lg(q), ex(q - 1);
        fq_t x = 1;
        for (u64 i = 0; i < q - 1; ++i) {
            ex[i] = x;
            lg[x] = i;
            x = mul(x, gen_);
        }
        log_ = std::move(lg);
        exp_ = std::move(ex);
    }
};

// A value type for convenient user-level arithmetic in F_q.
struct FqElem {
    const Fq* F = nullptr;
    fq_t v = 0;

    FqElem() = default;
    FqElem(const Fq& f, fq_t x) : F(&f), v(x) {}

    friend FqElem operator+(FqElem x, FqElem y) { return {*x.F, x.F->add(x.v, y.v)}; }
    friend FqElem operator-(FqElem x, FqElem y) { return {*x.F, x.F->sub(x.v, y.v)}; }
    friend FqElem operator*(FqElem x, FqElem y) { return {*x.F, x.F->mul(x.v, y.v)}; }
    FqElem operator-() const { return {*F, F->neg(v)}; }
    FqElem inv() const { return {*F, F->inv(v)}; }
    FqElem pow(u64 e) const { return {*F, F->pow(v, e)}; }
    FqElem frob(i64 k) const { return {*F, F->frob(v, k)}; }
    bool is_zero() const { return v == 0; }
    friend bool operator==(FqElem x, FqElem y) { return x.v == y.v; }
    friend bool operator!=(FqElem x, FqElem y) { return x.v != y.v; }
};

// Embedding of F_{p^f} into F_{p^N} (f | N): image of the generator X.
inline fq_t subfield_root(const Fq& small, const Fq& big) {
    require(small.p == big.p && big.a % small.a == 0, errc::coeff_mismatch, "no embedding of fields");
    if (small.a == 1) return 0;
    u64 ratio = (big.q - 1) / (small.q - 1);
    for (fq_t x = 1; x < big.q; ++x) {
        fq_t y = big.pow(x, ratio);
        // evaluate the modulus of the small field at y
        fq_t acc = 0;
        for (int i = small.a; i >= 0; --i) acc = big.add(big.mul(acc, y), big.from_int(small.modulus[i]));
        if (acc == 0) return y;
    }
    fail(errc::search_exhausted, "no root of the subfield modulus");
}

inline fq_t embed(const Fq& small, const Fq& big, fq_t root, fq_t x) {
    auto d = small.digits(x);
    fq_t acc = 0;
    for (int i = small.a - 1; i >= 0; --i) acc = big.add(big.mul(acc, root), big.from_int(d[i]));
    return acc;
}

} // namespace perfprism
