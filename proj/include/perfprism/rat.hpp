#pragma once
#include <boost/rational.hpp>
#include <cstdint>
#include <string>
#include <vector>

#include "error.hpp"

// boost::rational's mixed (rational, integer) equality recurses forever under
// the C++20 rewritten-comparison rules; exact non-template overloads win
// overload resolution and sidestep the template.
namespace boost {
inline bool operator==(const rational<std::int64_t>& a, int b) { return a == rational<std::int64_t>(b); }
inline bool operator==(const rational<std::int64_t>& a, long b) { return a == rational<std::int64_t>(b); }
inline bool operator!=(const rational<std::int64_t>& a, int b) { return !(a == b); }
inline bool operator!=(const rational<std::int64_t>& a, long b) { return !(a == b); }
} // namespace boost

namespace perfprism {

using Rat = boost::rational<std::int64_t>;
using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;

inline i64 ipow(i64 b, int e) {
    i64 r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

// largest k with p^k <= 2^62
inline int max_pow_exp(i64 p) {
    int k = 0;
    i128 v = 1;
    while (v * p <= (i128(1) << 62)) { v *= p; ++k; }
    return k;
}

inline int vp_int(i64 x, i64 p) {
    if (x == 0) return 1 << 28;
    int v = 0;
    while (x % p == 0) { x /= p; ++v; }
    return v;
}

inline i64 floor_rat(const Rat& r) {
    i64 n = r.numerator(), d = r.denominator();
    i64 q = n / d;
    if ((n % d != 0) && (n < 0)) --q;
    return q;
}

inline i64 ceil_rat(const Rat& r) { return -floor_rat(-r); }

// exponent k such that the denominator of r is p^k; -1 if it is not a p-power
inline int pdenom_exp(const Rat& r, i64 p) {
    i64 d = r.denominator();
    int k = 0;
    while (d % p == 0) { d /= p; ++k; }
    return d == 1 ? k : -1;
}

inline Rat rat_pow(i64 p, int e) {
    return e >= 0 ? Rat(ipow(p, e)) : Rat(1, ipow(p, -e));
}

inline std::string to_string(const Rat& r) {
    if (r.denominator() == 1) return std::to_string(r.numerator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

inline Rat parse_rat(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rat(std::stoll(s));
        return Rat(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    } catch (const std::exception&) {
        fail(errc::schema_error, "bad rational '" + s + "'");
    }
}

inline i64 mulmod(i64 a, i64 b, i64 m) { return i64((i128(a) * b) % m); }

inline i64 modnorm(i64 a, i64 m) {
    a %= m;
    return a < 0 ? a + m : a;
}

inline i64 powmod(i64 b, u64 e, i64 m) {
    i64 r = 1 % m;
    b = modnorm(b, m);
    while (e) {
        if (e & 1) r = mulmod(r, b, m);
        b = mulmod(b, b, m);
        e >>= 1;
    }
    return r;
}

// inverse of a unit modulo p^k by Newton iteration from the inverse mod p
inline i64 inv_mod_ppow(i64 a, i64 p, i64 m) {
    a = modnorm(a, m);
    require(a % p != 0, errc::not_a_unit, "inverse of a non-unit modulo p^k");
    i64 x = powmod(a % p, u64(p - 2), p);
    for (int i = 0; i < 64; ++i) {
        i64 nx = mulmod(x, modnorm(2 - mulmod(a, x, m), m), m);
        if (nx == x) break;
        x = nx;
    }
    return x;
}

} // namespace perfprism
