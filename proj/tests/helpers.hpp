#pragma once
#include <random>

#include "perfprism/perfprism.hpp"

namespace pp = perfprism;

inline std::mt19937_64& rng() {
    static std::mt19937_64 g(20240611);
    return g;
}

inline pp::fq_t rand_fq(const pp::Fq& F, bool nonzero = false) {
    std::uniform_int_distribution<pp::u64> d(nonzero ? 1 : 0, F.q - 1);
    return d(rng());
}

// random series with support in [lo, hi) on the grid p^-K Z, at most `terms` terms
inline pp::PerfSeries rand_series(const pp::Fq& F, int K, pp::Rat lo, pp::Rat hi, int terms, pp::Rat scale = pp::Rat(1)) {
    pp::PerfSeries s(F, K, lo, hi, scale);
    pp::i64 den = pp::ipow(F.p, K);
    pp::i64 a = pp::ceil_rat(lo * pp::Rat(den)), b = pp::ceil_rat(hi * pp::Rat(den));
    std::uniform_int_distribution<pp::i64> d(a, b - 1);
    for (int i = 0; i < terms; ++i) s.set(pp::Rat(d(rng()), den), rand_fq(F));
    return s;
}

// random unit: nonzero constant term plus higher terms
inline pp::PerfSeries rand_unit(const pp::Fq& F, int K, pp::Rat hi, int terms) {
    pp::PerfSeries s = rand_series(F, K, pp::Rat(0), hi, terms);
    s.set(pp::Rat(0), rand_fq(F, true));
    return s;
}

inline pp::WittTrunc teich(const pp::Fq& F, pp::fq_t c, pp::Rat e, int plen, pp::Rat H) {
    pp::WittTrunc w(F, 0, plen, pp::Rat(0), H);
    w.set_digit(0, pp::PerfSeries::monomial(F, c, e, pp::pdenom_exp(e, F.p), pp::Rat(0), H));
    return w;
}

inline pp::WittTrunc rand_integral(const pp::Fq& F, int plen, pp::Rat H, int K, int terms) {
    pp::WittTrunc w(F, 0, plen, pp::Rat(0), H);
    for (int n = 0; n < plen; ++n) w.set_digit(n, rand_series(F, K, pp::Rat(0), w.digit_hi(n), terms));
    return w;
}

// random element of the untilt ring with u-adic valuation at least vmin
inline pp::UntiltElem rand_untilt(const pp::UntiltRing& R, pp::i64 vmin = 0) {
    pp::UntiltElem x(R);
    for (pp::i64 j = vmin; j < vmin + R.N && j < R.full_precision(); ++j)
        x = x + pp::UntiltElem::monomial(R, R.Z->teichmuller(rand_fq(*R.Z->F)), j);
    return x;
}
