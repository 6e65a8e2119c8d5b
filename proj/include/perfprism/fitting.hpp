#pragma once
// Fitting ideals of finitely presented modules, and the normal form of the
// Fitting ideals of a phi-stable module over a product of truncated Witt rings.

#include <algorithm>
#include <vector>

#include "error.hpp"
#include "matrix.hpp"
#include "witt.hpp"
#include "zq.hpp"

namespace perfprism {

// Module presented as the cokernel of the relation matrix: generators e_1..e_n,
// relations are the rows of `rel` (an m x n matrix acting on row vectors).
template <class T>
struct PresentedModule {
    Matrix<T> rel;
    std::size_t n = 0;
    T zero, one;

    std::size_t relations() const { return rel.size(); }
};

template <class T>
PresentedModule<T> presented(Matrix<T> rel, std::size_t n, const T& zero, const T& one) {
    for (auto& row : rel) require(row.size() == n, errc::invalid_argument, "relation row has the wrong length");
    return {std::move(rel), n, zero, one};
}

// Ideal as an explicit generator list; the empty list is the zero ideal.
template <class T>
struct Ideal {
    std::vector<T> gens;
    bool unit = false;  // set when the empty minor (= 1) is among the generators
};

// Fitt_j for j = 0..up_to: the ideal of (n-j)-minors, unit for j >= n, and
// zero when n - j exceeds the number of relations.
template <class T, class IsZero>
std::vector<Ideal<T>> fitting_ideals(const PresentedModule<T>& M, std::size_t up_to, IsZero is_zero) {
    std::vector<Ideal<T>> out;
    std::size_t m = M.relations();
    for (std::size_t j = 0; j <= up_to; ++j) {
        Ideal<T> I;
        if (j >= M.n) {
            I.gens.push_back(M.one);
            I.unit = true;
        } else {
            std::size_t k = M.n - j;
            if (k <= m)
                for_each_subset(m, k, [&](const std::vector<std::size_t>& rows) {
                    for_each_subset(M.n, k, [&](const std::vector<std::size_t>& cols) {
                        T d = minor_det(M.rel, rows, cols, M.zero, M.one);
                        if (!is_zero(d)) I.gens.push_back(d);
                    });
                });
        }
        out.push_back(std::move(I));
    }
    return out;
}

template <class T>
std::vector<Ideal<T>> fitting_ideals(const PresentedModule<T>& M, std::size_t up_to) {
    return fitting_ideals(M, up_to, [](const T& x) { return x.is_zero(); });
}

template <class T, class F>
PresentedModule<T> base_change(const PresentedModule<T>& M, F f) {
    return {mat_map(M.rel, f), M.n, f(M.zero), f(M.one)};
}

// Every ideal of Z_q/p^L is (p^v); v = L is the zero ideal.
inline int zq_ideal_exponent(const Ideal<ZqElem>& I, int L) {
    if (I.unit) return 0;
    int v = L;
    for (auto& g : I.gens) v = std::min(v, g.val());
    return v;
}

inline std::vector<int> zq_fitting_exponents(const PresentedModule<ZqElem>& M, std::size_t up_to) {
    int L = M.zero.R->L;
    std::vector<int> out;
    for (auto& I : fitting_ideals(M, up_to)) out.push_back(zq_ideal_exponent(I, L));
    return out;
}

// ---------------------------------------------------------------------------
// Finite product of truncated Witt rings.  Idempotents of the residue ring are
// the indicator vectors of subsets of components.

struct WittProduct {
    std::vector<WittTrunc> c;

    static WittProduct constant(const std::vector<WittTrunc>& shapes, i64 v) {
        WittProduct r;
        for (auto& s : shapes) r.c.push_back(witt_from_int(v, s));
        return r;
    }
    static WittProduct zero_like(const WittProduct& x) {
        WittProduct r;
        for (auto& s : x.c) r.c.push_back(WittTrunc::zero_like(s));
        return r;
    }

    std::size_t size() const { return c.size(); }

    friend WittProduct operator+(const WittProduct& x, const WittProduct& y) { return zip(x, y, [](auto& a, auto& b) { return a + b; }); }
    friend WittProduct operator-(const WittProduct& x, const WittProduct& y) { return zip(x, y, [](auto& a, auto& b) { return a - b; }); }
    friend WittProduct operator*(const WittProduct& x, const WittProduct& y) { return zip(x, y, [](auto& a, auto& b) { return a * b; }); }
    WittProduct operator-() const {
        WittProduct r;
        for (auto& a : c) r.c.push_back(-a);
        return r;
    }

    bool is_zero() const {
        return std::all_of(c.begin(), c.end(), [](const WittTrunc& a) { return a.is_zero(); });
    }
    WittProduct frobenius(int k) const {
        WittProduct r;
        for (auto& a : c) r.c.push_back(a.frobenius(k));
        return r;
    }
    bool equal_at_precision(const WittProduct& o) const {
        if (o.size() != size()) return false;
        for (std::size_t i = 0; i < size(); ++i)
            if (!c[i].equal_at_precision(o.c[i])) return false;
        return true;
    }

private:
    template <class F>
    static WittProduct zip(const WittProduct& x, const WittProduct& y, F f) {
        require(x.size() == y.size(), errc::coeff_mismatch, "product rings with different factor counts");
        WittProduct r;
        for (std::size_t i = 0; i < x.size(); ++i) r.c.push_back(f(x.c[i], y.c[i]));
        return r;
    }
};

// index of the first nonzero Witt digit; top() for zero
inline int witt_p_valuation(const WittTrunc& x) {
    for (int n = x.n_lo(); n < x.top(); ++n)
        if (!x.digit(n).is_zero()) return n;
    return x.top();
}

// p^n [e] with e the indicator of the selected components
inline WittProduct p_power_idempotent(const WittProduct& like, int n, const std::vector<bool>& e) {
    WittProduct r = WittProduct::zero_like(like);
    for (std::size_t k = 0; k < like.size(); ++k) {
        if (!e[k] || n >= like.c[k].top()) continue;
        const WittTrunc& s = like.c[k];
        const ZqRing& R = ZqRing::get(s.p(), s.field().a, std::max(1, s.top()));
        r.c[k] = witt_from_zq(ZqElem::from_int(R, 1).mul_pk(n), s);
    }
    return r;
}

struct FittingGenerator {
    int n = 0;
    std::vector<bool> idempotent;
};

struct FittingNormalForm {
    std::size_t j = 0;
    std::vector<int> exponents;  // per component; the digit count of the component means zero
    std::vector<FittingGenerator> generators;
};

// Throws NotPhiStable unless sigma(rel) * Phi == C * rel at precision, which is
// the condition for v -> sigma(v) Phi to descend to the cokernel.
inline void check_phi_datum(const PresentedModule<WittProduct>& M, const Matrix<WittProduct>& Phi,
                            const Matrix<WittProduct>& C) {
    std::size_t m = M.relations();
    require(Phi.size() == M.n && C.size() == m, errc::invalid_argument, "equivariance datum has the wrong shape");
    for (auto& row : Phi) require(row.size() == M.n, errc::invalid_argument, "Phi must be square");
    for (auto& row : C) require(row.size() == m, errc::invalid_argument, "C must be square");
    if (m == 0) return;
    auto srel = mat_map(M.rel, [](const WittProduct& x) { return x.frobenius(1); });
    auto lhs = mat_mul(srel, Phi, M.zero);
    auto rhs = mat_mul(C, M.rel, M.zero);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < M.n; ++j)
            require(lhs[i][j].equal_at_precision(rhs[i][j]), errc::not_phi_stable,
                    "presentation is not stable under the given Frobenius datum");
}

// Each computed Fitting ideal is (p^{n_k}) in component k; it is generated by
// the elements p^n [e_n] with e_n the indicator of {k : n_k <= n}, one for each
// exponent value that occurs.  A minor whose first nonzero digit sits at level v
// is p^v times a unit once t is inverted, so the minimum over the minors is the
// exponent of the ideal in that component.
inline std::vector<FittingNormalForm> phi_stable_normal_form(const PresentedModule<WittProduct>& M,
                                                             const Matrix<WittProduct>& Phi,
                                                             const Matrix<WittProduct>& C, std::size_t up_to) {
    check_phi_datum(M, Phi, C);
    auto ideals = fitting_ideals(M, up_to);
    std::size_t K = M.one.size();
    std::vector<FittingNormalForm> out;
    for (std::size_t j = 0; j < ideals.size(); ++j) {
        FittingNormalForm nf;
        nf.j = j;
        for (std::size_t k = 0; k < K; ++k) {
            int top = M.one.c[k].top();
            int v = ideals[j].unit ? 0 : top;
            for (auto& g : ideals[j].gens) v = std::min(v, witt_p_valuation(g.c[k]));
            nf.exponents.push_back(v);
        }
        std::vector<int> levels;
        for (std::size_t k = 0; k < K; ++k)
            if (nf.exponents[k] < M.one.c[k].top()) levels.push_back(nf.exponents[k]);
        std::sort(levels.begin(), levels.end());
        levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
        for (int n : levels) {
            FittingGenerator g{n, std::vector<bool>(K)};
            for (std::size_t k = 0; k < K; ++k) g.idempotent[k] = nf.exponents[k] <= n;
            nf.generators.push_back(g);
        }
        out.push_back(std::move(nf));
    }
    return out;
}

} // namespace perfprism
