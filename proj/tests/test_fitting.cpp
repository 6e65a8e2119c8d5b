#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "helpers.hpp"

using pp::PresentedModule;
using pp::WittProduct;
using pp::ZqElem;
using pp::ZqRing;

namespace {

ZqElem rand_zq(const ZqRing& R) {
    std::uniform_int_distribution<pp::i64> d(0, R.mod - 1);
    std::vector<pp::i64> c(R.a);
    for (auto& x : c) x = d(rng());
    return {R, c};
}

PresentedModule<ZqElem> zq_module(const ZqRing& R, pp::Matrix<ZqElem> rel, std::size_t n) {
    return pp::presented(std::move(rel), n, ZqElem::zero(R), ZqElem::one(R));
}

// dense random matrix whose entries carry random powers of p
pp::Matrix<ZqElem> rand_zq_matrix(const ZqRing& R, std::size_t m, std::size_t n) {
    pp::Matrix<ZqElem> A(m, std::vector<ZqElem>(n, ZqElem::zero(R)));
    std::uniform_int_distribution<int> v(0, R.L);
    for (auto& row : A)
        for (auto& x : row) x = rand_zq(R).mul_pk(std::min(v(rng()), R.L - 1));
    return A;
}

// Fitting exponents predicted by the Smith normal form: Fitt_j = (p^{s_1+...+s_{n-j}})
// with s sorted ascending and missing invariant factors equal to zero.
std::vector<int> snf_prediction(const pp::Matrix<ZqElem>& A, std::size_t n, int p, int L, std::size_t up_to) {
    std::vector<std::vector<pp::i64>> M;
    for (auto& row : A) {
        std::vector<pp::i64> r;
        for (auto& x : row) r.push_back(x.c[0]);
        M.push_back(r);
    }
    auto s = pp::snf_valuations(M, p, L);
    while (s.size() < n) s.push_back(L);
    std::sort(s.begin(), s.end());
    std::vector<int> out;
    for (std::size_t j = 0; j <= up_to; ++j) {
        int t = 0;
        for (std::size_t i = 0; j < n && i < n - j; ++i) t = std::min(L, t + s[i]);
        out.push_back(t);
    }
    return out;
}

} // namespace

TEST(Fitting, FreeModule) {
    const ZqRing& R = ZqRing::get(3, 2, 4);
    auto M = zq_module(R, {}, 3);
    auto I = pp::fitting_ideals(M, 4);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_TRUE(I[j].gens.empty()) << j;
    for (std::size_t j = 3; j <= 4; ++j) EXPECT_TRUE(I[j].unit);
}

TEST(Fitting, CyclicModule) {
    const ZqRing& R = ZqRing::get(2, 1, 6);
    ZqElem f = ZqElem::from_int(R, 12);  // 2^2 * 3
    auto M = zq_module(R, {{f}}, 1);
    auto I = pp::fitting_ideals(M, 1);
    ASSERT_EQ(I[0].gens.size(), 1u);
    EXPECT_EQ(I[0].gens[0], f);
    EXPECT_TRUE(I[1].unit);
    EXPECT_EQ(pp::zq_fitting_exponents(M, 1), (std::vector<int>{2, 0}));
}

TEST(Fitting, AgainstSmithNormalForm) {
    for (int p : {2, 3, 5}) {
        const ZqRing& R = ZqRing::get(p, 1, 5);
        for (int trial = 0; trial < 30; ++trial) {
            std::size_t m = 1 + trial % 4, n = 1 + (trial / 4) % 4;
            auto A = rand_zq_matrix(R, m, n);
            auto got = pp::zq_fitting_exponents(zq_module(R, A, n), n);
            EXPECT_EQ(got, snf_prediction(A, n, p, R.L, n)) << "p=" << p << " trial " << trial;
        }
    }
}

TEST(Fitting, ChainIsIncreasing) {
    const ZqRing& R = ZqRing::get(3, 2, 4);
    for (int trial = 0; trial < 20; ++trial) {
        auto A = rand_zq_matrix(R, 3, 3);
        auto e = pp::zq_fitting_exponents(zq_module(R, A, 3), 3);
        for (std::size_t j = 1; j < e.size(); ++j) EXPECT_LE(e[j], e[j - 1]);
        EXPECT_EQ(e.back(), 0);
    }
}

TEST(Fitting, InvariantUnderRowAndColumnOperations) {
    const ZqRing& R = ZqRing::get(2, 2, 5);
    ZqElem zero = ZqElem::zero(R), one = ZqElem::one(R);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t m = 2 + trial % 2, n = 3;
        auto A = rand_zq_matrix(R, m, n);
        // unitriangular row and column operations
        auto U = pp::mat_identity(m, zero, one);
        auto V = pp::mat_identity(n, zero, one);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < i; ++j) U[i][j] = rand_zq(R);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) V[i][j] = rand_zq(R);
        auto B = pp::mat_mul(pp::mat_mul(U, A, zero), V, zero);
        EXPECT_EQ(pp::zq_fitting_exponents(zq_module(R, A, n), n), pp::zq_fitting_exponents(zq_module(R, B, n), n));
    }
}

TEST(Fitting, FrobeniusBaseChange) {
    const ZqRing& R = ZqRing::get(3, 3, 4);
    for (int trial = 0; trial < 20; ++trial) {
        auto M = zq_module(R, rand_zq_matrix(R, 3, 3), 3);
        auto I = pp::fitting_ideals(M, 3);
        auto J = pp::fitting_ideals(pp::base_change(M, [](const ZqElem& x) { return x.sigma(); }), 3);
        for (std::size_t j = 0; j <= 3; ++j) {
            // the minors of sigma(A) are sigma of the minors of A, in the same order
            ASSERT_EQ(I[j].gens.size(), J[j].gens.size());
            for (std::size_t g = 0; g < I[j].gens.size(); ++g) EXPECT_EQ(I[j].gens[g].sigma(), J[j].gens[g]);
            EXPECT_EQ(pp::zq_ideal_exponent(I[j], R.L), pp::zq_ideal_exponent(J[j], R.L));
        }
    }
}

TEST(Fitting, ReductionModPBaseChange) {
    const ZqRing& R = ZqRing::get(2, 2, 5);
    const ZqRing& R1 = ZqRing::get(2, 2, 1);
    for (int trial = 0; trial < 20; ++trial) {
        auto M = zq_module(R, rand_zq_matrix(R, 2 + trial % 3, 3), 3);
        auto reduce = [&](const ZqElem& x) { return ZqElem(R1, R.change_precision(x.c, R1)); };
        auto e = pp::zq_fitting_exponents(M, 3);
        auto e1 = pp::zq_fitting_exponents(pp::base_change(M, reduce), 3);
        for (std::size_t j = 0; j <= 3; ++j) EXPECT_EQ(e1[j], std::min(e[j], 1));
    }
}

// ---------------------------------------------------------------------------

namespace {

struct ProductSetup {
    const pp::Fq& F;
    int plen;
    pp::Rat H;
    std::size_t K;
    std::vector<pp::WittTrunc> shapes;

    ProductSetup(const pp::Fq& F_, int plen_, pp::Rat H_, std::size_t K_) : F(F_), plen(plen_), H(H_), K(K_) {
        for (std::size_t k = 0; k < K; ++k) shapes.emplace_back(F, 0, plen, pp::Rat(0), H);
    }
    WittProduct zero() const { return WittProduct::constant(shapes, 0); }
    WittProduct one() const { return WittProduct::constant(shapes, 1); }
    WittProduct p_power(const std::vector<int>& e) const {
        WittProduct r = zero();
        for (std::size_t k = 0; k < K; ++k) r.c[k] = pp::witt_from_int(pp::ipow(F.p, e[k]), shapes[k]);
        return r;
    }
    WittProduct random() const {
        WittProduct r;
        for (std::size_t k = 0; k < K; ++k) r.c.push_back(rand_integral(F, plen, H, 1, 3));
        return r;
    }
};

// inverse of a unitriangular matrix: sum of powers of the nilpotent part
pp::Matrix<WittProduct> unitriangular_inverse(const pp::Matrix<WittProduct>& U, const WittProduct& zero,
                                              const WittProduct& one) {
    std::size_t n = U.size();
    auto I = pp::mat_identity(n, zero, one);
    auto N = pp::mat_sub(I, U);
    auto acc = I, pw = I;
    for (std::size_t k = 1; k < n; ++k) {
        pw = pp::mat_mul(pw, N, zero);
        acc = pp::mat_add(acc, pw);
    }
    return acc;
}

struct Engineered {
    PresentedModule<WittProduct> M;
    pp::Matrix<WittProduct> Phi, C;
    std::vector<std::vector<int>> expected;  // expected[j][k]
};

// rel = P D Q with D = diag(p^{d_i}) per component, P lower and Q upper
// unitriangular; Phi = sigma(Q)^{-1} Q and C = sigma(P) P^{-1} make the
// presentation phi-stable.
Engineered engineered(const ProductSetup& S, std::size_t n) {
    WittProduct zero = S.zero(), one = S.one();
    std::uniform_int_distribution<int> dv(0, S.plen - 1);
    std::vector<std::vector<int>> d(S.K, std::vector<int>(n));
    for (auto& row : d) {
        for (auto& x : row) x = dv(rng());
        std::sort(row.begin(), row.end());
    }
    auto D = pp::mat_identity(n, zero, one);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<int> e(S.K);
        for (std::size_t k = 0; k < S.K; ++k) e[k] = d[k][i];
        D[i][i] = S.p_power(e);
    }
    auto P = pp::mat_identity(n, zero, one), Q = P;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            P[i][j] = S.random();
            Q[j][i] = S.random();
        }
    auto sig = [](const WittProduct& x) { return x.frobenius(1); };
    Engineered E{pp::presented(pp::mat_mul(pp::mat_mul(P, D, zero), Q, zero), n, zero, one), {}, {}, {}};
    E.Phi = pp::mat_mul(unitriangular_inverse(pp::mat_map(Q, sig), zero, one), Q, zero);
    E.C = pp::mat_mul(pp::mat_map(P, sig), unitriangular_inverse(P, zero, one), zero);
    for (std::size_t j = 0; j <= n; ++j) {
        std::vector<int> ex(S.K);
        for (std::size_t k = 0; k < S.K; ++k) {
            int t = 0;
            for (std::size_t i = 0; i + j < n; ++i) t += d[k][i];
            ex[k] = std::min(t, S.plen);
        }
        E.expected.push_back(ex);
    }
    return E;
}

} // namespace

TEST(NormalForm, CyclicPSquared) {
    ProductSetup S(pp::Fq::get(2, 1), 4, pp::Rat(4), 1);
    auto M = pp::presented<WittProduct>({{S.p_power({2})}}, 1, S.zero(), S.one());
    auto Phi = pp::mat_identity(1, S.zero(), S.one());
    auto nf = pp::phi_stable_normal_form(M, Phi, Phi, 1);
    ASSERT_EQ(nf[0].generators.size(), 1u);
    EXPECT_EQ(nf[0].generators[0].n, 2);
    EXPECT_EQ(nf[0].generators[0].idempotent, std::vector<bool>{true});
    EXPECT_EQ(nf[1].generators[0].n, 0);
}

TEST(NormalForm, DiagonalPAndOne) {
    ProductSetup S(pp::Fq::get(3, 1), 3, pp::Rat(3), 1);
    WittProduct z = S.zero(), o = S.one();
    auto M = pp::presented<WittProduct>({{S.p_power({1}), z}, {z, o}}, 2, z, o);
    auto Phi = pp::mat_identity(2, z, o);
    auto nf = pp::phi_stable_normal_form(M, Phi, Phi, 2);
    EXPECT_EQ(nf[0].exponents, std::vector<int>{1});
    EXPECT_EQ(nf[1].exponents, std::vector<int>{0});
    EXPECT_EQ(nf[2].exponents, std::vector<int>{0});
}

TEST(NormalForm, IdempotentsSplitComponents) {
    // p on the first factor and 1 on the second: Fitt_0 is generated by [e]
    // with e = (0,1) together with p [1].
    ProductSetup S(pp::Fq::get(2, 1), 3, pp::Rat(4), 2);
    auto M = pp::presented<WittProduct>({{S.p_power({1, 0})}}, 1, S.zero(), S.one());
    auto Phi = pp::mat_identity(1, S.zero(), S.one());
    auto nf = pp::phi_stable_normal_form(M, Phi, Phi, 0);
    ASSERT_EQ(nf[0].generators.size(), 2u);
    EXPECT_EQ(nf[0].generators[0].n, 0);
    EXPECT_EQ(nf[0].generators[0].idempotent, (std::vector<bool>{false, true}));
    EXPECT_EQ(nf[0].generators[1].n, 1);
    EXPECT_EQ(nf[0].generators[1].idempotent, (std::vector<bool>{true, true}));
    // the generators reproduce the relation up to a unit in each factor
    auto g = pp::p_power_idempotent(S.one(), 1, {true, false}) + pp::p_power_idempotent(S.one(), 0, {false, true});
    EXPECT_TRUE(g.equal_at_precision(M.rel[0][0]));
}

TEST(NormalForm, EngineeredInstancesRecoverBlocks) {
    for (int trial = 0; trial < 6; ++trial) {
        ProductSetup S(pp::Fq::get(2, 2), 3, pp::Rat(3), 2 + trial % 2);
        std::size_t n = 2 + trial % 2;
        auto E = engineered(S, n);
        auto nf = pp::phi_stable_normal_form(E.M, E.Phi, E.C, n);
        for (std::size_t j = 0; j <= n; ++j) {
            EXPECT_EQ(nf[j].exponents, E.expected[j]) << "trial " << trial << " j " << j;
            // the idempotents form an increasing chain
            for (std::size_t g = 1; g < nf[j].generators.size(); ++g)
                for (std::size_t k = 0; k < S.K; ++k)
                    EXPECT_LE(nf[j].generators[g - 1].idempotent[k], nf[j].generators[g].idempotent[k]);
        }
    }
}

TEST(NormalForm, RejectsWrongFrobeniusDatum) {
    ProductSetup S(pp::Fq::get(2, 2), 3, pp::Rat(3), 2);
    auto E = engineered(S, 2);
    // column 0 of rel is p^{d_0} times the first column of P, which is nonzero,
    // so adding 1 to Phi[0][0] changes sigma(rel) Phi
    E.Phi[0][0] = E.Phi[0][0] + S.one();
    try {
        pp::phi_stable_normal_form(E.M, E.Phi, E.C, 2);
        ADD_FAILURE() << "perturbed datum accepted";
    } catch (const pp::error& e) {
        EXPECT_EQ(e.kind(), pp::errc::not_phi_stable);
    }
}

TEST(NormalForm, ShapeErrors) {
    ProductSetup S(pp::Fq::get(2, 1), 2, pp::Rat(2), 1);
    auto M = pp::presented<WittProduct>({{S.one()}}, 1, S.zero(), S.one());
    auto Phi = pp::mat_identity(2, S.zero(), S.one());
    EXPECT_THROW(pp::phi_stable_normal_form(M, Phi, Phi, 1), pp::error);
}
