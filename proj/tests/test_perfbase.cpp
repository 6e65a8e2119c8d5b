#include <gtest/gtest.h>

#include "helpers.hpp"

using pp::Rat;

TEST(Fq, FieldAxiomsSmall) {
    for (auto [p, a] : {std::pair{2, 1}, {2, 3}, {3, 2}, {5, 1}, {2, 8}}) {
        const auto& F = pp::Fq::get(p, a);
        for (int i = 0; i < 200; ++i) {
            pp::fq_t x = rand_fq(F), y = rand_fq(F), z = rand_fq(F);
            EXPECT_EQ(F.mul(x, F.add(y, z)), F.add(F.mul(x, y), F.mul(x, z)));
            EXPECT_EQ(F.mul(F.mul(x, y), z), F.mul(x, F.mul(y, z)));
            EXPECT_EQ(F.add(x, F.neg(x)), 0u);
            EXPECT_EQ(F.pow(x, F.q), x);
            if (x) { EXPECT_EQ(F.mul(x, F.inv(x)), 1u); }
            EXPECT_EQ(F.frob(F.frob(x, 1), -1), x);
            EXPECT_EQ(F.frob(F.add(x, y), 1), F.add(F.frob(x, 1), F.frob(y, 1)));
        }
    }
}

TEST(Fq, LargeFieldWithoutTables) {
    const auto& F = pp::Fq::get(2, 20);
    for (int i = 0; i < 20; ++i) {
        pp::fq_t x = rand_fq(F, true);
        EXPECT_EQ(F.mul(x, F.inv(x)), 1u);
        EXPECT_EQ(F.frob(x, 20), x);
    }
}

TEST(Fq, SubfieldEmbeddingIsAHomomorphism) {
    const auto& S = pp::Fq::get(2, 2);
    const auto& B = pp::Fq::get(2, 6);
    pp::fq_t r = pp::subfield_root(S, B);
    for (pp::fq_t x = 0; x < S.q; ++x)
        for (pp::fq_t y = 0; y < S.q; ++y) {
            EXPECT_EQ(pp::embed(S, B, r, S.mul(x, y)), B.mul(pp::embed(S, B, r, x), pp::embed(S, B, r, y)));
            EXPECT_EQ(pp::embed(S, B, r, S.add(x, y)), B.add(pp::embed(S, B, r, x), pp::embed(S, B, r, y)));
        }
}

TEST(PerfSeries, CharTwoDoubling) {
    const auto& F = pp::Fq::get(2, 1);
    auto t = pp::PerfSeries::monomial(F, 1, Rat(1), 0, Rat(0), Rat(5));
    EXPECT_TRUE((t + t).is_zero());
}

TEST(PerfSeries, GeometricInverse) {
    const auto& F = pp::Fq::get(3, 1);
    pp::PerfSeries x(F, 0, Rat(0), Rat(6));
    x.set(Rat(0), 1);
    x.set(Rat(1), 1);
    auto y = x.inv();
    for (int i = 0; i < 6; ++i) EXPECT_EQ(y.coeff(Rat(i)), F.from_int(i % 2 ? -1 : 1));
    auto one = x * y;
    EXPECT_EQ(one.size(), 1u);
    EXPECT_EQ(one.coeff(Rat(0)), 1u);
}

TEST(PerfSeries, FractionalExponentsAdd) {
    for (int p : {2, 3, 5}) {
        const auto& F = pp::Fq::get(p, 1);
        auto a = pp::PerfSeries::monomial(F, 1, Rat(1, p), 1, Rat(0), Rat(4));
        auto b = pp::PerfSeries::monomial(F, 1, Rat(p - 1, p), 1, Rat(0), Rat(4));
        auto c = a * b;
        EXPECT_EQ(c.size(), 1u);
        EXPECT_EQ(c.coeff(Rat(1)), 1u);
    }
}

TEST(PerfSeries, FrobeniusExamples) {
    const auto& F = pp::Fq::get(3, 2);
    auto t = pp::PerfSeries::monomial(F, 1, Rat(1), 0, Rat(0), Rat(10));
    auto tp = t.frobenius(1);
    EXPECT_EQ(tp.coeff(Rat(3)), 1u);
    EXPECT_EQ(tp.hi(), Rat(30));

    const auto& F5 = pp::Fq::get(5, 1);
    pp::PerfSeries one_pi(F5, 0, Rat(0), Rat(3), Rat(5, 4));
    one_pi.set(Rat(0), 1);
    one_pi.set(Rat(1), 1);
    auto root = one_pi.frobenius(-1);
    EXPECT_EQ(root.size(), 2u);
    EXPECT_EQ(root.coeff(Rat(1, 5)), 1u);
    EXPECT_EQ(root.coeff(Rat(0)), 1u);
    EXPECT_TRUE(root.frobenius(1) == one_pi);

    for (pp::fq_t c = 1; c < F.q; ++c) {
        auto k = pp::PerfSeries::constant(F, c, 0, Rat(1));
        EXPECT_EQ(k.frobenius(1).coeff(Rat(0)), F.pow(c, 3));
    }
}

TEST(PerfSeries, FrobeniusOverflow) {
    const auto& F = pp::Fq::get(2, 1);
    auto t = pp::PerfSeries::monomial(F, 1, Rat(1), 0, Rat(0), Rat(2));
    EXPECT_THROW(t.frobenius(-5, 3), pp::error);
    try {
        t.frobenius(-5, 3);
    } catch (const pp::error& e) {
        EXPECT_EQ(e.kind(), pp::errc::denominator_overflow);
    }
}

TEST(PerfSeries, CyclotomicNormalisation) {
    for (int p : {2, 3, 5, 7}) {
        const auto& F = pp::Fq::get(p, 1);
        Rat scale(p, p - 1);
        auto pi = pp::PerfSeries::monomial(F, 1, Rat(1), 0, Rat(0), Rat(4), scale);
        auto v = pi.tnorm();
        EXPECT_FALSE(v.zero_to_precision);
        EXPECT_EQ(v.v, Rat(p, p - 1));
    }
    const auto& F = pp::Fq::get(2, 1);
    auto t = pp::PerfSeries::monomial(F, 1, Rat(1), 0, Rat(0), Rat(4));
    EXPECT_EQ(t.tnorm().v, Rat(1));
    auto z = pp::PerfSeries::zero(F, 0, Rat(0), Rat(4));
    EXPECT_TRUE(z.tnorm().zero_to_precision);
    EXPECT_EQ(z.tnorm().v, Rat(4));
}

TEST(PerfSeries, UnitInverseRejectsZero) {
    const auto& F = pp::Fq::get(2, 1);
    auto z = pp::PerfSeries::zero(F, 0, Rat(0), Rat(4));
    try {
        z.inv();
        FAIL();
    } catch (const pp::error& e) {
        EXPECT_EQ(e.kind(), pp::errc::not_a_unit);
    }
}

TEST(PerfSeries, RingAxiomsRandom) {
    for (auto [p, a] : {std::pair{2, 2}, {3, 1}, {5, 1}}) {
        const auto& F = pp::Fq::get(p, a);
        for (int i = 0; i < 60; ++i) {
            auto x = rand_series(F, 2, Rat(0), Rat(3), 6);
            auto y = rand_series(F, 1, Rat(0), Rat(3), 6);
            auto z = rand_series(F, 2, Rat(0), Rat(3), 6);
            // all operands live in [0, 3); keep products at the fixed truncation
            auto m = [](const pp::PerfSeries& u, const pp::PerfSeries& v) {
                return pp::PerfSeries::mul_trunc(u, v, Rat(0), Rat(3));
            };
            EXPECT_TRUE(m(x, y + z).same_terms(m(x, y) + m(x, z)));
            EXPECT_TRUE(m(m(x, y), z).same_terms(m(x, m(y, z))));
            EXPECT_TRUE(m(x, y).same_terms(m(y, x)));
            EXPECT_TRUE(((x + y) + z).same_terms(x + (y + z)));
            EXPECT_TRUE(x.frobenius(-1).frobenius(1) == x);
            EXPECT_TRUE(m(x, y).frobenius(1).same_terms((x.frobenius(1) * y.frobenius(1)).truncated(Rat(3 * p))));
        }
    }
}

TEST(PerfSeries, ValuationProperties) {
    // oracle: the minimal exponent is found by scanning the dense coefficient table
    for (int p : {2, 3}) {
        const auto& F = pp::Fq::get(p, 2);
        for (int i = 0; i < 200; ++i) {
            auto x = rand_series(F, 1, Rat(0), Rat(2), 3);
            auto y = rand_series(F, 1, Rat(0), Rat(2), 3);
            if (x.is_zero() || y.is_zero()) continue;
            auto xy = x * y;
            auto dense_min = [&](const pp::PerfSeries& s) {
                for (pp::i64 n = 0; n < 4 * p * p; ++n)
                    if (s.coeff(Rat(n, p)) != 0) return Rat(n, p);
                return s.hi();
            };
            EXPECT_EQ(xy.tnorm().v, dense_min(x) + dense_min(y));
            auto s = x + y;
            EXPECT_GE(s.tnorm().v, std::min(x.tnorm().v, y.tnorm().v));
            if (x.tnorm().v != y.tnorm().v) { EXPECT_EQ(s.tnorm().v, std::min(x.tnorm().v, y.tnorm().v)); }
        }
    }
}

TEST(PerfSeries, InverseMatchesWindow) {
    const auto& F = pp::Fq::get(2, 3);
    for (int i = 0; i < 40; ++i) {
        auto x = rand_unit(F, 2, Rat(5), 8).shifted(Rat(3, 4));
        auto y = x.inv();
        auto prod = x * y;
        EXPECT_EQ(prod.size(), 1u);
        EXPECT_EQ(prod.coeff(Rat(0)), 1u);
        EXPECT_EQ(prod.hi(), Rat(5) - Rat(0));
    }
}

TEST(Zq, TeichmullerAndSigma) {
    const auto& R = pp::ZqRing::get(3, 2, 5);
    const auto& F = *R.F;
    for (pp::fq_t c = 0; c < F.q; ++c) {
        auto T = R.teichmuller(c);
        EXPECT_EQ(R.pow(T, F.q), T);
        EXPECT_EQ(R.reduce(T), c);
        EXPECT_EQ(R.sigma(T, 1), R.teichmuller(F.frob(c, 1)));
    }
    for (int i = 0; i < 50; ++i) {
        pp::ZqElem x(R, {std::int64_t(rng()() % R.mod), std::int64_t(rng()() % R.mod)});
        pp::ZqElem y(R, {std::int64_t(rng()() % R.mod), std::int64_t(rng()() % R.mod)});
        EXPECT_EQ((x * y).sigma(), x.sigma() * y.sigma());
        EXPECT_EQ(x.sigma(2), x);
        if (x.val() == 0) { EXPECT_EQ(x * x.inv(), pp::ZqElem::one(R)); }
    }
}

TEST(Matrix, CharpolyAgainstCofactorExpansion) {
    // integer matrices; determinant checked against a direct Laplace expansion
    std::function<long(const pp::Matrix<long>&)> laplace = [&](const pp::Matrix<long>& A) -> long {
        std::size_t n = A.size();
        if (n == 0) return 1;
        long s = 0;
        for (std::size_t j = 0; j < n; ++j) {
            pp::Matrix<long> B;
            for (std::size_t i = 1; i < n; ++i) {
                std::vector<long> row;
                for (std::size_t k = 0; k < n; ++k)
                    if (k != j) row.push_back(A[i][k]);
                B.push_back(row);
            }
            s += (j % 2 ? -1 : 1) * A[0][j] * laplace(B);
        }
        return s;
    };
    std::uniform_int_distribution<long> d(-4, 4);
    for (int n = 1; n <= 5; ++n)
        for (int it = 0; it < 20; ++it) {
            pp::Matrix<long> A = pp::mat_filled<long>(n, n, 0);
            for (auto& r : A)
                for (auto& e : r) e = d(rng());
            auto c = pp::charpoly(A, 0L, 1L);
            ASSERT_EQ(c.size(), std::size_t(n + 1));
            EXPECT_EQ(c[0], 1);
            EXPECT_EQ(pp::determinant(A, 0L, 1L), laplace(A));
            long tr = 0;
            for (int i = 0; i < n; ++i) tr += A[i][i];
            EXPECT_EQ(c[1], -tr);
            // det(xI - A) at x = 2 by direct expansion
            pp::Matrix<long> B = A;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) B[i][j] = (i == j ? 2 : 0) - A[i][j];
            long val = 0;
            for (int i = 0; i <= n; ++i) val = val * 2 + c[i];
            EXPECT_EQ(val, laplace(B));
        }
}

TEST(Zq, SmithValuations) {
    // diag(1, p, p^2) conjugated by unimodular integer matrices
    pp::Matrix<pp::i64> D = {{1, 0, 0}, {0, 3, 0}, {0, 0, 9}};
    pp::Matrix<pp::i64> U = {{1, 2, 0}, {0, 1, 5}, {0, 0, 1}}, V = {{1, 0, 0}, {4, 1, 0}, {7, 1, 1}};
    auto A = pp::mat_mul(pp::mat_mul(U, D, pp::i64(0)), V, pp::i64(0));
    auto v = pp::snf_valuations(A, 3, 4);
    std::sort(v.begin(), v.end());
    EXPECT_EQ(v, (std::vector<int>{0, 1, 2}));
    pp::Matrix<pp::i64> Z = {{0, 0}, {0, 27}};
    auto w = pp::snf_valuations(Z, 3, 3);
    std::sort(w.begin(), w.end());
    EXPECT_EQ(w, (std::vector<int>{3, 3}));
}
