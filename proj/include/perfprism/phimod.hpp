#pragma once
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include "matrix.hpp"
#include "polygon.hpp"
#include "robba.hpp"
#include "zq.hpp"

namespace perfprism {

// A phi-module over Q_q at p-adic precision L: phi(v) = p^(-twist) A sigma^a(v)
// with A an integral matrix over Z_q / p^L.  The twist ledger absorbs every
// negative power of p so that stored entries stay integral.
struct PhiModule {
    const ZqRing* Z = nullptr;
    int a = 1;
    int twist = 0;
    Matrix<ZqElem> A;

    PhiModule() = default;
    PhiModule(const ZqRing& R, Matrix<ZqElem> M, int a_ = 1, int twist_ = 0) : Z(&R), a(a_), twist(twist_), A(std::move(M)) {
        require(a >= 1, errc::invalid_argument, "semilinearity degree must be positive");
        for (auto& row : A) require(row.size() == A.size(), errc::invalid_argument, "phi-module matrix must be square");
    }

    static PhiModule from_ints(const ZqRing& R, const Matrix<i64>& M, int a = 1, int twist = 0) {
        return PhiModule(R, mat_map(M, [&](i64 x) { return ZqElem::from_int(R, x); }), a, twist);
    }

    // phi(e) = p^val * unit * e
    static PhiModule rank_one(const ZqRing& R, int val, const ZqElem& unit, int a = 1) {
        require(!unit.is_zero() && unit.val() == 0, errc::not_a_unit, "rank one datum needs a unit");
        if (val >= 0) return PhiModule(R, {{unit.mul_pk(val)}}, a, 0);
        return PhiModule(R, {{unit}}, a, -val);
    }

    static PhiModule trivial(const ZqRing& R, std::size_t n = 1, int a = 1) {
        return PhiModule(R, mat_identity(n, ZqElem::zero(R), ZqElem::one(R)), a, 0);
    }

    std::size_t rank() const { return A.size(); }
    int p() const { return Z->p; }
    int L() const { return Z->L; }
    int residue_degree() const { return Z->a; }

    // order of sigma^a on Q_q
    int a0() const { return Z->a / std::gcd(Z->a, a); }
};

inline Matrix<ZqElem> sigma_matrix(const Matrix<ZqElem>& A, i64 k) {
    return mat_map(A, [&](const ZqElem& x) { return x.sigma(k); });
}

// The same module read at a lower p-adic precision.
inline PhiModule at_precision(const PhiModule& M, int L) {
    require(L >= 1 && L <= M.L(), errc::insufficient_precision, "precision can only be lowered");
    const ZqRing& R = ZqRing::get(M.p(), M.residue_degree(), L);
    auto A = mat_map(M.A, [&](const ZqElem& x) { return ZqElem(R, M.Z->change_precision(x.c, R)); });
    return PhiModule(R, A, M.a, M.twist);
}

inline void require_compatible(const PhiModule& M, const PhiModule& N) {
    require(M.p() == N.p() && M.residue_degree() == N.residue_degree() && M.a == N.a, errc::coeff_mismatch,
            "phi-modules over different coefficients");
}

// Both modules at the smaller of their two precisions.
inline std::pair<PhiModule, PhiModule> common_precision(const PhiModule& M, const PhiModule& N) {
    require_compatible(M, N);
    int L = std::min(M.L(), N.L());
    return {at_precision(M, L), at_precision(N, L)};
}

// Matrix of the linear operator phi^(a a0): A sigma^a(A) ... sigma^(a(a0-1))(A), integral part.
inline Matrix<ZqElem> linearize(const PhiModule& M) {
    const ZqRing& R = *M.Z;
    Matrix<ZqElem> N = mat_identity(M.rank(), ZqElem::zero(R), ZqElem::one(R));
    for (int i = 0; i < M.a0(); ++i) N = mat_mul(N, sigma_matrix(M.A, i64(M.a) * i), ZqElem::zero(R));
    return N;
}

// Slopes with the convention slope(phi(e) = c e) = -v_p(c), sorted decreasing.
inline Polygon newton_slopes(const PhiModule& M) {
    const ZqRing& R = *M.Z;
    std::size_t n = M.rank();
    auto c = charpoly(linearize(M), ZqElem::zero(R), ZqElem::one(R));
    std::vector<Point> known;
    std::vector<std::size_t> unknown;
    for (std::size_t i = 0; i <= n; ++i) {
        std::size_t deg = n - i;
        if (c[i].is_zero()) unknown.push_back(deg);
        else known.push_back({Rat(i64(deg)), Rat(c[i].val())});
    }
    require(!c[n].is_zero(), errc::precision_exhausted, "determinant vanishes at precision");
    Polygon h = lower_hull(known);
    for (std::size_t d : unknown)
        require(polygon_at(h, Rat(i64(d))) <= Rat(R.L), errc::precision_exhausted, "Newton polygon vertex within precision slack");
    std::vector<Rat> slopes;
    for (auto& [s, m] : h.slopes)
        for (i64 k = 0; k < m.numerator(); ++k) slopes.push_back(s / Rat(M.a0()) + Rat(M.twist));
    return Polygon::decreasing(slopes);
}

struct DegreeSlope {
    Rat deg, mu;
};

inline DegreeSlope degree_slope(const PhiModule& M) {
    const ZqRing& R = *M.Z;
    ZqElem d = determinant(M.A, ZqElem::zero(R), ZqElem::one(R));
    require(!d.is_zero(), errc::not_a_unit_determinant, "determinant vanishes at precision");
    Rat deg = Rat(-d.val()) + Rat(M.twist * i64(M.rank()));
    return {deg, deg / Rat(i64(M.rank()))};
}

inline PhiModule twist(const PhiModule& M, int n) {
    PhiModule r = M;
    r.twist += n;
    return r;
}

inline PhiModule tensor(const PhiModule& M0, const PhiModule& N0) {
    auto [M, N] = common_precision(M0, N0);
    return PhiModule(*M.Z, mat_kron(M.A, N.A), M.a, M.twist + N.twist);
}

// Dual module: matrix (A^-1)^T.  With det A = p^k u the integral part is
// adj(A)^T u^-1 and the result is only known modulo p^(L - k).
inline PhiModule dual(const PhiModule& M) {
    const ZqRing& R = *M.Z;
    std::size_t n = M.rank();
    ZqElem zero = ZqElem::zero(R), one = ZqElem::one(R);
    auto c = charpoly(M.A, zero, one);
    require(!c[n].is_zero(), errc::not_a_unit_determinant, "determinant vanishes at precision");
    // Cayley-Hamilton: adj(A) = (-1)^(n-1) (A^(n-1) + c_1 A^(n-2) + ... + c_(n-1) I)
    Matrix<ZqElem> adj = mat_identity(n, zero, one);
    for (std::size_t i = 1; i < n; ++i) {
        adj = mat_mul(adj, M.A, zero);
        for (std::size_t j = 0; j < n; ++j) adj[j][j] = adj[j][j] + c[i];
    }
    if (n % 2 == 0) adj = mat_map(adj, [](const ZqElem& x) { return -x; });
    ZqElem det = (n % 2) ? zero - c[n] : c[n];
    int k = det.val();
    require(k < R.L, errc::precision_exhausted, "determinant valuation exceeds precision");
    const ZqRing& R2 = ZqRing::get(R.p, R.a, R.L - k);
    ZqElem u(R2, R.change_precision(det.div_pk(k).c, R2));
    ZqElem uinv = u.inv();
    Matrix<ZqElem> D = mat_map(mat_transpose(adj), [&](const ZqElem& x) { return ZqElem(R2, R.change_precision(x.c, R2)) * uinv; });
    return PhiModule(R2, D, M.a, k - M.twist);
}

// View as a phi^d-module: A sigma^a(A) ... sigma^(a(d-1))(A).
inline PhiModule restrict_Psi(const PhiModule& M, int d) {
    require(d >= 1, errc::invalid_argument, "restriction degree must be positive");
    const ZqRing& R = *M.Z;
    Matrix<ZqElem> N = mat_identity(M.rank(), ZqElem::zero(R), ZqElem::one(R));
    for (int i = 0; i < d; ++i) N = mat_mul(N, sigma_matrix(M.A, i64(M.a) * i), ZqElem::zero(R));
    return PhiModule(R, N, M.a * d, M.twist * d);
}

// Induction from phi^d-modules (semilinearity a) to phi^(a/d)-modules:
// M + phi^*M + ... + phi^(d-1)^*M with the cyclic block matrix.  The new twist
// is ceil(t/d); the leftover power of p sits in the corner block only.
inline PhiModule induce_Psi(const PhiModule& M, int d) {
    require(d >= 1 && M.a % d == 0, errc::invalid_argument, "induction degree must divide the semilinearity degree");
    const ZqRing& R = *M.Z;
    std::size_t n = M.rank(), N = n * std::size_t(d);
    int t = int(ceil_rat(Rat(M.twist, d)));
    ZqElem zero = ZqElem::zero(R), one = ZqElem::one(R);
    Matrix<ZqElem> B(N, std::vector<ZqElem>(N, zero));
    for (int i = 0; i + 1 < d; ++i)
        for (std::size_t j = 0; j < n; ++j) B[std::size_t(i + 1) * n + j][std::size_t(i) * n + j] = one;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) B[r][std::size_t(d - 1) * n + c] = M.A[r][c].mul_pk(d * t - M.twist);
    return PhiModule(R, B, M.a / d, t);
}

// Psi_d_*(rank one phi^d-module with matrix p^-c): pure of slope c/d.
inline PhiModule standard_pure(const ZqRing& R, int c, int d) {
    return induce_Psi(PhiModule::rank_one(R, -c, ZqElem::one(R), d), d);
}

inline bool is_etale(const PhiModule& M) {
    for (auto& [s, m] : newton_slopes(M).slopes)
        if (s != Rat(0)) return false;
    return true;
}

inline bool is_pure(const PhiModule& M, int c, int d) {
    require(d >= 1 && std::gcd(std::abs(c), d) == 1, errc::invalid_argument, "purity needs gcd(c, d) = 1 and d >= 1");
    return is_etale(twist(restrict_Psi(M, d), -c));
}

// -------------------------------------------------------------- Hom spaces

namespace detail {

// Z_p-matrix (mod p^L) of multiplication by x on Z_q in the power basis
inline Matrix<i64> zp_coords(const ZqRing& R, const ZqElem& x) {
    Matrix<i64> M(std::size_t(R.a), std::vector<i64>(std::size_t(R.a), 0));
    for (int j = 0; j < R.a; ++j) {
        std::vector<i64> e(std::size_t(R.a), 0);
        e[std::size_t(j)] = 1;
        auto col = R.mul(x.c, e);
        for (int i = 0; i < R.a; ++i) M[std::size_t(i)][std::size_t(j)] = col[std::size_t(i)];
    }
    return M;
}

} // namespace detail

// Integer matrix (mod p^L) of X -> p^(t2-t) X A1 - p^(t1-t) A2 sigma^a(X) on
// X in M_(n2 x n1)(Z_q), written in Z_p coordinates.
inline Matrix<i64> hom_operator(const PhiModule& N1, const PhiModule& N2) {
    auto [M1, M2] = common_precision(N1, N2);
    const ZqRing& R = *M1.Z;
    std::size_t n1 = M1.rank(), n2 = M2.rank(), f = std::size_t(R.a);
    int t = std::min(M1.twist, M2.twist);
    std::size_t m = n1 * n2 * f;
    Matrix<i64> T(m, std::vector<i64>(m, 0));
    ZqElem zero = ZqElem::zero(R);
    auto index = [&](std::size_t r, std::size_t c, std::size_t i) { return (r * n1 + c) * f + i; };
    for (std::size_t r = 0; r < n2; ++r)
        for (std::size_t c = 0; c < n1; ++c)
            for (std::size_t i = 0; i < f; ++i) {
                Matrix<ZqElem> X(n2, std::vector<ZqElem>(n1, zero));
                std::vector<i64> e(f, 0);
                e[i] = 1;
                X[r][c] = ZqElem(R, e);
                auto lhs = mat_mul(X, M1.A, zero);
                auto rhs = mat_mul(M2.A, sigma_matrix(X, M1.a), zero);
                for (std::size_t rr = 0; rr < n2; ++rr)
                    for (std::size_t cc = 0; cc < n1; ++cc) {
                        ZqElem v = lhs[rr][cc].mul_pk(M2.twist - t) - rhs[rr][cc].mul_pk(M1.twist - t);
                        for (std::size_t k = 0; k < f; ++k) T[index(rr, cc, k)][index(r, c, i)] = v.c[k];
                    }
            }
    return T;
}

struct HomDimension {
    int dim = 0;                  // number of elementary divisors vanishing at precision
    std::vector<int> divisors;    // elementary divisor valuations (L means zero)
};

// Dimension over Q_p of Hom_phi(M1, M2) at precision L: elementary divisors of
// the linearized operator that vanish modulo p^L.
inline HomDimension hom_dimension(const PhiModule& M1, const PhiModule& M2, int L) {
    require(L >= 1 && L <= M1.L() && L <= M2.L(), errc::insufficient_precision, "requested precision exceeds the modules");
    HomDimension h;
    h.divisors = snf_valuations(hom_operator(M1, M2), M1.p(), L);
    for (int v : h.divisors)
        if (v >= L) ++h.dim;
    return h;
}

// ------------------------------------------------------ torsion cohomology

struct TypeACohomology {
    std::vector<int> H0, H1;  // exponents k of the cyclic factors Z/p^k
};

// Kernel and cokernel of phi - 1 on (Z_q / p^L)^n.
inline TypeACohomology phi_cohomology_typeA(const PhiModule& M) {
    require(M.twist == 0, errc::invalid_argument, "type A cohomology needs an integral phi-module");
    const ZqRing& R = *M.Z;
    std::size_t n = M.rank(), f = std::size_t(R.a);
    Matrix<i64> T(n * f, std::vector<i64>(n * f, 0));
    ZqElem zero = ZqElem::zero(R);
    for (std::size_t c = 0; c < n; ++c)
        for (std::size_t i = 0; i < f; ++i) {
            std::vector<ZqElem> v(n, zero);
            std::vector<i64> e(f, 0);
            e[i] = 1;
            v[c] = ZqElem(R, e);
            for (std::size_t r = 0; r < n; ++r) {
                ZqElem acc = zero;
                for (std::size_t k = 0; k < n; ++k) acc = acc + M.A[r][k] * v[k].sigma(M.a);
                acc = acc - v[r];
                for (std::size_t k = 0; k < f; ++k) T[r * f + k][c * f + i] = acc.c[k];
            }
        }
    TypeACohomology h;
    for (int v : snf_valuations(T, R.p, R.L))
        if (v > 0) {
            h.H0.push_back(v);
            h.H1.push_back(v);
        }
    std::sort(h.H0.rbegin(), h.H0.rend());
    std::sort(h.H1.rbegin(), h.H1.rend());
    return h;
}

// ----------------------------------------------------- Lang trivialization

struct LangResult {
    int k = 0;                 // extension degree over F_q
    const Fq* field = nullptr; // F_(q^k)
    Matrix<fq_t> U;            // columns form a phi-fixed basis: A sigma^a(U) = U
};

namespace detail {

// rank of a matrix over a finite field (rows are destroyed)
inline std::size_t fq_rank(const Fq& F, Matrix<fq_t> M) {
    std::size_t r = 0, rows = M.size(), cols = rows ? M[0].size() : 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = rows;
        for (std::size_t i = r; i < rows; ++i)
            if (M[i][c]) { piv = i; break; }
        if (piv == rows) continue;
        std::swap(M[r], M[piv]);
        fq_t inv = F.inv(M[r][c]);
        for (auto& x : M[r]) x = F.mul(x, inv);
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || !M[i][c]) continue;
            fq_t f = M[i][c];
            for (std::size_t j = 0; j < cols; ++j) M[i][j] = F.sub(M[i][j], F.mul(f, M[r][j]));
        }
        ++r;
    }
    return r;
}

// kernel basis over F_p of an integer matrix mod p
inline std::vector<std::vector<int>> fp_kernel(Matrix<int> M, int p) {
    std::size_t rows = M.size(), cols = rows ? M[0].size() : 0;
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = rows;
        for (std::size_t i = r; i < rows; ++i)
            if (M[i][c]) { piv = i; break; }
        if (piv == rows) continue;
        std::swap(M[r], M[piv]);
        i64 inv = inv_mod_ppow(M[r][c], p, p);
        for (auto& x : M[r]) x = int(modnorm(x * inv, p));
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || !M[i][c]) continue;
            int f = M[i][c];
            for (std::size_t j = 0; j < cols; ++j) M[i][j] = int(modnorm(M[i][j] - f * M[r][j], p));
        }
        pivots.push_back(c);
        ++r;
    }
    std::vector<std::vector<int>> basis;
    std::vector<bool> is_piv(cols, false);
    for (auto c : pivots) is_piv[c] = true;
    for (std::size_t fcol = 0; fcol < cols; ++fcol) {
        if (is_piv[fcol]) continue;
        std::vector<int> v(cols, 0);
        v[fcol] = 1;
        for (std::size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = int(modnorm(-M[i][fcol], p));
        basis.push_back(v);
    }
    return basis;
}

} // namespace detail

// Smallest k <= max_k with U over F_(q^k) such that A sigma^a(U) = U, U invertible.
inline LangResult lang_trivialize(const Fq& F, const Matrix<fq_t>& A, int a = 1, int max_k = 12) {
    std::size_t n = A.size();
    for (int k = 1; k <= max_k; ++k) {
        if (std::pow(double(F.q), k) > double(1 << 20)) break;
        const Fq& G = Fq::get(F.p, F.a * k);
        fq_t root = subfield_root(F, G);
        Matrix<fq_t> Ab = mat_map(A, [&](fq_t x) { return embed(F, G, root, x); });
        std::size_t dim = n * std::size_t(G.a);
        // F_p-linear map u -> A sigma^a(u) - u in coordinates (entry, basis power)
        Matrix<int> T(dim, std::vector<int>(dim, 0));
        for (std::size_t j = 0; j < n; ++j)
            for (int b = 0; b < G.a; ++b) {
                std::vector<int> d(std::size_t(G.a), 0);
                d[std::size_t(b)] = 1;
                fq_t basis = G.encode(d), s = G.frob(basis, a);
                for (std::size_t i = 0; i < n; ++i) {
                    fq_t v = G.mul(Ab[i][j], s);
                    if (i == j) v = G.sub(v, basis);
                    auto dv = G.digits(v);
                    for (int c = 0; c < G.a; ++c) T[i * std::size_t(G.a) + std::size_t(c)][j * std::size_t(G.a) + std::size_t(b)] = dv[std::size_t(c)];
                }
            }
        auto ker = detail::fp_kernel(T, F.p);
        // greedily collect F_(q^k)-independent solutions
        Matrix<fq_t> cols;
        for (auto& v : ker) {
            std::vector<fq_t> u(n);
            for (std::size_t i = 0; i < n; ++i)
                u[i] = G.encode(std::vector<int>(v.begin() + long(i) * G.a, v.begin() + long(i + 1) * G.a));
            cols.push_back(u);
            if (detail::fq_rank(G, cols) < cols.size()) cols.pop_back();
            if (cols.size() == n) break;
        }
        if (cols.size() == n) {
            LangResult res;
            res.k = k;
            res.field = &G;
            res.U = mat_transpose(cols);
            return res;
        }
    }
    fail(errc::search_exhausted, "no trivializing extension within the degree bound");
}

// ----------------------------------------------------------- HN filtration

struct HNCheck {
    Polygon polygon;            // Newton polygon of the assembled extension
    Polygon block_polygon;      // polygon of the block slopes
    bool matches = false;
    int admissible_orderings = 0;  // block orderings with strictly decreasing slopes (1 certifies uniqueness)
};

// Assemble an upper block-triangular phi-module from pure blocks (slopes strictly
// decreasing) and glue blocks glue[{i, j}] (i < j, integral entries of size n_i x n_j,
// taken relative to the common twist).
inline HNCheck hn_filtration_check(const std::vector<PhiModule>& blocks,
                                   const std::map<std::pair<std::size_t, std::size_t>, Matrix<ZqElem>>& glue = {}) {
    require(!blocks.empty(), errc::invalid_argument, "no blocks");
    std::vector<Rat> block_slope;
    for (auto& B : blocks) {
        require(B.Z == blocks.front().Z && B.a == blocks.front().a, errc::coeff_mismatch, "blocks over different coefficients");
        auto P = newton_slopes(B);
        require(P.slopes.size() == 1, errc::slope_order_violation, "block is not pure");
        block_slope.push_back(P.slopes.front().first);
    }
    for (std::size_t i = 1; i < blocks.size(); ++i)
        require(block_slope[i] < block_slope[i - 1], errc::slope_order_violation, "block slopes must strictly decrease");

    const ZqRing& R = *blocks.front().Z;
    int T = 0;
    for (auto& B : blocks) T = std::max(T, B.twist);
    std::vector<std::size_t> off{0};
    for (auto& B : blocks) off.push_back(off.back() + B.rank());
    std::size_t N = off.back();
    Matrix<ZqElem> A(N, std::vector<ZqElem>(N, ZqElem::zero(R)));
    for (std::size_t b = 0; b < blocks.size(); ++b)
        for (std::size_t i = 0; i < blocks[b].rank(); ++i)
            for (std::size_t j = 0; j < blocks[b].rank(); ++j) A[off[b] + i][off[b] + j] = blocks[b].A[i][j].mul_pk(T - blocks[b].twist);
    for (auto& [ij, G] : glue) {
        auto [bi, bj] = ij;
        require(bi < bj && bj < blocks.size(), errc::invalid_argument, "glue must sit above the diagonal");
        for (std::size_t i = 0; i < blocks[bi].rank(); ++i)
            for (std::size_t j = 0; j < blocks[bj].rank(); ++j) A[off[bi] + i][off[bj] + j] = G[i][j];
    }
    HNCheck out;
    out.polygon = newton_slopes(PhiModule(R, A, blocks.front().a, T));
    std::vector<Rat> all;
    for (std::size_t b = 0; b < blocks.size(); ++b)
        for (std::size_t i = 0; i < blocks[b].rank(); ++i) all.push_back(block_slope[b]);
    out.block_polygon = Polygon::decreasing(all);
    out.matches = out.polygon == out.block_polygon;
    std::vector<std::size_t> perm(blocks.size());
    std::iota(perm.begin(), perm.end(), 0);
    do {
        bool ok = true;
        for (std::size_t i = 1; i < perm.size(); ++i) ok = ok && block_slope[perm[i]] < block_slope[perm[i - 1]];
        if (ok) ++out.admissible_orderings;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

// ------------------------------------------------- Robba-slice coefficients

// Degree of a phi-module over a Robba slice: -unit_valuation(det) + n twist.
inline Rat robba_degree(const Matrix<RobbaElem>& A, int twist = 0) {
    require(!A.empty(), errc::invalid_argument, "empty matrix");
    const RobbaElem& e = A[0][0];
    WittTrunc shape(e.x.field(), 0, e.x.plen(), e.x.lo(), e.x.H(), e.x.scale(), e.x.K());
    RobbaElem zero(shape, e.s, e.r);
    RobbaElem one(witt_one(shape), e.s, e.r);
    RobbaElem d = determinant(A, zero, one);
    auto v = unit_valuation(d);
    require(v.has_value(), errc::not_a_unit_determinant, "determinant is not a certified unit");
    return Rat(-*v) + Rat(twist * i64(A.size()));
}

} // namespace perfprism
