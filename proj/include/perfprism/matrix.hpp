#pragma once
#include <functional>
#include <vector>

#include "error.hpp"

namespace perfprism {

template <class T>
using Matrix = std::vector<std::vector<T>>;

template <class T>
Matrix<T> mat_filled(std::size_t r, std::size_t c, const T& v) {
    return Matrix<T>(r, std::vector<T>(c, v));
}

template <class T>
Matrix<T> mat_identity(std::size_t n, const T& zero, const T& one) {
    Matrix<T> m = mat_filled(n, n, zero);
    for (std::size_t i = 0; i < n; ++i) m[i][i] = one;
    return m;
}

template <class T>
Matrix<T> mat_mul(const Matrix<T>& A, const Matrix<T>& B, const T& zero) {
    require(!A.empty() && A[0].size() == B.size(), errc::invalid_argument, "matrix shape mismatch");
    std::size_t n = A.size(), m = B[0].size(), k = B.size();
    Matrix<T> C = mat_filled(n, m, zero);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            T acc = zero;
            for (std::size_t l = 0; l < k; ++l) acc = acc + A[i][l] * B[l][j];
            C[i][j] = acc;
        }
    return C;
}

template <class T>
Matrix<T> mat_add(const Matrix<T>& A, const Matrix<T>& B) {
    Matrix<T> C = A;
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = 0; j < A[i].size(); ++j) C[i][j] = A[i][j] + B[i][j];
    return C;
}

template <class T>
Matrix<T> mat_sub(const Matrix<T>& A, const Matrix<T>& B) {
    Matrix<T> C = A;
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = 0; j < A[i].size(); ++j) C[i][j] = A[i][j] - B[i][j];
    return C;
}

template <class T, class F>
auto mat_map(const Matrix<T>& A, F f) {
    using U = decltype(f(A[0][0]));
    Matrix<U> C;
    for (auto& row : A) {
        std::vector<U> r;
        for (auto& x : row) r.push_back(f(x));
        C.push_back(std::move(r));
    }
    return C;
}

template <class T>
Matrix<T> mat_transpose(const Matrix<T>& A) {
    if (A.empty()) return A;
    Matrix<T> C(A[0].size(), std::vector<T>(A.size(), A[0][0]));
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = 0; j < A[i].size(); ++j) C[j][i] = A[i][j];
    return C;
}

template <class T>
Matrix<T> mat_kron(const Matrix<T>& A, const Matrix<T>& B) {
    std::size_t ar = A.size(), ac = A[0].size(), br = B.size(), bc = B[0].size();
    Matrix<T> C(ar * br, std::vector<T>(ac * bc, A[0][0]));
    for (std::size_t i = 0; i < ar; ++i)
        for (std::size_t j = 0; j < ac; ++j)
            for (std::size_t k = 0; k < br; ++k)
                for (std::size_t l = 0; l < bc; ++l) C[i * br + k][j * bc + l] = A[i][j] * B[k][l];
    return C;
}

// Division-free characteristic polynomial (Berkowitz).  Returns c_0..c_n with
// det(X I - A) = sum_i c_i X^(n-i), c_0 = 1.
template <class T>
std::vector<T> charpoly(const Matrix<T>& A, const T& zero, const T& one) {
    std::size_t n = A.size();
    std::vector<T> c{one};
    for (std::size_t r = 0; r < n; ++r) {
        // leading principal block of size r, new row/col r
        std::vector<T> R(A[r].begin(), A[r].begin() + r);
        std::vector<T> C(r, zero);
        for (std::size_t i = 0; i < r; ++i) C[i] = A[i][r];
        T a = A[r][r];
        // Toeplitz column: 1, -a, -R C, -R M C, -R M^2 C, ...
        std::vector<T> col{one, zero - a};
        std::vector<T> v = C;
        for (std::size_t k = 0; k < r; ++k) {
            T s = zero;
            for (std::size_t i = 0; i < r; ++i) s = s + R[i] * v[i];
            col.push_back(zero - s);
            std::vector<T> nv(r, zero);
            for (std::size_t i = 0; i < r; ++i) {
                T acc = zero;
                for (std::size_t j = 0; j < r; ++j) acc = acc + A[i][j] * v[j];
                nv[i] = acc;
            }
            v = nv;
        }
        std::vector<T> nc(c.size() + 1, zero);
        for (std::size_t i = 0; i < nc.size(); ++i)
            for (std::size_t j = 0; j <= i && j < col.size(); ++j)
                if (i - j < c.size()) nc[i] = nc[i] + col[j] * c[i - j];
        c = nc;
    }
    return c;
}

template <class T>
T determinant(const Matrix<T>& A, const T& zero, const T& one) {
    auto c = charpoly(A, zero, one);
    T d = c.back();
    return (A.size() % 2) ? zero - d : d;
}

// Minor with the given row and column index sets (Laplace-free, via Berkowitz).
template <class T>
T minor_det(const Matrix<T>& A, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols, const T& zero,
            const T& one) {
    Matrix<T> S(rows.size(), std::vector<T>(cols.size(), zero));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) S[i][j] = A[rows[i]][cols[j]];
    if (rows.empty()) return one;
    return determinant(S, zero, one);
}

inline void for_each_subset(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& f) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    if (k > n) return;
    while (true) {
        f(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

} // namespace perfprism
