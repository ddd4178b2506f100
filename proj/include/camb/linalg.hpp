#pragma once

/// \file linalg.hpp
/// \brief Dense linear algebra for small (n <= 6) matrices.
///
/// Matrices are row-major std::vector buffers with an explicit dimension.
/// The entry type is double for plain values or jet when derivatives must
/// ride along (matrix inversion propagates them through the elimination).
/// Pivoting always compares scalar magnitudes — for jets, the value part.

#include <cmath>
#include <string>
#include <vector>

#include "camb/errors.hpp"
#include "camb/jet.hpp"

namespace camb {

/// Pivot threshold for matrix inversion: a pivot with |value| below this
/// is treated as singular.
inline constexpr double kPivotThreshold = 1e-12;

namespace detail {

inline double scalar_value(double x) noexcept { return x; }
inline double scalar_value(const jet& x) noexcept { return x.value(); }

inline double one_like(double) noexcept { return 1.0; }
inline jet one_like(const jet& x) { return jet::constant(1.0, x.dim(), x.order()); }

inline double zero_like(double) noexcept { return 0.0; }
inline jet zero_like(const jet& x) { return jet::constant(0.0, x.dim(), x.order()); }

}  // namespace detail

/// Invert an n x n matrix by Gauss-Jordan elimination with partial
/// pivoting on |value|.  Throws singular_metric_error (annotated with
/// `context`) when a pivot falls below kPivotThreshold.
template <class T>
std::vector<T> invert_matrix(std::vector<T> m, int n, const std::string& context = "matrix") {
    if (static_cast<int>(m.size()) != n * n)
        throw dimension_error("invert_matrix: buffer size does not match dimension");
    auto at = [n](std::vector<T>& buf, int i, int j) -> T& {
        return buf[static_cast<std::size_t>(i * n + j)];
    };
    std::vector<T> inv(static_cast<std::size_t>(n) * static_cast<std::size_t>(n),
                       detail::zero_like(m[0]));
    for (int i = 0; i < n; ++i) at(inv, i, i) = detail::one_like(m[0]);

    for (int col = 0; col < n; ++col) {
        int pivot = col;
        double best = std::abs(detail::scalar_value(at(m, col, col)));
        for (int r = col + 1; r < n; ++r) {
            const double cand = std::abs(detail::scalar_value(at(m, r, col)));
            if (cand > best) {
                best = cand;
                pivot = r;
            }
        }
        if (best < kPivotThreshold)
            throw singular_metric_error(context + " is singular (pivot " +
                                        std::to_string(best) + " in column " +
                                        std::to_string(col) + ")");
        if (pivot != col)
            for (int j = 0; j < n; ++j) {
                std::swap(at(m, pivot, j), at(m, col, j));
                std::swap(at(inv, pivot, j), at(inv, col, j));
            }
        const T diag = at(m, col, col);
        for (int j = 0; j < n; ++j) {
            at(m, col, j) = at(m, col, j) / diag;
            at(inv, col, j) = at(inv, col, j) / diag;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            // No early-out on a zero *value* here: a jet entry can carry a
            // vanishing value with live derivatives (e.g. an off-diagonal
            // metric component crossing zero), and its elimination step
            // still contributes to the derivative part of the inverse.
            const T factor = at(m, r, col);
            for (int j = 0; j < n; ++j) {
                at(m, r, j) = at(m, r, j) - factor * at(m, col, j);
                at(inv, r, j) = at(inv, r, j) - factor * at(inv, col, j);
            }
        }
    }
    return inv;
}

/// Eigen-decomposition of a symmetric matrix by the cyclic Jacobi method.
/// `values` ascend; `vectors` is row-major with row k the unit eigenvector
/// of values[k].
struct sym_eigen {
    std::vector<double> values;
    std::vector<double> vectors;
};

inline sym_eigen jacobi_eigen(std::vector<double> a, int n) {
    if (static_cast<int>(a.size()) != n * n)
        throw dimension_error("jacobi_eigen: buffer size does not match dimension");
    auto at = [n](std::vector<double>& buf, int i, int j) -> double& {
        return buf[static_cast<std::size_t>(i * n + j)];
    };
    std::vector<double> v(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) at(v, i, i) = 1.0;

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += at(a, i, j) * at(a, i, j);
        if (off < 1e-300) break;
        double norm = off;
        for (int i = 0; i < n; ++i) norm += at(a, i, i) * at(a, i, i);
        if (off <= 1e-30 * norm) break;

        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                const double apq = at(a, p, q);
                if (apq == 0.0) continue;
                const double theta = (at(a, q, q) - at(a, p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = at(a, k, p), akq = at(a, k, q);
                    at(a, k, p) = c * akp - s * akq;
                    at(a, k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = at(a, p, k), aqk = at(a, q, k);
                    at(a, p, k) = c * apk - s * aqk;
                    at(a, q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = at(v, k, p), vkq = at(v, k, q);
                    at(v, k, p) = c * vkp - s * vkq;
                    at(v, k, q) = s * vkp + c * vkq;
                }
            }
    }

    sym_eigen out;
    out.values.resize(static_cast<std::size_t>(n));
    out.vectors.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (at(a, order[static_cast<std::size_t>(j)], order[static_cast<std::size_t>(j)]) <
                at(a, order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]))
                std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    for (int k = 0; k < n; ++k) {
        const int src = order[static_cast<std::size_t>(k)];
        out.values[static_cast<std::size_t>(k)] = at(a, src, src);
        for (int i = 0; i < n; ++i)
            out.vectors[static_cast<std::size_t>(k * n + i)] = at(v, i, src);
    }
    return out;
}

/// Orthonormalize the coordinate basis against a positive-definite Gram
/// matrix (row-major, values).  Returns basis vectors as rows.  Throws
/// degenerate_plane_error if the Gram matrix fails to be positive.
inline std::vector<double> gram_schmidt_basis(const std::vector<double>& gram, int n) {
    std::vector<double> basis(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    auto inner = [&](const double* u, const double* w) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                s += gram[static_cast<std::size_t>(i * n + j)] * u[i] * w[j];
        return s;
    };
    for (int k = 0; k < n; ++k) {
        double* bk = &basis[static_cast<std::size_t>(k * n)];
        bk[k] = 1.0;
        for (int prev = 0; prev < k; ++prev) {
            const double* bp = &basis[static_cast<std::size_t>(prev * n)];
            const double proj = inner(bk, bp);
            for (int i = 0; i < n; ++i) bk[i] -= proj * bp[i];
        }
        const double norm2 = inner(bk, bk);
        if (!(norm2 > 1e-14))
            throw degenerate_plane_error("Gram matrix is not positive definite");
        const double inv = 1.0 / std::sqrt(norm2);
        for (int i = 0; i < n; ++i) bk[i] *= inv;
    }
    return basis;
}

}  // namespace camb
