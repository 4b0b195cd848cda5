#include "morphrom/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "morphrom/errors.hpp"

namespace morphrom {

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
    if (static_cast<int>(x.size()) != a.cols) throw ShapeError("matvec: size mismatch");
    std::vector<double> y(static_cast<std::size_t>(a.rows), 0.0);
    for (int j = 0; j < a.cols; ++j) {
        const double* c = a.col(j);
        double xj = x[static_cast<std::size_t>(j)];
        for (int i = 0; i < a.rows; ++i) y[static_cast<std::size_t>(i)] += c[i] * xj;
    }
    return y;
}

std::vector<double> matvec_t(const Matrix& a, std::span<const double> x) {
    if (static_cast<int>(x.size()) != a.rows) throw ShapeError("matvec_t: size mismatch");
    std::vector<double> y(static_cast<std::size_t>(a.cols), 0.0);
    for (int j = 0; j < a.cols; ++j) y[static_cast<std::size_t>(j)] = dot(a.col_span(j), x);
    return y;
}

Matrix gram(const Matrix& a) {
    Matrix g(a.cols, a.cols);
    for (int i = 0; i < a.cols; ++i) {
        for (int j = i; j < a.cols; ++j) {
            double v = dot(a.col_span(i), a.col_span(j));
            g(i, j) = v;
            g(j, i) = v;
        }
    }
    return g;
}

EigResult jacobi_eigh(const Matrix& sym, int max_sweeps) {
    if (sym.rows != sym.cols) throw ShapeError("jacobi_eigh: matrix not square");
    int n = sym.rows;
    Matrix a = sym;
    Matrix v = Matrix::identity(n);
    if (n == 1) return {{a(0, 0)}, v};

    double frob = 0.0;
    for (double x : a.a) frob += x * x;
    frob = std::sqrt(frob);
    // Off-diagonal entries below the rotation-noise floor cannot be
    // annihilated further; chasing them stalls the sweep loop.
    const double thr = 3e-15 * frob;

    bool converged = (frob == 0.0);
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = a(p, q);
                if (std::abs(apq) <= thr) continue;
                rotated = true;
                double app = a(p, p), aqq = a(q, q);
                // Rotation angle from the classical two-by-two reduction.
                double theta = (aqq - app) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;

                for (int k = 0; k < n; ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
        converged = !rotated;
    }
    if (!converged)
        throw ConvergenceError("jacobi_eigh: rotations did not converge", thr, max_sweeps);

    EigResult res;
    res.values.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) res.values[static_cast<std::size_t>(i)] = a(i, i);

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        return res.values[static_cast<std::size_t>(x)] > res.values[static_cast<std::size_t>(y)];
    });
    EigResult sorted;
    sorted.values.resize(static_cast<std::size_t>(n));
    sorted.vectors = Matrix(n, n);
    for (int i = 0; i < n; ++i) {
        int src = order[static_cast<std::size_t>(i)];
        sorted.values[static_cast<std::size_t>(i)] = res.values[static_cast<std::size_t>(src)];
        for (int k = 0; k < n; ++k) sorted.vectors(k, i) = v(k, src);
    }
    return sorted;
}

SvdResult one_sided_jacobi_svd(Matrix a, int max_sweeps) {
    const int m = a.rows, n = a.cols;
    if (m == 0 || n == 0) throw ShapeError("one_sided_jacobi_svd: empty matrix");

    double frob2 = 0.0;
    for (double x : a.a) frob2 += x * x;
    SvdResult res;
    if (frob2 == 0.0) {
        res.u = Matrix(m, 0);
        return res;
    }
    // Columns at or below this norm are rounding debris: rotations against the
    // surviving columns re-seed them with noise every sweep, so demanding
    // relative orthogonality from them never terminates.
    const double floor2 = frob2 * 1e-28;
    const double tol = 1e-14;

    bool converged = false;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double* cp = a.col(p);
                double* cq = a.col(q);
                double app = 0, aqq = 0, apq = 0;
                for (int k = 0; k < m; ++k) {
                    app += cp[k] * cp[k];
                    aqq += cq[k] * cq[k];
                    apq += cp[k] * cq[k];
                }
                if (app <= floor2 && aqq <= floor2) continue;
                if (apq * apq <= tol * tol * app * aqq) continue;
                double zeta = (aqq - app) / (2.0 * apq);
                double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                // A rotation that moves less norm than the debris floor is a
                // numerical no-op and must not keep the sweep loop alive.
                if (t * t * std::max(app, aqq) <= floor2) continue;
                rotated = true;
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = c * t;
                for (int k = 0; k < m; ++k) {
                    double xp = cp[k], xq = cq[k];
                    cp[k] = c * xp - s * xq;
                    cq[k] = s * xp + c * xq;
                }
            }
        }
        converged = !rotated;
    }
    if (!converged)
        throw ConvergenceError("one_sided_jacobi_svd: sweeps did not converge", tol, max_sweeps);

    std::vector<double> norms(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) norms[static_cast<std::size_t>(j)] = norm2(a.col_span(j));

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        return norms[static_cast<std::size_t>(x)] > norms[static_cast<std::size_t>(y)];
    });

    const int keep = std::min(m, n);
    const double dead = std::sqrt(floor2);
    res.u = Matrix(m, keep);
    res.sigma.resize(static_cast<std::size_t>(keep));
    std::vector<char> live(static_cast<std::size_t>(keep), 0);
    for (int j = 0; j < keep; ++j) {
        int src = order[static_cast<std::size_t>(j)];
        double sv = norms[static_cast<std::size_t>(src)];
        res.sigma[static_cast<std::size_t>(j)] = sv;
        if (sv <= dead) continue;  // direction unrecoverable, leave the column zero
        live[static_cast<std::size_t>(j)] = 1;
        const double* c = a.col(src);
        double* u = res.u.col(j);
        for (int k = 0; k < m; ++k) u[k] = c[k] / sv;
    }

    // Two Gram-Schmidt passes pin pairwise orthogonality near machine
    // precision even when the singular value spread approaches 1/eps.
    for (int pass = 0; pass < 2; ++pass) {
        for (int j = 0; j < keep; ++j) {
            if (!live[static_cast<std::size_t>(j)]) continue;
            double* uj = res.u.col(j);
            for (int i = 0; i < j; ++i) {
                if (!live[static_cast<std::size_t>(i)]) continue;
                const double* ui = res.u.col(i);
                double proj = 0.0;
                for (int k = 0; k < m; ++k) proj += ui[k] * uj[k];
                for (int k = 0; k < m; ++k) uj[k] -= proj * ui[k];
            }
            double nrm = norm2({uj, static_cast<std::size_t>(m)});
            if (nrm <= 1e-6) {
                // Column collapsed into the span of its predecessors; no
                // trustworthy direction remains.
                std::fill(uj, uj + m, 0.0);
                live[static_cast<std::size_t>(j)] = 0;
                continue;
            }
            for (int k = 0; k < m; ++k) uj[k] /= nrm;
        }
    }
    return res;
}

std::vector<double> solve_spd(Matrix a, std::vector<double> b) {
    int n = a.rows;
    if (a.cols != n || static_cast<int>(b.size()) != n) throw ShapeError("solve_spd: shape mismatch");
    double scale = 0.0;
    for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(a(i, i)));
    if (scale == 0.0) throw IllPosedError("solve_spd: zero matrix");

    // In-place lower Cholesky.
    for (int j = 0; j < n; ++j) {
        double d = a(j, j);
        for (int k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (d <= scale * 1e-300) throw IllPosedError("solve_spd: pivot collapse, matrix not SPD");
        d = std::sqrt(d);
        a(j, j) = d;
        for (int i = j + 1; i < n; ++i) {
            double v = a(i, j);
            for (int k = 0; k < j; ++k) v -= a(i, k) * a(j, k);
            a(i, j) = v / d;
        }
    }
    // Forward then backward substitution.
    for (int i = 0; i < n; ++i) {
        double v = b[static_cast<std::size_t>(i)];
        for (int k = 0; k < i; ++k) v -= a(i, k) * b[static_cast<std::size_t>(k)];
        b[static_cast<std::size_t>(i)] = v / a(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        double v = b[static_cast<std::size_t>(i)];
        for (int k = i + 1; k < n; ++k) v -= a(k, i) * b[static_cast<std::size_t>(k)];
        b[static_cast<std::size_t>(i)] = v / a(i, i);
    }
    return b;
}

}  // namespace morphrom
