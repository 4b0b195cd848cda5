#include "morphrom/pod.hpp"

#include <algorithm>
#include <cmath>

#include "morphrom/errors.hpp"
#include "morphrom/util.hpp"

namespace morphrom {

namespace {

// Gram eigenvalues below this fraction of the largest sit at the squared
// rounding floor of the correlation matrix; the corresponding directions
// cannot be normalized reliably.
constexpr double kDropLambda = 1e-11;

void check_snapshots(const SnapshotMatrix& s) {
    if (s.theta.rows <= 0 || s.theta.cols <= 0)
        throw ShapeError("snapshot matrix is empty");
    if (!s.parameter_points.empty() &&
        static_cast<int>(s.parameter_points.size()) != s.theta.cols)
        throw ShapeError("snapshot matrix: parameter point count mismatch");
}

// Flip each mode so its largest-magnitude entry (lowest index on ties) is
// positive; removes the sign ambiguity between construction routes.
void fix_signs(Matrix& modes) {
    for (int j = 0; j < modes.cols; ++j) {
        double* c = modes.col(j);
        int arg = 0;
        double best = std::abs(c[0]);
        for (int i = 1; i < modes.rows; ++i) {
            if (std::abs(c[i]) > best) {
                best = std::abs(c[i]);
                arg = i;
            }
        }
        if (c[arg] < 0.0)
            for (int i = 0; i < modes.rows; ++i) c[i] = -c[i];
    }
}

}  // namespace

PODBasis build_basis_svd(const SnapshotMatrix& snapshots) {
    check_snapshots(snapshots);
    SvdResult svd = one_sided_jacobi_svd(snapshots.theta);
    if (svd.u.cols == 0) warn("build_basis_svd: zero snapshot matrix, empty basis");
    PODBasis basis;
    basis.modes = std::move(svd.u);
    basis.singular_values = std::move(svd.sigma);
    fix_signs(basis.modes);
    return basis;
}

PODBasis build_basis_snapshots(const SnapshotMatrix& snapshots) {
    check_snapshots(snapshots);
    const Matrix& theta = snapshots.theta;
    EigResult eig = jacobi_eigh(gram(theta));

    double lambda_max = 0.0;
    for (double v : eig.values) lambda_max = std::max(lambda_max, v);
    PODBasis basis;
    if (lambda_max <= 0.0) {
        warn("build_basis_snapshots: all eigenvalues null, empty basis");
        basis.modes = Matrix(theta.rows, 0);
        return basis;
    }

    int keep = 0;
    for (double v : eig.values)
        if (v > kDropLambda * lambda_max) ++keep;

    basis.modes = Matrix(theta.rows, keep);
    basis.singular_values.resize(static_cast<std::size_t>(keep));
    for (int j = 0; j < keep; ++j) {
        double lambda = eig.values[static_cast<std::size_t>(j)];
        double sigma = std::sqrt(lambda);
        basis.singular_values[static_cast<std::size_t>(j)] = sigma;
        auto psi = matvec(theta, eig.vectors.col_span(j));
        double* out = basis.modes.col(j);
        for (int i = 0; i < theta.rows; ++i) out[i] = psi[static_cast<std::size_t>(i)] / sigma;
    }
    fix_signs(basis.modes);
    return basis;
}

PODBasis build_basis_auto(const SnapshotMatrix& snapshots) {
    check_snapshots(snapshots);
    if (snapshots.theta.rows > 4 * snapshots.theta.cols) return build_basis_snapshots(snapshots);
    return build_basis_svd(snapshots);
}

PODBasis truncate(const PODBasis& basis, double energy) {
    if (!(energy > 0.0 && energy <= 1.0)) throw ConfigError("truncate: energy must be in (0, 1]");
    if (basis.rank() == 0 || energy == 1.0) return basis;
    double total = 0.0;
    for (double s : basis.singular_values) total += s * s;
    double acc = 0.0;
    int r = 0;
    while (r < basis.rank()) {
        acc += basis.singular_values[static_cast<std::size_t>(r)] *
               basis.singular_values[static_cast<std::size_t>(r)];
        ++r;
        if (acc >= energy * total) break;
    }
    PODBasis out;
    out.modes = Matrix(basis.field_size(), r);
    out.singular_values.assign(basis.singular_values.begin(), basis.singular_values.begin() + r);
    for (int j = 0; j < r; ++j)
        std::copy(basis.modes.col(j), basis.modes.col(j) + basis.field_size(), out.modes.col(j));
    return out;
}

CoefficientVector project(const PODBasis& basis, std::span<const double> u) {
    if (static_cast<int>(u.size()) != basis.field_size())
        throw ShapeError("project: field length mismatch");
    return matvec_t(basis.modes, u);
}

std::vector<double> reconstruct(const PODBasis& basis, std::span<const double> alpha) {
    if (static_cast<int>(alpha.size()) != basis.rank())
        throw ShapeError("reconstruct: coefficient length must equal basis rank");
    if (basis.rank() == 0) return std::vector<double>(static_cast<std::size_t>(basis.field_size()), 0.0);
    return matvec(basis.modes, alpha);
}

}  // namespace morphrom
