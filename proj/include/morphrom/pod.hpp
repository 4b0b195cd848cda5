#pragma once

#include <span>
#include <vector>

#include "morphrom/ffd.hpp"
#include "morphrom/linalg.hpp"

namespace morphrom {

// Snapshot columns (one discrete field each) with the parameter points they
// were computed at, in matching order.
struct SnapshotMatrix {
    Matrix theta;
    std::vector<ParameterPoint> parameter_points;

    int field_size() const { return theta.rows; }
    int count() const { return theta.cols; }
};

using CoefficientVector = std::vector<double>;

// Orthonormal modes with their singular values, descending. Modes use a plain
// Euclidean inner product; snapshots are not mean-centered. Each mode's
// largest-magnitude entry is positive (lowest index wins ties) so both
// construction routes produce the same signs.
struct PODBasis {
    Matrix modes;
    std::vector<double> singular_values;

    int rank() const { return modes.cols; }
    int field_size() const { return modes.rows; }
};

// Direct route: one-sided Jacobi SVD of the snapshot matrix. All min(M, N)
// pairs are retained; a direction lost to rounding keeps its computed sigma
// but gets a zero mode column, never a fabricated completion.
PODBasis build_basis_svd(const SnapshotMatrix& snapshots);

// Gram route: eigen-decomposition of theta^T theta by cyclic Jacobi
// rotations; modes are theta * phi_i / sqrt(lambda_i). Eigenvalues at the
// squared rounding floor of the Gram matrix (below 1e-11 * lambda_max) have
// no reliably normalizable direction and are dropped.
PODBasis build_basis_snapshots(const SnapshotMatrix& snapshots);

// Picks the Gram route when the field dimension dwarfs the snapshot count
// (M > 4N), the direct route otherwise.
PODBasis build_basis_auto(const SnapshotMatrix& snapshots);

// Smallest leading set whose cumulative squared singular values reach
// `energy` of the total; energy in (0, 1], 1 keeps the basis unchanged.
PODBasis truncate(const PODBasis& basis, double energy);

CoefficientVector project(const PODBasis& basis, std::span<const double> u);
std::vector<double> reconstruct(const PODBasis& basis, std::span<const double> alpha);

}  // namespace morphrom
