#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "morphrom/delaunay.hpp"
#include "morphrom/pod.hpp"

namespace morphrom {

struct SnapshotProvenance {
    std::string mesh_hash;
    double tol = 0.0;
    long iterations = 0;
};

// Snapshot columns in append order, with the parameters they were solved at.
// Appends reject parameter points closer than eps_dup to an existing one.
struct SnapshotDatabase {
    SnapshotMatrix theta;
    std::vector<SnapshotProvenance> provenance;

    int count() const { return theta.count(); }
    int field_size() const { return theta.field_size(); }
    const std::vector<ParameterPoint>& xi() const { return theta.parameter_points; }

    void append(const ParameterPoint& mu, const std::vector<double>& field,
                SnapshotProvenance prov, double eps_dup);
};

struct ErrorIndicator {
    std::vector<double> e_s;
    std::string norm_kind;               // "relative_l2"
    std::vector<bool> absolute_fallback; // true where a zero-norm snapshot forced an absolute norm
};

// Leave-one-out reconstruction error per snapshot: rebuild a full basis
// without column k and measure the projection error of column k, relative to
// its own norm. An optional cell restriction evaluates the indicator on a
// subfield.
ErrorIndicator loo_errors(const SnapshotDatabase& db, const std::vector<int>* restrict_cells = nullptr,
                          int workers = 1);

// Area-weighted error per simplex: area * sum of vertex indicators.
std::vector<double> simplex_errors(const Triangulation2D& tri, const ErrorIndicator& ind);

struct NextPoint {
    ParameterPoint mu;
    int simplex = -1;
    std::array<Vec2, 3> simplex_vertices{};
    bool centroid_fallback = false;
};

// Error-weighted average of the worst simplex's vertices (ties resolved to
// the lowest simplex id). Throws NoRefinementError when every indicator is
// zero.
NextPoint next_point(const Triangulation2D& tri, const ErrorIndicator& ind, double eps_dup,
                     const std::vector<ParameterPoint>& existing);

struct IterationRecord {
    int iteration = 0;
    double max_e = 0.0;
    double mean_e = 0.0;
    ParameterPoint mu_new;
    int simplex = -1;
    std::array<Vec2, 3> simplex_vertices{};
    bool centroid_fallback = false;
};

// Solves one snapshot; returns the field and how it was produced.
using SnapshotSolver =
    std::function<std::pair<std::vector<double>, SnapshotProvenance>(const ParameterPoint&)>;

struct GreedyOptions {
    std::array<int, 2> init_grid{3, 3};  // points per parameter axis, >= 2 each
    double tol = 0.0;                    // stop when max indicator falls below
    int max_new = 4;
    const std::vector<int>* restrict_cells = nullptr;
    int workers = 1;
    // Called after every solved snapshot with the database and records so
    // far; gives the caller a checkpoint for resumable storage.
    std::function<void(const SnapshotDatabase&, const std::vector<IterationRecord>&)> checkpoint;
};

struct GreedyResult {
    SnapshotDatabase db;
    std::vector<IterationRecord> records;
    bool converged = false;  // stopped on tol rather than max_new
};

// Starts from a tensor grid over the binding bounds and enriches it
// greedily. A partially filled database may be passed to resume: the run
// replays deterministically, solves only missing snapshots and verifies that
// resumed columns match the replayed decisions.
GreedyResult greedy_sample(const SnapshotSolver& solver, const ParameterBinding& binding,
                           const GreedyOptions& opts, const SnapshotDatabase* resume = nullptr);

// Shared duplicate-distance guard: 1e-9 times the bounds diagonal.
double duplicate_eps(const ParameterBinding& binding);

}  // namespace morphrom
