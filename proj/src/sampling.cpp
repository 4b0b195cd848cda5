#include "morphrom/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "morphrom/errors.hpp"
#include "morphrom/util.hpp"

namespace morphrom {

namespace {

double distance(const ParameterPoint& a, const ParameterPoint& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) {
        double d = a.values[k] - b.values[k];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

double duplicate_eps(const ParameterBinding& binding) {
    double diag = 0.0;
    for (const auto& [lo, hi] : binding.bounds) diag += (hi - lo) * (hi - lo);
    return 1e-9 * std::sqrt(diag);
}

void SnapshotDatabase::append(const ParameterPoint& mu, const std::vector<double>& field,
                              SnapshotProvenance prov, double eps_dup) {
    Matrix& m = theta.theta;
    if (m.cols == 0) {
        m.rows = static_cast<int>(field.size());
    } else if (static_cast<int>(field.size()) != m.rows) {
        throw ShapeError("snapshot database: field length mismatch");
    }
    for (const auto& old : theta.parameter_points)
        if (distance(old, mu) <= eps_dup)
            throw ConfigError("snapshot database: duplicate parameter point");
    m.a.insert(m.a.end(), field.begin(), field.end());
    m.cols += 1;
    theta.parameter_points.push_back(mu);
    provenance.push_back(std::move(prov));
}

ErrorIndicator loo_errors(const SnapshotDatabase& db, const std::vector<int>* restrict_cells,
                          int workers) {
    const int n = db.count();
    if (n < 2) throw InsufficientDataError("loo_errors: need at least 2 snapshots");

    // Optional restriction applied once to all columns.
    Matrix theta;
    if (restrict_cells) {
        std::vector<int> cells = *restrict_cells;
        std::sort(cells.begin(), cells.end());
        cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
        if (cells.empty()) throw ConfigError("loo_errors: empty cell restriction");
        if (cells.front() < 0 || cells.back() >= db.field_size())
            throw IndexError("loo_errors: restriction index out of range");
        theta = Matrix(static_cast<int>(cells.size()), n);
        for (int j = 0; j < n; ++j) {
            const double* src = db.theta.theta.col(j);
            double* dst = theta.col(j);
            for (std::size_t k = 0; k < cells.size(); ++k) dst[k] = src[cells[k]];
        }
    } else {
        theta = db.theta.theta;
    }

    ErrorIndicator ind;
    ind.norm_kind = "relative_l2";
    ind.e_s.assign(static_cast<std::size_t>(n), 0.0);
    ind.absolute_fallback.assign(static_cast<std::size_t>(n), false);

    parallel_for(n, std::max(1, workers), [&](int k) {
        SnapshotMatrix rest;
        rest.theta = Matrix(theta.rows, n - 1);
        int out = 0;
        for (int j = 0; j < n; ++j) {
            if (j == k) continue;
            std::copy(theta.col(j), theta.col(j) + theta.rows, rest.theta.col(out));
            ++out;
        }
        PODBasis basis = build_basis_auto(rest);
        auto alpha = project(basis, theta.col_span(k));
        auto rec = reconstruct(basis, alpha);
        double err = 0.0, norm = 0.0;
        const double* u = theta.col(k);
        for (int i = 0; i < theta.rows; ++i) {
            double d = u[i] - rec[static_cast<std::size_t>(i)];
            err += d * d;
            norm += u[i] * u[i];
        }
        err = std::sqrt(err);
        norm = std::sqrt(norm);
        if (norm > 0.0) {
            ind.e_s[static_cast<std::size_t>(k)] = err / norm;
        } else {
            ind.e_s[static_cast<std::size_t>(k)] = err;
            ind.absolute_fallback[static_cast<std::size_t>(k)] = true;
        }
    });
    return ind;
}

std::vector<double> simplex_errors(const Triangulation2D& tri, const ErrorIndicator& ind) {
    if (ind.e_s.size() != tri.points.size())
        throw ShapeError("simplex_errors: indicator length must match triangulation points");
    std::vector<double> e_t(tri.simplices.size(), 0.0);
    for (std::size_t s = 0; s < tri.simplices.size(); ++s) {
        const auto& t = tri.simplices[s];
        double area = std::abs(signed_area(tri.points[static_cast<std::size_t>(t.v[0])],
                                           tri.points[static_cast<std::size_t>(t.v[1])],
                                           tri.points[static_cast<std::size_t>(t.v[2])]));
        double sum = 0.0;
        for (int k = 0; k < 3; ++k) sum += ind.e_s[static_cast<std::size_t>(t.v[static_cast<std::size_t>(k)])];
        e_t[s] = area * sum;
    }
    return e_t;
}

NextPoint next_point(const Triangulation2D& tri, const ErrorIndicator& ind, double eps_dup,
                     const std::vector<ParameterPoint>& existing) {
    double max_e = 0.0;
    for (double e : ind.e_s) max_e = std::max(max_e, e);
    if (max_e <= 0.0) throw NoRefinementError("next_point: all indicators are zero");

    auto e_t = simplex_errors(tri, ind);
    int best = 0;
    for (std::size_t s = 1; s < e_t.size(); ++s)
        if (e_t[s] > e_t[static_cast<std::size_t>(best)]) best = static_cast<int>(s);

    const auto& t = tri.simplices[static_cast<std::size_t>(best)];
    NextPoint np;
    np.simplex = best;
    double wsum = 0.0;
    Vec2 acc{0.0, 0.0};
    for (int k = 0; k < 3; ++k) {
        const Vec2& v = tri.points[static_cast<std::size_t>(t.v[static_cast<std::size_t>(k)])];
        np.simplex_vertices[static_cast<std::size_t>(k)] = v;
        double w = ind.e_s[static_cast<std::size_t>(t.v[static_cast<std::size_t>(k)])];
        acc += w * v;
        wsum += w;
    }
    if (wsum <= 0.0) throw NoRefinementError("next_point: worst simplex carries no error");
    Vec2 candidate = acc * (1.0 / wsum);

    auto is_duplicate = [&](const Vec2& c) {
        for (const auto& mu : existing) {
            double dx = mu.values[0] - c.x, dy = mu.values[1] - c.y;
            if (std::sqrt(dx * dx + dy * dy) <= eps_dup) return true;
        }
        return false;
    };
    if (is_duplicate(candidate)) {
        // Weighted point collapsed onto an existing sample; the simplex
        // centroid is always distinct for a positive-area simplex.
        Vec2 centroid = (np.simplex_vertices[0] + np.simplex_vertices[1] + np.simplex_vertices[2]) *
                        (1.0 / 3.0);
        if (is_duplicate(centroid))
            throw DegenerateInputError("next_point: centroid fallback also duplicates a sample");
        candidate = centroid;
        np.centroid_fallback = true;
    }
    np.mu.values = {candidate.x, candidate.y};
    return np;
}

namespace {

std::vector<ParameterPoint> tensor_grid(const ParameterBinding& binding,
                                        const std::array<int, 2>& per_axis) {
    if (binding.parameter_dim != 2)
        throw ConfigError("greedy_sample: sampling requires a two-parameter binding");
    if (per_axis[0] < 2 || per_axis[1] < 2)
        throw ConfigError("greedy_sample: init grid must cover the corners (>= 2 per axis)");
    std::vector<ParameterPoint> pts;
    auto [lo0, hi0] = binding.bounds[0];
    auto [lo1, hi1] = binding.bounds[1];
    for (int j = 0; j < per_axis[1]; ++j) {
        for (int i = 0; i < per_axis[0]; ++i) {
            double x = lo0 + (hi0 - lo0) * i / (per_axis[0] - 1);
            double y = lo1 + (hi1 - lo1) * j / (per_axis[1] - 1);
            pts.push_back({{x, y}});
        }
    }
    return pts;
}

Triangulation2D triangulate_database(const SnapshotDatabase& db) {
    std::vector<Vec2> pts;
    pts.reserve(static_cast<std::size_t>(db.count()));
    for (const auto& mu : db.xi()) pts.push_back({mu.values[0], mu.values[1]});
    return delaunay(pts);
}

}  // namespace

GreedyResult greedy_sample(const SnapshotSolver& solver, const ParameterBinding& binding,
                           const GreedyOptions& opts, const SnapshotDatabase* resume) {
    if (opts.max_new < 0) throw ConfigError("greedy_sample: max_new must be nonnegative");
    const double eps_dup = duplicate_eps(binding);
    auto init = tensor_grid(binding, opts.init_grid);

    GreedyResult result;

    // A resumed database replays the same deterministic decisions; its
    // columns must match them position by position.
    auto take_or_solve = [&](const ParameterPoint& mu) {
        int pos = result.db.count();
        if (resume && pos < resume->count()) {
            const auto& have = resume->xi()[static_cast<std::size_t>(pos)];
            double dx = have.values[0] - mu.values[0];
            double dy = have.values[1] - mu.values[1];
            if (std::sqrt(dx * dx + dy * dy) > eps_dup)
                throw IntegrityError("greedy_sample: resumed database diverges from replay at column " +
                                     std::to_string(pos));
            std::vector<double> field(resume->theta.theta.col(pos),
                                      resume->theta.theta.col(pos) + resume->field_size());
            result.db.append(have, field, resume->provenance[static_cast<std::size_t>(pos)], eps_dup);
            return;
        }
        auto [field, prov] = solver(mu);
        result.db.append(mu, field, std::move(prov), eps_dup);
        if (opts.checkpoint) opts.checkpoint(result.db, result.records);
    };

    for (const auto& mu : init) take_or_solve(mu);

    int added = 0;
    for (;;) {
        ErrorIndicator ind = loo_errors(result.db, opts.restrict_cells, opts.workers);
        auto tri = triangulate_database(result.db);

        IterationRecord rec;
        rec.iteration = static_cast<int>(result.records.size());
        for (double e : ind.e_s) rec.max_e = std::max(rec.max_e, e);
        double sum = 0.0;
        for (double e : ind.e_s) sum += e;
        rec.mean_e = sum / static_cast<double>(ind.e_s.size());

        if (rec.max_e <= opts.tol) {
            rec.mu_new = ParameterPoint{};  // converged, nothing proposed
            result.records.push_back(rec);
            result.converged = true;
            break;
        }

        NextPoint np = next_point(tri, ind, eps_dup, result.db.xi());
        rec.mu_new = np.mu;
        rec.simplex = np.simplex;
        rec.simplex_vertices = np.simplex_vertices;
        rec.centroid_fallback = np.centroid_fallback;
        result.records.push_back(rec);

        if (added >= opts.max_new) break;  // final record reports the state, no solve
        take_or_solve(np.mu);
        ++added;
    }
    return result;
}

}  // namespace morphrom
