#include "morphrom/ddpod.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "morphrom/errors.hpp"
#include "morphrom/linalg.hpp"

namespace morphrom {

DomainSplit split_domain(const StructuredMesh& mesh, const Rect& core_box, int overlap_layers) {
    if (overlap_layers < 1) throw ConfigError("split_domain: overlap_layers must be at least 1");
    if (!core_box.valid()) throw ConfigError("split_domain: invalid core box");

    std::vector<char> in_core(static_cast<std::size_t>(mesh.cell_count()), 0);
    bool any_core = false;
    for (int cj = 0; cj < mesh.ny; ++cj) {
        for (int ci = 0; ci < mesh.nx; ++ci) {
            auto vids = mesh.cell_vertices(ci, cj);
            Rect bb{1e300, 1e300, -1e300, -1e300};
            for (int vid : vids) {
                const Vec2& v = mesh.vertices[static_cast<std::size_t>(vid)];
                bb.x0 = std::min(bb.x0, v.x);
                bb.y0 = std::min(bb.y0, v.y);
                bb.x1 = std::max(bb.x1, v.x);
                bb.y1 = std::max(bb.y1, v.y);
            }
            if (bb.overlaps(core_box)) {
                in_core[static_cast<std::size_t>(mesh.cid(ci, cj))] = 1;
                any_core = true;
            }
        }
    }
    if (!any_core) throw ConfigError("split_domain: core box overlaps no cell");

    // Dilate by 8-connected rings.
    std::vector<char> in_omega1 = in_core;
    for (int layer = 0; layer < overlap_layers; ++layer) {
        std::vector<char> next = in_omega1;
        for (int cj = 0; cj < mesh.ny; ++cj) {
            for (int ci = 0; ci < mesh.nx; ++ci) {
                if (in_omega1[static_cast<std::size_t>(mesh.cid(ci, cj))]) continue;
                bool touch = false;
                for (int dj = -1; dj <= 1 && !touch; ++dj)
                    for (int di = -1; di <= 1 && !touch; ++di) {
                        int ni = ci + di, nj = cj + dj;
                        if (ni < 0 || ni >= mesh.nx || nj < 0 || nj >= mesh.ny) continue;
                        touch = in_omega1[static_cast<std::size_t>(mesh.cid(ni, nj))] != 0;
                    }
                if (touch) next[static_cast<std::size_t>(mesh.cid(ci, cj))] = 1;
            }
        }
        in_omega1.swap(next);
    }

    DomainSplit split;
    for (int c = 0; c < mesh.cell_count(); ++c) {
        if (in_omega1[static_cast<std::size_t>(c)]) split.omega1.push_back(c);
        if (!in_core[static_cast<std::size_t>(c)]) split.omega2.push_back(c);
        if (in_omega1[static_cast<std::size_t>(c)] && !in_core[static_cast<std::size_t>(c)])
            split.overlap.push_back(c);
    }
    for (int c : split.omega1) {
        int ci = c % mesh.nx, cj = c / mesh.nx;
        for (Side side : {Side::South, Side::East, Side::North, Side::West}) {
            int nb = mesh.neighbor(ci, cj, side);
            if (nb >= 0 && !in_omega1[static_cast<std::size_t>(nb)])
                split.interface.push_back({ci, cj, side, nb});
        }
    }

    if (split.omega2.empty())
        throw ConfigError("split_domain: core box swallows the whole domain");
    if (split.overlap.empty()) throw ConfigError("split_domain: empty overlap");
    if (split.interface.empty())
        throw ConfigError("split_domain: omega1 has no interior interface");
    return split;
}

namespace {

// Rows of the basis restricted to a cell list, counted for the work probe.
Matrix gather_rows(const PODBasis& basis, const std::vector<int>& cells, long* counter) {
    Matrix out(static_cast<int>(cells.size()), basis.rank());
    for (int j = 0; j < basis.rank(); ++j) {
        const double* src = basis.modes.col(j);
        double* dst = out.col(j);
        for (std::size_t k = 0; k < cells.size(); ++k) dst[k] = src[cells[k]];
    }
    if (counter) *counter += static_cast<long>(cells.size());
    return out;
}

FitResult fit_restricted(const Matrix& modes_overlap, const std::vector<double>& u_overlap) {
    FitResult fit;
    int r = modes_overlap.cols;
    double unorm = norm2(u_overlap);
    if (r == 0) {
        fit.residual = unorm > 0 ? 1.0 : 0.0;
        return fit;
    }

    Matrix a = gram(modes_overlap);
    double trace = 0.0;
    for (int i = 0; i < r; ++i) trace += a(i, i);
    if (trace <= 0.0) throw IllPosedError("fit_coefficients: basis vanishes on the overlap");
    for (int i = 0; i < r; ++i) a(i, i) += 1e-12 * trace;

    auto b = matvec_t(modes_overlap, u_overlap);
    fit.alpha = solve_spd(std::move(a), std::move(b));

    auto rec = matvec(modes_overlap, fit.alpha);
    double err = 0.0;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        double d = u_overlap[i] - rec[i];
        err += d * d;
    }
    err = std::sqrt(err);
    fit.residual = unorm > 0 ? err / unorm : err;
    return fit;
}

}  // namespace

FitResult fit_coefficients(const PODBasis& basis, const std::vector<double>& u1,
                           const DomainSplit& split) {
    if (u1.size() != split.omega1.size())
        throw ShapeError("fit_coefficients: u1 must hold one value per omega1 cell");

    // Overlap values out of the omega1-local vector.
    std::vector<double> u_overlap(split.overlap.size());
    {
        std::size_t pos = 0;
        for (std::size_t k = 0; k < split.overlap.size(); ++k) {
            while (split.omega1[pos] != split.overlap[k]) ++pos;  // both ascending
            u_overlap[k] = u1[pos];
        }
    }
    Matrix modes_overlap = gather_rows(basis, split.overlap, nullptr);
    return fit_restricted(modes_overlap, u_overlap);
}

SchwarzResult schwarz_solve(const StructuredMesh& mesh, const BoundarySpec& bc, double diffusivity,
                            Vec2 velocity, const std::vector<double>& source, const PODBasis& basis,
                            const DomainSplit& split, const SchwarzOptions& opts) {
    if (basis.rank() > 0 && basis.field_size() != mesh.cell_count())
        throw ShapeError("schwarz_solve: basis length must equal cell count");

    FvSystem system(mesh, bc, diffusivity, velocity, source, split.omega1);
    const int n_iface = system.interface_count();
    if (n_iface != static_cast<int>(split.interface.size()))
        throw ShapeError("schwarz_solve: split and assembled interface disagree");

    // Local overlap positions inside omega1 ordering.
    std::vector<std::size_t> overlap_pos(split.overlap.size());
    {
        std::size_t pos = 0;
        for (std::size_t k = 0; k < split.overlap.size(); ++k) {
            while (split.omega1[pos] != split.overlap[k]) ++pos;
            overlap_pos[k] = pos;
        }
    }

    SchwarzState state;

    // Restrictions used inside the loop are gathered once up front; per
    // iteration only the interface-exterior rows are touched.
    Matrix modes_overlap = gather_rows(basis, split.overlap, nullptr);
    const std::vector<int>& ext_cells = system.interface_exterior_cells();
    const int r = basis.rank();

    // Anchor rows: diagonal-normalized discrete equations of the exterior
    // cells whose stencil stays clear of omega1. The exact solution
    // satisfies them identically, so they add no bias at database points;
    // they pin the amplitude the overlap misfit leaves free whenever omega1
    // sees only homogeneous boundary data, and they keep the reconstruction
    // near the discrete solution manifold away from the overlap.
    std::vector<char> in_omega1(static_cast<std::size_t>(mesh.cell_count()), 0);
    for (int c : split.omega1) in_omega1[static_cast<std::size_t>(c)] = 1;

    std::vector<int> anchor_cells;
    for (int cj = 0; cj < mesh.ny; ++cj) {
        for (int ci = 0; ci < mesh.nx; ++ci) {
            if (in_omega1[static_cast<std::size_t>(mesh.cid(ci, cj))]) continue;
            bool near_omega1 = false;
            for (Side side : {Side::South, Side::East, Side::North, Side::West}) {
                int nb = mesh.neighbor(ci, cj, side);
                if (nb >= 0 && in_omega1[static_cast<std::size_t>(nb)]) near_omega1 = true;
            }
            if (!near_omega1) anchor_cells.push_back(mesh.cid(ci, cj));
        }
    }

    // Constant part of the anchored normal equations, assembled once.
    Matrix fit_gram(r, r);
    CoefficientVector fit_rhs0(static_cast<std::size_t>(r), 0.0);
    if (r > 0) {
        fit_gram = gram(modes_overlap);
        if (!anchor_cells.empty()) {
            FvSystem full(mesh, bc, diffusivity, velocity, source);
            Matrix anchors(static_cast<int>(anchor_cells.size()), r);
            std::vector<double> targets(anchor_cells.size());
            for (std::size_t k = 0; k < anchor_cells.size(); ++k) {
                FvSystem::EquationRow row = full.equation_row(anchor_cells[k]);
                targets[k] = row.rhs / row.diag;
                for (int j = 0; j < r; ++j) {
                    const double* mode = basis.modes.col(j);
                    double v = mode[anchor_cells[k]];
                    for (const auto& [nb, coef] : row.neighbors)
                        v += coef / row.diag * mode[nb];
                    anchors(static_cast<int>(k), j) = v;
                }
            }
            Matrix anchor_gram = gram(anchors);
            // The anchors only have to pin the amplitude direction; weighting
            // them at a small fraction of the overlap mass keeps the
            // off-database fit dominated by the overlap data.
            constexpr double kAnchorFraction = 0.5;
            double tr_o = 0.0, tr_a = 0.0;
            for (int i = 0; i < r; ++i) {
                tr_o += fit_gram(i, i);
                tr_a += anchor_gram(i, i);
            }
            double w2 = tr_a > 0.0 ? kAnchorFraction * tr_o / tr_a : 0.0;
            for (int j = 0; j < r; ++j)
                for (int i = 0; i < r; ++i) fit_gram(i, j) += w2 * anchor_gram(i, j);
            fit_rhs0 = matvec_t(anchors, targets);
            for (double& v : fit_rhs0) v *= w2;
        }
        double trace = 0.0;
        for (int i = 0; i < r; ++i) trace += fit_gram(i, i);
        if (trace <= 0.0) throw IllPosedError("schwarz_solve: basis vanishes on the overlap");
        for (int i = 0; i < r; ++i) fit_gram(i, i) += 1e-12 * trace;
    }

    std::vector<double> iface(static_cast<std::size_t>(n_iface), 0.0);
    if (opts.initial_interface) {
        if (opts.initial_interface->size() != iface.size())
            throw ShapeError("schwarz_solve: initial interface length mismatch");
        iface = *opts.initial_interface;
    } else {
        double mean = 0.0;
        long count = 0;
        for (const auto& [name, cond] : bc.conditions) {
            if (cond.type != BcType::Dirichlet) continue;
            for (double v : cond.values) {
                mean += v;
                ++count;
            }
        }
        if (count > 0) std::fill(iface.begin(), iface.end(), mean / count);
    }

    std::vector<double> u1;
    if (opts.initial_u1) {
        if (opts.initial_u1->size() != split.omega1.size())
            throw ShapeError("schwarz_solve: initial u1 length mismatch");
        u1 = *opts.initial_u1;
    }
    std::vector<double> u_overlap(split.overlap.size());
    CoefficientVector alpha(static_cast<std::size_t>(r), 0.0);
    // A supplied interface is trusted: the first inner solve runs at the
    // floor tolerance instead of the crude warm-up accuracy.
    double last_change = opts.initial_interface ? 0.0 : 1.0;
    bool converged = false;

    constexpr int kWindow = 4;
    std::vector<std::vector<double>> win_x, win_r;
    win_x.reserve(kWindow + 1);
    win_r.reserve(kWindow + 1);

    while (state.iterations < opts.max_outer) {
        ++state.iterations;
        system.set_interface_values(iface);

        SolveOptions inner;
        inner.tol = std::max(opts.inner_tol_floor, 0.01 * last_change);
        inner.max_iter = opts.inner_max_iter;
        long before = system.cell_updates();
        system.run(u1, inner);
        state.inner_cell_updates += system.cell_updates() - before;

        for (std::size_t k = 0; k < overlap_pos.size(); ++k) u_overlap[k] = u1[overlap_pos[k]];
        FitResult fit;
        if (r > 0) {
            auto rhs = matvec_t(modes_overlap, u_overlap);
            for (std::size_t j = 0; j < rhs.size(); ++j) rhs[j] += fit_rhs0[j];
            fit.alpha = solve_spd(fit_gram, std::move(rhs));
        }
        // The reported residual stays the overlap misfit of the coefficients
        // actually used, anchor rows excluded.
        double unorm = norm2(u_overlap);
        double err = unorm;
        if (r > 0) {
            auto rec = matvec(modes_overlap, fit.alpha);
            err = 0.0;
            for (std::size_t i = 0; i < rec.size(); ++i) {
                double d = u_overlap[i] - rec[i];
                err += d * d;
            }
            err = std::sqrt(err);
        }
        fit.residual = unorm > 0 ? err / unorm : err;
        state.fit_residuals.push_back(fit.residual);

        // New interface data: reconstruction at the exterior cells.
        std::vector<double> new_iface(iface.size(), 0.0);
        for (int j = 0; j < basis.rank(); ++j) {
            const double* mode = basis.modes.col(j);
            double aj = fit.alpha[static_cast<std::size_t>(j)];
            for (std::size_t k = 0; k < new_iface.size(); ++k)
                new_iface[k] += aj * mode[ext_cells[k]];
        }
        state.basis_rows_gathered += static_cast<long>(new_iface.size());

        // Convergence is judged on the raw fixed-point residual: the change a
        // plain reconstruction update would make. At the solution this bounds
        // the inconsistency between the interface data and the reconstruction
        // regardless of how the next iterate is mixed.
        std::vector<double> resid(iface.size());
        double scale = 0.0, change = 0.0;
        for (std::size_t k = 0; k < resid.size(); ++k) {
            resid[k] = new_iface[k] - iface[k];
            scale = std::max(scale, std::abs(new_iface[k]));
            change = std::max(change, std::abs(resid[k]));
        }
        double rel_change = change / (scale > 0 ? scale : 1.0);
        state.history.push_back(rel_change);

        double alpha_change = 0.0, alpha_scale = 1.0;
        for (std::size_t j = 0; j < alpha.size(); ++j) {
            alpha_change = std::max(alpha_change, std::abs(fit.alpha[j] - alpha[j]));
            alpha_scale = std::max(alpha_scale, std::abs(fit.alpha[j]));
        }
        alpha = fit.alpha.empty() ? alpha : fit.alpha;
        last_change = std::max(rel_change, 1e-30);

        if (rel_change <= opts.tol && alpha_change <= opts.tol * alpha_scale) {
            iface = std::move(new_iface);
            converged = true;
            break;
        }

        // Anderson mixing over a short window of (iterate, residual) pairs.
        // The update map is affine, and with a thin overlap its spectrum
        // carries modes near +1 (slow decay) and -1 (odd-even cycling); the
        // window's least-squares combination removes both while leaving the
        // fixed point itself untouched. A degenerate or exploding correction
        // falls back to the plain reconstruction update.
        win_x.push_back(iface);
        win_r.push_back(resid);
        if (static_cast<int>(win_x.size()) > kWindow + 1) {
            win_x.erase(win_x.begin());
            win_r.erase(win_r.begin());
        }
        std::vector<double> next = new_iface;
        const int q = static_cast<int>(win_x.size()) - 1;
        if (q > 0) {
            Matrix dr(static_cast<int>(resid.size()), q);
            for (int j = 0; j < q; ++j) {
                double* c = dr.col(j);
                for (std::size_t k = 0; k < resid.size(); ++k)
                    c[k] = win_r[static_cast<std::size_t>(j) + 1][k] -
                           win_r[static_cast<std::size_t>(j)][k];
            }
            Matrix g = gram(dr);
            double trace = 0.0;
            for (int i = 0; i < q; ++i) trace += g(i, i);
            if (trace > 0.0) {
                for (int i = 0; i < q; ++i) g(i, i) += 1e-12 * trace;
                auto eta = solve_spd(std::move(g), matvec_t(dr, resid));
                std::vector<double> cand = new_iface;
                for (int j = 0; j < q; ++j) {
                    double e = eta[static_cast<std::size_t>(j)];
                    const auto& xj0 = win_x[static_cast<std::size_t>(j)];
                    const auto& xj1 = win_x[static_cast<std::size_t>(j) + 1];
                    const auto& rj0 = win_r[static_cast<std::size_t>(j)];
                    const auto& rj1 = win_r[static_cast<std::size_t>(j) + 1];
                    for (std::size_t k = 0; k < cand.size(); ++k)
                        cand[k] -= e * (xj1[k] - xj0[k] + rj1[k] - rj0[k]);
                }
                double step = 0.0;
                bool finite = true;
                for (std::size_t k = 0; k < cand.size(); ++k) {
                    if (!std::isfinite(cand[k])) finite = false;
                    step = std::max(step, std::abs(cand[k] - new_iface[k]));
                }
                if (finite && step <= 1e3 * std::max(change, 1e-300)) next = std::move(cand);
            }
        }
        iface = std::move(next);
    }
    if (!converged)
        throw SchwarzConvergenceError("schwarz_solve: no convergence in " +
                                          std::to_string(opts.max_outer) + " outer iterations",
                                      state.history.empty() ? 0.0 : state.history.back(),
                                      state.iterations, state.history);

    // Final inner solve at full accuracy against the converged interface.
    system.set_interface_values(iface);
    SolveOptions final_opts;
    final_opts.tol = opts.inner_tol_floor;
    final_opts.max_iter = opts.inner_max_iter;
    long before = system.cell_updates();
    system.run(u1, final_opts);
    state.inner_cell_updates += system.cell_updates() - before;

    state.alpha = alpha;
    state.interface_values = iface;

    SchwarzResult result;
    result.u1 = u1;
    Matrix modes_omega2 = gather_rows(basis, split.omega2, nullptr);
    result.u2.assign(split.omega2.size(), 0.0);
    if (basis.rank() > 0) {
        auto rec = matvec(modes_omega2, alpha);
        result.u2 = std::move(rec);
    }

    result.composite.values.assign(static_cast<std::size_t>(mesh.cell_count()), 0.0);
    result.composite.mesh_id = mesh.content_hash();
    for (std::size_t k = 0; k < split.omega2.size(); ++k)
        result.composite.values[static_cast<std::size_t>(split.omega2[k])] = result.u2[k];
    for (std::size_t k = 0; k < split.omega1.size(); ++k)
        result.composite.values[static_cast<std::size_t>(split.omega1[k])] = u1[k];

    result.state = std::move(state);
    return result;
}

}  // namespace morphrom
