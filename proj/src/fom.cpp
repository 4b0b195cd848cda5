#include "morphrom/fom.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "morphrom/errors.hpp"

namespace morphrom {

BoundarySpec BoundarySpec::uniform(const StructuredMesh& mesh,
                                   const std::map<std::string, std::pair<BcType, double>>& spec) {
    BoundarySpec bc;
    for (const auto& patch : mesh.patches) {
        auto it = spec.find(patch.name);
        if (it == spec.end()) throw ConfigError("boundary spec missing patch " + patch.name);
        PatchCondition cond;
        cond.type = it->second.first;
        cond.values.assign(patch.faces.size(), it->second.second);
        bc.conditions[patch.name] = std::move(cond);
    }
    if (spec.size() != mesh.patches.size())
        throw ConfigError("boundary spec names a patch the mesh does not have");
    return bc;
}

void BoundarySpec::validate(const StructuredMesh& mesh) const {
    for (const auto& patch : mesh.patches) {
        auto it = conditions.find(patch.name);
        if (it == conditions.end()) throw ConfigError("boundary spec missing patch " + patch.name);
        if (it->second.values.size() != patch.faces.size())
            throw ShapeError("boundary values count mismatch on patch " + patch.name);
    }
    for (const auto& [name, cond] : conditions) {
        bool found = false;
        for (const auto& patch : mesh.patches) found = found || patch.name == name;
        if (!found) throw ConfigError("boundary spec names unknown patch " + name);
    }
}

namespace {

struct BcFace {
    BcType type;
    double value;
};

// Lookup from (cell, side) to its boundary condition.
std::map<std::pair<int, int>, BcFace> build_bc_lookup(const StructuredMesh& mesh,
                                                      const BoundarySpec& bc) {
    std::map<std::pair<int, int>, BcFace> lookup;
    for (const auto& patch : mesh.patches) {
        const auto& cond = bc.conditions.at(patch.name);
        for (std::size_t k = 0; k < patch.faces.size(); ++k) {
            const auto& f = patch.faces[k];
            lookup[{mesh.cid(f.ci, f.cj), static_cast<int>(f.side)}] = {cond.type, cond.values[k]};
        }
    }
    return lookup;
}

}  // namespace

FvSystem::FvSystem(const StructuredMesh& mesh, const BoundarySpec& bc, double diffusivity,
                   Vec2 velocity, const std::vector<double>& source, std::vector<int> cells)
    : mesh_id_(mesh.content_hash()) {
    if (!(diffusivity > 0.0)) throw ConfigError("diffusivity must be positive");
    if (static_cast<int>(source.size()) != mesh.cell_count())
        throw ShapeError("source length must equal cell count");
    bc.validate(mesh);

    if (cells.empty()) {
        cells.resize(static_cast<std::size_t>(mesh.cell_count()));
        for (int c = 0; c < mesh.cell_count(); ++c) cells[static_cast<std::size_t>(c)] = c;
    } else {
        std::sort(cells.begin(), cells.end());
        cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
        if (cells.front() < 0 || cells.back() >= mesh.cell_count())
            throw IndexError("cell subset index outside mesh");
    }
    cells_ = std::move(cells);
    n_ = static_cast<int>(cells_.size());
    local_of_global_.assign(static_cast<std::size_t>(mesh.cell_count()), -1);
    for (int l = 0; l < n_; ++l) local_of_global_[static_cast<std::size_t>(cells_[static_cast<std::size_t>(l)])] = l;

    auto bc_lookup = build_bc_lookup(mesh, bc);

    diag_.assign(static_cast<std::size_t>(n_), 0.0);
    rhs_fixed_.assign(static_cast<std::size_t>(n_), 0.0);
    link_offset_.assign(static_cast<std::size_t>(n_) + 1, 0);

    std::vector<std::vector<std::pair<int, double>>> links(static_cast<std::size_t>(n_));

    for (int l = 0; l < n_; ++l) {
        int c = cells_[static_cast<std::size_t>(l)];
        int ci = c % mesh.nx, cj = c / mesh.nx;
        Vec2 cp = mesh.cell_centroid(ci, cj);
        rhs_fixed_[static_cast<std::size_t>(l)] =
            source[static_cast<std::size_t>(c)] * mesh.cell_area(ci, cj);

        for (Side side : {Side::South, Side::East, Side::North, Side::West}) {
            double area = mesh.face_length(ci, cj, side);
            Vec2 nhat = mesh.face_normal(ci, cj, side);
            double phi = velocity.dot(nhat) * area;  // outward volumetric flux
            int nb = mesh.neighbor(ci, cj, side);

            if (nb >= 0) {
                Vec2 cn = mesh.cell_centroid(nb % mesh.nx, nb / mesh.nx);
                double dist = (cn - cp).norm();
                double trans = diffusivity * area / dist;
                diag_[static_cast<std::size_t>(l)] += trans + std::max(phi, 0.0);
                double coef = -trans + std::min(phi, 0.0);
                int nl = local_of_global_[static_cast<std::size_t>(nb)];
                if (nl >= 0) {
                    links[static_cast<std::size_t>(l)].push_back({nl, coef});
                } else {
                    // Subset boundary: the outside value multiplies -coef on
                    // the right-hand side.
                    iface_cell_.push_back(l);
                    iface_coef_.push_back(-coef);
                    iface_ext_.push_back(nb);
                }
            } else {
                auto it = bc_lookup.find({c, static_cast<int>(side)});
                if (it == bc_lookup.end())
                    throw ConfigError("boundary face without condition at cell " + std::to_string(c));
                const BcFace& f = it->second;
                if (f.type == BcType::Dirichlet) {
                    double dist = (mesh.face_centroid(ci, cj, side) - cp).norm();
                    double trans = diffusivity * area / dist;
                    diag_[static_cast<std::size_t>(l)] += trans + std::max(phi, 0.0);
                    rhs_fixed_[static_cast<std::size_t>(l)] += (trans - std::min(phi, 0.0)) * f.value;
                } else {
                    // Prescribed outward diffusive flux density; advection
                    // upwinds from the cell on both flow directions.
                    rhs_fixed_[static_cast<std::size_t>(l)] -= f.value * area;
                    diag_[static_cast<std::size_t>(l)] += phi;
                }
            }
        }
    }

    link_nbr_.clear();
    link_coef_.clear();
    for (int l = 0; l < n_; ++l) {
        link_offset_[static_cast<std::size_t>(l)] = static_cast<int>(link_nbr_.size());
        for (const auto& [nl, coef] : links[static_cast<std::size_t>(l)]) {
            link_nbr_.push_back(nl);
            link_coef_.push_back(coef);
        }
    }
    link_offset_[static_cast<std::size_t>(n_)] = static_cast<int>(link_nbr_.size());
    rhs_iface_.assign(static_cast<std::size_t>(n_), 0.0);
}

FvSystem::EquationRow FvSystem::equation_row(int local) const {
    if (local < 0 || local >= n_) throw IndexError("equation_row: local index out of range");
    EquationRow row;
    row.diag = diag_[static_cast<std::size_t>(local)];
    row.rhs = rhs_fixed_[static_cast<std::size_t>(local)];
    for (int k = link_offset_[static_cast<std::size_t>(local)];
         k < link_offset_[static_cast<std::size_t>(local) + 1]; ++k)
        row.neighbors.push_back({cells_[static_cast<std::size_t>(link_nbr_[static_cast<std::size_t>(k)])],
                                 link_coef_[static_cast<std::size_t>(k)]});
    for (std::size_t k = 0; k < iface_cell_.size(); ++k)
        if (iface_cell_[k] == local) row.neighbors.push_back({iface_ext_[k], -iface_coef_[k]});
    return row;
}

void FvSystem::set_interface_values(const std::vector<double>& values) {
    if (values.size() != iface_cell_.size())
        throw ShapeError("interface values count mismatch");
    std::fill(rhs_iface_.begin(), rhs_iface_.end(), 0.0);
    for (std::size_t k = 0; k < values.size(); ++k)
        rhs_iface_[static_cast<std::size_t>(iface_cell_[k])] += iface_coef_[k] * values[k];
}

double FvSystem::residual_inf(const std::vector<double>& u) const {
    double rmax = 0.0;
    for (int l = 0; l < n_; ++l) {
        double r = rhs_fixed_[static_cast<std::size_t>(l)] + rhs_iface_[static_cast<std::size_t>(l)] -
                   diag_[static_cast<std::size_t>(l)] * u[static_cast<std::size_t>(l)];
        for (int k = link_offset_[static_cast<std::size_t>(l)]; k < link_offset_[static_cast<std::size_t>(l) + 1]; ++k)
            r -= link_coef_[static_cast<std::size_t>(k)] * u[static_cast<std::size_t>(link_nbr_[static_cast<std::size_t>(k)])];
        rmax = std::max(rmax, std::abs(r));
    }
    return rmax;
}

SolveResult FvSystem::run(std::vector<double>& u, const SolveOptions& opts) const {
    if (u.empty()) u.assign(static_cast<std::size_t>(n_), 0.0);
    if (static_cast<int>(u.size()) != n_) throw ShapeError("initial guess length mismatch");

    double rhs_scale = 0.0;
    for (int l = 0; l < n_; ++l)
        rhs_scale = std::max(rhs_scale, std::abs(rhs_fixed_[static_cast<std::size_t>(l)] +
                                                 rhs_iface_[static_cast<std::size_t>(l)]));
    if (rhs_scale == 0.0) rhs_scale = 1.0;

    double res = residual_inf(u);
    if (opts.residual_history) opts.residual_history->push_back(res);
    long it = 0;
    while (res > opts.tol * rhs_scale) {
        if (it >= opts.max_iter)
            throw ConvergenceError("solver stalled at residual " + std::to_string(res), res, it);
        ++it;
        for (int l = 0; l < n_; ++l) {
            double v = rhs_fixed_[static_cast<std::size_t>(l)] + rhs_iface_[static_cast<std::size_t>(l)];
            for (int k = link_offset_[static_cast<std::size_t>(l)]; k < link_offset_[static_cast<std::size_t>(l) + 1]; ++k)
                v -= link_coef_[static_cast<std::size_t>(k)] * u[static_cast<std::size_t>(link_nbr_[static_cast<std::size_t>(k)])];
            u[static_cast<std::size_t>(l)] = v / diag_[static_cast<std::size_t>(l)];
        }
        cell_updates_ += n_;
        res = residual_inf(u);
        if (opts.residual_history) opts.residual_history->push_back(res);
    }

    SolveResult out;
    out.field.values = u;
    out.field.mesh_id = mesh_id_;
    out.iterations = it;
    out.residual = res;
    return out;
}

SolveResult solve(const StructuredMesh& mesh, const BoundarySpec& bc, double diffusivity,
                  Vec2 velocity, const std::vector<double>& source, const SolveOptions& opts) {
    FvSystem system(mesh, bc, diffusivity, velocity, source);
    std::vector<double> u;
    if (opts.initial) {
        if (static_cast<int>(opts.initial->size()) != mesh.cell_count())
            throw ShapeError("initial guess length must equal cell count");
        u = *opts.initial;
    }
    return system.run(u, opts);
}

double output_functional(const StructuredMesh& mesh, const Field& field, const QoISpec& qoi,
                         double diffusivity) {
    if (static_cast<int>(field.values.size()) != mesh.cell_count())
        throw ShapeError("field length must equal cell count");
    if (!(diffusivity > 0.0)) throw ConfigError("diffusivity must be positive");
    if (qoi.normalization == 0.0) throw ConfigError("qoi normalization must be nonzero");
    double dirlen = qoi.direction.norm();
    if (std::abs(dirlen - 1.0) > 1e-6) throw ConfigError("qoi direction must be a unit vector");
    Vec2 dir{qoi.direction.x / dirlen, qoi.direction.y / dirlen};

    const Patch* patch = nullptr;
    for (const auto& p : mesh.patches)
        if (p.name == qoi.patch) patch = &p;
    if (!patch) throw ConfigError("qoi patch not found: " + qoi.patch);

    double total = 0.0;
    for (const auto& f : patch->faces) {
        int inb = mesh.neighbor(f.ci, f.cj, opposite(f.side));
        if (inb < 0) throw ConfigError("qoi patch face has no inward neighbor cell");
        Vec2 cp = mesh.cell_centroid(f.ci, f.cj);
        Vec2 cn = mesh.cell_centroid(inb % mesh.nx, inb / mesh.nx);
        Vec2 nhat = mesh.face_normal(f.ci, f.cj, f.side);
        // One-sided normal derivative from the two cells straddling the
        // inward direction, using the normal-projected distance.
        double proj = (cp - cn).dot(nhat);
        double dudn = (field.values[static_cast<std::size_t>(mesh.cid(f.ci, f.cj))] -
                       field.values[static_cast<std::size_t>(inb)]) /
                      proj;
        double flux = -diffusivity * dudn;
        total += flux * nhat.dot(dir) * mesh.face_length(f.ci, f.cj, f.side);
    }
    return total / qoi.normalization;
}

std::vector<double> restrict_field(const Field& field, std::vector<int> cells) {
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    std::vector<double> out;
    out.reserve(cells.size());
    for (int c : cells) {
        if (c < 0 || c >= static_cast<int>(field.values.size()))
            throw IndexError("restrict_field: cell index out of range");
        out.push_back(field.values[static_cast<std::size_t>(c)]);
    }
    return out;
}

}  // namespace morphrom
