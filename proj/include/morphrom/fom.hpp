#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "morphrom/geometry.hpp"
#include "morphrom/mesh.hpp"

namespace morphrom {

// Cell-centered scalar field; mesh_id ties it to the geometry it was
// computed on.
struct Field {
    std::vector<double> values;
    std::string mesh_id;
};

enum class BcType { Dirichlet, Neumann };

// Dirichlet carries the value at the face, Neumann the outward diffusive
// flux density. One value per patch face, in patch face order.
struct PatchCondition {
    BcType type = BcType::Dirichlet;
    std::vector<double> values;
};

struct BoundarySpec {
    std::map<std::string, PatchCondition> conditions;

    static BoundarySpec uniform(const StructuredMesh& mesh,
                                const std::map<std::string, std::pair<BcType, double>>& spec);
    void validate(const StructuredMesh& mesh) const;
};

struct QoISpec {
    std::string patch;
    Vec2 direction;  // unit vector
    double normalization = 1.0;
};

struct SolveOptions {
    double tol = 1e-8;
    long max_iter = 100000;
    const std::vector<double>* initial = nullptr;
    std::vector<double>* residual_history = nullptr;  // per-sweep infinity norms
};

struct SolveResult {
    Field field;
    long iterations = 0;
    double residual = 0.0;
};

// Steady advection-diffusion -kappa lap(u) + v . grad(u) = f discretized with
// two-point fluxes and first-order upwind advection, swept with Gauss-Seidel
// in fixed cell order until the residual infinity norm drops below
// tol * |rhs|_inf.
SolveResult solve(const StructuredMesh& mesh, const BoundarySpec& bc, double diffusivity,
                  Vec2 velocity, const std::vector<double>& source, const SolveOptions& opts = {});

// Normalized diffusive flux through a boundary patch projected on a
// direction. The normal derivative at a patch face is the one-sided
// difference between the owner cell and its inward neighbor.
double output_functional(const StructuredMesh& mesh, const Field& field, const QoISpec& qoi,
                         double diffusivity);

// Values gathered in ascending cell index order; duplicate indices collapse.
std::vector<double> restrict_field(const Field& field, std::vector<int> cells);

// Assembled linear system over a cell subset. Faces toward cells outside the
// subset become interface slots whose external value (taken at the outside
// cell centroid) enters the right-hand side; this makes a subdomain solve
// with exact external values reproduce the monolithic solution.
class FvSystem {
public:
    // cells empty means all cells. bc must cover every physical boundary
    // face of the subset.
    FvSystem(const StructuredMesh& mesh, const BoundarySpec& bc, double diffusivity, Vec2 velocity,
             const std::vector<double>& source, std::vector<int> cells = {});

    int local_count() const { return n_; }
    const std::vector<int>& cells() const { return cells_; }
    int interface_count() const { return static_cast<int>(iface_cell_.size()); }
    // Global id of the outside cell each interface slot reads from.
    const std::vector<int>& interface_exterior_cells() const { return iface_ext_; }

    void set_interface_values(const std::vector<double>& values);

    // Gauss-Seidel sweeps from `u` (local ordering, resized if empty); throws
    // ConvergenceError when max_iter sweeps do not reach the tolerance.
    SolveResult run(std::vector<double>& u, const SolveOptions& opts) const;

    // Total cell updates performed by run() since construction.
    long cell_updates() const { return cell_updates_; }

    // One assembled equation: diag * u_c + sum(coef * u_nb) = rhs, with the
    // fixed right-hand side (source plus physical boundary data). Neighbor
    // ids are global cell ids; interface slots appear as neighbors too.
    struct EquationRow {
        double diag = 0.0;
        double rhs = 0.0;
        std::vector<std::pair<int, double>> neighbors;
    };
    EquationRow equation_row(int local) const;

private:
    double residual_inf(const std::vector<double>& u) const;

    int n_ = 0;
    std::vector<int> cells_;          // ascending global ids
    std::vector<int> local_of_global_;
    std::vector<double> diag_;
    std::vector<double> rhs_fixed_;   // bc + source part
    std::vector<double> rhs_iface_;   // interface part, rebuilt on update
    std::vector<int> link_offset_;
    std::vector<int> link_nbr_;
    std::vector<double> link_coef_;
    std::vector<int> iface_cell_;     // local owner cell per interface slot
    std::vector<double> iface_coef_;  // coefficient on the external value
    std::vector<int> iface_ext_;
    std::string mesh_id_;
    mutable long cell_updates_ = 0;
};

}  // namespace morphrom
