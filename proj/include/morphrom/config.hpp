#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "morphrom/ffd.hpp"
#include "morphrom/fom.hpp"
#include "morphrom/geometry.hpp"
#include "morphrom/mesh.hpp"

namespace morphrom {

// Validated run configuration; docs/config.schema.json documents the same
// constraints for external tooling.
struct RunConfig {
    // mesh
    int nx = 0;
    int ny = 0;
    Rect domain;
    BumpSpec bump;

    // ffd
    FFDLattice lattice;
    ParameterBinding binding;

    // pde
    double diffusivity = 0.0;
    Vec2 velocity;
    double source = 0.0;
    double solver_tol = 1e-8;
    long solver_max_iter = 100000;
    std::map<std::string, std::pair<BcType, double>> boundary;  // per patch

    // qoi
    QoISpec qoi;

    // sampling
    std::array<int, 2> init_grid{3, 3};
    double sampling_tol = 0.0;
    int max_new = 4;
    std::optional<std::string> restrict_to_patch;

    // ddpod
    Rect core_box;
    int overlap_layers = 2;
    double schwarz_tol = 1e-6;
    int max_outer = 30;

    // validation points for reports
    std::vector<ParameterPoint> validation_points;

    int workers = 1;
    std::string output_dir = "store";

    nlohmann::json raw;       // canonical parsed document
    std::string config_hash;  // fingerprint of the canonical dump

    StructuredMesh make_mesh() const { return generate_mesh(nx, ny, domain, bump); }
    BoundarySpec make_bc(const StructuredMesh& mesh) const {
        return BoundarySpec::uniform(mesh, boundary);
    }
    std::vector<double> make_source(const StructuredMesh& mesh) const {
        return std::vector<double>(static_cast<std::size_t>(mesh.cell_count()), source);
    }
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace morphrom
