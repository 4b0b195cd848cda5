#include "morphrom/config.hpp"

#include <fstream>

#include "morphrom/errors.hpp"
#include "morphrom/util.hpp"

namespace morphrom {

using nlohmann::json;

namespace {

const json& need(const json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError("config: missing " + where + "." + key);
    return *it;
}

double need_number(const json& j, const char* key, const std::string& where) {
    const json& v = need(j, key, where);
    if (!v.is_number()) throw ConfigError("config: " + where + "." + key + " must be a number");
    return v.get<double>();
}

int need_int(const json& j, const char* key, const std::string& where) {
    const json& v = need(j, key, where);
    if (!v.is_number_integer()) throw ConfigError("config: " + where + "." + key + " must be an integer");
    return v.get<int>();
}

Vec2 need_vec2(const json& j, const char* key, const std::string& where) {
    const json& v = need(j, key, where);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigError("config: " + where + "." + key + " must be [x, y]");
    return {v[0].get<double>(), v[1].get<double>()};
}

Rect need_rect(const json& j, const char* key, const std::string& where) {
    const json& v = need(j, key, where);
    Rect r{need_number(v, "x0", where + "." + key), need_number(v, "y0", where + "." + key),
           need_number(v, "x1", where + "." + key), need_number(v, "y1", where + "." + key)};
    if (!r.valid()) throw ConfigError("config: " + where + "." + key + " must have x0 < x1 and y0 < y1");
    return r;
}

}  // namespace

RunConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config: document must be a JSON object");
    RunConfig cfg;
    cfg.raw = doc;

    const json& mesh = need(doc, "mesh", "$");
    cfg.nx = need_int(mesh, "nx", "mesh");
    cfg.ny = need_int(mesh, "ny", "mesh");
    if (cfg.nx < 4 || cfg.ny < 4) throw ConfigError("config: mesh.nx and mesh.ny must be at least 4");
    cfg.domain = need_rect(mesh, "domain", "mesh");
    const json& bump = need(mesh, "bump", "mesh");
    cfg.bump.x0 = need_number(bump, "x0", "mesh.bump");
    cfg.bump.x1 = need_number(bump, "x1", "mesh.bump");
    if (!(cfg.bump.x0 < cfg.bump.x1)) throw ConfigError("config: mesh.bump must have x0 < x1");

    const json& ffd = need(doc, "ffd", "$");
    Vec2 origin = need_vec2(ffd, "origin", "ffd");
    Vec2 lengths = need_vec2(ffd, "box_lengths", "ffd");
    const json& dims = need(ffd, "dims", "ffd");
    if (!dims.is_array() || dims.size() != 2)
        throw ConfigError("config: ffd.dims must be [l, m]");
    cfg.lattice = FFDLattice(origin, lengths, {dims[0].get<int>(), dims[1].get<int>()});

    const json& binding = need(ffd, "binding", "ffd");
    const json& bounds = need(binding, "bounds", "ffd.binding");
    if (!bounds.is_array() || bounds.empty())
        throw ConfigError("config: ffd.binding.bounds must be a nonempty array");
    for (const auto& b : bounds) {
        if (!b.is_array() || b.size() != 2)
            throw ConfigError("config: each bound must be [lo, hi]");
        cfg.binding.bounds.push_back({b[0].get<double>(), b[1].get<double>()});
    }
    cfg.binding.parameter_dim = static_cast<int>(cfg.binding.bounds.size());
    const json& entries = need(binding, "entries", "ffd.binding");
    for (const auto& e : entries) {
        BindingEntry be;
        const json& idx = need(e, "index", "ffd.binding.entries[]");
        if (!idx.is_array() || idx.size() != 2)
            throw ConfigError("config: binding entry index must be [i, j]");
        be.i = idx[0].get<int>();
        be.j = idx[1].get<int>();
        be.axis = need_int(e, "axis", "ffd.binding.entries[]");
        be.parameter = need_int(e, "parameter", "ffd.binding.entries[]");
        be.scale = need_number(e, "scale", "ffd.binding.entries[]");
        cfg.binding.entries.push_back(be);
    }
    cfg.binding.validate(cfg.lattice.dims);

    const json& pde = need(doc, "pde", "$");
    cfg.diffusivity = need_number(pde, "diffusivity", "pde");
    if (!(cfg.diffusivity > 0.0)) throw ConfigError("config: pde.diffusivity must be positive");
    cfg.velocity = need_vec2(pde, "velocity", "pde");
    cfg.source = need_number(pde, "source", "pde");
    cfg.solver_tol = need_number(pde, "tol", "pde");
    if (!(cfg.solver_tol > 0.0)) throw ConfigError("config: pde.tol must be positive");
    cfg.solver_max_iter = static_cast<long>(need_number(pde, "max_iter", "pde"));
    if (cfg.solver_max_iter <= 0) throw ConfigError("config: pde.max_iter must be positive");

    const json& bc = need(pde, "bc", "pde");
    if (!bc.is_object() || bc.empty()) throw ConfigError("config: pde.bc must map patches to conditions");
    for (const auto& [name, cond] : bc.items()) {
        std::string type = need(cond, "type", "pde.bc." + name).get<std::string>();
        double value = need_number(cond, "value", "pde.bc." + name);
        if (type == "dirichlet")
            cfg.boundary[name] = {BcType::Dirichlet, value};
        else if (type == "neumann")
            cfg.boundary[name] = {BcType::Neumann, value};
        else
            throw ConfigError("config: pde.bc." + name + ".type must be dirichlet or neumann");
    }

    const json& qoi = need(doc, "qoi", "$");
    cfg.qoi.patch = need(qoi, "patch", "qoi").get<std::string>();
    cfg.qoi.direction = need_vec2(qoi, "direction", "qoi");
    if (std::abs(cfg.qoi.direction.norm() - 1.0) > 1e-6)
        throw ConfigError("config: qoi.direction must be a unit vector");
    cfg.qoi.normalization = need_number(qoi, "normalization", "qoi");
    if (cfg.qoi.normalization == 0.0) throw ConfigError("config: qoi.normalization must be nonzero");

    const json& sampling = need(doc, "sampling", "$");
    const json& grid = need(sampling, "init_grid", "sampling");
    if (!grid.is_array() || grid.size() != 2)
        throw ConfigError("config: sampling.init_grid must be [gx, gy]");
    cfg.init_grid = {grid[0].get<int>(), grid[1].get<int>()};
    if (cfg.init_grid[0] < 2 || cfg.init_grid[1] < 2)
        throw ConfigError("config: sampling.init_grid must be at least 2 per axis");
    cfg.sampling_tol = need_number(sampling, "tol", "sampling");
    cfg.max_new = need_int(sampling, "max_new", "sampling");
    if (cfg.max_new < 0) throw ConfigError("config: sampling.max_new must be nonnegative");
    if (sampling.contains("restrict_to_patch") && !sampling["restrict_to_patch"].is_null())
        cfg.restrict_to_patch = sampling["restrict_to_patch"].get<std::string>();

    const json& ddpod = need(doc, "ddpod", "$");
    cfg.core_box = need_rect(ddpod, "core_box", "ddpod");
    cfg.overlap_layers = need_int(ddpod, "overlap_layers", "ddpod");
    if (cfg.overlap_layers < 1) throw ConfigError("config: ddpod.overlap_layers must be at least 1");
    cfg.schwarz_tol = need_number(ddpod, "tol", "ddpod");
    if (!(cfg.schwarz_tol > 0.0)) throw ConfigError("config: ddpod.tol must be positive");
    cfg.max_outer = need_int(ddpod, "max_outer", "ddpod");
    if (cfg.max_outer < 1) throw ConfigError("config: ddpod.max_outer must be at least 1");

    const json& validation = need(doc, "validation", "$");
    const json& vpoints = need(validation, "points", "validation");
    if (!vpoints.is_array() || vpoints.empty())
        throw ConfigError("config: validation.points must be a nonempty array");
    for (const auto& p : vpoints) {
        if (!p.is_array() || p.size() != 2)
            throw ConfigError("config: each validation point must be [mu1, mu2]");
        ParameterPoint mu{{p[0].get<double>(), p[1].get<double>()}};
        for (int k = 0; k < 2; ++k) {
            auto [lo, hi] = cfg.binding.bounds[static_cast<std::size_t>(k)];
            if (mu.values[static_cast<std::size_t>(k)] < lo || mu.values[static_cast<std::size_t>(k)] > hi)
                throw ConfigError("config: validation point outside parameter bounds");
        }
        cfg.validation_points.push_back(mu);
    }

    if (doc.contains("workers")) {
        cfg.workers = doc["workers"].get<int>();
        if (cfg.workers < 1) throw ConfigError("config: workers must be at least 1");
    }
    if (doc.contains("output_dir")) cfg.output_dir = doc["output_dir"].get<std::string>();

    Fnv1a h;
    h.update_string(cfg.raw.dump());
    cfg.config_hash = h.hex();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("config: parse failure in " + path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

}  // namespace morphrom
