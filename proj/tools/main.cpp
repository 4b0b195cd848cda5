#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "morphrom/config.hpp"
#include "morphrom/errors.hpp"
#include "morphrom/pipeline.hpp"
#include "morphrom/util.hpp"

namespace {

using morphrom::ConfigError;
using nlohmann::json;

morphrom::ParameterPoint parse_mu(const std::string& text) {
    morphrom::ParameterPoint mu;
    std::istringstream in(text);
    std::string token;
    while (std::getline(in, token, ',')) {
        try {
            std::size_t used = 0;
            mu.values.push_back(std::stod(token, &used));
            if (used != token.size()) throw std::invalid_argument(token);
        } catch (const std::exception&) {
            throw ConfigError("--mu expects comma-separated numbers, got '" + text + "'");
        }
    }
    if (mu.values.empty()) throw ConfigError("--mu expects comma-separated numbers");
    return mu;
}

// CLI tolerance overrides go through the JSON document and a re-parse, so
// the recorded config hash always matches the effective configuration.
morphrom::RunConfig config_with_override(const std::string& path, const char* section,
                                         double tol) {
    morphrom::RunConfig cfg = morphrom::load_config(path);
    if (tol >= 0.0) {
        json doc = cfg.raw;
        doc[section]["tol"] = tol;
        cfg = morphrom::parse_config(doc);
    }
    return cfg;
}

json quality_json(const morphrom::QualityReport& q) {
    return {{"min_area", q.min_area},
            {"max_skewness", q.max_skewness},
            {"max_nonorthogonality", q.max_nonorthogonality},
            {"pass", q.pass}};
}

int run(int argc, char** argv) {
    CLI::App app{"Reduced-order modeling toolkit: FFD mesh morphing, finite-volume snapshots, "
                 "modal bases, interpolated and domain-decomposed online models"};
    app.require_subcommand(1);

    std::string config_path;
    std::string store_path;
    std::string mu_text;
    std::string method = "podi";
    double tol = -1.0;
    int rc = 0;

    CLI::App* ffd = app.add_subcommand("ffd", "lattice morphing utilities");
    ffd->require_subcommand(1);
    CLI::App* ffd_apply =
        ffd->add_subcommand("apply", "morph the configured mesh at a parameter point");
    ffd_apply->add_option("--config", config_path, "JSON run configuration")->required();
    ffd_apply->add_option("--mu", mu_text, "parameter values a,b")->required();
    ffd_apply->add_option("--store", store_path, "directory to write the morphed mesh into");
    ffd_apply->callback([&] {
        morphrom::RunConfig cfg = morphrom::load_config(config_path);
        morphrom::ParameterPoint mu = parse_mu(mu_text);
        morphrom::FFDLattice lattice = morphrom::apply_parameters(cfg.binding, mu, cfg.lattice);
        morphrom::StructuredMesh morphed = morphrom::morph_mesh(cfg.make_mesh(), lattice);
        json out;
        out["mu"] = mu.values;
        out["quality"] = quality_json(morphrom::check_quality(morphed));
        if (!store_path.empty()) {
            std::string base = "morphed";
            for (double v : mu.values) base += "_" + morphrom::fmt_double(v);
            std::filesystem::create_directories(store_path);
            morphrom::save_mesh(morphed, std::filesystem::path(store_path) / base);
            out["mesh_base"] = base;
        }
        std::cout << out.dump(2) << '\n';
    });

    CLI::App* mesh = app.add_subcommand("mesh", "mesh utilities");
    mesh->require_subcommand(1);
    CLI::App* mesh_check =
        mesh->add_subcommand("check", "generate (optionally morph) the mesh and check quality");
    mesh_check->add_option("--config", config_path, "JSON run configuration")->required();
    mesh_check->add_option("--mu", mu_text, "optional parameter values a,b");
    mesh_check->callback([&] {
        morphrom::RunConfig cfg = morphrom::load_config(config_path);
        morphrom::StructuredMesh m = cfg.make_mesh();
        if (!mu_text.empty()) {
            morphrom::ParameterPoint mu = parse_mu(mu_text);
            m = morphrom::morph_mesh(m, morphrom::apply_parameters(cfg.binding, mu, cfg.lattice));
        }
        morphrom::QualityReport q = morphrom::check_quality(m);
        json out;
        out["cells"] = m.cell_count();
        out["vertices"] = m.vertex_count();
        out["quality"] = quality_json(q);
        std::cout << out.dump(2) << '\n';
        if (!q.pass) rc = 3;
    });

    CLI::App* offline = app.add_subcommand("offline", "sample snapshots and build the store");
    offline->add_option("--config", config_path, "JSON run configuration")->required();
    offline->add_option("--store", store_path, "store directory")->required();
    offline->add_option("--tol", tol, "override the sampling tolerance");
    offline->callback([&] {
        morphrom::RunConfig cfg = config_with_override(config_path, "sampling", tol);
        morphrom::OfflineOutcome out = morphrom::cmd_offline(cfg, store_path);
        json summary;
        summary["up_to_date"] = out.up_to_date;
        summary["solves"] = out.solves;
        summary["snapshots"] = out.snapshot_count;
        summary["converged"] = out.converged;
        summary["manifest"] = out.manifest_path.string();
        std::cout << summary.dump(2) << '\n';
    });

    CLI::App* eval = app.add_subcommand("eval", "evaluate one parameter point against the store");
    eval->add_option("--config", config_path, "JSON run configuration")->required();
    eval->add_option("--store", store_path, "store directory")->required();
    eval->add_option("--mu", mu_text, "parameter values a,b")->required();
    eval->add_option("--method", method, "podi, ddpod or fom")
        ->check(CLI::IsMember({"podi", "ddpod", "fom"}));
    eval->add_option("--tol", tol, "override the method tolerance (ddpod or fom)");
    eval->callback([&] {
        const char* section = method == "ddpod" ? "ddpod" : "pde";
        if (tol >= 0.0 && method == "podi")
            morphrom::warn("eval: --tol has no effect on the interpolation method");
        morphrom::RunConfig cfg = config_with_override(config_path, section, tol);
        morphrom::Store store = morphrom::load_store(cfg, store_path);
        morphrom::EvalOutcome out = morphrom::cmd_eval(cfg, store, parse_mu(mu_text), method);
        json summary;
        summary["method"] = out.method;
        summary["mu"] = out.mu.values;
        summary["qoi"] = out.qoi;
        summary["seconds"] = out.seconds;
        summary["result_file"] = out.detail.at("result_file");
        std::cout << summary.dump(2) << '\n';
    });

    CLI::App* report = app.add_subcommand("report", "error and timing tables for the validation points");
    report->add_option("--config", config_path, "JSON run configuration")->required();
    report->add_option("--store", store_path, "store directory")->required();
    report->callback([&] {
        morphrom::RunConfig cfg = morphrom::load_config(config_path);
        morphrom::Store store = morphrom::load_store(cfg, store_path);
        morphrom::cmd_report(cfg, store);
        json summary;
        summary["report"] = (store.dir / "report.csv").string();
        summary["timings"] = (store.dir / "timings.csv").string();
        std::cout << summary.dump(2) << '\n';
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const morphrom::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.exit_code();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 1;
    }
}
