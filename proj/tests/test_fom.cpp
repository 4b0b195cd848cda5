#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <vector>

#include "morphrom/errors.hpp"
#include "morphrom/fom.hpp"
#include "morphrom/mesh.hpp"
#include "morphrom/util.hpp"

using namespace morphrom;

namespace {

constexpr double kPi = std::numbers::pi;

StructuredMesh unit_mesh(int n) {
    return generate_mesh(n, n, Rect{0.0, 0.0, 1.0, 1.0}, BumpSpec{0.3, 0.7});
}

BoundarySpec all_dirichlet(const StructuredMesh& mesh, double value) {
    std::map<std::string, std::pair<BcType, double>> spec;
    for (const auto& p : mesh.patches) spec[p.name] = {BcType::Dirichlet, value};
    return BoundarySpec::uniform(mesh, spec);
}

// Dirichlet x=0 on the west face and x=1 on the east face, zero flux
// elsewhere; the exact solution of pure diffusion is u = x.
BoundarySpec linear_x_bc(const StructuredMesh& mesh) {
    return BoundarySpec::uniform(mesh, {{"inlet", {BcType::Dirichlet, 0.0}},
                                        {"outlet", {BcType::Dirichlet, 1.0}},
                                        {"top", {BcType::Neumann, 0.0}},
                                        {"bottom", {BcType::Neumann, 0.0}},
                                        {"bump", {BcType::Neumann, 0.0}}});
}

double manufactured_l2_error(int n) {
    StructuredMesh mesh = unit_mesh(n);
    BoundarySpec bc = all_dirichlet(mesh, 0.0);
    std::vector<double> source(static_cast<std::size_t>(mesh.cell_count()));
    for (int cj = 0; cj < n; ++cj)
        for (int ci = 0; ci < n; ++ci) {
            Vec2 c = mesh.cell_centroid(ci, cj);
            source[static_cast<std::size_t>(mesh.cid(ci, cj))] =
                2.0 * kPi * kPi * std::sin(kPi * c.x) * std::sin(kPi * c.y);
        }
    SolveOptions opts;
    opts.tol = 1e-10;
    opts.max_iter = 400000;
    SolveResult r = solve(mesh, bc, 1.0, {0.0, 0.0}, source, opts);
    double err2 = 0.0;
    for (int cj = 0; cj < n; ++cj)
        for (int ci = 0; ci < n; ++ci) {
            Vec2 c = mesh.cell_centroid(ci, cj);
            double exact = std::sin(kPi * c.x) * std::sin(kPi * c.y);
            double d = r.field.values[static_cast<std::size_t>(mesh.cid(ci, cj))] - exact;
            err2 += d * d * mesh.cell_area(ci, cj);
        }
    return std::sqrt(err2);
}

}  // namespace

TEST_CASE("uniform Dirichlet data yields the constant field") {
    StructuredMesh mesh = unit_mesh(8);
    BoundarySpec bc = all_dirichlet(mesh, 3.25);
    std::vector<double> source(static_cast<std::size_t>(mesh.cell_count()), 0.0);
    SolveOptions opts;
    opts.tol = 1e-12;
    SolveResult r = solve(mesh, bc, 0.7, {0.0, 0.0}, source, opts);
    for (double v : r.field.values) CHECK(std::abs(v - 3.25) <= 1e-9);
    CHECK(r.field.mesh_id == mesh.content_hash());
}

TEST_CASE("pure diffusion reproduces the linear profile exactly") {
    StructuredMesh mesh = unit_mesh(12);
    std::vector<double> source(static_cast<std::size_t>(mesh.cell_count()), 0.0);
    SolveOptions opts;
    opts.tol = 1e-13;
    opts.max_iter = 200000;
    SolveResult r = solve(mesh, linear_x_bc(mesh), 1.0, {0.0, 0.0}, source, opts);
    for (int cj = 0; cj < 12; ++cj)
        for (int ci = 0; ci < 12; ++ci) {
            double x = mesh.cell_centroid(ci, cj).x;
            CHECK(std::abs(r.field.values[static_cast<std::size_t>(mesh.cid(ci, cj))] - x) <= 1e-9);
        }
}

TEST_CASE("manufactured solution error shrinks about 4x per refinement") {
    double e16 = manufactured_l2_error(16);
    double e32 = manufactured_l2_error(32);
    double e64 = manufactured_l2_error(64);
    CAPTURE(e16);
    CAPTURE(e32);
    CAPTURE(e64);
    CHECK(e16 / e32 > 3.0);
    CHECK(e16 / e32 < 5.2);
    CHECK(e32 / e64 > 3.0);
    CHECK(e32 / e64 < 5.2);
}

TEST_CASE("advection transports the inlet value downstream") {
    StructuredMesh mesh = unit_mesh(16);
    BoundarySpec bc = BoundarySpec::uniform(mesh, {{"inlet", {BcType::Dirichlet, 1.0}},
                                                   {"outlet", {BcType::Neumann, 0.0}},
                                                   {"top", {BcType::Neumann, 0.0}},
                                                   {"bottom", {BcType::Neumann, 0.0}},
                                                   {"bump", {BcType::Neumann, 0.0}}});
    std::vector<double> source(static_cast<std::size_t>(mesh.cell_count()), 0.0);
    SolveOptions opts;
    opts.tol = 1e-10;
    SolveResult r = solve(mesh, bc, 0.01, {1.0, 0.0}, source, opts);
    // Strong advection of a constant inlet: everything tends to 1.
    for (double v : r.field.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("solver rejects bad input and reports non-convergence") {
    StructuredMesh mesh = unit_mesh(8);
    BoundarySpec bc = all_dirichlet(mesh, 0.0);
    std::vector<double> source(static_cast<std::size_t>(mesh.cell_count()), 1.0);
    CHECK_THROWS_AS(solve(mesh, bc, 0.0, {0.0, 0.0}, source), ConfigError);
    CHECK_THROWS_AS(solve(mesh, bc, -1.0, {0.0, 0.0}, source), ConfigError);
    std::vector<double> short_source(3, 0.0);
    CHECK_THROWS_AS(solve(mesh, bc, 1.0, {0.0, 0.0}, short_source), ShapeError);
    SolveOptions opts;
    opts.max_iter = 2;
    try {
        solve(mesh, bc, 1.0, {0.0, 0.0}, source, opts);
        FAIL("expected non-convergence");
    } catch (const ConvergenceError& e) {
        CHECK(e.iterations == 2);
        CHECK(e.residual > 0.0);
    }
}

TEST_CASE("boundary spec validation catches coverage and shape mistakes") {
    StructuredMesh mesh = unit_mesh(8);
    CHECK_THROWS_AS(BoundarySpec::uniform(mesh, {{"inlet", {BcType::Dirichlet, 0.0}}}),
                    ConfigError);
    CHECK_THROWS_AS(
        BoundarySpec::uniform(mesh, {{"inlet", {BcType::Dirichlet, 0.0}},
                                     {"outlet", {BcType::Dirichlet, 0.0}},
                                     {"top", {BcType::Dirichlet, 0.0}},
                                     {"bottom", {BcType::Dirichlet, 0.0}},
                                     {"bump", {BcType::Dirichlet, 0.0}},
                                     {"lid", {BcType::Dirichlet, 0.0}}}),
        ConfigError);
    BoundarySpec bc = all_dirichlet(mesh, 0.0);
    bc.conditions["inlet"].values.pop_back();
    CHECK_THROWS_AS(bc.validate(mesh), ShapeError);
}

TEST_CASE("residual history is non-increasing for pure diffusion") {
    StructuredMesh mesh = unit_mesh(16);
    BoundarySpec bc = linear_x_bc(mesh);
    std::vector<double> source(static_cast<std::size_t>(mesh.cell_count()), 0.0);
    std::vector<double> history;
    SolveOptions opts;
    opts.tol = 1e-10;
    opts.residual_history = &history;
    solve(mesh, bc, 1.0, {0.0, 0.0}, source, opts);
    REQUIRE(history.size() > 10);
    for (std::size_t k = 1; k < history.size(); ++k) CHECK(history[k] <= history[k - 1]);
}

TEST_CASE("identical inputs give bit-identical fields") {
    StructuredMesh mesh = unit_mesh(12);
    BoundarySpec bc = all_dirichlet(mesh, 0.0);
    std::vector<double> source(static_cast<std::size_t>(mesh.cell_count()));
    std::mt19937_64 rng(31);
    for (auto& v : source) v = 2 * u01(rng) - 1;
    SolveResult a = solve(mesh, bc, 0.3, {0.8, -0.2}, source);
    SolveResult b = solve(mesh, bc, 0.3, {0.8, -0.2}, source);
    REQUIRE(a.field.values.size() == b.field.values.size());
    for (std::size_t k = 0; k < a.field.values.size(); ++k)
        CHECK(a.field.values[k] == b.field.values[k]);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("warm starting from the solution costs almost nothing") {
    StructuredMesh mesh = unit_mesh(16);
    BoundarySpec bc = linear_x_bc(mesh);
    std::vector<double> source(static_cast<std::size_t>(mesh.cell_count()), 0.0);
    SolveResult cold = solve(mesh, bc, 1.0, {0.0, 0.0}, source);
    SolveOptions warm;
    warm.initial = &cold.field.values;
    SolveResult again = solve(mesh, bc, 1.0, {0.0, 0.0}, source, warm);
    CHECK(again.iterations <= 2);
    CHECK(cold.iterations > 50);
}

TEST_CASE("flux functional is zero on constant fields") {
    StructuredMesh mesh = unit_mesh(10);
    Field f{std::vector<double>(static_cast<std::size_t>(mesh.cell_count()), 7.5),
            mesh.content_hash()};
    QoISpec qoi{"bump", {0.0, -1.0}, 1.0};
    CHECK(output_functional(mesh, f, qoi, 0.4) == 0.0);
}

TEST_CASE("flux functional on the linear profile over the outlet is -1") {
    StructuredMesh mesh = unit_mesh(10);
    Field f;
    f.mesh_id = mesh.content_hash();
    f.values.resize(static_cast<std::size_t>(mesh.cell_count()));
    for (int cj = 0; cj < 10; ++cj)
        for (int ci = 0; ci < 10; ++ci)
            f.values[static_cast<std::size_t>(mesh.cid(ci, cj))] = mesh.cell_centroid(ci, cj).x;
    QoISpec qoi{"outlet", {1.0, 0.0}, 1.0};
    CHECK(output_functional(mesh, f, qoi, 1.0) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("bump flux on the demo problem matches an independent face summation") {
    StructuredMesh mesh = unit_mesh(64);
    BoundarySpec bc = BoundarySpec::uniform(mesh, {{"inlet", {BcType::Dirichlet, 1.0}},
                                                   {"outlet", {BcType::Neumann, 0.0}},
                                                   {"top", {BcType::Dirichlet, 0.0}},
                                                   {"bottom", {BcType::Dirichlet, 0.0}},
                                                   {"bump", {BcType::Dirichlet, 0.0}}});
    std::vector<double> source(static_cast<std::size_t>(mesh.cell_count()), 0.0);
    SolveResult r = solve(mesh, bc, 0.4, {1.0, 0.25}, source);
    QoISpec qoi{"bump", {0.0, -1.0}, 1.0};
    double value = output_functional(mesh, r.field, qoi, 0.4);

    // Unmorphed grid: the bump faces are south faces of row 0, the outward
    // normal is (0,-1) and the inward neighbor sits one row up, so the sum
    // collapses to -kappa * sum(u(ci,0) - u(ci,1)) with the projected
    // centroid distance h cancelling the face length.
    double oracle = 0.0;
    for (const auto& p : mesh.patches) {
        if (p.name != "bump") continue;
        for (const auto& bf : p.faces) {
            double u0 = r.field.values[static_cast<std::size_t>(mesh.cid(bf.ci, 0))];
            double u1 = r.field.values[static_cast<std::size_t>(mesh.cid(bf.ci, 1))];
            oracle += -0.4 * (u0 - u1);
        }
    }
    CHECK(value == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(std::abs(value) > 1e-3);  // the demo flux is a live signal, not noise
}

TEST_CASE("flux functional is linear in the field") {
    StructuredMesh mesh = unit_mesh(12);
    std::mt19937_64 rng(37);
    Field u, w;
    u.mesh_id = w.mesh_id = mesh.content_hash();
    u.values.resize(static_cast<std::size_t>(mesh.cell_count()));
    w.values.resize(static_cast<std::size_t>(mesh.cell_count()));
    for (auto& v : u.values) v = 2 * u01(rng) - 1;
    for (auto& v : w.values) v = 2 * u01(rng) - 1;
    QoISpec qoi{"bump", {0.0, -1.0}, 2.5};
    double fu = output_functional(mesh, u, qoi, 0.4);
    double fw = output_functional(mesh, w, qoi, 0.4);
    for (auto [a, b] : {std::pair{2.0, -3.0}, {0.5, 0.25}, {-1.0, 1.0}}) {
        Field combo;
        combo.mesh_id = u.mesh_id;
        combo.values.resize(u.values.size());
        for (std::size_t k = 0; k < u.values.size(); ++k)
            combo.values[k] = a * u.values[k] + b * w.values[k];
        double fc = output_functional(mesh, combo, qoi, 0.4);
        CHECK(std::abs(fc - (a * fu + b * fw)) <= 1e-12 * std::max(1.0, std::abs(fc)));
    }
}

TEST_CASE("flux functional validates its spec") {
    StructuredMesh mesh = unit_mesh(8);
    Field f{std::vector<double>(static_cast<std::size_t>(mesh.cell_count()), 0.0),
            mesh.content_hash()};
    CHECK_THROWS_AS(output_functional(mesh, f, {"nose", {0.0, -1.0}, 1.0}, 1.0), ConfigError);
    CHECK_THROWS_AS(output_functional(mesh, f, {"bump", {0.0, -2.0}, 1.0}, 1.0), ConfigError);
    CHECK_THROWS_AS(output_functional(mesh, f, {"bump", {0.0, -1.0}, 0.0}, 1.0), ConfigError);
    CHECK_THROWS_AS(output_functional(mesh, f, {"bump", {0.0, -1.0}, 1.0}, 0.0), ConfigError);
    Field wrong{std::vector<double>(5, 0.0), mesh.content_hash()};
    CHECK_THROWS_AS(output_functional(mesh, wrong, {"bump", {0.0, -1.0}, 1.0}, 1.0), ShapeError);
}

TEST_CASE("restrict_field gathers ascending with duplicates collapsed") {
    Field f{{10.0, 11.0, 12.0, 13.0, 14.0, 15.0}, "m"};
    CHECK(restrict_field(f, {0, 1, 2, 3, 4, 5}) == f.values);
    CHECK(restrict_field(f, {}).empty());
    std::vector<double> got = restrict_field(f, {0, 5, 2});
    REQUIRE(got.size() == 3);
    CHECK(got[0] == 10.0);
    CHECK(got[1] == 12.0);
    CHECK(got[2] == 15.0);
    CHECK(restrict_field(f, {3, 3, 1}) == std::vector<double>{11.0, 13.0});
    CHECK_THROWS_AS(restrict_field(f, {6}), IndexError);
    CHECK_THROWS_AS(restrict_field(f, {-1}), IndexError);
}

TEST_CASE("assembled equations are conservative over the whole domain") {
    // Compatible pure-Neumann data: influx on the west face balances the
    // outflux on the east face. Column sums of the operator vanish, so the
    // global residual of ANY state equals the data imbalance: zero.
    StructuredMesh mesh = unit_mesh(8);
    BoundarySpec bc = BoundarySpec::uniform(mesh, {{"inlet", {BcType::Neumann, -1.0}},
                                                   {"outlet", {BcType::Neumann, 1.0}},
                                                   {"top", {BcType::Neumann, 0.0}},
                                                   {"bottom", {BcType::Neumann, 0.0}},
                                                   {"bump", {BcType::Neumann, 0.0}}});
    std::vector<double> source(static_cast<std::size_t>(mesh.cell_count()), 0.0);
    FvSystem sys(mesh, bc, 0.9, {0.0, 0.0}, source);
    std::mt19937_64 rng(41);
    std::vector<double> u(static_cast<std::size_t>(mesh.cell_count()));
    for (auto& v : u) v = 2 * u01(rng) - 1;
    double total = 0.0;
    for (int c = 0; c < sys.local_count(); ++c) {
        FvSystem::EquationRow row = sys.equation_row(c);
        double lhs = row.diag * u[static_cast<std::size_t>(sys.cells()[static_cast<std::size_t>(c)])];
        for (auto [nb, coef] : row.neighbors) lhs += coef * u[static_cast<std::size_t>(nb)];
        total += row.rhs - lhs;
    }
    CHECK(std::abs(total) <= 1e-10);
}

TEST_CASE("subdomain solve with exact external values matches the monolithic field") {
    StructuredMesh mesh = unit_mesh(16);
    BoundarySpec bc = BoundarySpec::uniform(mesh, {{"inlet", {BcType::Dirichlet, 1.0}},
                                                   {"outlet", {BcType::Neumann, 0.0}},
                                                   {"top", {BcType::Dirichlet, 0.0}},
                                                   {"bottom", {BcType::Dirichlet, 0.0}},
                                                   {"bump", {BcType::Dirichlet, 0.0}}});
    std::vector<double> source(static_cast<std::size_t>(mesh.cell_count()), 0.0);
    SolveOptions tight;
    tight.tol = 1e-12;
    tight.max_iter = 400000;
    SolveResult mono = solve(mesh, bc, 0.4, {1.0, 0.25}, source, tight);

    std::vector<int> cells;
    for (int cj = 0; cj < 16; ++cj)
        for (int ci = 0; ci < 8; ++ci) cells.push_back(mesh.cid(ci, cj));
    FvSystem sys(mesh, bc, 0.4, {1.0, 0.25}, source, cells);
    CHECK(sys.local_count() == 128);
    CHECK(sys.interface_count() > 0);
    std::vector<double> iface(static_cast<std::size_t>(sys.interface_count()));
    for (std::size_t k = 0; k < iface.size(); ++k)
        iface[k] = mono.field.values[static_cast<std::size_t>(sys.interface_exterior_cells()[k])];
    sys.set_interface_values(iface);
    std::vector<double> u;
    long before = sys.cell_updates();
    SolveResult sub = sys.run(u, tight);
    CHECK(sys.cell_updates() > before);
    REQUIRE(static_cast<int>(u.size()) == sys.local_count());
    for (int c = 0; c < sys.local_count(); ++c) {
        double expect = mono.field.values[static_cast<std::size_t>(sys.cells()[static_cast<std::size_t>(c)])];
        CHECK(std::abs(u[static_cast<std::size_t>(c)] - expect) <= 1e-8);
    }
    CHECK(sub.iterations > 0);
}
