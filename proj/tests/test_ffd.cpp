#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "morphrom/errors.hpp"
#include "morphrom/ffd.hpp"
#include "morphrom/util.hpp"

using namespace morphrom;

namespace {

// Factorial-based binomial, independent of the library's Pascal table.
double binom_ref(int n, int k) {
    long double r = 1.0L;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return static_cast<double>(r);
}

double bernstein_ref(int i, int n, double t) {
    return binom_ref(n, i) * std::pow(t, i) * std::pow(1.0 - t, n - i);
}

// Direct tensor double sum over control points, written from the definition.
Vec2 deform_ref(const FFDLattice& lat, const Vec2& p) {
    if (!lat.contains(p)) return p;
    double sx = (p.x - lat.origin.x) / lat.box_lengths.x;
    double sy = (p.y - lat.origin.y) / lat.box_lengths.y;
    int nx = lat.dims[0] - 1, ny = lat.dims[1] - 1;
    long double dx = 0.0L, dy = 0.0L;
    for (int i = 0; i <= nx; ++i) {
        for (int j = 0; j <= ny; ++j) {
            double w = bernstein_ref(i, nx, sx) * bernstein_ref(j, ny, sy);
            const Vec2& d = lat.displacements[static_cast<std::size_t>(j * lat.dims[0] + i)];
            dx += w * d.x;
            dy += w * d.y;
        }
    }
    return {p.x + static_cast<double>(dx) * lat.box_lengths.x,
            p.y + static_cast<double>(dy) * lat.box_lengths.y};
}

FFDLattice random_lattice(std::mt19937_64& rng, double amp) {
    FFDLattice lat({0.2, -0.1}, {1.3, 0.9}, {5, 4});
    for (auto& d : lat.displacements) d = {amp * (2 * u01(rng) - 1), amp * (2 * u01(rng) - 1)};
    return lat;
}

}  // namespace

TEST_CASE("bernstein matches hand values and the factorial oracle") {
    CHECK(bernstein(0, 2, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(bernstein(1, 3, 0.3) == doctest::Approx(0.441).epsilon(1e-15));
    std::mt19937_64 rng(7);
    for (int n = 0; n <= 10; ++n)
        for (int i = 0; i <= n; ++i)
            for (int s = 0; s < 5; ++s) {
                double t = u01(rng);
                CHECK(bernstein(i, n, t) ==
                      doctest::Approx(bernstein_ref(i, n, t)).epsilon(1e-13));
            }
}

TEST_CASE("bernstein endpoints select single control indices") {
    for (int n = 1; n <= 8; ++n) {
        for (int i = 0; i <= n; ++i) {
            CHECK(bernstein(i, n, 0.0) == (i == 0 ? 1.0 : 0.0));
            CHECK(bernstein(i, n, 1.0) == (i == n ? 1.0 : 0.0));
        }
    }
}

TEST_CASE("bernstein partition of unity up to degree 10") {
    for (int n = 0; n <= 10; ++n) {
        for (int s = 0; s <= 100; ++s) {
            double t = s / 100.0;
            double sum = 0.0;
            for (int i = 0; i <= n; ++i) sum += bernstein(i, n, t);
            CHECK(std::abs(sum - 1.0) <= 1e-14);
        }
    }
}

TEST_CASE("bernstein rejects out-of-range arguments") {
    CHECK_THROWS_AS(bernstein(0, 21, 0.5), DomainError);
    CHECK_THROWS_AS(bernstein(3, 2, 0.5), DomainError);
    CHECK_THROWS_AS(bernstein(-1, 2, 0.5), DomainError);
    CHECK_THROWS_AS(bernstein(0, 2, 1.5), DomainError);
}

TEST_CASE("bernstein_deriv matches a central difference") {
    const double h = 1e-6;
    std::mt19937_64 rng(11);
    for (int n = 1; n <= 8; ++n)
        for (int i = 0; i <= n; ++i)
            for (int s = 0; s < 4; ++s) {
                double t = 0.1 + 0.8 * u01(rng);
                double fd = (bernstein(i, n, t + h) - bernstein(i, n, t - h)) / (2 * h);
                CHECK(bernstein_deriv(i, n, t) == doctest::Approx(fd).epsilon(1e-7));
            }
    // Sum of derivatives is zero (derivative of the unity partition).
    double s = 0.0;
    for (int i = 0; i <= 5; ++i) s += bernstein_deriv(i, 5, 0.37);
    CHECK(std::abs(s) <= 1e-13);
}

TEST_CASE("to_reference maps the box affinely onto the unit square") {
    FFDLattice lat({0.0, 0.0}, {2.0, 4.0}, {3, 3});
    Vec2 r = lat.to_reference({1.0, 1.0});
    CHECK(r.x == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r.y == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(lat.to_reference({0.0, 0.0}).x == 0.0);
    CHECK(lat.to_reference({0.0, 0.0}).y == 0.0);
    CHECK(lat.to_reference({2.0, 4.0}).x == 1.0);
    CHECK(lat.to_reference({2.0, 4.0}).y == 1.0);
    CHECK_THROWS_AS(lat.to_reference({2.1, 1.0}), DomainError);
}

TEST_CASE("deform_point single displaced control point matches the double-sum oracle") {
    FFDLattice lat({0.0, 0.0}, {1.0, 1.0}, {3, 2});
    lat.displacements[static_cast<std::size_t>(lat.index(1, 1))] = {0.0, 0.1};
    Vec2 q = lat.deform_point({0.5, 1.0});
    CHECK(q.x == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(q.y == doctest::Approx(1.05).epsilon(1e-15));
    // The same answer from the definition, and at other probe points too.
    std::mt19937_64 rng(3);
    for (int s = 0; s < 50; ++s) {
        Vec2 p{u01(rng), u01(rng)};
        Vec2 a = lat.deform_point(p), b = deform_ref(lat, p);
        CHECK(std::abs(a.x - b.x) <= 1e-14);
        CHECK(std::abs(a.y - b.y) <= 1e-14);
    }
}

TEST_CASE("deform_point agrees with the oracle on a random lattice") {
    std::mt19937_64 rng(19);
    FFDLattice lat = random_lattice(rng, 0.05);
    for (int s = 0; s < 200; ++s) {
        Vec2 p{lat.origin.x + lat.box_lengths.x * u01(rng),
               lat.origin.y + lat.box_lengths.y * u01(rng)};
        Vec2 a = lat.deform_point(p), b = deform_ref(lat, p);
        CHECK(std::abs(a.x - b.x) <= 1e-13);
        CHECK(std::abs(a.y - b.y) <= 1e-13);
    }
}

TEST_CASE("zero displacement is the exact identity on 1000 points") {
    FFDLattice lat({-0.3, 0.1}, {1.7, 0.8}, {6, 4});
    std::mt19937_64 rng(23);
    for (int s = 0; s < 1000; ++s) {
        Vec2 p{-0.5 + 2.0 * u01(rng), -0.2 + 1.4 * u01(rng)};
        Vec2 q = lat.deform_point(p);
        CHECK(std::abs(q.x - p.x) <= 1e-14);
        CHECK(std::abs(q.y - p.y) <= 1e-14);
    }
}

TEST_CASE("points outside the box are returned bit-identically") {
    std::mt19937_64 rng(29);
    FFDLattice lat = random_lattice(rng, 0.2);
    for (int s = 0; s < 200; ++s) {
        Vec2 p{lat.origin.x - 0.01 - u01(rng), lat.origin.y + lat.box_lengths.y + 0.01 + u01(rng)};
        Vec2 q = lat.deform_point(p);
        CHECK(q.x == p.x);
        CHECK(q.y == p.y);
    }
}

TEST_CASE("control displacements matching an affine map reproduce it") {
    // A(p) = M p + b; displacing each control point to A(point) makes the
    // Bernstein sum reproduce A exactly (linear precision).
    FFDLattice lat({0.0, 0.0}, {2.0, 1.0}, {4, 3});
    const double M[4] = {1.1, 0.2, -0.1, 0.9};
    const Vec2 b{0.05, -0.03};
    for (int j = 0; j < lat.dims[1]; ++j)
        for (int i = 0; i < lat.dims[0]; ++i) {
            Vec2 cp{lat.origin.x + lat.box_lengths.x * i / (lat.dims[0] - 1),
                    lat.origin.y + lat.box_lengths.y * j / (lat.dims[1] - 1)};
            Vec2 img{M[0] * cp.x + M[1] * cp.y + b.x, M[2] * cp.x + M[3] * cp.y + b.y};
            lat.displacements[static_cast<std::size_t>(lat.index(i, j))] = {
                (img.x - cp.x) / lat.box_lengths.x, (img.y - cp.y) / lat.box_lengths.y};
        }
    std::mt19937_64 rng(31);
    for (int s = 0; s < 300; ++s) {
        Vec2 p{2.0 * u01(rng), u01(rng)};
        Vec2 q = lat.deform_point(p);
        Vec2 e{M[0] * p.x + M[1] * p.y + b.x, M[2] * p.x + M[3] * p.y + b.y};
        CHECK(std::abs(q.x - e.x) <= 1e-12);
        CHECK(std::abs(q.y - e.y) <= 1e-12);
    }
    // The Jacobian of an affine map is its matrix everywhere inside.
    auto jac = lat.jacobian({0.7, 0.4});
    CHECK(std::abs(jac[0] - M[0]) <= 1e-10);
    CHECK(std::abs(jac[1] - M[1]) <= 1e-10);
    CHECK(std::abs(jac[2] - M[2]) <= 1e-10);
    CHECK(std::abs(jac[3] - M[3]) <= 1e-10);
}

TEST_CASE("pinned boundary control points keep the box edge fixed") {
    FFDLattice lat({0.0, 0.0}, {1.0, 1.0}, {5, 5});
    std::mt19937_64 rng(37);
    for (int j = 1; j < 4; ++j)
        for (int i = 1; i < 4; ++i)
            lat.displacements[static_cast<std::size_t>(lat.index(i, j))] = {
                0.1 * (2 * u01(rng) - 1), 0.1 * (2 * u01(rng) - 1)};
    for (int s = 0; s <= 50; ++s) {
        double t = s / 50.0;
        for (Vec2 p : {Vec2{t, 0.0}, Vec2{t, 1.0}, Vec2{0.0, t}, Vec2{1.0, t}}) {
            Vec2 q = lat.deform_point(p);
            CHECK(std::abs(q.x - p.x) <= 1e-12);
            CHECK(std::abs(q.y - p.y) <= 1e-12);
        }
    }
}

TEST_CASE("jacobian is the identity outside and matches central differences inside") {
    std::mt19937_64 rng(41);
    FFDLattice lat = random_lattice(rng, 0.08);
    auto outside = lat.jacobian({lat.origin.x - 1.0, lat.origin.y});
    CHECK(outside == std::array<double, 4>{1.0, 0.0, 0.0, 1.0});

    const double h = 1e-6;
    for (int s = 0; s < 100; ++s) {
        Vec2 p{lat.origin.x + lat.box_lengths.x * (0.05 + 0.9 * u01(rng)),
               lat.origin.y + lat.box_lengths.y * (0.05 + 0.9 * u01(rng))};
        auto jac = lat.jacobian(p);
        Vec2 fx1 = lat.deform_point({p.x + h, p.y}), fx0 = lat.deform_point({p.x - h, p.y});
        Vec2 fy1 = lat.deform_point({p.x, p.y + h}), fy0 = lat.deform_point({p.x, p.y - h});
        CHECK(std::abs(jac[0] - (fx1.x - fx0.x) / (2 * h)) <= 1e-6);
        CHECK(std::abs(jac[1] - (fy1.x - fy0.x) / (2 * h)) <= 1e-6);
        CHECK(std::abs(jac[2] - (fx1.y - fx0.y) / (2 * h)) <= 1e-6);
        CHECK(std::abs(jac[3] - (fy1.y - fy0.y) / (2 * h)) <= 1e-6);
    }
}

TEST_CASE("apply_parameters at zero is the identity deformation") {
    FFDLattice base({0.22, -0.1}, {0.56, 0.36}, {6, 4});
    ParameterBinding binding;
    binding.parameter_dim = 2;
    binding.bounds = {{-0.18, 0.18}, {-0.3, 0.3}};
    for (int j = 1; j <= 2; ++j)
        for (int i = 1; i <= 3; ++i) {
            binding.entries.push_back({i, j, 0, 0, 1.0});
            binding.entries.push_back({i, j, 1, 1, 1.0});
        }
    FFDLattice lat = apply_parameters(binding, ParameterPoint{{0.0, 0.0}}, base);
    for (const auto& d : lat.displacements) {
        CHECK(d.x == 0.0);
        CHECK(d.y == 0.0);
    }
    Vec2 p{0.5, 0.05};
    Vec2 q = lat.deform_point(p);
    CHECK(q.x == p.x);
    CHECK(q.y == p.y);
}

TEST_CASE("apply_parameters sets exactly the bound control points") {
    FFDLattice base({0.22, -0.1}, {0.56, 0.36}, {6, 4});
    ParameterBinding binding;
    binding.parameter_dim = 2;
    binding.bounds = {{-0.18, 0.18}, {-0.3, 0.3}};
    for (int j = 1; j <= 2; ++j)
        for (int i = 1; i <= 3; ++i) {
            binding.entries.push_back({i, j, 0, 0, 1.0});
            binding.entries.push_back({i, j, 1, 1, 1.0});
        }
    ParameterPoint mu{{0.12, -0.2}};
    FFDLattice lat = apply_parameters(binding, mu, base);
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 6; ++i) {
            const Vec2& d = lat.displacements[static_cast<std::size_t>(lat.index(i, j))];
            bool bound = (i >= 1 && i <= 3 && j >= 1 && j <= 2);
            CHECK(d.x == (bound ? 0.12 : 0.0));
            CHECK(d.y == (bound ? -0.2 : 0.0));
        }
}

TEST_CASE("entries accumulate and antisymmetric scales produce opposite displacements") {
    FFDLattice base({0.0, 0.0}, {1.0, 1.0}, {4, 3});
    ParameterBinding binding;
    binding.parameter_dim = 1;
    binding.bounds = {{-1.0, 1.0}};
    binding.entries.push_back({1, 1, 0, 0, 0.5});
    binding.entries.push_back({2, 1, 0, 0, -0.5});
    binding.entries.push_back({1, 1, 0, 0, 0.25});  // second entry, same target
    FFDLattice lat = apply_parameters(binding, ParameterPoint{{0.4}}, base);
    CHECK(lat.displacements[static_cast<std::size_t>(lat.index(1, 1))].x ==
          doctest::Approx(0.3).epsilon(1e-15));
    CHECK(lat.displacements[static_cast<std::size_t>(lat.index(2, 1))].x ==
          doctest::Approx(-0.2).epsilon(1e-15));
}

TEST_CASE("binding validation rejects malformed input") {
    FFDLattice base({0.0, 0.0}, {1.0, 1.0}, {3, 3});
    ParameterBinding binding;
    binding.parameter_dim = 1;
    binding.bounds = {{-1.0, 1.0}};
    binding.entries.push_back({5, 0, 0, 0, 1.0});
    CHECK_THROWS_AS(apply_parameters(binding, ParameterPoint{{0.0}}, base), ConfigError);

    binding.entries = {{1, 1, 2, 0, 1.0}};
    CHECK_THROWS_AS(apply_parameters(binding, ParameterPoint{{0.0}}, base), ConfigError);

    binding.entries = {{1, 1, 0, 3, 1.0}};
    CHECK_THROWS_AS(apply_parameters(binding, ParameterPoint{{0.0}}, base), ConfigError);

    binding.entries = {{1, 1, 0, 0, 1.0}};
    CHECK_THROWS_AS(apply_parameters(binding, ParameterPoint{{0.0, 0.0}}, base), ShapeError);
    CHECK_THROWS_AS(apply_parameters(binding, ParameterPoint{{2.0}}, base), BoundsError);

    binding.bounds = {{1.0, -1.0}};
    CHECK_THROWS_AS(apply_parameters(binding, ParameterPoint{{0.0}}, base), ConfigError);
}

TEST_CASE("lattice constructor rejects degenerate shapes") {
    CHECK_THROWS_AS(FFDLattice({0, 0}, {1, 1}, {1, 2}), ConfigError);
    CHECK_THROWS_AS(FFDLattice({0, 0}, {0.0, 1}, {2, 2}), ConfigError);
    CHECK_THROWS_AS(FFDLattice({0, 0}, {1, 1}, {22, 2}), ConfigError);
}
