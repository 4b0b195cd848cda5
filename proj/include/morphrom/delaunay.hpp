#pragma once

#include <array>
#include <vector>

#include "morphrom/geometry.hpp"

namespace morphrom {

struct Triangle {
    std::array<int, 3> v{-1, -1, -1};    // CCW vertex indices
    std::array<int, 3> nbr{-1, -1, -1};  // neighbor across edge opposite v[k]
};

struct Triangulation2D {
    std::vector<Vec2> points;
    std::vector<Triangle> simplices;
};

// Incremental Bowyer-Watson with points inserted in input order; cocircular
// ties keep the earlier diagonal, so the result is deterministic for a fixed
// input. Throws DegenerateInputError for fewer than 3 points, collinear
// inputs, or duplicate points.
Triangulation2D delaunay(const std::vector<Vec2>& points);

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c);

// Barycentric coordinates of p in a given simplex (may be negative outside).
std::array<double, 3> barycentric(const Triangulation2D& tri, int simplex, const Vec2& p);

struct LocateResult {
    int simplex = -1;
    std::array<double, 3> bary{0, 0, 0};  // clamped nonnegative, sums to 1
};

// Walks across neighbors from simplex 0 toward p; points within a hull
// tolerance are clamped onto the boundary, anything farther throws
// ExtrapolationError. The walk seed is per call, no state is shared.
LocateResult locate(const Triangulation2D& tri, const Vec2& p);

}  // namespace morphrom
