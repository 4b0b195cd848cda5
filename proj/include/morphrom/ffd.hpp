#pragma once

#include <array>
#include <utility>
#include <vector>

#include "morphrom/geometry.hpp"

namespace morphrom {

// Bernstein polynomial B_{i,n} and its derivative on [0,1]. Degree is
// limited to 20 so binomial coefficients stay exact in double precision.
double bernstein(int i, int n, double t);
double bernstein_deriv(int i, int n, double t);

struct ParameterPoint {
    std::vector<double> values;
};

// Control lattice over an axis-aligned box. Control points sit on a uniform
// dims[0] x dims[1] grid in reference coordinates; displacements are stored
// in reference units and scale with box_lengths on output.
struct FFDLattice {
    Vec2 origin;
    Vec2 box_lengths;
    std::array<int, 2> dims{2, 2};
    std::vector<Vec2> displacements;  // size dims[0]*dims[1]

    FFDLattice() = default;
    FFDLattice(Vec2 origin, Vec2 box_lengths, std::array<int, 2> dims);

    int index(int i, int j) const { return j * dims[0] + i; }
    bool contains(const Vec2& p) const;

    // Affine map into the unit square; p must lie inside the box.
    Vec2 to_reference(const Vec2& p) const;

    // Identity outside the box (bit-identical); inside, the point is moved by
    // the Bernstein-weighted sum of control displacements. Writing the map as
    // p + delta keeps the zero-displacement case exactly the identity.
    Vec2 deform_point(const Vec2& p) const;

    // Row-major 2x2 Jacobian d(deformed)/d(p); identity outside the box.
    std::array<double, 4> jacobian(const Vec2& p) const;
};

// One entry ties one displacement component of one control point to one
// scalar parameter.
struct BindingEntry {
    int i = 0;
    int j = 0;
    int axis = 0;       // 0 = x, 1 = y
    int parameter = 0;  // index into ParameterPoint::values
    double scale = 1.0;
};

struct ParameterBinding {
    std::vector<BindingEntry> entries;
    int parameter_dim = 0;
    std::vector<std::pair<double, double>> bounds;  // lo < hi per parameter

    void validate(const std::array<int, 2>& dims) const;
};

// Returns a lattice with base geometry and displacements set from mu; entries
// accumulate additively, unbound control points stay at zero.
FFDLattice apply_parameters(const ParameterBinding& binding, const ParameterPoint& mu,
                            const FFDLattice& base);

}  // namespace morphrom
