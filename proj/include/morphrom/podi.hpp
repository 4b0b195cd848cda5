#pragma once

#include <vector>

#include "morphrom/delaunay.hpp"
#include "morphrom/pod.hpp"

namespace morphrom {

// Interpolation ROM: a coefficient row per database point, interpolated
// piecewise-linearly over the Delaunay triangulation of the parameter
// samples. At a database point the interpolant returns that row exactly, so
// with a full basis the evaluation reproduces the snapshot.
struct PODIModel {
    PODBasis basis;
    Triangulation2D triangulation;
    Matrix coefficients;  // rank x count, column per database point
};

// Parameter points must be two-dimensional and non-collinear.
PODIModel build_podi(const SnapshotMatrix& snapshots, PODBasis basis);

CoefficientVector interpolate_coefficients(const PODIModel& model, const ParameterPoint& mu);
std::vector<double> evaluate_podi(const PODIModel& model, const ParameterPoint& mu);

}  // namespace morphrom
