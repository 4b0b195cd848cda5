#include "morphrom/podi.hpp"

#include "morphrom/errors.hpp"

namespace morphrom {

namespace {

Vec2 as_vec2(const ParameterPoint& mu) {
    if (mu.values.size() != 2) throw ShapeError("parameter point must be two-dimensional");
    return {mu.values[0], mu.values[1]};
}

}  // namespace

PODIModel build_podi(const SnapshotMatrix& snapshots, PODBasis basis) {
    if (snapshots.theta.rows != basis.field_size())
        throw ShapeError("build_podi: basis and snapshots disagree on field length");
    if (static_cast<int>(snapshots.parameter_points.size()) != snapshots.theta.cols)
        throw ShapeError("build_podi: snapshot matrix lacks parameter points");

    std::vector<Vec2> pts;
    pts.reserve(snapshots.parameter_points.size());
    for (const auto& mu : snapshots.parameter_points) pts.push_back(as_vec2(mu));

    PODIModel model;
    model.triangulation = delaunay(pts);
    model.coefficients = Matrix(basis.rank(), snapshots.count());
    for (int j = 0; j < snapshots.count(); ++j) {
        auto alpha = project(basis, snapshots.theta.col_span(j));
        std::copy(alpha.begin(), alpha.end(), model.coefficients.col(j));
    }
    model.basis = std::move(basis);
    return model;
}

CoefficientVector interpolate_coefficients(const PODIModel& model, const ParameterPoint& mu) {
    auto hit = locate(model.triangulation, as_vec2(mu));
    const auto& tri = model.triangulation.simplices[static_cast<std::size_t>(hit.simplex)];
    CoefficientVector alpha(static_cast<std::size_t>(model.coefficients.rows), 0.0);
    for (int k = 0; k < 3; ++k) {
        const double* col = model.coefficients.col(tri.v[static_cast<std::size_t>(k)]);
        double w = hit.bary[static_cast<std::size_t>(k)];
        for (int i = 0; i < model.coefficients.rows; ++i) alpha[static_cast<std::size_t>(i)] += w * col[i];
    }
    return alpha;
}

std::vector<double> evaluate_podi(const PODIModel& model, const ParameterPoint& mu) {
    return reconstruct(model.basis, interpolate_coefficients(model, mu));
}

}  // namespace morphrom
