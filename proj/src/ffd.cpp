#include "morphrom/ffd.hpp"

#include <cmath>
#include <string>

#include "morphrom/errors.hpp"

namespace morphrom {

namespace {

constexpr int kMaxDegree = 20;

// Pascal's triangle up to n = 20; all entries are exactly representable.
const double* binomial_row(int n) {
    static const auto table = [] {
        std::array<std::array<double, kMaxDegree + 1>, kMaxDegree + 1> t{};
        for (int n = 0; n <= kMaxDegree; ++n) {
            t[n][0] = 1.0;
            for (int k = 1; k <= n; ++k)
                t[n][k] = t[n - 1][k - 1] + (k <= n - 1 ? t[n - 1][k] : 0.0);
        }
        return t;
    }();
    return table[n].data();
}

void check_args(int i, int n, double t) {
    if (n < 0 || n > kMaxDegree)
        throw DomainError("bernstein: degree " + std::to_string(n) + " outside [0, 20]");
    if (i < 0 || i > n)
        throw DomainError("bernstein: index " + std::to_string(i) + " outside [0, " + std::to_string(n) + "]");
    if (!(t >= 0.0 && t <= 1.0))
        throw DomainError("bernstein: argument " + std::to_string(t) + " outside [0, 1]");
}

}  // namespace

double bernstein(int i, int n, double t) {
    check_args(i, n, t);
    // std::pow(0, 0) == 1 covers the endpoint cases.
    return binomial_row(n)[i] * std::pow(t, i) * std::pow(1.0 - t, n - i);
}

double bernstein_deriv(int i, int n, double t) {
    check_args(i, n, t);
    if (n == 0) return 0.0;
    double lower = (i >= 1) ? bernstein(i - 1, n - 1, t) : 0.0;
    double upper = (i <= n - 1) ? bernstein(i, n - 1, t) : 0.0;
    return n * (lower - upper);
}

FFDLattice::FFDLattice(Vec2 origin_, Vec2 box_lengths_, std::array<int, 2> dims_)
    : origin(origin_), box_lengths(box_lengths_), dims(dims_) {
    if (dims[0] < 2 || dims[1] < 2)
        throw ConfigError("lattice: need at least 2 control points per axis");
    if (dims[0] > kMaxDegree + 1 || dims[1] > kMaxDegree + 1)
        throw ConfigError("lattice: more than 21 control points per axis unsupported");
    if (!(box_lengths.x > 0.0) || !(box_lengths.y > 0.0))
        throw ConfigError("lattice: box_lengths must be positive");
    displacements.assign(static_cast<std::size_t>(dims[0]) * dims[1], Vec2{});
}

bool FFDLattice::contains(const Vec2& p) const {
    return p.x >= origin.x && p.x <= origin.x + box_lengths.x && p.y >= origin.y &&
           p.y <= origin.y + box_lengths.y;
}

Vec2 FFDLattice::to_reference(const Vec2& p) const {
    if (!contains(p)) throw DomainError("to_reference: point outside lattice box");
    return {(p.x - origin.x) / box_lengths.x, (p.y - origin.y) / box_lengths.y};
}

Vec2 FFDLattice::deform_point(const Vec2& p) const {
    if (!contains(p)) return p;
    Vec2 s = to_reference(p);
    const int nx = dims[0] - 1, ny = dims[1] - 1;

    double bx[kMaxDegree + 1], by[kMaxDegree + 1];
    for (int i = 0; i <= nx; ++i) bx[i] = bernstein(i, nx, s.x);
    for (int j = 0; j <= ny; ++j) by[j] = bernstein(j, ny, s.y);

    Vec2 delta{};
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            const Vec2& d = displacements[static_cast<std::size_t>(index(i, j))];
            double w = bx[i] * by[j];
            delta.x += w * d.x;
            delta.y += w * d.y;
        }
    }
    if (delta.x == 0.0 && delta.y == 0.0) return p;
    return {p.x + delta.x * box_lengths.x, p.y + delta.y * box_lengths.y};
}

std::array<double, 4> FFDLattice::jacobian(const Vec2& p) const {
    if (!contains(p)) return {1.0, 0.0, 0.0, 1.0};
    Vec2 s = to_reference(p);
    const int nx = dims[0] - 1, ny = dims[1] - 1;

    double bx[kMaxDegree + 1], by[kMaxDegree + 1];
    double dbx[kMaxDegree + 1], dby[kMaxDegree + 1];
    for (int i = 0; i <= nx; ++i) {
        bx[i] = bernstein(i, nx, s.x);
        dbx[i] = bernstein_deriv(i, nx, s.x);
    }
    for (int j = 0; j <= ny; ++j) {
        by[j] = bernstein(j, ny, s.y);
        dby[j] = bernstein_deriv(j, ny, s.y);
    }

    // Derivatives of the reference-space displacement sum.
    double gxx = 0, gxy = 0, gyx = 0, gyy = 0;
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            const Vec2& d = displacements[static_cast<std::size_t>(index(i, j))];
            double wx = dbx[i] * by[j];
            double wy = bx[i] * dby[j];
            gxx += d.x * wx;
            gxy += d.x * wy;
            gyx += d.y * wx;
            gyy += d.y * wy;
        }
    }
    // Chain rule through the box scaling on both sides.
    return {1.0 + gxx, gxy * box_lengths.x / box_lengths.y,
            gyx * box_lengths.y / box_lengths.x, 1.0 + gyy};
}

void ParameterBinding::validate(const std::array<int, 2>& dims) const {
    if (parameter_dim <= 0) throw ConfigError("binding: parameter_dim must be positive");
    if (static_cast<int>(bounds.size()) != parameter_dim)
        throw ConfigError("binding: bounds count must equal parameter_dim");
    for (const auto& [lo, hi] : bounds)
        if (!(lo < hi)) throw ConfigError("binding: bounds must satisfy lo < hi");
    for (const auto& e : entries) {
        if (e.i < 0 || e.i >= dims[0] || e.j < 0 || e.j >= dims[1])
            throw ConfigError("binding: control point index outside lattice");
        if (e.axis != 0 && e.axis != 1) throw ConfigError("binding: axis must be 0 or 1");
        if (e.parameter < 0 || e.parameter >= parameter_dim)
            throw ConfigError("binding: parameter index outside parameter_dim");
    }
}

FFDLattice apply_parameters(const ParameterBinding& binding, const ParameterPoint& mu,
                            const FFDLattice& base) {
    binding.validate(base.dims);
    if (static_cast<int>(mu.values.size()) != binding.parameter_dim)
        throw ShapeError("apply_parameters: parameter point has wrong dimension");
    for (int k = 0; k < binding.parameter_dim; ++k) {
        double v = mu.values[static_cast<std::size_t>(k)];
        auto [lo, hi] = binding.bounds[static_cast<std::size_t>(k)];
        if (v < lo || v > hi)
            throw BoundsError("apply_parameters: parameter " + std::to_string(k) + " outside bounds");
    }
    FFDLattice out(base.origin, base.box_lengths, base.dims);
    for (const auto& e : binding.entries) {
        Vec2& d = out.displacements[static_cast<std::size_t>(out.index(e.i, e.j))];
        double v = e.scale * mu.values[static_cast<std::size_t>(e.parameter)];
        if (e.axis == 0)
            d.x += v;
        else
            d.y += v;
    }
    return out;
}

}  // namespace morphrom
