#include "morphrom/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "morphrom/errors.hpp"

namespace morphrom {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * (b - a).cross(c - a);
}

namespace {

double diameter(const std::vector<Vec2>& pts) {
    double xmin = std::numeric_limits<double>::max(), xmax = -xmin;
    double ymin = xmin, ymax = xmax;
    for (const auto& p : pts) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    return std::hypot(xmax - xmin, ymax - ymin);
}

}  // namespace

Triangulation2D delaunay(const std::vector<Vec2>& points) {
    const int n = static_cast<int>(points.size());
    if (n < 3) throw DegenerateInputError("delaunay: need at least 3 points");

    const double diam = diameter(points);
    if (diam == 0.0) throw DegenerateInputError("delaunay: all points coincide");
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if ((points[static_cast<std::size_t>(i)] - points[static_cast<std::size_t>(j)]).norm() <
                1e-14 * diam)
                throw DegenerateInputError("delaunay: duplicate points " + std::to_string(i) + " and " +
                                           std::to_string(j));

    // Tie tolerances: orientation ties in area units, in-circle ties in the
    // lifted determinant's length^4 units. Points inside a circumcircle by
    // less than the tie width count as on-circle, so earlier diagonals
    // survive cocircular ties.
    const double eps_area = 1e-13 * diam * diam;
    const long double eps_det =
        1e-13L * static_cast<long double>(diam) * diam * diam * diam;

    auto pt = [&](int i) -> const Vec2& { return points[static_cast<std::size_t>(i)]; };

    // The hull is closed by ghost triangles pairing each hull edge with a
    // symbolic vertex at infinity; a finite enclosing triangle cannot play
    // that role because near-collinear hull triples have circumcircles
    // reaching past any finite vertex, which dents the hull. A ghost stores
    // its real edge opposite the hull's CCW direction so the generic
    // boundary-edge rule below orients new triangles correctly.
    constexpr int kGhost = -2;

    struct WorkTri {
        std::array<int, 3> v;
        bool alive = true;
    };
    std::vector<WorkTri> tris;

    auto incircle = [&](const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& q) -> long double {
        // Lifted determinant translated by q; positive means strictly inside
        // the circumcircle of CCW (a, b, c).
        long double ax = static_cast<long double>(a.x) - q.x, ay = static_cast<long double>(a.y) - q.y;
        long double bx = static_cast<long double>(b.x) - q.x, by = static_cast<long double>(b.y) - q.y;
        long double cx = static_cast<long double>(c.x) - q.x, cy = static_cast<long double>(c.y) - q.y;
        long double la = ax * ax + ay * ay;
        long double lb = bx * bx + by * by;
        long double lc = cx * cx + cy * cy;
        return ax * (by * lc - cy * lb) - ay * (bx * lc - cx * lb) + la * (bx * cy - cx * by);
    };

    auto in_cavity = [&](const WorkTri& t, const Vec2& q) -> bool {
        int g = -1;
        for (int k = 0; k < 3; ++k)
            if (t.v[static_cast<std::size_t>(k)] == kGhost) g = k;
        if (g < 0)
            return incircle(pt(t.v[0]), pt(t.v[1]), pt(t.v[2]), q) > eps_det;
        // Ghost: dead when q lies strictly beyond its hull edge, or on the
        // edge's line within the open span (the edge must split under q).
        const Vec2& a = pt(t.v[static_cast<std::size_t>((g + 1) % 3)]);
        const Vec2& b = pt(t.v[static_cast<std::size_t>((g + 2) % 3)]);
        double s = signed_area(a, b, q);
        if (s > eps_area) return true;
        if (s < -eps_area) return false;
        Vec2 d = b - a;
        double along = (q - a).dot(d);
        return along > 0.0 && along < d.dot(d);
    };

    // Seed with the first triple that is non-collinear against points 0 and
    // 1; everything else inserts in input order.
    int seed = 2;
    while (seed < n && std::abs(signed_area(points[0], points[1], pt(seed))) <= eps_area) ++seed;
    if (seed == n) throw DegenerateInputError("delaunay: points are collinear");
    {
        int a = 0, b = 1, c = seed;
        if (signed_area(pt(a), pt(b), pt(c)) < 0.0) std::swap(b, c);
        tris.push_back({{a, b, c}, true});
        tris.push_back({{b, a, kGhost}, true});
        tris.push_back({{c, b, kGhost}, true});
        tris.push_back({{a, c, kGhost}, true});
    }

    for (int p = 2; p < n; ++p) {
        if (p == seed) continue;
        const Vec2& q = pt(p);
        std::vector<int> bad;
        for (int t = 0; t < static_cast<int>(tris.size()); ++t)
            if (tris[static_cast<std::size_t>(t)].alive && in_cavity(tris[static_cast<std::size_t>(t)], q))
                bad.push_back(t);
        if (bad.empty()) {
            // The tie tolerance can starve the cavity when the point sits on
            // a circumcircle; fall back to the containing triangle.
            for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
                if (!tris[static_cast<std::size_t>(t)].alive) continue;
                const auto& v = tris[static_cast<std::size_t>(t)].v;
                if (v[0] == kGhost || v[1] == kGhost || v[2] == kGhost) continue;
                if (signed_area(q, pt(v[1]), pt(v[2])) >= 0 && signed_area(pt(v[0]), q, pt(v[2])) >= 0 &&
                    signed_area(pt(v[0]), pt(v[1]), q) >= 0) {
                    bad.push_back(t);
                    break;
                }
            }
            if (bad.empty()) throw DegenerateInputError("delaunay: insertion found no cavity");
        }

        // Cavity boundary: directed edges of dead triangles whose undirected
        // key is seen exactly once.
        std::map<std::pair<int, int>, int> edge_count;
        for (int t : bad) {
            const auto& v = tris[static_cast<std::size_t>(t)].v;
            for (int k = 0; k < 3; ++k) {
                auto key = std::minmax(v[static_cast<std::size_t>(k)], v[static_cast<std::size_t>((k + 1) % 3)]);
                edge_count[{key.first, key.second}] += 1;
            }
        }
        std::vector<std::array<int, 2>> boundary;
        for (int t : bad) {
            const auto& v = tris[static_cast<std::size_t>(t)].v;
            for (int k = 0; k < 3; ++k) {
                int a = v[static_cast<std::size_t>(k)], b = v[static_cast<std::size_t>((k + 1) % 3)];
                auto key = std::minmax(a, b);
                if (edge_count[{key.first, key.second}] == 1) boundary.push_back({a, b});
            }
        }
        for (int t : bad) tris[static_cast<std::size_t>(t)].alive = false;
        for (const auto& e : boundary) {
            WorkTri t;
            t.alive = true;
            if (e[0] == kGhost) {
                t.v = {e[1], p, kGhost};
            } else if (e[1] == kGhost) {
                t.v = {p, e[0], kGhost};
            } else {
                t.v = {e[0], e[1], p};
                if (signed_area(pt(e[0]), pt(e[1]), q) < 0.0) std::swap(t.v[0], t.v[1]);
            }
            tris.push_back(t);
        }
    }

    Triangulation2D out;
    out.points = points;
    for (const auto& t : tris) {
        if (!t.alive) continue;
        if (t.v[0] == kGhost || t.v[1] == kGhost || t.v[2] == kGhost) continue;
        Triangle tri;
        tri.v = t.v;
        out.simplices.push_back(tri);
    }
    if (out.simplices.empty()) throw DegenerateInputError("delaunay: triangulation collapsed");

    // Adjacency via shared edges; each interior edge joins exactly two
    // simplices.
    std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> edges;  // edge -> (simplex, opposite k)
    for (int s = 0; s < static_cast<int>(out.simplices.size()); ++s) {
        const auto& v = out.simplices[static_cast<std::size_t>(s)].v;
        for (int k = 0; k < 3; ++k) {
            auto key = std::minmax(v[static_cast<std::size_t>((k + 1) % 3)], v[static_cast<std::size_t>((k + 2) % 3)]);
            edges[{key.first, key.second}].push_back({s, k});
        }
    }
    for (const auto& [edge, users] : edges) {
        if (users.size() == 2) {
            out.simplices[static_cast<std::size_t>(users[0].first)].nbr[static_cast<std::size_t>(users[0].second)] =
                users[1].first;
            out.simplices[static_cast<std::size_t>(users[1].first)].nbr[static_cast<std::size_t>(users[1].second)] =
                users[0].first;
        }
    }
    return out;
}

std::array<double, 3> barycentric(const Triangulation2D& tri, int simplex, const Vec2& p) {
    if (simplex < 0 || simplex >= static_cast<int>(tri.simplices.size()))
        throw IndexError("barycentric: simplex out of range");
    const auto& t = tri.simplices[static_cast<std::size_t>(simplex)];
    const Vec2& a = tri.points[static_cast<std::size_t>(t.v[0])];
    const Vec2& b = tri.points[static_cast<std::size_t>(t.v[1])];
    const Vec2& c = tri.points[static_cast<std::size_t>(t.v[2])];
    double area = signed_area(a, b, c);
    return {signed_area(p, b, c) / area, signed_area(a, p, c) / area, signed_area(a, b, p) / area};
}

LocateResult locate(const Triangulation2D& tri, const Vec2& p) {
    if (tri.simplices.empty()) throw DegenerateInputError("locate: empty triangulation");
    const double eps_hull = 1e-9;

    int current = 0;
    int steps = 0;
    const int max_steps = 2 * static_cast<int>(tri.simplices.size()) + 8;
    while (steps++ < max_steps) {
        auto bary = barycentric(tri, current, p);
        int worst = 0;
        for (int k = 1; k < 3; ++k)
            if (bary[static_cast<std::size_t>(k)] < bary[static_cast<std::size_t>(worst)]) worst = k;
        if (bary[static_cast<std::size_t>(worst)] >= -eps_hull) {
            LocateResult res;
            res.simplex = current;
            double sum = 0.0;
            for (int k = 0; k < 3; ++k) {
                res.bary[static_cast<std::size_t>(k)] = std::max(bary[static_cast<std::size_t>(k)], 0.0);
                sum += res.bary[static_cast<std::size_t>(k)];
            }
            for (auto& b : res.bary) b /= sum;
            return res;
        }
        int next = tri.simplices[static_cast<std::size_t>(current)].nbr[static_cast<std::size_t>(worst)];
        if (next < 0) break;  // hull edge and still clearly outside
        current = next;
    }

    // Fallback scan; also the path when the walk exits through the hull.
    int best_simplex = -1;
    double best_min = -std::numeric_limits<double>::max();
    for (int s = 0; s < static_cast<int>(tri.simplices.size()); ++s) {
        auto bary = barycentric(tri, s, p);
        double mn = std::min({bary[0], bary[1], bary[2]});
        if (mn > best_min) {
            best_min = mn;
            best_simplex = s;
        }
    }
    if (best_min < -eps_hull)
        throw ExtrapolationError("locate: point outside the convex hull of the parameter samples");
    LocateResult res;
    res.simplex = best_simplex;
    auto bary = barycentric(tri, best_simplex, p);
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) {
        res.bary[static_cast<std::size_t>(k)] = std::max(bary[static_cast<std::size_t>(k)], 0.0);
        sum += res.bary[static_cast<std::size_t>(k)];
    }
    for (auto& b : res.bary) b /= sum;
    return res;
}

}  // namespace morphrom
