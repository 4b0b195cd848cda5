#include "morphrom/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include <json.hpp>

#include "morphrom/errors.hpp"
#include "morphrom/util.hpp"

namespace morphrom {

using nlohmann::json;

Side opposite(Side s) {
    switch (s) {
        case Side::South: return Side::North;
        case Side::East: return Side::West;
        case Side::North: return Side::South;
        case Side::West: return Side::East;
    }
    return Side::South;
}

std::array<int, 4> StructuredMesh::cell_vertices(int ci, int cj) const {
    return {vid(ci, cj), vid(ci + 1, cj), vid(ci + 1, cj + 1), vid(ci, cj + 1)};
}

std::array<int, 2> StructuredMesh::face_vertices(int ci, int cj, Side side) const {
    auto v = cell_vertices(ci, cj);
    switch (side) {
        case Side::South: return {v[0], v[1]};
        case Side::East: return {v[1], v[2]};
        case Side::North: return {v[2], v[3]};
        case Side::West: return {v[3], v[0]};
    }
    return {v[0], v[1]};
}

int StructuredMesh::neighbor(int ci, int cj, Side side) const {
    switch (side) {
        case Side::South: return cj > 0 ? cid(ci, cj - 1) : -1;
        case Side::East: return ci < nx - 1 ? cid(ci + 1, cj) : -1;
        case Side::North: return cj < ny - 1 ? cid(ci, cj + 1) : -1;
        case Side::West: return ci > 0 ? cid(ci - 1, cj) : -1;
    }
    return -1;
}

Vec2 StructuredMesh::cell_centroid(int ci, int cj) const {
    auto v = cell_vertices(ci, cj);
    // Area-weighted polygon centroid (exact for any simple quad).
    double a2 = 0.0, cx = 0.0, cy = 0.0;
    for (int k = 0; k < 4; ++k) {
        const Vec2& p = vertices[static_cast<std::size_t>(v[k])];
        const Vec2& q = vertices[static_cast<std::size_t>(v[(k + 1) % 4])];
        double w = p.cross(q);
        a2 += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    return {cx / (3.0 * a2), cy / (3.0 * a2)};
}

double StructuredMesh::cell_area(int ci, int cj) const {
    auto v = cell_vertices(ci, cj);
    double a2 = 0.0;
    for (int k = 0; k < 4; ++k) {
        const Vec2& p = vertices[static_cast<std::size_t>(v[k])];
        const Vec2& q = vertices[static_cast<std::size_t>(v[(k + 1) % 4])];
        a2 += p.cross(q);
    }
    return 0.5 * a2;
}

Vec2 StructuredMesh::face_centroid(int ci, int cj, Side side) const {
    auto f = face_vertices(ci, cj, side);
    const Vec2& a = vertices[static_cast<std::size_t>(f[0])];
    const Vec2& b = vertices[static_cast<std::size_t>(f[1])];
    return {(a.x + b.x) * 0.5, (a.y + b.y) * 0.5};
}

double StructuredMesh::face_length(int ci, int cj, Side side) const {
    auto f = face_vertices(ci, cj, side);
    return (vertices[static_cast<std::size_t>(f[1])] - vertices[static_cast<std::size_t>(f[0])]).norm();
}

Vec2 StructuredMesh::face_normal(int ci, int cj, Side side) const {
    auto f = face_vertices(ci, cj, side);
    Vec2 d = vertices[static_cast<std::size_t>(f[1])] - vertices[static_cast<std::size_t>(f[0])];
    double len = d.norm();
    return {d.y / len, -d.x / len};
}

std::string StructuredMesh::content_hash() const {
    Fnv1a h;
    h.update_u64(static_cast<std::uint64_t>(nx));
    h.update_u64(static_cast<std::uint64_t>(ny));
    for (const auto& v : vertices) {
        h.update_double(v.x);
        h.update_double(v.y);
    }
    for (const auto& p : patches) {
        h.update_string(p.name);
        for (const auto& f : p.faces) {
            h.update_u64(static_cast<std::uint64_t>(f.ci));
            h.update_u64(static_cast<std::uint64_t>(f.cj));
            h.update_u64(static_cast<std::uint64_t>(static_cast<int>(f.side)));
        }
    }
    return h.hex();
}

StructuredMesh generate_mesh(int nx, int ny, const Rect& domain, const BumpSpec& bump) {
    if (nx < 4 || ny < 4) throw ConfigError("generate_mesh: nx and ny must be at least 4");
    if (!domain.valid()) throw ConfigError("generate_mesh: invalid domain rectangle");
    if (!(bump.x0 < bump.x1)) throw ConfigError("generate_mesh: bump range must satisfy x0 < x1");

    StructuredMesh m;
    m.nx = nx;
    m.ny = ny;
    m.vertices.resize(static_cast<std::size_t>((nx + 1) * (ny + 1)));
    double dx = domain.width() / nx;
    double dy = domain.height() / ny;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            m.vertices[static_cast<std::size_t>(m.vid(i, j))] = {domain.x0 + i * dx, domain.y0 + j * dy};

    Patch inlet{"inlet", {}}, outlet{"outlet", {}}, top{"top", {}}, bottom{"bottom", {}}, bmp{"bump", {}};
    for (int j = 0; j < ny; ++j) {
        inlet.faces.push_back({0, j, Side::West});
        outlet.faces.push_back({nx - 1, j, Side::East});
    }
    for (int i = 0; i < nx; ++i) {
        top.faces.push_back({i, ny - 1, Side::North});
        double xm = m.face_centroid(i, 0, Side::South).x;
        if (xm >= bump.x0 && xm <= bump.x1)
            bmp.faces.push_back({i, 0, Side::South});
        else
            bottom.faces.push_back({i, 0, Side::South});
    }
    if (bmp.faces.empty()) throw ConfigError("generate_mesh: bump range covers no bottom face");
    m.patches = {inlet, outlet, top, bottom, bmp};
    return m;
}

StructuredMesh morph_mesh(const StructuredMesh& mesh, const FFDLattice& lattice) {
    StructuredMesh out = mesh;
    for (auto& v : out.vertices) v = lattice.deform_point(v);
    return out;
}

QualityReport check_quality(const StructuredMesh& mesh, double skew_limit, double ortho_limit) {
    QualityReport r;
    r.min_area = std::numeric_limits<double>::max();
    for (int cj = 0; cj < mesh.ny; ++cj)
        for (int ci = 0; ci < mesh.nx; ++ci)
            r.min_area = std::min(r.min_area, mesh.cell_area(ci, cj));

    // Interior faces once each: east and north sides of every cell that has
    // the corresponding neighbor.
    for (int cj = 0; cj < mesh.ny; ++cj) {
        for (int ci = 0; ci < mesh.nx; ++ci) {
            for (Side side : {Side::East, Side::North}) {
                int nb = mesh.neighbor(ci, cj, side);
                if (nb < 0) continue;
                int nci = nb % mesh.nx, ncj = nb / mesh.nx;
                Vec2 cp = mesh.cell_centroid(ci, cj);
                Vec2 cn = mesh.cell_centroid(nci, ncj);
                Vec2 mid{(cp.x + cn.x) * 0.5, (cp.y + cn.y) * 0.5};
                Vec2 fc = mesh.face_centroid(ci, cj, side);
                double len = mesh.face_length(ci, cj, side);
                // Offsets at the rounding floor of the centroid averages are
                // arithmetic noise, not geometry; snap them so orthogonal
                // grids report exactly zero.
                double offset = (fc - mid).norm();
                double coord_scale =
                    std::max({std::abs(fc.x), std::abs(fc.y), std::abs(cp.x), std::abs(cp.y)});
                if (offset <= 64.0 * std::numeric_limits<double>::epsilon() * coord_scale)
                    offset = 0.0;
                r.max_skewness = std::max(r.max_skewness, offset / len);

                Vec2 conn = cn - cp;
                double cosang = conn.dot(mesh.face_normal(ci, cj, side)) / conn.norm();
                cosang = std::clamp(cosang, -1.0, 1.0);
                double ang = std::acos(cosang) * 180.0 / std::numbers::pi;
                r.max_nonorthogonality = std::max(r.max_nonorthogonality, ang);
            }
        }
    }
    r.pass = r.min_area > 0.0 && r.max_skewness <= skew_limit && r.max_nonorthogonality <= ortho_limit;
    return r;
}

namespace {

constexpr int kMeshFormatVersion = 1;

}  // namespace

void save_mesh(const StructuredMesh& mesh, const std::filesystem::path& base) {
    std::vector<double> coords;
    coords.reserve(mesh.vertices.size() * 2);
    for (const auto& v : mesh.vertices) {
        coords.push_back(v.x);
        coords.push_back(v.y);
    }
    auto bin = base;
    bin += ".f64";
    write_f64(bin, coords);

    json j;
    j["version"] = kMeshFormatVersion;
    j["nx"] = mesh.nx;
    j["ny"] = mesh.ny;
    json patches = json::array();
    for (const auto& p : mesh.patches) {
        json faces = json::array();
        for (const auto& f : p.faces) faces.push_back({f.ci, f.cj, static_cast<int>(f.side)});
        patches.push_back({{"name", p.name}, {"faces", faces}});
    }
    j["patches"] = patches;
    j["vertices"] = {{"file", bin.filename().string()},
                     {"count", mesh.vertex_count()},
                     {"checksum", checksum_f64(coords)}};
    auto meta = base;
    meta += ".json";
    std::ofstream out(meta, std::ios::trunc);
    if (!out) throw IntegrityError("cannot write " + meta.string());
    out << j.dump(2) << "\n";
}

StructuredMesh load_mesh(const std::filesystem::path& base) {
    auto meta = base;
    meta += ".json";
    std::ifstream in(meta);
    if (!in) throw IntegrityError("cannot read " + meta.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IntegrityError("malformed mesh header " + meta.string() + ": " + e.what());
    }
    if (j.value("version", -1) != kMeshFormatVersion)
        throw IntegrityError("unsupported mesh format version in " + meta.string());

    StructuredMesh m;
    m.nx = j.at("nx").get<int>();
    m.ny = j.at("ny").get<int>();
    auto bin = base.parent_path() / j.at("vertices").at("file").get<std::string>();
    auto coords = read_f64(bin);
    if (static_cast<int>(coords.size()) != 2 * m.vertex_count())
        throw IntegrityError("vertex block length mismatch in " + bin.string());
    if (checksum_f64(coords) != j.at("vertices").at("checksum").get<std::string>())
        throw IntegrityError("vertex block checksum mismatch in " + bin.string());
    m.vertices.resize(static_cast<std::size_t>(m.vertex_count()));
    for (int i = 0; i < m.vertex_count(); ++i)
        m.vertices[static_cast<std::size_t>(i)] = {coords[static_cast<std::size_t>(2 * i)],
                                                   coords[static_cast<std::size_t>(2 * i + 1)]};
    for (const auto& p : j.at("patches")) {
        Patch patch;
        patch.name = p.at("name").get<std::string>();
        for (const auto& f : p.at("faces"))
            patch.faces.push_back({f.at(0).get<int>(), f.at(1).get<int>(), static_cast<Side>(f.at(2).get<int>())});
        m.patches.push_back(std::move(patch));
    }
    return m;
}

}  // namespace morphrom
