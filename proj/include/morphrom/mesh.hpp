#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "morphrom/ffd.hpp"
#include "morphrom/geometry.hpp"

namespace morphrom {

// Side ordering is the traversal order everywhere a cell's faces are walked.
enum class Side : int { South = 0, East = 1, North = 2, West = 3 };

Side opposite(Side s);

struct BoundaryFace {
    int ci = 0;
    int cj = 0;
    Side side = Side::South;

    bool operator==(const BoundaryFace&) const = default;
};

struct Patch {
    std::string name;
    std::vector<BoundaryFace> faces;
};

// Structured quad mesh: (nx+1)*(ny+1) vertices row-major, nx*ny cells
// row-major. Morphing moves vertices only; connectivity and patches are
// positional and never change.
struct StructuredMesh {
    int nx = 0;
    int ny = 0;
    std::vector<Vec2> vertices;
    std::vector<Patch> patches;

    int vertex_count() const { return (nx + 1) * (ny + 1); }
    int cell_count() const { return nx * ny; }
    int vid(int i, int j) const { return j * (nx + 1) + i; }
    int cid(int i, int j) const { return j * nx + i; }

    // CCW vertex ids of a cell: SW, SE, NE, NW.
    std::array<int, 4> cell_vertices(int ci, int cj) const;
    // Face endpoints ordered so the outward normal is the edge rotated -90deg.
    std::array<int, 2> face_vertices(int ci, int cj, Side side) const;
    // Neighbor cell id across a side, or -1 on the physical boundary.
    int neighbor(int ci, int cj, Side side) const;

    Vec2 cell_centroid(int ci, int cj) const;
    double cell_area(int ci, int cj) const;  // signed, positive for CCW
    Vec2 face_centroid(int ci, int cj, Side side) const;
    double face_length(int ci, int cj, Side side) const;
    Vec2 face_normal(int ci, int cj, Side side) const;  // unit, outward

    // Fingerprint of dims, vertices and patches; identifies the geometry a
    // field was computed on.
    std::string content_hash() const;
};

struct BumpSpec {
    double x0 = 0.0;
    double x1 = 0.0;
};

// Uniform mesh over the domain rectangle with patches inlet (west), outlet
// (east), top (north) and a bottom split into "bottom" and "bump" by face
// midpoint against [bump.x0, bump.x1].
StructuredMesh generate_mesh(int nx, int ny, const Rect& domain, const BumpSpec& bump);

StructuredMesh morph_mesh(const StructuredMesh& mesh, const FFDLattice& lattice);

struct QualityReport {
    double min_area = 0.0;
    double max_skewness = 0.0;
    double max_nonorthogonality = 0.0;  // degrees
    bool pass = false;
};

// Skewness: offset of the face centroid from the midpoint of the adjacent
// cell centroids, over the face length. Non-orthogonality: angle between the
// centroid connector and the face normal. Both over interior faces.
QualityReport check_quality(const StructuredMesh& mesh, double skew_limit = 0.5,
                            double ortho_limit = 70.0);

// Writes <base>.json (dims, patches, vertex block metadata) and <base>.f64
// (little-endian vertex coordinates). Loading verifies the checksum.
void save_mesh(const StructuredMesh& mesh, const std::filesystem::path& base);
StructuredMesh load_mesh(const std::filesystem::path& base);

}  // namespace morphrom
