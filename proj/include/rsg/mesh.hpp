#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rsg/vec3.hpp"

namespace rsg {

// Quad mesh for one hierarchy level. Faces are 4-tuples of vertex indices
// with counter-clockwise winding w.r.t. the outward normal. Immutable after
// construction/validation; safe to share among concurrent readers.
struct QuadMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int32_t, 4>> faces;
    int level_id = 0;

    int64_t vertex_count() const { return static_cast<int64_t>(vertices.size()); }
    int64_t face_count() const { return static_cast<int64_t>(faces.size()); }
};

struct FaceGeometry {
    Vec3 centroid;
    Vec3 normal;  // unit length
    double area = 0.0;
};

// Validates index bounds, face non-degeneracy (both triangle halves have
// area > 1e-12), edge-manifoldness, and winding consistency across shared
// edges. Throws on violation. require_closed additionally demands every edge
// have exactly 2 incident faces.
void validate_mesh(const QuadMesh& mesh, bool require_closed = false);

bool is_closed(const QuadMesh& mesh);

// OBJ subset reader: `v x y z` and `f i j k l` records only (1-based indices,
// no texture/normal references). Comments and blank lines are skipped.
QuadMesh load_obj(const std::string& path);

// Writes the OBJ; when colors are given (face_count x 3, components in [0,1])
// also writes the RSFC sidecar next to the mesh (see color_sidecar_path).
void save_obj(const QuadMesh& mesh, const std::string& path);
void save_obj(const QuadMesh& mesh, const std::vector<std::array<float, 3>>& face_colors,
              const std::string& path);

// Sidecar path rule: mesh extension replaced by ".rsfc" (appended when the
// mesh path has no extension).
std::string color_sidecar_path(const std::string& mesh_path);

// RSFC sidecar: magic "RSFC", u32 face count, count x 3 little-endian f32.
void save_face_colors(const std::vector<std::array<float, 3>>& colors, const std::string& path);
std::vector<std::array<float, 3>> load_face_colors(const std::string& path);

// Axis-aligned unit cube [0,1]^3 with each of the 6 sides split into a
// 2^k x 2^k quad grid: 6*4^k faces, closed and manifold.
QuadMesh make_cube_hierarchy_level(int k);

// Cube of depth k with vertices projected to the unit sphere (centered at
// the origin).
QuadMesh make_quad_sphere(int k);

// centroid = mean of the 4 corners; normal = normalized sum of the two
// triangle-half normals split along the 0-2 diagonal; area = sum of the two
// triangle-half areas.
FaceGeometry face_geometry_one(const QuadMesh& mesh, int64_t face);
std::vector<FaceGeometry> face_geometry(const QuadMesh& mesh);

Vec3 mesh_centroid(const QuadMesh& mesh);
double bounding_sphere_radius(const QuadMesh& mesh, const Vec3& center);

}  // namespace rsg
