#include "rsg/mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "rsg/error.hpp"
#include "rsg/util.hpp"

namespace rsg {

namespace {

struct EdgeKey {
    int32_t a, b;
    EdgeKey(int32_t u, int32_t v) : a(std::min(u, v)), b(std::max(u, v)) {}
    bool operator<(const EdgeKey& o) const { return a < o.a || (a == o.a && b < o.b); }
    bool operator==(const EdgeKey& o) const { return a == o.a && b == o.b; }
};

// Incident faces per undirected edge, plus whether each incidence traverses
// the edge as (min->max) or (max->min). Consistent winding means the two
// faces of a shared edge traverse it in opposite directions.
std::map<EdgeKey, std::vector<std::pair<int64_t, bool>>> edge_incidence(const QuadMesh& mesh) {
    std::map<EdgeKey, std::vector<std::pair<int64_t, bool>>> edges;
    for (int64_t f = 0; f < mesh.face_count(); ++f) {
        const auto& face = mesh.faces[f];
        for (int c = 0; c < 4; ++c) {
            int32_t u = face[c];
            int32_t v = face[(c + 1) % 4];
            edges[EdgeKey(u, v)].push_back({f, u < v});
        }
    }
    return edges;
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * norm(cross(b - a, c - a));
}

}  // namespace

void validate_mesh(const QuadMesh& mesh, bool require_closed) {
    int64_t nv = mesh.vertex_count();
    for (int64_t f = 0; f < mesh.face_count(); ++f) {
        const auto& face = mesh.faces[f];
        for (int c = 0; c < 4; ++c) {
            require(face[c] >= 0 && face[c] < nv, ErrorKind::ParseError,
                    "face " + std::to_string(f) + " references vertex " + std::to_string(face[c]) +
                        " out of range");
        }
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
                require(face[i] != face[j], ErrorKind::DegenerateFace,
                        "face " + std::to_string(f) + " repeats vertex " + std::to_string(face[i]));
        const Vec3& v0 = mesh.vertices[face[0]];
        const Vec3& v1 = mesh.vertices[face[1]];
        const Vec3& v2 = mesh.vertices[face[2]];
        const Vec3& v3 = mesh.vertices[face[3]];
        require(triangle_area(v0, v1, v2) > 1e-12 && triangle_area(v0, v2, v3) > 1e-12,
                ErrorKind::DegenerateFace, "face " + std::to_string(f) + " has a near-zero triangle half");
    }

    auto edges = edge_incidence(mesh);
    for (const auto& [key, incidences] : edges) {
        require(incidences.size() <= 2, ErrorKind::NonManifoldEdge,
                "edge (" + std::to_string(key.a) + "," + std::to_string(key.b) + ") shared by " +
                    std::to_string(incidences.size()) + " faces");
        if (incidences.size() == 2) {
            require(incidences[0].second != incidences[1].second, ErrorKind::OrientationError,
                    "faces " + std::to_string(incidences[0].first) + " and " +
                        std::to_string(incidences[1].first) + " traverse edge (" + std::to_string(key.a) +
                        "," + std::to_string(key.b) + ") in the same direction");
        } else if (require_closed) {
            raise(ErrorKind::NonManifoldEdge, "boundary edge (" + std::to_string(key.a) + "," +
                                                  std::to_string(key.b) + ") in closed mesh");
        }
    }
}

bool is_closed(const QuadMesh& mesh) {
    for (const auto& [key, incidences] : edge_incidence(mesh))
        if (incidences.size() != 2) return false;
    return true;
}

QuadMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorKind::IoError, "cannot open: " + path);

    QuadMesh mesh;
    std::string line;
    int64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::istringstream ss(t);
        std::string tag;
        ss >> tag;
        if (tag == "v") {
            Vec3 p;
            ss >> p.x >> p.y >> p.z;
            require(!ss.fail(), ErrorKind::ParseError,
                    path + ":" + std::to_string(line_no) + ": malformed vertex record");
            mesh.vertices.push_back(p);
        } else if (tag == "f") {
            std::vector<int64_t> idx;
            std::string tok;
            while (ss >> tok) {
                require(tok.find('/') == std::string::npos, ErrorKind::ParseError,
                        path + ":" + std::to_string(line_no) + ": texture/normal indices not supported");
                size_t used = 0;
                int64_t v = 0;
                try {
                    v = std::stoll(tok, &used);
                } catch (const std::exception&) {
                    raise(ErrorKind::ParseError,
                          path + ":" + std::to_string(line_no) + ": bad face index '" + tok + "'");
                }
                require(used == tok.size() && v >= 1, ErrorKind::ParseError,
                        path + ":" + std::to_string(line_no) + ": bad face index '" + tok + "'");
                idx.push_back(v);
            }
            require(idx.size() == 4, ErrorKind::TriangleFaceFound,
                    path + ":" + std::to_string(line_no) + ": face has " + std::to_string(idx.size()) +
                        " indices, expected 4");
            std::array<int32_t, 4> face;
            for (int c = 0; c < 4; ++c) face[c] = static_cast<int32_t>(idx[c] - 1);
            mesh.faces.push_back(face);
        } else {
            raise(ErrorKind::ParseError,
                  path + ":" + std::to_string(line_no) + ": unsupported record '" + tag + "'");
        }
    }
    validate_mesh(mesh);
    return mesh;
}

void save_obj(const QuadMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    require(out.good(), ErrorKind::IoError, "cannot open for writing: " + path);
    char buf[128];
    for (const auto& v : mesh.vertices) {
        std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g\n", v.x, v.y, v.z);
        out << buf;
    }
    for (const auto& f : mesh.faces) {
        out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << ' ' << f[3] + 1 << '\n';
    }
    require(out.good(), ErrorKind::IoError, "write failed: " + path);
}

void save_obj(const QuadMesh& mesh, const std::vector<std::array<float, 3>>& face_colors,
              const std::string& path) {
    require(static_cast<int64_t>(face_colors.size()) == mesh.face_count(),
            ErrorKind::PreconditionViolation,
            "color count " + std::to_string(face_colors.size()) + " != face count " +
                std::to_string(mesh.face_count()));
    for (const auto& c : face_colors)
        for (float v : c)
            require(v >= 0.0f && v <= 1.0f, ErrorKind::PreconditionViolation,
                    "color component outside [0,1]");
    save_obj(mesh, path);
    save_face_colors(face_colors, color_sidecar_path(path));
}

std::string color_sidecar_path(const std::string& mesh_path) {
    size_t slash = mesh_path.find_last_of("/\\");
    size_t dot = mesh_path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return mesh_path + ".rsfc";
    return mesh_path.substr(0, dot) + ".rsfc";
}

void save_face_colors(const std::vector<std::array<float, 3>>& colors, const std::string& path) {
    ByteWriter w;
    w.bytes = {'R', 'S', 'F', 'C'};
    w.u32(static_cast<uint32_t>(colors.size()));
    for (const auto& c : colors)
        for (float v : c) w.f32(v);
    write_file_bytes(path, w.bytes);
}

std::vector<std::array<float, 3>> load_face_colors(const std::string& path) {
    auto bytes = read_file_bytes(path);
    ByteReader r(bytes);
    require(bytes.size() >= 8 && bytes[0] == 'R' && bytes[1] == 'S' && bytes[2] == 'F' && bytes[3] == 'C',
            ErrorKind::ParseError, "not an RSFC file: " + path);
    r.pos = 4;
    uint32_t count = r.u32();
    std::vector<std::array<float, 3>> colors(count);
    for (auto& c : colors)
        for (int i = 0; i < 3; ++i) c[i] = r.f32();
    return colors;
}

QuadMesh make_cube_hierarchy_level(int k) {
    require(k >= 1, ErrorKind::PreconditionViolation, "cube subdivision depth must be >= 1");
    int n = 1 << k;

    QuadMesh mesh;
    mesh.level_id = 0;
    // Vertices deduplicated through exact integer grid keys so cube edges and
    // corners are shared and the mesh closes up.
    std::unordered_map<int64_t, int32_t> seen;
    auto vertex_id = [&](int ix, int iy, int iz) -> int32_t {
        int64_t key = (static_cast<int64_t>(ix) << 40) | (static_cast<int64_t>(iy) << 20) |
                      static_cast<int64_t>(iz);
        auto it = seen.find(key);
        if (it != seen.end()) return it->second;
        int32_t id = static_cast<int32_t>(mesh.vertices.size());
        double s = 1.0 / n;
        mesh.vertices.push_back({ix * s, iy * s, iz * s});
        seen.emplace(key, id);
        return id;
    };

    // Each side is a 2^k x 2^k grid; (u, v) map to grid axes so that the
    // winding is counter-clockwise seen from outside.
    struct Side {
        int axis;    // fixed axis 0..2
        int value;   // 0 or n on that axis
        bool flip;   // swap winding to keep the normal outward
    };
    const Side sides[6] = {{0, 0, true}, {0, 1, false}, {1, 0, true},
                           {1, 1, false}, {2, 0, true}, {2, 1, false}};
    for (const auto& side : sides) {
        int fixed = side.value * n;
        for (int u = 0; u < n; ++u) {
            for (int v = 0; v < n; ++v) {
                auto grid = [&](int uu, int vv) {
                    int c[3];
                    c[side.axis] = fixed;
                    c[(side.axis + 1) % 3] = uu;
                    c[(side.axis + 2) % 3] = vv;
                    return vertex_id(c[0], c[1], c[2]);
                };
                std::array<int32_t, 4> face = {grid(u, v), grid(u + 1, v), grid(u + 1, v + 1),
                                               grid(u, v + 1)};
                if (side.flip) std::swap(face[1], face[3]);
                mesh.faces.push_back(face);
            }
        }
    }
    validate_mesh(mesh, /*require_closed=*/true);
    return mesh;
}

QuadMesh make_quad_sphere(int k) {
    QuadMesh mesh = make_cube_hierarchy_level(k);
    const Vec3 center{0.5, 0.5, 0.5};
    for (auto& v : mesh.vertices) v = normalized(v - center);
    validate_mesh(mesh, /*require_closed=*/true);
    return mesh;
}

FaceGeometry face_geometry_one(const QuadMesh& mesh, int64_t face) {
    const auto& f = mesh.faces[face];
    const Vec3& v0 = mesh.vertices[f[0]];
    const Vec3& v1 = mesh.vertices[f[1]];
    const Vec3& v2 = mesh.vertices[f[2]];
    const Vec3& v3 = mesh.vertices[f[3]];

    FaceGeometry g;
    g.centroid = (v0 + v1 + v2 + v3) * 0.25;
    Vec3 n0 = cross(v1 - v0, v2 - v0);  // 2x area-weighted triangle normals
    Vec3 n1 = cross(v2 - v0, v3 - v0);
    Vec3 sum = n0 + n1;
    double len = norm(sum);
    require(len > 1e-12, ErrorKind::DegenerateFace,
            "face " + std::to_string(face) + " has vanishing normal");
    g.normal = sum / len;
    g.area = 0.5 * (norm(n0) + norm(n1));
    return g;
}

std::vector<FaceGeometry> face_geometry(const QuadMesh& mesh) {
    std::vector<FaceGeometry> out(mesh.face_count());
    for (int64_t f = 0; f < mesh.face_count(); ++f) out[f] = face_geometry_one(mesh, f);
    return out;
}

Vec3 mesh_centroid(const QuadMesh& mesh) {
    Vec3 c{0, 0, 0};
    for (const auto& v : mesh.vertices) c += v;
    return mesh.vertex_count() > 0 ? c / static_cast<double>(mesh.vertex_count()) : c;
}

double bounding_sphere_radius(const QuadMesh& mesh, const Vec3& center) {
    double r2 = 0.0;
    for (const auto& v : mesh.vertices) r2 = std::max(r2, norm2(v - center));
    return std::sqrt(r2);
}

}  // namespace rsg
