#include "rsg/neighborhood.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "rsg/error.hpp"
#include "rsg/util.hpp"

namespace rsg {

namespace {

// Lexicographic (x, then y, then z) with 1e-9 per-component tolerance.
bool lex_less(const Vec3& a, const Vec3& b) {
    constexpr double tol = 1e-9;
    if (std::abs(a.x - b.x) > tol) return a.x < b.x;
    if (std::abs(a.y - b.y) > tol) return a.y < b.y;
    if (std::abs(a.z - b.z) > tol) return a.z < b.z;
    return false;
}

Vec3 any_perpendicular(const Vec3& n) {
    Vec3 axis = std::abs(n.x) <= std::abs(n.y)
                    ? (std::abs(n.x) <= std::abs(n.z) ? Vec3{1, 0, 0} : Vec3{0, 0, 1})
                    : (std::abs(n.y) <= std::abs(n.z) ? Vec3{0, 1, 0} : Vec3{0, 0, 1});
    return normalized(axis - n * dot(axis, n));
}

std::vector<std::vector<int32_t>> vertex_face_map(const QuadMesh& mesh) {
    std::vector<std::vector<int32_t>> incident(mesh.vertex_count());
    for (int64_t f = 0; f < mesh.face_count(); ++f)
        for (int32_t v : mesh.faces[f]) incident[v].push_back(static_cast<int32_t>(f));
    return incident;
}

std::vector<bool> boundary_vertices(const QuadMesh& mesh) {
    std::map<std::pair<int32_t, int32_t>, int> edge_count;
    for (const auto& face : mesh.faces) {
        for (int c = 0; c < 4; ++c) {
            int32_t u = face[c], v = face[(c + 1) % 4];
            edge_count[{std::min(u, v), std::max(u, v)}]++;
        }
    }
    std::vector<bool> boundary(mesh.vertex_count(), false);
    for (const auto& [edge, count] : edge_count) {
        if (count == 1) {
            boundary[edge.first] = true;
            boundary[edge.second] = true;
        }
    }
    return boundary;
}

}  // namespace

std::vector<int> vertex_valences(const QuadMesh& mesh) {
    std::vector<int> valence(mesh.vertex_count(), 0);
    for (const auto& face : mesh.faces)
        for (int32_t v : face) valence[v]++;
    return valence;
}

double singularity_stats(const QuadMesh& mesh) {
    auto valence = vertex_valences(mesh);
    auto boundary = boundary_vertices(mesh);
    int64_t interior = 0, singular = 0;
    for (int64_t v = 0; v < mesh.vertex_count(); ++v) {
        if (boundary[v]) continue;
        ++interior;
        if (valence[v] != 4) ++singular;
    }
    return interior > 0 ? static_cast<double>(singular) / static_cast<double>(interior) : 0.0;
}

NeighborhoodTable build_neighborhood(const QuadMesh& mesh) {
    validate_mesh(mesh);  // rejects inconsistent winding (OrientationError)

    auto geom = face_geometry(mesh);
    auto incident = vertex_face_map(mesh);

    NeighborhoodTable table;
    table.neighbors.assign(mesh.face_count(), {kNoNeighbor, kNoNeighbor, kNoNeighbor, kNoNeighbor,
                                               kNoNeighbor, kNoNeighbor, kNoNeighbor, kNoNeighbor});
    table.singular_vertex_fraction = singularity_stats(mesh);

    std::vector<int64_t> ambiguous(mesh.face_count(), 0);
    std::vector<int64_t> truncated(mesh.face_count(), 0);

    parallel_for(mesh.face_count(), [&](int64_t f) {
        // All faces sharing at least one vertex with f: 4 edge-adjacent plus 4
        // strictly-vertex-adjacent in the regular valence-4 case.
        std::set<int32_t> candidate_set;
        for (int32_t v : mesh.faces[f])
            for (int32_t other : incident[v])
                if (other != static_cast<int32_t>(f)) candidate_set.insert(other);
        std::vector<int32_t> candidates(candidate_set.begin(), candidate_set.end());

        const Vec3 center = geom[f].centroid;
        const Vec3 normal = geom[f].normal;

        if (candidates.size() > 8) {
            // High-valence singularity: keep the 8 nearest centroids.
            std::sort(candidates.begin(), candidates.end(), [&](int32_t a, int32_t b) {
                double da = norm2(geom[a].centroid - center);
                double db = norm2(geom[b].centroid - center);
                if (da != db) return da < db;
                return a < b;
            });
            candidates.resize(8);
            truncated[f] = 1;
        }

        // Angles of the projected centroid offsets, anticlockwise around the
        // face normal (right-hand rule).
        Vec3 t1 = any_perpendicular(normal);
        Vec3 t2 = cross(normal, t1);
        struct Entry {
            double angle;
            int32_t face;
        };
        std::vector<Entry> entries;
        entries.reserve(candidates.size());
        for (int32_t c : candidates) {
            Vec3 d = geom[c].centroid - center;
            Vec3 p = d - normal * dot(d, normal);
            entries.push_back({std::atan2(dot(p, t2), dot(p, t1)), c});
        }
        std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
            if (a.angle != b.angle) return a.angle < b.angle;
            return a.face < b.face;
        });
        for (size_t i = 0; i + 1 < entries.size(); ++i)
            if (std::abs(entries[i + 1].angle - entries[i].angle) <= 1e-12) ambiguous[f]++;
        if (entries.size() >= 2 &&
            std::abs(entries.front().angle + 2.0 * M_PI - entries.back().angle) <= 1e-12)
            ambiguous[f]++;

        // Anchor the cyclic order at the lexicographically smallest centroid.
        size_t anchor = 0;
        for (size_t i = 1; i < entries.size(); ++i) {
            const Vec3& best = geom[entries[anchor].face].centroid;
            const Vec3& cur = geom[entries[i].face].centroid;
            if (lex_less(cur, best) ||
                (!lex_less(best, cur) && entries[i].face < entries[anchor].face))
                anchor = i;
        }
        for (size_t i = 0; i < entries.size(); ++i)
            table.neighbors[f][i] = entries[(anchor + i) % entries.size()].face;
    });

    for (int64_t f = 0; f < mesh.face_count(); ++f) {
        table.ambiguous_angle_count += ambiguous[f];
        table.truncation_count += truncated[f];
    }
    return table;
}

}  // namespace rsg
