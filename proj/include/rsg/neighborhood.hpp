#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rsg/mesh.hpp"

namespace rsg {

constexpr int32_t kNoNeighbor = -1;

// Canonical ordered 8-neighborhood per face: the index structure consumed by
// face convolutions. Row layout: edge- and vertex-adjacent faces sorted
// anticlockwise around the face normal, rotated so the first entry is the
// neighbor with the lexicographically smallest centroid; sentinel -1 entries
// pad short rows (faces touching valence<4 singular vertices) and sit last.
struct NeighborhoodTable {
    std::vector<std::array<int32_t, 8>> neighbors;
    double singular_vertex_fraction = 0.0;
    int64_t ambiguous_angle_count = 0;  // ties resolved by lower face index
    int64_t truncation_count = 0;       // rows that had > 8 candidates

    int64_t face_count() const { return static_cast<int64_t>(neighbors.size()); }

    int real_neighbor_count(int64_t face) const {
        int n = 0;
        for (int32_t v : neighbors[face])
            if (v != kNoNeighbor) ++n;
        return n;
    }
};

// Number of incident faces per vertex.
std::vector<int> vertex_valences(const QuadMesh& mesh);

// Fraction of vertices with valence != 4. Boundary vertices are excluded
// from the denominator on open meshes.
double singularity_stats(const QuadMesh& mesh);

NeighborhoodTable build_neighborhood(const QuadMesh& mesh);

}  // namespace rsg
