#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rsg/mesh.hpp"
#include "rsg/neighborhood.hpp"
#include "rsg/tensor.hpp"

namespace rsg {

// Per-face feature vectors at one hierarchy level: F x C scalars.
struct FeatureField {
    int level = 1;
    Tensord values;

    FeatureField() = default;
    FeatureField(int level_, Tensord values_) : level(level_), values(std::move(values_)) {}
    int64_t face_count() const { return values.rows(); }
    int64_t channels() const { return values.cols(); }
};

struct HierarchyLevel {
    QuadMesh mesh;
    NeighborhoodTable table;
};

// Multi-level mesh stack, ordered finest (level 1) to coarsest (level n).
// pool_assignment[p][f] maps fine face f of pair p (levels p+1 -> p+2) to its
// nearest coarse face; pool_groups is the inverse partition. Immutable after
// build; pool/unpool are pure functions.
struct MeshHierarchy {
    std::vector<HierarchyLevel> levels;
    std::vector<std::vector<int32_t>> pool_assignment;       // per pair, size = fine face count
    std::vector<std::vector<std::vector<int32_t>>> pool_groups;  // per pair, coarse face -> fine faces
    int64_t empty_group_count = 0;

    int level_count() const { return static_cast<int>(levels.size()); }
    int64_t face_count(int level) const { return levels[level - 1].mesh.face_count(); }
    const NeighborhoodTable& table(int level) const { return levels[level - 1].table; }
    const QuadMesh& mesh(int level) const { return levels[level - 1].mesh; }
};

// Builds the hierarchy from meshes ordered by non-increasing face count.
// Each fine face is assigned to the coarse face with minimum centroid
// distance (ties by lowest coarse index). A coarse face owning zero fine
// faces is an error unless allow_empty_groups is set, in which case the count
// is recorded on the hierarchy.
MeshHierarchy build_hierarchy(std::vector<QuadMesh> level_meshes, bool allow_empty_groups = false);

// Mean aggregation over each pooling group; empty groups yield zero rows.
FeatureField pool(const FeatureField& features, const MeshHierarchy& h);

// Pure copy from the assigned coarse face.
FeatureField unpool(const FeatureField& features, const MeshHierarchy& h);

// Reverse-mode contracts: pool scatters grad/|group| to members; unpool sums
// grads of all fine faces in each group.
FeatureField pool_backward(const FeatureField& grad_out, const MeshHierarchy& h);
FeatureField unpool_backward(const FeatureField& grad_out, const MeshHierarchy& h);

// Hierarchy cache: magic "RSHY", version, levels with vertex/face arrays and
// neighborhood tables, then per-pair assignment arrays. Integers u32 LE with
// sentinel 0xFFFFFFFF, floats f32.
void save_hierarchy(const MeshHierarchy& h, const std::string& path);
MeshHierarchy load_hierarchy(const std::string& path);

// Revalidates structural invariants of a loaded hierarchy (partitions,
// table symmetry, face-count ordering). Throws on violation.
void validate_hierarchy(const MeshHierarchy& h);

}  // namespace rsg
