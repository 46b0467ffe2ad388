#pragma once

#include <cstdint>
#include <string>

#include "rsg/hierarchy.hpp"
#include "rsg/mesh.hpp"
#include "rsg/neighborhood.hpp"
#include "rsg/tensor.hpp"

namespace rsg {

enum class FeatureKind {
    kNone,
    kPosition,
    kLaplacian,
    kCurvatures,
    kFundamentalForms,
    kNormals,
    kNormalsPlusCurvature,
};

struct FeatureSpec {
    FeatureKind kind = FeatureKind::kNormalsPlusCurvature;
    int64_t channel_count = 4;
};

FeatureSpec make_feature_spec(FeatureKind kind);
FeatureSpec parse_feature_spec(const std::string& name);  // ParseError on unknown name
const char* feature_kind_name(FeatureKind kind);

// Rigid/scale normalization applied before every feature computation:
// bounding-box center to origin, longest extent scaled to 1.
QuadMesh normalize_to_unit_cube(const QuadMesh& mesh);

// Per-face centroids of the normalized mesh; all rows in [-0.5, 0.5]^3.
FeatureField feature_position(const QuadMesh& mesh);

// Per-face unit normals.
FeatureField feature_normals(const QuadMesh& mesh);

// Umbrella operator on centroids: mean of real-neighbor centroids minus own
// centroid, in normalized coordinates. Throws IsolatedFace when a face has no
// real neighbors.
FeatureField feature_laplacian(const QuadMesh& mesh, const NeighborhoodTable& nbr);

// C=2 per face: (signed mean curvature, Gaussian curvature), each channel
// divided by the 90th percentile of its absolute values and clamped to
// [-10, 10].
FeatureField feature_curvatures(const QuadMesh& mesh);

// C=8 per face: (E, F, G, L, M, N, kappa1, kappa2). E,F,G are area-normalized
// first-form coefficients; L,M,N and the principal curvatures come from a
// least-squares shape-operator fit over the real neighborhood. Curvature
// channels are p90-normalized; everything is clamped to [-10, 10].
// Rank-deficient fits fall back to a flat second form and bump the counter.
FeatureField feature_fundamental_forms(const QuadMesh& mesh, const NeighborhoodTable& nbr,
                                       int64_t* rank_deficient_count = nullptr);

FeatureField assemble_input(const QuadMesh& mesh, const NeighborhoodTable& nbr,
                            const FeatureSpec& spec);

// Raw discretizations on the mesh exactly as given (no normalization), for
// verification against analytic values.
Tensord vertex_curvatures(const QuadMesh& mesh);    // V x 2 (mean, Gaussian)
Tensord face_curvatures_raw(const QuadMesh& mesh);  // F x 2, mean of vertex values
Tensord fundamental_forms_raw(const QuadMesh& mesh, const NeighborhoodTable& nbr,
                              int64_t* rank_deficient_count = nullptr);  // F x 8

// Binary feature file: magic "RSFF", u32 rows, u32 cols, f32 data row-major.
void save_features(const FeatureField& field, const std::string& path);
FeatureField load_features(const std::string& path);

}  // namespace rsg
