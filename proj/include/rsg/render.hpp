#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rsg/mesh.hpp"
#include "rsg/rng.hpp"
#include "rsg/tape.hpp"
#include "rsg/tensor.hpp"
#include "rsg/vec3.hpp"

namespace rsg {

struct Camera {
    Vec3 eye;
    Vec3 target;
    Vec3 up{0.0, 0.0, 1.0};
    double fov_y_deg = 40.0;
    int64_t height = 64;
    int64_t width = 64;
};

void validate_camera(const Camera& cam);

struct PoseConfig {
    double elevation_min_deg = -10.0;
    double elevation_max_deg = 40.0;
    double distance_factor = 1.8;  // times the bounding-sphere radius
    double fov_y_deg = 40.0;
    int64_t height = 64;
    int64_t width = 64;
};

// Azimuth ~ U[0, 2pi), elevation ~ U[min, max], z-up orbit around the mesh
// centroid at distance_factor * bounding radius.
Camera sample_pose(Rng& rng, const QuadMesh& mesh, const PoseConfig& config);

// Geometry-only rasterization result: visibility is fixed per (mesh, camera)
// and shared by every color pass. face_ids is row-major H*W with -1 for
// background.
struct RasterPlan {
    int64_t height = 0;
    int64_t width = 0;
    std::shared_ptr<const std::vector<int32_t>> face_ids;
    std::vector<int64_t> coverage;  // pixels per face
    bool empty = false;             // no face covered any pixel (warning, not an error)
};

RasterPlan build_raster_plan(const QuadMesh& mesh, const Camera& cam);

struct RenderOutput {
    int64_t height = 0;
    int64_t width = 0;
    Tensord image;                  // (H*W) x 3, values in [0, 1]
    std::vector<int32_t> face_id;   // H*W, -1 = background
    std::vector<int64_t> coverage;  // per face
    bool empty = false;
};

// Flat per-face colors: each covered pixel is a bit-exact copy of
// colors[face_id]; background pixels take the background color.
RenderOutput rasterize(const QuadMesh& mesh, const Tensord& colors, const Camera& cam,
                       const Vec3& background = Vec3{0.0, 0.0, 0.0});

// grad_colors[f][c] = sum of grad_image over pixels with face_id == f.
Tensord rasterize_backward(const RenderOutput& render, const Tensord& grad_image);

// Tape version of the color path: gather face colors per pixel plus a
// constant background image. Linear in colors, so color gradients are exact.
template <typename T>
int32_t rasterize_on_tape(Tape<T>& tape, int32_t colors, const RasterPlan& plan,
                          const Vec3& background = Vec3{0.0, 0.0, 0.0}) {
    int64_t pixels = plan.height * plan.width;
    Tensor<T> bg = Tensor<T>::zeros(pixels, 3);
    for (int64_t p = 0; p < pixels; ++p) {
        if ((*plan.face_ids)[p] >= 0) continue;
        bg.at(p, 0) = static_cast<T>(background.x);
        bg.at(p, 1) = static_cast<T>(background.y);
        bg.at(p, 2) = static_cast<T>(background.z);
    }
    return tape.add(tape.gather_rows(colors, plan.face_ids), tape.constant(std::move(bg)));
}

struct PatchCrop {
    int64_t y0 = 0;
    int64_t x0 = 0;
};

// Uniform crop origins; a crop is resampled (up to 20 tries) until at least
// 25% of its pixels are foreground, then accepted regardless.
std::vector<PatchCrop> sample_patch_origins(const RasterPlan& plan, Rng& rng, int64_t patch_size,
                                            int64_t count);

// Pixel row indices of a patch inside an H x W image, row-major.
std::shared_ptr<const std::vector<int32_t>> patch_gather_indices(int64_t height, int64_t width,
                                                                 const PatchCrop& crop,
                                                                 int64_t patch_size);

// Convenience extraction for non-tape callers: (ps*ps) x 3.
Tensord crop_image(const Tensord& image, int64_t height, int64_t width, const PatchCrop& crop,
                   int64_t patch_size);

// 8-bit RGB PNG; image is (H*W) x 3 in [0, 1], values rounded to bytes.
void write_png(const std::string& path, const Tensord& image, int64_t height, int64_t width);

}  // namespace rsg
