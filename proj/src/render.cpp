#include "rsg/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rsg/error.hpp"
#include "rsg/util.hpp"

namespace rsg {

namespace {

struct ScreenVertex {
    double x = 0.0;
    double y = 0.0;
    double inv_z = 0.0;  // 1 / camera-space depth, linear in screen space
};

double edge(const ScreenVertex& a, const ScreenVertex& b, double px, double py) {
    return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
}

}  // namespace

void validate_camera(const Camera& cam) {
    require(norm(cam.eye - cam.target) > 1e-12, ErrorKind::PreconditionViolation,
            "camera eye equals target");
    require(cam.fov_y_deg > 0.0 && cam.fov_y_deg < 180.0, ErrorKind::PreconditionViolation,
            "fov_y must be in (0, 180)");
    require(cam.height >= 1 && cam.width >= 1, ErrorKind::PreconditionViolation,
            "resolution must be positive");
}

Camera sample_pose(Rng& rng, const QuadMesh& mesh, const PoseConfig& config) {
    Vec3 center = mesh_centroid(mesh);
    double radius = bounding_sphere_radius(mesh, center);
    double azimuth = rng.uniform(0.0, 2.0 * kPi);
    double elevation =
        rng.uniform(config.elevation_min_deg, config.elevation_max_deg) * kPi / 180.0;
    double dist = config.distance_factor * std::max(radius, 1e-9);

    Camera cam;
    cam.target = center;
    cam.eye = center + Vec3{std::cos(elevation) * std::cos(azimuth),
                            std::cos(elevation) * std::sin(azimuth), std::sin(elevation)} *
                           dist;
    cam.up = {0.0, 0.0, 1.0};
    cam.fov_y_deg = config.fov_y_deg;
    cam.height = config.height;
    cam.width = config.width;
    return cam;
}

RasterPlan build_raster_plan(const QuadMesh& mesh, const Camera& cam) {
    validate_camera(cam);
    validate_mesh(mesh);
    const int64_t h = cam.height;
    const int64_t w = cam.width;

    Vec3 fwd = normalized(cam.target - cam.eye);
    Vec3 right = normalized(cross(fwd, cam.up));
    require(norm(right) > 0.5, ErrorKind::PreconditionViolation,
            "camera up is parallel to the view direction");
    Vec3 up = cross(right, fwd);

    double tan_half = std::tan(cam.fov_y_deg * kPi / 360.0);
    double aspect = static_cast<double>(w) / static_cast<double>(h);

    auto project = [&](const Vec3& p, ScreenVertex& out) -> bool {
        Vec3 d = p - cam.eye;
        double z = dot(d, fwd);
        if (z <= 1e-9) return false;  // behind/at the eye plane; triangle is skipped
        double xn = dot(d, right) / (z * tan_half * aspect);
        double yn = dot(d, up) / (z * tan_half);
        out.x = (xn * 0.5 + 0.5) * static_cast<double>(w);
        out.y = (0.5 - yn * 0.5) * static_cast<double>(h);
        out.inv_z = 1.0 / z;
        return true;
    };

    auto face_ids = std::make_shared<std::vector<int32_t>>(h * w, -1);
    std::vector<double> zbuf(h * w, std::numeric_limits<double>::infinity());

    for (int64_t f = 0; f < mesh.face_count(); ++f) {
        const auto& face = mesh.faces[f];
        const Vec3 p[4] = {mesh.vertices[face[0]], mesh.vertices[face[1]],
                           mesh.vertices[face[2]], mesh.vertices[face[3]]};
        static constexpr int kTri[2][3] = {{0, 1, 2}, {0, 2, 3}};
        for (const auto& tri : kTri) {
            const Vec3& a = p[tri[0]];
            const Vec3& b = p[tri[1]];
            const Vec3& c = p[tri[2]];
            Vec3 n = cross(b - a, c - a);
            if (norm2(n) <= 1e-24) continue;
            Vec3 centroid = (a + b + c) / 3.0;
            // World-space back-face cull; exactly edge-on triangles are culled.
            if (dot(centroid - cam.eye, n) >= -1e-12) continue;

            ScreenVertex s0, s1, s2;
            if (!project(a, s0) || !project(b, s1) || !project(c, s2)) continue;

            double area = edge(s0, s1, s2.x, s2.y);
            if (std::fabs(area) < 1e-12) continue;

            int64_t min_x = std::max<int64_t>(
                0, static_cast<int64_t>(std::floor(std::min({s0.x, s1.x, s2.x}) - 0.5)));
            int64_t max_x = std::min<int64_t>(
                w - 1, static_cast<int64_t>(std::ceil(std::max({s0.x, s1.x, s2.x}) + 0.5)));
            int64_t min_y = std::max<int64_t>(
                0, static_cast<int64_t>(std::floor(std::min({s0.y, s1.y, s2.y}) - 0.5)));
            int64_t max_y = std::min<int64_t>(
                h - 1, static_cast<int64_t>(std::ceil(std::max({s0.y, s1.y, s2.y}) + 0.5)));

            for (int64_t py = min_y; py <= max_y; ++py) {
                double cy = static_cast<double>(py) + 0.5;
                for (int64_t px = min_x; px <= max_x; ++px) {
                    double cx = static_cast<double>(px) + 0.5;
                    double l0 = edge(s1, s2, cx, cy) / area;
                    double l1 = edge(s2, s0, cx, cy) / area;
                    double l2 = edge(s0, s1, cx, cy) / area;
                    if (l0 < 0.0 || l1 < 0.0 || l2 < 0.0) continue;
                    double inv_z = l0 * s0.inv_z + l1 * s1.inv_z + l2 * s2.inv_z;
                    if (inv_z <= 0.0) continue;
                    double depth = 1.0 / inv_z;
                    int64_t pix = py * w + px;
                    if (depth < zbuf[pix]) {  // ties keep the first-drawn triangle
                        zbuf[pix] = depth;
                        (*face_ids)[pix] = static_cast<int32_t>(f);
                    }
                }
            }
        }
    }

    RasterPlan plan;
    plan.height = h;
    plan.width = w;
    plan.coverage.assign(mesh.face_count(), 0);
    for (int32_t fid : *face_ids)
        if (fid >= 0) ++plan.coverage[fid];
    plan.face_ids = std::move(face_ids);
    plan.empty = true;
    for (int64_t c : plan.coverage)
        if (c > 0) plan.empty = false;
    return plan;
}

RenderOutput rasterize(const QuadMesh& mesh, const Tensord& colors, const Camera& cam,
                       const Vec3& background) {
    require(colors.rows() == mesh.face_count() && colors.cols() == 3, ErrorKind::ShapeMismatch,
            "rasterize: colors must be F x 3");
    RasterPlan plan = build_raster_plan(mesh, cam);

    RenderOutput out;
    out.height = plan.height;
    out.width = plan.width;
    out.face_id = *plan.face_ids;
    out.coverage = plan.coverage;
    out.empty = plan.empty;
    out.image = Tensord(plan.height * plan.width, 3);
    for (int64_t p = 0; p < out.image.rows(); ++p) {
        int32_t fid = out.face_id[p];
        if (fid >= 0) {
            out.image.at(p, 0) = colors.at(fid, 0);
            out.image.at(p, 1) = colors.at(fid, 1);
            out.image.at(p, 2) = colors.at(fid, 2);
        } else {
            out.image.at(p, 0) = background.x;
            out.image.at(p, 1) = background.y;
            out.image.at(p, 2) = background.z;
        }
    }
    return out;
}

Tensord rasterize_backward(const RenderOutput& render, const Tensord& grad_image) {
    require(grad_image.rows() == render.height * render.width && grad_image.cols() == 3,
            ErrorKind::ShapeMismatch, "rasterize_backward: grad must be (H*W) x 3");
    Tensord grad_colors = Tensord::zeros(static_cast<int64_t>(render.coverage.size()), 3);
    for (int64_t p = 0; p < grad_image.rows(); ++p) {
        int32_t fid = render.face_id[p];
        if (fid < 0) continue;
        for (int64_t c = 0; c < 3; ++c) grad_colors.at(fid, c) += grad_image.at(p, c);
    }
    return grad_colors;
}

std::vector<PatchCrop> sample_patch_origins(const RasterPlan& plan, Rng& rng, int64_t patch_size,
                                            int64_t count) {
    require(patch_size >= 1 && patch_size <= std::min(plan.height, plan.width),
            ErrorKind::PreconditionViolation, "patch size exceeds image");
    const int64_t needed = patch_size * patch_size / 4;  // 25% foreground
    std::vector<PatchCrop> crops;
    crops.reserve(count);
    for (int64_t i = 0; i < count; ++i) {
        PatchCrop crop;
        for (int attempt = 0; attempt < 20; ++attempt) {
            crop.y0 = rng.uniform_int(plan.height - patch_size + 1);
            crop.x0 = rng.uniform_int(plan.width - patch_size + 1);
            int64_t fg = 0;
            for (int64_t y = 0; y < patch_size; ++y)
                for (int64_t x = 0; x < patch_size; ++x)
                    if ((*plan.face_ids)[(crop.y0 + y) * plan.width + crop.x0 + x] >= 0) ++fg;
            if (fg >= needed) break;
        }
        crops.push_back(crop);
    }
    return crops;
}

std::shared_ptr<const std::vector<int32_t>> patch_gather_indices(int64_t height, int64_t width,
                                                                 const PatchCrop& crop,
                                                                 int64_t patch_size) {
    require(crop.y0 >= 0 && crop.x0 >= 0 && crop.y0 + patch_size <= height &&
                crop.x0 + patch_size <= width,
            ErrorKind::PreconditionViolation, "patch crop out of bounds");
    auto idx = std::make_shared<std::vector<int32_t>>();
    idx->reserve(patch_size * patch_size);
    for (int64_t y = 0; y < patch_size; ++y)
        for (int64_t x = 0; x < patch_size; ++x)
            idx->push_back(static_cast<int32_t>((crop.y0 + y) * width + crop.x0 + x));
    return idx;
}

Tensord crop_image(const Tensord& image, int64_t height, int64_t width, const PatchCrop& crop,
                   int64_t patch_size) {
    require(image.rows() == height * width, ErrorKind::ShapeMismatch,
            "crop_image: image rows != H*W");
    auto idx = patch_gather_indices(height, width, crop, patch_size);
    Tensord out(patch_size * patch_size, image.cols());
    for (size_t i = 0; i < idx->size(); ++i)
        for (int64_t c = 0; c < image.cols(); ++c) out.at(i, c) = image.at((*idx)[i], c);
    return out;
}

}  // namespace rsg
