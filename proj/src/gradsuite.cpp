#include "rsg/gradsuite.hpp"

#include <algorithm>
#include <functional>

#include "rsg/gan.hpp"
#include "rsg/gradcheck.hpp"
#include "rsg/hierarchy.hpp"
#include "rsg/mesh.hpp"
#include "rsg/neighborhood.hpp"
#include "rsg/nn.hpp"
#include "rsg/render.hpp"

namespace rsg {

namespace {

Tensord rnd(Rng& rng, int64_t rows, int64_t cols, double scale = 1.0) {
    return Tensord::randn(rows, cols, rng, scale);
}

int32_t msq(Taped& t, int32_t x) { return t.mean_all(t.square(x)); }

}  // namespace

std::vector<GradSuiteEntry> run_gradient_suite(uint64_t base_seed, double tolerance) {
    QuadMesh cube24 = make_cube_hierarchy_level(1);
    NeighborhoodTable nbr24 = build_neighborhood(cube24);
    MeshHierarchy h96 = build_hierarchy({make_cube_hierarchy_level(2), cube24});

    Camera cam;
    cam.eye = Vec3{2.2, 1.3, 1.1};
    cam.target = Vec3{0.0, 0.0, 0.0};
    cam.height = cam.width = 16;
    RasterPlan plan24 = build_raster_plan(cube24, cam);

    struct OpCase {
        std::string name;
        std::function<double(uint64_t)> run;
    };
    std::vector<OpCase> cases;

    cases.push_back({"face_conv", [&](uint64_t seed) {
        Rng rng(seed);
        std::vector<Tensord> args{rnd(rng, 24, 3), rnd(rng, 27, 4, 0.4), rnd(rng, 1, 4, 0.2)};
        return gradcheck([&](Taped& t, const std::vector<int32_t>& a) {
                   return msq(t, face_conv(t, a[0], nbr24, a[1], a[2]));
               }, args).overall();
    }});

    for (bool demod : {true, false}) {
        std::string name = demod ? "modulated_face_conv_demod" : "modulated_face_conv_nodemod";
        cases.push_back({name, [&, demod](uint64_t seed) {
            Rng rng(seed);
            Tensord noise = rnd(rng, 24, 1);
            Tensord s = rnd(rng, 1, 3, 0.3);
            for (double& v : s.data) v += 1.0;
            std::vector<Tensord> args{rnd(rng, 24, 3), rnd(rng, 27, 4, 0.4),
                                      rnd(rng, 1, 4, 0.2), s, rnd(rng, 1, 4, 0.1)};
            return gradcheck([&, noise](Taped& t, const std::vector<int32_t>& a) {
                       int32_t nz = t.constant(noise);
                       return msq(t, modulated_face_conv(t, a[0], nbr24, a[1], a[2], a[3],
                                                         demod, nz, a[4]));
                   }, args).overall();
        }});
    }

    cases.push_back({"face_resnet_block", [&](uint64_t seed) {
        Rng rng(seed);
        std::vector<Tensord> args{rnd(rng, 24, 3),     rnd(rng, 27, 6, 0.4),
                                  rnd(rng, 1, 6, 0.2), rnd(rng, 54, 6, 0.3),
                                  rnd(rng, 1, 6, 0.2), rnd(rng, 3, 6, 0.5)};
        return gradcheck([&](Taped& t, const std::vector<int32_t>& a) {
                   return msq(t, face_resnet_block(t, a[0], nbr24, a[1], a[2], a[3], a[4], a[5]));
               }, args).overall();
    }});

    cases.push_back({"pool", [&](uint64_t seed) {
        Rng rng(seed);
        std::vector<Tensord> args{rnd(rng, 96, 3)};
        return gradcheck([&](Taped& t, const std::vector<int32_t>& a) {
                   return msq(t, pool_on_tape(t, a[0], h96, 1));
               }, args).overall();
    }});

    cases.push_back({"unpool", [&](uint64_t seed) {
        Rng rng(seed);
        std::vector<Tensord> args{rnd(rng, 24, 3)};
        return gradcheck([&](Taped& t, const std::vector<int32_t>& a) {
                   return msq(t, unpool_on_tape(t, a[0], h96, 2));
               }, args).overall();
    }});

    cases.push_back({"conv2d", [&](uint64_t seed) {
        Rng rng(seed);
        std::vector<Tensord> args{rnd(rng, 64, 3), rnd(rng, 27, 5, 0.4), rnd(rng, 1, 5, 0.2)};
        return gradcheck([&](Taped& t, const std::vector<int32_t>& a) {
                   return msq(t, conv2d(t, a[0], 8, 8, a[1], a[2], 3, 2, 1));
               }, args).overall();
    }});

    cases.push_back({"dense", [&](uint64_t seed) {
        Rng rng(seed);
        std::vector<Tensord> args{rnd(rng, 2, 5), rnd(rng, 5, 4, 0.5), rnd(rng, 1, 4, 0.2)};
        return gradcheck([&](Taped& t, const std::vector<int32_t>& a) {
                   return msq(t, dense(t, a[0], a[1], a[2]));
               }, args).overall();
    }});

    cases.push_back({"mapping", [&](uint64_t seed) {
        Rng rng(seed);
        GeneratorConfig cfg;
        cfg.latent_dim = cfg.style_dim = 8;
        cfg.mapping_depth = 2;
        std::vector<Tensord> args{rnd(rng, 1, 8), rnd(rng, 8, 8, 0.5), rnd(rng, 1, 8, 0.2),
                                  rnd(rng, 8, 8, 0.5), rnd(rng, 1, 8, 0.2)};
        return gradcheck([&](Taped& t, const std::vector<int32_t>& a) {
                   ParamIds p{{"mapping.0.w", a[1]},
                              {"mapping.0.b", a[2]},
                              {"mapping.1.w", a[3]},
                              {"mapping.1.b", a[4]}};
                   return msq(t, map_latent(t, a[0], p, cfg));
               }, args).overall();
    }});

    cases.push_back({"rasterize", [&](uint64_t seed) {
        Rng rng(seed);
        Tensord colors = rnd(rng, 24, 3, 0.25);
        for (double& v : colors.data) v += 0.5;
        std::vector<Tensord> args{colors};
        return gradcheck([&](Taped& t, const std::vector<int32_t>& a) {
                   return msq(t, rasterize_on_tape(t, a[0], plan24));
               }, args).overall();
    }});

    cases.push_back({"loss_nonsat", [](uint64_t seed) {
        Rng rng(seed);
        std::vector<Tensord> args{rnd(rng, 1, 1), rnd(rng, 1, 1), rnd(rng, 1, 1)};
        return gradcheck([](Taped& t, const std::vector<int32_t>& a) {
                   return loss_nonsat(t, {a[0], a[1], a[2]});
               }, args).overall();
    }});

    cases.push_back({"loss_disc", [](uint64_t seed) {
        Rng rng(seed);
        std::vector<Tensord> args{rnd(rng, 1, 1), rnd(rng, 1, 1), rnd(rng, 1, 1),
                                  rnd(rng, 1, 1)};
        return gradcheck([](Taped& t, const std::vector<int32_t>& a) {
                   return loss_disc(t, {a[0], a[1]}, {a[2], a[3]});
               }, args).overall();
    }});

    // second-order path: d(R1)/d(params and image) against finite differences
    cases.push_back({"r1_penalty", [](uint64_t seed) {
        Rng rng(seed);
        std::vector<Tensord> args{rnd(rng, 16, 3), rnd(rng, 48, 8, 0.3), rnd(rng, 1, 8, 0.3),
                                  rnd(rng, 8, 1, 0.5), rnd(rng, 1, 1, 0.2)};
        return gradcheck([](Taped& t, const std::vector<int32_t>& a) {
                   int32_t flat = t.reshape(a[0], 1, 48);
                   int32_t hdn = t.leaky_relu(dense(t, flat, a[1], a[2]), 0.2);
                   int32_t logit = dense(t, hdn, a[3], a[4]);
                   return r1_penalty(t, logit, a[0], 10.0);
               }, args).overall();
    }});

    // second-order path: style-to-image Jacobian norm penalty
    cases.push_back({"path_length", [&](uint64_t seed) {
        Rng rng(seed);
        Tensord y = rnd(rng, 256, 3);
        std::vector<Tensord> args{rnd(rng, 1, 6), rnd(rng, 6, 72, 0.4), rnd(rng, 1, 72, 0.2)};
        return gradcheck([&, y](Taped& t, const std::vector<int32_t>& a) {
                   int32_t colors = t.sigmoid(t.reshape(dense(t, a[0], a[1], a[2]), 24, 3));
                   int32_t image = rasterize_on_tape(t, colors, plan24);
                   return path_length_penalty(t, image, a[0], y, 0.7).penalty;
               }, args).overall();
    }});

    std::vector<GradSuiteEntry> out;
    out.reserve(cases.size());
    for (const OpCase& c : cases) {
        double worst = 0.0;
        for (uint64_t s = 0; s < 3; ++s) worst = std::max(worst, c.run(base_seed + s));
        out.push_back({c.name, worst, worst <= tolerance});
    }
    return out;
}

}  // namespace rsg
