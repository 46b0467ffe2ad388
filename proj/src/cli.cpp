#include "rsg/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rsg/checkpoint.hpp"
#include "rsg/error.hpp"
#include "rsg/features.hpp"
#include "rsg/gan.hpp"
#include "rsg/gradsuite.hpp"
#include "rsg/hierarchy.hpp"
#include "rsg/mesh.hpp"
#include "rsg/render.hpp"

namespace rsg {

namespace {

QuadMesh make_level_mesh(const std::string& family, int depth) {
    return family == "sphere" ? make_quad_sphere(depth) : make_cube_hierarchy_level(depth);
}

// Hierarchy source shared by generate/interpolate/train: either a saved
// RSHY cache or a procedural cube/sphere ladder of `levels` meshes whose
// finest level has the given depth.
MeshHierarchy hierarchy_from_source(const std::string& path, int cube_depth, int sphere_depth,
                                    int levels) {
    if (!path.empty()) return load_hierarchy(path);
    require(cube_depth >= 0 || sphere_depth >= 0, ErrorKind::PreconditionViolation,
            "need --hierarchy, --cube, or --sphere to define the mesh ladder");
    std::string family = cube_depth >= 0 ? "cube" : "sphere";
    int finest = cube_depth >= 0 ? cube_depth : sphere_depth;
    require(finest - levels + 1 >= 0, ErrorKind::PreconditionViolation,
            "depth too small for " + std::to_string(levels) + " levels");
    std::vector<QuadMesh> meshes;
    for (int k = finest; k > finest - levels; --k) meshes.push_back(make_level_mesh(family, k));
    return build_hierarchy(std::move(meshes));
}

Tensord colors_for_render(const QuadMesh& mesh, const std::string& colors_path,
                          const std::string& mesh_path) {
    std::vector<std::array<float, 3>> cols;
    if (!colors_path.empty()) {
        cols = load_face_colors(colors_path);
    } else {
        std::string sidecar = color_sidecar_path(mesh_path);
        if (std::filesystem::exists(sidecar)) cols = load_face_colors(sidecar);
    }
    Tensord out(mesh.face_count(), 3);
    if (cols.empty()) {
        for (double& v : out.data) v = 0.5;
        return out;
    }
    require(static_cast<int64_t>(cols.size()) == mesh.face_count(),
            ErrorKind::ShapeMismatch, "color count does not match the mesh face count");
    for (int64_t i = 0; i < out.rows(); ++i)
        for (int64_t k = 0; k < 3; ++k) out.at(i, k) = cols[i][k];
    return out;
}

struct TrainFile {
    GeneratorConfig gen;
    TrainConfig train;
    std::vector<std::string> hierarchy_paths;
    int cube_depth = -1;
    int sphere_depth = -1;
};

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        size_t a = item.find_first_not_of(" \t");
        size_t b = item.find_last_not_of(" \t");
        if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
    }
    return out;
}

int64_t parse_int(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        int64_t v = std::stoll(value, &pos);
        require(pos == value.size(), ErrorKind::ParseError, "trailing characters");
        return v;
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        raise(ErrorKind::ParseError, "bad integer for '" + key + "': " + value);
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        double v = std::stod(value, &pos);
        require(pos == value.size(), ErrorKind::ParseError, "trailing characters");
        return v;
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        raise(ErrorKind::ParseError, "bad number for '" + key + "': " + value);
    }
}

// Flat key=value file; '#' starts a comment. Unknown keys are errors so a
// typo cannot silently fall back to a default.
TrainFile parse_train_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorKind::IoError, "cannot read " + path);
    TrainFile f;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        size_t b = line.find_last_not_of(" \t\r");
        line = line.substr(a, b - a + 1);
        size_t eq = line.find('=');
        require(eq != std::string::npos, ErrorKind::ParseError,
                path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto trim = [](std::string s) {
            size_t x = s.find_first_not_of(" \t");
            size_t y = s.find_last_not_of(" \t");
            return x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
        };
        key = trim(key);
        value = trim(value);
        require(!key.empty() && !value.empty(), ErrorKind::ParseError,
                path + ":" + std::to_string(lineno) + ": empty key or value");

        if (key == "levels") {
            f.gen.levels = static_cast<int>(parse_int(key, value));
        } else if (key == "channels") {
            f.gen.channels.clear();
            for (const std::string& c : split_csv(value))
                f.gen.channels.push_back(parse_int(key, c));
        } else if (key == "latent_dim") {
            f.gen.latent_dim = parse_int(key, value);
        } else if (key == "style_dim") {
            f.gen.style_dim = parse_int(key, value);
        } else if (key == "mapping_depth") {
            f.gen.mapping_depth = static_cast<int>(parse_int(key, value));
        } else if (key == "features") {
            f.gen.feature_kind = parse_feature_spec(value).kind;
        } else if (key == "hierarchies") {
            f.hierarchy_paths = split_csv(value);
        } else if (key == "cube") {
            f.cube_depth = static_cast<int>(parse_int(key, value));
        } else if (key == "sphere") {
            f.sphere_depth = static_cast<int>(parse_int(key, value));
        } else if (key == "steps") {
            f.train.steps = parse_int(key, value);
        } else if (key == "views") {
            f.train.views = parse_int(key, value);
        } else if (key == "render_res") {
            f.train.render_res = parse_int(key, value);
        } else if (key == "patch_size") {
            f.train.patch_size = parse_int(key, value);
        } else if (key == "patches_per_view") {
            f.train.patches_per_view = parse_int(key, value);
        } else if (key == "image_weight") {
            f.train.image_weight = parse_double(key, value);
        } else if (key == "patch_weight") {
            f.train.patch_weight = parse_double(key, value);
        } else if (key == "r1_gamma") {
            f.train.r1_gamma = parse_double(key, value);
        } else if (key == "pl_weight") {
            f.train.pl_weight = parse_double(key, value);
        } else if (key == "d_reg_interval") {
            f.train.d_reg_interval = parse_int(key, value);
        } else if (key == "g_reg_interval") {
            f.train.g_reg_interval = parse_int(key, value);
        } else if (key == "lr_encoder") {
            f.train.lr_encoder = parse_double(key, value);
        } else if (key == "lr_decoder") {
            f.train.lr_decoder = parse_double(key, value);
        } else if (key == "lr_disc") {
            f.train.lr_disc = parse_double(key, value);
        } else if (key == "ema_decay") {
            f.train.ema_decay = parse_double(key, value);
        } else if (key == "pl_ema_decay") {
            f.train.pl_ema_decay = parse_double(key, value);
        } else if (key == "disc_base_channels") {
            f.train.disc_base_channels = parse_int(key, value);
        } else if (key == "disc_max_channels") {
            f.train.disc_max_channels = parse_int(key, value);
        } else if (key == "seed") {
            f.train.seed = static_cast<uint64_t>(parse_int(key, value));
        } else if (key == "out_dir") {
            f.train.out_dir = value;
        } else {
            raise(ErrorKind::ParseError,
                  path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    if (f.gen.channels.empty()) f.gen.channels = {16, 32, 64};
    return f;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"Surface texture GAN pipeline: quad-mesh hierarchies, face convolutions, "
                 "differentiable rendering, and adversarial training in one binary."};
    app.require_subcommand(1);

    int exit_code = 0;

    // ---- mesh ----
    auto* mesh_cmd = app.add_subcommand("mesh", "Create procedural quad meshes");
    mesh_cmd->require_subcommand(1);
    struct {
        int depth = 1;
        std::string out;
    } mk_cube, mk_sphere;
    auto* make_cube = mesh_cmd->add_subcommand("make-cube", "Cube with 6*4^depth quad faces");
    make_cube->add_option("--depth", mk_cube.depth, "subdivision depth")->capture_default_str();
    make_cube->add_option("--out", mk_cube.out, "output OBJ path")->required();
    make_cube->callback([&] {
        QuadMesh m = make_level_mesh("cube", mk_cube.depth);
        save_obj(m, mk_cube.out);
        std::cout << "wrote " << mk_cube.out << " (" << m.face_count() << " faces)\n";
    });
    auto* make_sphere =
        mesh_cmd->add_subcommand("make-sphere", "Unit sphere with 6*4^depth quad faces");
    make_sphere->add_option("--depth", mk_sphere.depth, "subdivision depth")
        ->capture_default_str();
    make_sphere->add_option("--out", mk_sphere.out, "output OBJ path")->required();
    make_sphere->callback([&] {
        QuadMesh m = make_level_mesh("sphere", mk_sphere.depth);
        save_obj(m, mk_sphere.out);
        std::cout << "wrote " << mk_sphere.out << " (" << m.face_count() << " faces)\n";
    });

    // ---- hierarchy ----
    auto* hier_cmd = app.add_subcommand("hierarchy", "Build or validate mesh hierarchies");
    hier_cmd->require_subcommand(1);
    struct {
        std::vector<std::string> level_paths;
        int cube = -1, sphere = -1, count = 3;
        std::string out;
        bool allow_empty = false;
    } hb;
    auto* hier_build = hier_cmd->add_subcommand(
        "build", "Nearest-centroid pooling hierarchy from meshes ordered finest first");
    hier_build->add_option("--levels", hb.level_paths, "OBJ paths, finest level first");
    hier_build->add_option("--cube", hb.cube, "procedural cube ladder: finest depth");
    hier_build->add_option("--sphere", hb.sphere, "procedural sphere ladder: finest depth");
    hier_build->add_option("--count", hb.count, "level count for procedural ladders")
        ->capture_default_str();
    hier_build->add_option("--out", hb.out, "output RSHY path")->required();
    hier_build->add_flag("--allow-empty-groups", hb.allow_empty,
                         "tolerate coarse faces with no assigned fine faces");
    hier_build->callback([&] {
        MeshHierarchy h;
        if (!hb.level_paths.empty()) {
            std::vector<QuadMesh> ms;
            for (const std::string& p : hb.level_paths) ms.push_back(load_obj(p));
            h = build_hierarchy(std::move(ms), hb.allow_empty);
        } else {
            h = hierarchy_from_source("", hb.cube, hb.sphere, hb.count);
        }
        save_hierarchy(h, hb.out);
        std::cout << "wrote " << hb.out << " (" << h.level_count() << " levels,";
        for (int l = 1; l <= h.level_count(); ++l) std::cout << " " << h.face_count(l);
        std::cout << " faces)\n";
    });
    struct {
        std::string in;
    } hv;
    auto* hier_validate =
        hier_cmd->add_subcommand("validate", "Check a saved hierarchy's invariants");
    hier_validate->add_option("cache", hv.in, "RSHY path")->required();
    hier_validate->callback([&] {
        MeshHierarchy h = load_hierarchy(hv.in);
        validate_hierarchy(h);
        std::cout << "levels: " << h.level_count() << "\n";
        for (int l = 1; l <= h.level_count(); ++l) {
            const NeighborhoodTable& t = h.table(l);
            std::cout << "level " << l << ": " << h.face_count(l) << " faces, singular vertex "
                      << "fraction " << t.singular_vertex_fraction << ", truncated "
                      << t.truncation_count << "\n";
        }
        std::cout << "empty groups: " << h.empty_group_count << "\nvalid\n";
    });

    // ---- features ----
    auto* feat_cmd = app.add_subcommand("features", "Per-face geometric input features");
    feat_cmd->require_subcommand(1);
    struct {
        std::string mesh, kind = "normals_plus_curvature", out;
    } fc;
    auto* feat_compute = feat_cmd->add_subcommand("compute", "Compute features for one mesh");
    feat_compute->add_option("--mesh", fc.mesh, "input OBJ path")->required();
    feat_compute
        ->add_option("--spec", fc.kind,
                     "none|position|laplacian|curvatures|fundamental_forms|normals|"
                     "normals_plus_curvature")
        ->capture_default_str();
    feat_compute->add_option("--out", fc.out, "output RSFF path")->required();
    feat_compute->callback([&] {
        QuadMesh m = load_obj(fc.mesh);
        validate_mesh(m);
        NeighborhoodTable nbr = build_neighborhood(m);
        FeatureField field = assemble_input(m, nbr, parse_feature_spec(fc.kind));
        save_features(field, fc.out);
        std::cout << "wrote " << fc.out << " (" << field.face_count() << " x "
                  << field.channels() << ")\n";
    });

    // ---- render ----
    struct {
        std::string mesh, colors, out;
        int64_t res = 64;
        uint64_t seed = 0;
        double fov = 40.0;
        std::vector<double> eye, target;
    } rd;
    auto* render_cmd = app.add_subcommand("render", "Rasterize a mesh with flat face colors");
    render_cmd->add_option("--mesh", rd.mesh, "input OBJ path")->required();
    render_cmd->add_option("--colors", rd.colors,
                           "RSFC face colors (default: the mesh's sidecar, else mid-gray)");
    render_cmd->add_option("--out", rd.out, "output PNG path")->required();
    render_cmd->add_option("--res", rd.res, "image width and height")->capture_default_str();
    render_cmd->add_option("--fov", rd.fov, "vertical field of view, degrees")
        ->capture_default_str();
    render_cmd->add_option("--eye", rd.eye, "camera position x y z (omit to sample a pose)")
        ->expected(3);
    render_cmd->add_option("--target", rd.target, "look-at point x y z (default mesh centroid)")
        ->expected(3);
    render_cmd->add_option("--seed", rd.seed, "pose seed used when --eye is omitted")
        ->capture_default_str();
    render_cmd->callback([&] {
        QuadMesh m = load_obj(rd.mesh);
        validate_mesh(m);
        Tensord colors = colors_for_render(m, rd.colors, rd.mesh);
        Camera cam;
        if (!rd.eye.empty()) {
            cam.eye = Vec3{rd.eye[0], rd.eye[1], rd.eye[2]};
            cam.target = rd.target.empty() ? mesh_centroid(m)
                                           : Vec3{rd.target[0], rd.target[1], rd.target[2]};
            cam.fov_y_deg = rd.fov;
            cam.height = cam.width = rd.res;
        } else {
            Rng rng(rd.seed);
            PoseConfig pose;
            pose.fov_y_deg = rd.fov;
            pose.height = pose.width = rd.res;
            cam = sample_pose(rng, m, pose);
        }
        RenderOutput out = rasterize(m, colors, cam);
        write_png(rd.out, out.image, out.height, out.width);
        int64_t fg = 0;
        for (int32_t f : out.face_id) fg += f >= 0 ? 1 : 0;
        std::cout << "wrote " << rd.out << " (" << fg << "/" << out.height * out.width
                  << " foreground pixels)\n";
    });

    // ---- gradcheck ----
    struct {
        std::string ops = "all";
        uint64_t seed = 1;
        double tolerance = 1e-4;
    } gc;
    auto* grad_cmd =
        app.add_subcommand("gradcheck", "Finite-difference gradient suite over all ops");
    grad_cmd->add_option("--ops", gc.ops, "'all' or comma-separated op names")
        ->capture_default_str();
    grad_cmd->add_option("--seed", gc.seed, "base seed; each op runs seeds s, s+1, s+2")
        ->capture_default_str();
    grad_cmd->add_option("--tolerance", gc.tolerance, "max allowed relative error")
        ->capture_default_str();
    grad_cmd->callback([&] {
        std::vector<GradSuiteEntry> entries = run_gradient_suite(gc.seed, gc.tolerance);
        std::vector<GradSuiteEntry> selected;
        if (gc.ops == "all") {
            selected = entries;
        } else {
            for (const std::string& want : split_csv(gc.ops)) {
                bool found = false;
                for (const GradSuiteEntry& e : entries)
                    if (e.name == want) {
                        selected.push_back(e);
                        found = true;
                    }
                require(found, ErrorKind::PreconditionViolation, "unknown op '" + want + "'");
            }
        }
        bool all_pass = true;
        std::printf("%-32s %14s   %s\n", "op", "max_rel_err", "status");
        for (const GradSuiteEntry& e : selected) {
            std::printf("%-32s %14.3e   %s\n", e.name.c_str(), e.max_rel_error,
                        e.pass ? "PASS" : "FAIL");
            all_pass = all_pass && e.pass;
        }
        if (!all_pass) exit_code = 1;
    });

    // ---- train ----
    struct {
        std::string config, out_dir;
    } tr;
    auto* train_cmd = app.add_subcommand("train", "Adversarial training from a key=value config");
    train_cmd->add_option("--config", tr.config, "flat key=value config file")->required();
    train_cmd->add_option("--out-dir", tr.out_dir, "overrides out_dir from the config");
    train_cmd->callback([&] {
        TrainFile f = parse_train_file(tr.config);
        if (!tr.out_dir.empty()) f.train.out_dir = tr.out_dir;
        std::vector<MeshHierarchy> meshes;
        for (const std::string& p : f.hierarchy_paths) meshes.push_back(load_hierarchy(p));
        if (f.cube_depth >= 0 || f.sphere_depth >= 0)
            meshes.push_back(
                hierarchy_from_source("", f.cube_depth, f.sphere_depth, f.gen.levels));
        require(!meshes.empty(), ErrorKind::PreconditionViolation,
                "config must provide 'hierarchies', 'cube', or 'sphere'");
        TrainResult result = train(meshes, f.gen, f.train);
        std::cout << "trained " << result.steps_run << " steps\ncheckpoint: "
                  << result.checkpoint_path << "\nmetrics: " << result.metrics_path << "\n";
    });

    // ---- generate ----
    struct {
        std::string checkpoint, hierarchy, out_dir = ".";
        int cube = -1, sphere = -1;
        uint64_t seed = 0;
        int64_t views = 4, res = 64;
    } gen;
    auto* gen_cmd = app.add_subcommand("generate", "Sample one texture from a checkpoint");
    gen_cmd->add_option("--checkpoint", gen.checkpoint, "RSCK checkpoint path")->required();
    gen_cmd->add_option("--hierarchy", gen.hierarchy, "RSHY hierarchy path");
    gen_cmd->add_option("--cube", gen.cube, "procedural cube ladder: finest depth");
    gen_cmd->add_option("--sphere", gen.sphere, "procedural sphere ladder: finest depth");
    gen_cmd->add_option("--seed", gen.seed, "latent seed")->capture_default_str();
    gen_cmd->add_option("--views", gen.views, "PNG views to render")->capture_default_str();
    gen_cmd->add_option("--res", gen.res, "render resolution")->capture_default_str();
    gen_cmd->add_option("--out-dir", gen.out_dir, "output directory")->capture_default_str();
    gen_cmd->callback([&] {
        GeneratorConfig cfg = config_from_checkpoint(load_checkpoint(gen.checkpoint));
        MeshHierarchy h = hierarchy_from_source(gen.hierarchy, gen.cube, gen.sphere, cfg.levels);
        GenerateOptions opts;
        opts.seed = gen.seed;
        opts.views = gen.views;
        opts.render_res = gen.res;
        opts.out_dir = gen.out_dir;
        generate(gen.checkpoint, h, opts);
        std::cout << "wrote mesh.obj, " << color_sidecar_path("mesh.obj") << ", and "
                  << gen.views << " views under " << gen.out_dir << "\n";
    });

    // ---- interpolate ----
    struct {
        std::string checkpoint, hierarchy, out_dir = ".";
        int cube = -1, sphere = -1;
        uint64_t seed_a = 0, seed_b = 1;
        int64_t steps = 8, res = 64;
    } itp;
    auto* itp_cmd =
        app.add_subcommand("interpolate", "Latent interpolation strip between two seeds");
    itp_cmd->add_option("--checkpoint", itp.checkpoint, "RSCK checkpoint path")->required();
    itp_cmd->add_option("--hierarchy", itp.hierarchy, "RSHY hierarchy path");
    itp_cmd->add_option("--cube", itp.cube, "procedural cube ladder: finest depth");
    itp_cmd->add_option("--sphere", itp.sphere, "procedural sphere ladder: finest depth");
    itp_cmd->add_option("--seed-a", itp.seed_a, "first latent seed")->capture_default_str();
    itp_cmd->add_option("--seed-b", itp.seed_b, "second latent seed")->capture_default_str();
    itp_cmd->add_option("--steps", itp.steps, "frame count (>= 2)")->capture_default_str();
    itp_cmd->add_option("--res", itp.res, "render resolution")->capture_default_str();
    itp_cmd->add_option("--out-dir", itp.out_dir, "output directory")->capture_default_str();
    itp_cmd->callback([&] {
        GeneratorConfig cfg = config_from_checkpoint(load_checkpoint(itp.checkpoint));
        MeshHierarchy h = hierarchy_from_source(itp.hierarchy, itp.cube, itp.sphere, cfg.levels);
        interpolate(itp.checkpoint, h, itp.seed_a, itp.seed_b, itp.steps, itp.res, itp.out_dir);
        std::cout << "wrote " << itp.steps << " frames under " << itp.out_dir << "\n";
    });

    if (argc <= 1) {
        std::cout << app.help();
        return 1;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    return exit_code;
}

}  // namespace rsg
