#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsg/checkpoint.hpp"
#include "rsg/error.hpp"
#include "rsg/features.hpp"
#include "rsg/gan.hpp"
#include "rsg/hierarchy.hpp"
#include "rsg/mesh.hpp"
#include "rsg/nn.hpp"
#include "rsg/render.hpp"
#include "rsg/rng.hpp"
#include "rsg/tape.hpp"

using namespace rsg;
namespace fs = std::filesystem;

namespace {

fs::path temp_root() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "rsg-gan-tests";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string fresh_dir(const std::string& name) {
    fs::path d = temp_root() / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d.string();
}

std::vector<char> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

MeshHierarchy two_level_cube() {
    return build_hierarchy({make_cube_hierarchy_level(2), make_cube_hierarchy_level(1)});
}

GeneratorConfig small_config() {
    GeneratorConfig cfg;
    cfg.levels = 2;
    cfg.channels = {6, 4};  // finest first
    cfg.latent_dim = 8;
    cfg.style_dim = 8;
    cfg.mapping_depth = 1;
    cfg.feature_kind = FeatureKind::kNormalsPlusCurvature;
    return cfg;
}

TrainConfig smoke_config(const std::string& out_dir, uint64_t seed, int64_t steps) {
    TrainConfig t;
    t.steps = steps;
    t.views = 2;
    t.render_res = 32;
    t.patch_size = 8;
    t.patches_per_view = 2;
    t.disc_base_channels = 4;
    t.disc_max_channels = 16;
    t.seed = seed;
    t.out_dir = out_dir;
    return t;
}

double softplus_ref(double x) { return std::log1p(std::exp(-std::fabs(x))) + std::max(x, 0.0); }

}  // namespace

// ---------------------------------------------------------------------------
// configs

TEST_CASE("config defaults pin the training recipe") {
    GeneratorConfig g;
    CHECK(g.levels == 3);
    CHECK(g.latent_dim == 64);
    CHECK(g.style_dim == 64);
    CHECK(g.mapping_depth == 2);
    CHECK(g.feature_kind == FeatureKind::kNormalsPlusCurvature);
    CHECK(g.input_channels() == 4);

    TrainConfig t;
    CHECK(t.steps == 200);
    CHECK(t.views == 4);
    CHECK(t.render_res == 64);
    CHECK(t.patch_size == 16);
    CHECK(t.patches_per_view == 4);
    CHECK(t.image_weight == 1.0);
    CHECK(t.patch_weight == 0.1);  // 10:1
    CHECK(t.r1_gamma == 10.0);
    CHECK(t.pl_weight == 2.0);
    CHECK(t.d_reg_interval == 16);
    CHECK(t.g_reg_interval == 4);
    CHECK(t.lr_encoder == 1e-4);
    CHECK(t.lr_decoder == 2e-3);
    CHECK(t.lr_disc == 1e-3);
    CHECK(t.ema_decay == 0.995);
    CHECK(t.pl_ema_decay == 0.99);
}

TEST_CASE("config validation rejects inconsistent setups") {
    MeshHierarchy h = two_level_cube();
    GeneratorConfig cfg = small_config();
    CHECK_NOTHROW(validate_generator_config(cfg, h));

    GeneratorConfig wrong_levels = cfg;
    wrong_levels.levels = 3;
    CHECK_THROWS_AS(validate_generator_config(wrong_levels, h), Error);

    GeneratorConfig wrong_channels = cfg;
    wrong_channels.channels = {6};
    CHECK_THROWS_AS(validate_generator_config(wrong_channels, h), Error);

    GeneratorConfig bad_passthrough = cfg;
    bad_passthrough.mapping_depth = 0;
    bad_passthrough.latent_dim = 4;
    CHECK_THROWS_AS(validate_generator_config(bad_passthrough, h), Error);

    TrainConfig t;
    CHECK_NOTHROW(validate_train_config(t));
    TrainConfig bad_steps = t;
    bad_steps.steps = 0;
    CHECK_THROWS_AS(validate_train_config(bad_steps), Error);
    TrainConfig bad_patch = t;
    bad_patch.patch_size = 10;  // not a power of two
    CHECK_THROWS_AS(validate_train_config(bad_patch), Error);
    TrainConfig big_patch = t;
    big_patch.patch_size = 128;  // larger than the render
    CHECK_THROWS_AS(validate_train_config(big_patch), Error);
}

// ---------------------------------------------------------------------------
// losses and penalties

TEST_CASE("adversarial losses match their closed forms") {
    Tapef tape;
    auto logit = [&](double v) { return tape.leaf(Tensorf::full(1, 1, static_cast<float>(v))); };

    int32_t g = loss_nonsat(tape, {logit(0.3), logit(-1.2)});
    double expect_g = 0.5 * (softplus_ref(-0.3) + softplus_ref(1.2));
    CHECK(std::fabs(tape.value(g).at(0, 0) - expect_g) <= 1e-7);

    int32_t d = loss_disc(tape, {logit(0.4), logit(2.0)}, {logit(-0.7), logit(0.1)});
    double expect_d = 0.5 * (softplus_ref(-0.4) + softplus_ref(-2.0)) +
                      0.5 * (softplus_ref(-0.7) + softplus_ref(0.1));
    CHECK(std::fabs(tape.value(d).at(0, 0) - expect_d) <= 1e-7);

    // a zero logit is worth ln 2 on both sides
    int32_t gz = loss_nonsat(tape, {logit(0.0)});
    CHECK(std::fabs(tape.value(gz).at(0, 0) - std::log(2.0)) <= 1e-7);
    int32_t dz = loss_disc(tape, {logit(0.0)}, {logit(0.0)});
    CHECK(std::fabs(tape.value(dz).at(0, 0) - 2.0 * std::log(2.0)) <= 1e-7);
}

TEST_CASE("r1 penalty of a linear discriminator is half gamma w squared") {
    Rng rng(4);
    Tensord wv = Tensord::randn(5, 3, rng);
    Taped tape;
    int32_t x = tape.leaf(Tensord::randn(5, 3, rng));
    int32_t logit = tape.dot_all(x, tape.constant(wv));
    int32_t pen = r1_penalty(tape, logit, x, 10.0);
    double expect = 0.0;
    for (double w : wv.data) expect += w * w;
    expect *= 10.0 / 2.0;
    CHECK(std::fabs(tape.value(pen).at(0, 0) - expect) <= 1e-6);
}

TEST_CASE("r1 penalty differentiates through to the weights") {
    // d/dw of (gamma/2)||w||^2 (from D(x) = w . x) is gamma * w
    Rng rng(6);
    Tensord wv = Tensord::randn(4, 2, rng);
    Taped tape;
    int32_t w = tape.leaf(wv);
    int32_t x = tape.leaf(Tensord::randn(4, 2, rng));
    int32_t logit = tape.dot_all(x, w);
    int32_t pen = r1_penalty(tape, logit, x, 3.0);
    auto grads = tape.backward(pen);
    REQUIRE(grads[w] >= 0);
    const Tensord& gw = tape.value(grads[w]);
    for (size_t i = 0; i < wv.data.size(); ++i)
        CHECK(gw.data[i] == doctest::Approx(3.0 * wv.data[i]).epsilon(1e-9));
    // and the input of the squared gradient receives none (it cancelled out)
    if (grads[x] >= 0)
        for (double e : tape.value(grads[x]).data) CHECK(std::fabs(e) <= 1e-12);
}

TEST_CASE("path length penalty against a brute force jacobian") {
    Rng rng(11);
    Tensord wv = Tensord::randn(4, 18, rng);
    Tensord yv = Tensord::randn(6, 3, rng);
    Tensord sv = Tensord::randn(1, 4, rng);
    const double a = 0.7;

    auto image_of = [&](const Tensord& style) {
        Taped t;
        int32_t img = t.sigmoid(t.reshape(t.matmul(t.leaf(style), t.constant(wv)), 6, 3));
        return t.value(img);
    };

    Taped tape;
    int32_t style = tape.leaf(sv);
    int32_t image = tape.sigmoid(tape.reshape(tape.matmul(style, tape.constant(wv)), 6, 3));
    auto res = path_length_penalty(tape, image, style, yv, a);
    REQUIRE(res.penalty >= 0);

    // numeric J = d <image, y> / d style
    const double h = 1e-6;
    double j_norm2 = 0.0;
    for (int64_t k = 0; k < 4; ++k) {
        Tensord plus = sv, minus = sv;
        plus.at(0, k) += h;
        minus.at(0, k) -= h;
        double sp = 0.0, sm = 0.0;
        Tensord ip = image_of(plus), im = image_of(minus);
        for (size_t i = 0; i < yv.data.size(); ++i) {
            sp += ip.data[i] * yv.data[i];
            sm += im.data[i] * yv.data[i];
        }
        double jk = (sp - sm) / (2 * h);
        j_norm2 += jk * jk;
    }
    double expect_norm = std::sqrt(j_norm2);
    CHECK(std::fabs(res.norm_value - expect_norm) <= 1e-5 * (1.0 + expect_norm));
    double expect_pen = (expect_norm - a) * (expect_norm - a);
    CHECK(std::fabs(tape.value(res.penalty).at(0, 0) - expect_pen) <= 1e-5 * (1.0 + expect_pen));
}

TEST_CASE("path length penalty with a style-independent image") {
    Rng rng(1);
    Taped tape;
    int32_t style = tape.leaf(Tensord::randn(1, 4, rng));
    int32_t image = tape.constant(Tensord::full(6, 3, 0.5));
    Tensord y = Tensord::randn(6, 3, rng);
    auto res = path_length_penalty(tape, image, style, y, 0.9);
    CHECK(res.norm_value == 0.0);
    CHECK(tape.value(res.penalty).at(0, 0) == doctest::Approx(0.81).epsilon(1e-12));
}

// ---------------------------------------------------------------------------
// patch assembly

TEST_CASE("patch stacks are view-major patch-minor channel concats") {
    Rng rng(17);
    const int64_t H = 8, W = 8, ps = 4;
    Tensorf img0 = Tensorf::randn(H * W, 3, rng);
    Tensorf img1 = Tensorf::randn(H * W, 3, rng);

    Tapef tape;
    std::vector<int32_t> views = {tape.leaf(img0), tape.leaf(img1)};
    std::vector<std::vector<PatchCrop>> crops = {{{0, 0}, {2, 3}}, {{4, 4}, {1, 2}}};
    int32_t stack = assemble_patch_batch(tape, views, crops, H, W, ps);
    const Tensorf& v = tape.value(stack);
    REQUIRE(v.rows() == ps * ps);
    REQUIRE(v.cols() == 3 * 4);

    const Tensorf* imgs[2] = {&img0, &img1};
    int block = 0;
    for (int view = 0; view < 2; ++view)
        for (const PatchCrop& crop : crops[view]) {
            for (int64_t y = 0; y < ps; ++y)
                for (int64_t x = 0; x < ps; ++x)
                    for (int64_t c = 0; c < 3; ++c)
                        CHECK(v.at(y * ps + x, block * 3 + c) ==
                              imgs[view]->at((crop.y0 + y) * W + crop.x0 + x, c));
            ++block;
        }

    // the real path stacks one image with all K*P crops into the same shape
    std::vector<std::vector<PatchCrop>> real_crops = {{{0, 0}, {2, 3}, {4, 4}, {1, 2}}};
    int32_t real_stack = assemble_patch_batch(tape, {views[0]}, real_crops, H, W, ps);
    CHECK(tape.value(real_stack).rows() == v.rows());
    CHECK(tape.value(real_stack).cols() == v.cols());
}

// ---------------------------------------------------------------------------
// generator pieces

TEST_CASE("depth zero mapping is a normalized passthrough") {
    GeneratorConfig cfg = small_config();
    cfg.mapping_depth = 0;
    Rng rng(23);
    Tensorf zv = Tensorf::randn(1, cfg.latent_dim, rng);

    Tapef tape;
    int32_t w = map_latent(tape, tape.leaf(zv), ParamIds{}, cfg);
    double norm = 0.0;
    for (double e : zv.data) norm += e * e;
    norm = std::sqrt(norm);
    double scale = std::sqrt(static_cast<double>(cfg.latent_dim)) / norm;
    for (int64_t c = 0; c < cfg.latent_dim; ++c)
        CHECK(tape.value(w).at(0, c) == doctest::Approx(zv.at(0, c) * scale).epsilon(1e-6));
}

TEST_CASE("every generator parameter receives a gradient") {
    MeshHierarchy h = two_level_cube();
    GeneratorConfig cfg = small_config();
    ParamStore<float> params;
    Rng rng(31);
    init_generator_params(params, cfg, h, rng);

    Tapef tape;
    ParamIds ids = register_leaves(tape, params);
    FeatureField feat = assemble_input(h.mesh(1), h.table(1), make_feature_spec(cfg.feature_kind));
    int32_t input = tape.constant(feat.values.cast<float>());
    int32_t z = tape.leaf(Tensorf::randn(1, cfg.latent_dim, rng));
    int32_t style = map_latent(tape, z, ids, cfg);
    auto skips = encode(tape, input, h, ids, cfg);
    auto noise = make_decoder_noise<float>(h, cfg, rng);
    int32_t colors = decode(tape, h, skips, style, noise, ids, cfg);

    REQUIRE(tape.value(colors).rows() == h.face_count(1));
    REQUIRE(tape.value(colors).cols() == 3);
    for (double e : tape.value(colors).data) {
        CHECK(e >= 0.0);
        CHECK(e <= 1.0);
    }

    auto grads = tape.backward(tape.mean_all(tape.square(colors)));
    for (const auto& [name, id] : ids) {
        INFO("parameter ", name);
        REQUIRE(grads[id] >= 0);
        CHECK(tape.value(grads[id]).all_finite());
    }
    CHECK(grads[z] >= 0);
}

TEST_CASE("zero-channel features disable the encoder") {
    MeshHierarchy h = two_level_cube();
    GeneratorConfig cfg = small_config();
    cfg.feature_kind = FeatureKind::kNone;
    ParamStore<float> params;
    Rng rng(37);
    init_generator_params(params, cfg, h, rng);
    for (const auto& [name, t] : params.tensors) CHECK(name.rfind("enc.", 0) != 0);

    Tensorf colors = generate_colors(params, cfg, h, 5);
    CHECK(colors.rows() == h.face_count(1));
    CHECK(colors.cols() == 3);
    CHECK(colors.all_finite());
}

TEST_CASE("generated colors are a pure function of the seed") {
    MeshHierarchy h = two_level_cube();
    GeneratorConfig cfg = small_config();
    ParamStore<float> params;
    Rng rng(41);
    init_generator_params(params, cfg, h, rng);

    Tensorf a = generate_colors(params, cfg, h, 7);
    Tensorf b = generate_colors(params, cfg, h, 7);
    REQUIRE(a.same_shape(b));
    for (size_t i = 0; i < a.data.size(); ++i) CHECK(a.data[i] == b.data[i]);

    Tensorf c = generate_colors(params, cfg, h, 8);
    bool any_diff = false;
    for (size_t i = 0; i < a.data.size(); ++i) any_diff = any_diff || a.data[i] != c.data[i];
    CHECK(any_diff);
}

TEST_CASE("discriminator head yields one logit") {
    for (int64_t res : {int64_t(4), int64_t(16)}) {
        ParamStore<float> store;
        Rng rng(43);
        init_disc_params(store, "d", 3, res, 4, 16, rng);
        Tapef tape;
        ParamIds ids = register_leaves(tape, store);
        int32_t img = tape.leaf(Tensorf::randn(res * res, 3, rng));
        int32_t logit = discriminate(tape, img, res, "d", ids);
        CHECK(tape.value(logit).rows() == 1);
        CHECK(tape.value(logit).cols() == 1);
        CHECK(std::isfinite(tape.value(logit).at(0, 0)));
    }
    ParamStore<float> bad;
    Rng rng(44);
    CHECK_THROWS_AS(init_disc_params(bad, "d", 3, 6, 4, 16, rng), Error);
}

// ---------------------------------------------------------------------------
// synthetic data

TEST_CASE("synthetic colorings are deterministic and bounded") {
    QuadMesh mesh = make_cube_hierarchy_level(2);
    Rng a(12), b(12);
    Tensord ca = synthetic_coloring(mesh, a);
    Tensord cb = synthetic_coloring(mesh, b);
    REQUIRE(ca.rows() == mesh.face_count());
    REQUIRE(ca.cols() == 3);
    for (size_t i = 0; i < ca.data.size(); ++i) CHECK(ca.data[i] == cb.data[i]);

    bool saw_solid = false, saw_striped = false;
    for (uint64_t seed = 0; seed < 32; ++seed) {
        Rng rng(seed);
        Tensord c = synthetic_coloring(mesh, rng);
        for (double e : c.data) {
            CHECK(e >= 0.05);
            CHECK(e <= 0.95);
        }
        std::set<std::array<double, 3>> rows;
        for (int64_t f = 0; f < c.rows(); ++f)
            rows.insert({c.at(f, 0), c.at(f, 1), c.at(f, 2)});
        if (rows.size() == 1) saw_solid = true;
        if (rows.size() >= 2) saw_striped = true;
    }
    CHECK(saw_solid);
    CHECK(saw_striped);
}

// ---------------------------------------------------------------------------
// training smoke

TEST_CASE("a short training run is finite, logged, and reproducible") {
    MeshHierarchy h = two_level_cube();
    GeneratorConfig cfg = small_config();

    std::string dir_a = fresh_dir("train-a");
    TrainResult ra = train({h}, cfg, smoke_config(dir_a, 99, 4));
    CHECK(ra.steps_run == 4);
    REQUIRE(fs::exists(ra.checkpoint_path));
    REQUIRE(fs::exists(ra.metrics_path));

    // metrics: one JSON line per step (1-based), finite losses, and the lazy
    // regularizer cadence: pl at multiples of g_reg_interval (4), r1 never
    // within 4 steps of a 16-step interval
    std::ifstream metrics(ra.metrics_path);
    std::string line;
    int64_t step = 0;
    while (std::getline(metrics, line)) {
        ++step;
        auto j = nlohmann::json::parse(line);
        CHECK(j.at("step").get<int64_t>() == step);
        for (const char* key : {"d_loss", "g_loss", "d_img_acc", "d_grad_norm", "g_grad_norm"}) {
            REQUIRE(j.contains(key));
            CHECK(std::isfinite(j.at(key).get<double>()));
        }
        CHECK(!j.contains("r1"));
        CHECK(j.contains("pl") == (step % 4 == 0));
        CHECK(j.contains("pl_ema") == (step % 4 == 0));
    }
    CHECK(step == 4);

    // identical seed, identical log
    std::string dir_b = fresh_dir("train-b");
    TrainResult rb = train({h}, cfg, smoke_config(dir_b, 99, 4));
    CHECK(read_bytes(ra.metrics_path) == read_bytes(rb.metrics_path));
    CHECK(read_bytes(ra.checkpoint_path) == read_bytes(rb.checkpoint_path));

    // different seed, different trajectory
    std::string dir_c = fresh_dir("train-c");
    TrainResult rc = train({h}, cfg, smoke_config(dir_c, 100, 4));
    CHECK(read_bytes(ra.metrics_path) != read_bytes(rc.metrics_path));

    // checkpoint inventory: raw + ema parameters, optimizer state, config
    auto entries = load_checkpoint(ra.checkpoint_path);
    CHECK(entries.count("dec.const") == 1);
    CHECK(entries.count("ema.dec.const") == 1);
    CHECK(entries.count("config.levels") == 1);
    CHECK(entries.count("train.step") == 1);
    CHECK(entries.at("train.step").at(0, 0) == 4.0f);
    CHECK(entries.count("train.pl_a") == 1);
    bool has_disc_state = false;
    for (const auto& [name, t] : entries)
        has_disc_state = has_disc_state || name.rfind("opt.disc.", 0) == 0;
    CHECK(has_disc_state);

    GeneratorConfig round = config_from_checkpoint(entries);
    CHECK(round.levels == cfg.levels);
    CHECK(round.channels == cfg.channels);
    CHECK(round.latent_dim == cfg.latent_dim);
    CHECK(round.style_dim == cfg.style_dim);
    CHECK(round.mapping_depth == cfg.mapping_depth);
    CHECK(round.feature_kind == cfg.feature_kind);
}

TEST_CASE("every metrics line carries regularizer values at interval one") {
    MeshHierarchy h = two_level_cube();
    GeneratorConfig cfg = small_config();
    TrainConfig t = smoke_config(fresh_dir("train-reg"), 5, 2);
    t.d_reg_interval = 1;
    t.g_reg_interval = 1;
    TrainResult r = train({h}, cfg, t);
    std::ifstream metrics(r.metrics_path);
    std::string line;
    int64_t lines = 0;
    while (std::getline(metrics, line)) {
        auto j = nlohmann::json::parse(line);
        CHECK(j.contains("r1"));
        CHECK(j.contains("pl"));
        CHECK(std::isfinite(j.at("r1").get<double>()));
        ++lines;
    }
    CHECK(lines == 2);
}

TEST_CASE("generation from a checkpoint is byte reproducible") {
    MeshHierarchy h = two_level_cube();
    GeneratorConfig cfg = small_config();
    TrainResult r = train({h}, cfg, smoke_config(fresh_dir("train-gen"), 7, 2));

    GenerateOptions opts;
    opts.seed = 3;
    opts.views = 2;
    opts.render_res = 32;
    opts.out_dir = fresh_dir("gen-a");
    generate(r.checkpoint_path, h, opts);
    GenerateOptions opts2 = opts;
    opts2.out_dir = fresh_dir("gen-b");
    generate(r.checkpoint_path, h, opts2);

    for (const char* name : {"mesh.obj", "mesh.rsfc", "view_000.png", "view_001.png"}) {
        fs::path pa = fs::path(opts.out_dir) / name;
        fs::path pb = fs::path(opts2.out_dir) / name;
        REQUIRE(fs::exists(pa));
        REQUIRE(fs::exists(pb));
        CHECK(read_bytes(pa.string()) == read_bytes(pb.string()));
    }

    // the sidecar holds the EMA generator's colors for this seed
    auto entries = load_checkpoint(r.checkpoint_path);
    ParamStore<float> ema;
    for (const auto& [name, t] : entries)
        if (name.rfind("ema.", 0) == 0) ema.add(name.substr(4), t);
    Tensorf expect = generate_colors(ema, cfg, h, opts.seed);
    auto sidecar = load_face_colors((fs::path(opts.out_dir) / "mesh.rsfc").string());
    REQUIRE(static_cast<int64_t>(sidecar.size()) == expect.rows());
    for (int64_t f = 0; f < expect.rows(); ++f)
        for (int64_t c = 0; c < 3; ++c) CHECK(sidecar[f][c] == expect.at(f, c));
}

TEST_CASE("interpolation endpoints collapse when the seeds agree") {
    MeshHierarchy h = two_level_cube();
    GeneratorConfig cfg = small_config();
    TrainResult r = train({h}, cfg, smoke_config(fresh_dir("train-interp"), 19, 2));

    // same seed at both ends: every frame must be the same picture
    std::string same_dir = fresh_dir("interp-same");
    interpolate(r.checkpoint_path, h, 5, 5, 3, 32, same_dir);
    auto f0 = read_bytes((fs::path(same_dir) / "interp_000.png").string());
    auto f1 = read_bytes((fs::path(same_dir) / "interp_001.png").string());
    auto f2 = read_bytes((fs::path(same_dir) / "interp_002.png").string());
    REQUIRE(!f0.empty());
    CHECK(f0 == f1);
    CHECK(f0 == f2);

    // distinct seeds: deterministic, with moving frames
    std::string ab1 = fresh_dir("interp-ab1");
    std::string ab2 = fresh_dir("interp-ab2");
    interpolate(r.checkpoint_path, h, 5, 9, 3, 32, ab1);
    interpolate(r.checkpoint_path, h, 5, 9, 3, 32, ab2);
    for (int i = 0; i < 3; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "interp_%03d.png", i);
        auto a = read_bytes((fs::path(ab1) / name).string());
        auto b = read_bytes((fs::path(ab2) / name).string());
        REQUIRE(!a.empty());
        CHECK(a == b);
    }
    auto g0 = read_bytes((fs::path(ab1) / "interp_000.png").string());
    auto g2 = read_bytes((fs::path(ab1) / "interp_002.png").string());
    CHECK(g0 != g2);

    CHECK_THROWS_AS(interpolate(r.checkpoint_path, h, 1, 2, 1, 32, ab1), Error);
}

TEST_CASE("checkpoint files round trip") {
    std::map<std::string, Tensorf> entries;
    Rng rng(3);
    entries["weights.a"] = Tensorf::randn(4, 3, rng);
    entries["weights.b"] = Tensorf::randn(1, 7, rng);
    entries["train.step"] = scalar_entry(42.0);
    std::string path = (temp_root() / "roundtrip.rsck").string();
    save_checkpoint(path, entries);
    auto loaded = load_checkpoint(path);
    REQUIRE(loaded.size() == entries.size());
    for (const auto& [name, t] : entries) {
        REQUIRE(loaded.count(name) == 1);
        const Tensorf& lt = loaded.at(name);
        REQUIRE(lt.same_shape(t));
        for (size_t i = 0; i < t.data.size(); ++i) CHECK(lt.data[i] == t.data[i]);
    }
}
