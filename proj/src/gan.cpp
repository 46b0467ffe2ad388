#include "rsg/gan.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "rsg/checkpoint.hpp"

namespace rsg {

namespace {

// Decoder noise for inference comes from this fixed stream, so a latent seed
// identifies a surface and interpolation endpoints match the base generations.
constexpr uint64_t kInferenceNoiseSeed = 0xD0;

bool is_generator_param(const std::string& name) {
    return name.starts_with("mapping.") || name.starts_with("enc.") || name.starts_with("dec.");
}

Tensorf latent_from_seed(uint64_t seed, int64_t dim) {
    Rng rng(seed);
    return Tensorf::randn(1, dim, rng);
}

Tensorf slerp(const Tensorf& a, const Tensorf& b, double t) {
    require(a.same_shape(b), ErrorKind::ShapeMismatch, "slerp: latent shapes differ");
    double dot = 0.0, na2 = 0.0, nb2 = 0.0;
    for (int64_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a.data[i]) * b.data[i];
        na2 += static_cast<double>(a.data[i]) * a.data[i];
        nb2 += static_cast<double>(b.data[i]) * b.data[i];
    }
    double wa = 1.0 - t, wb = t;  // lerp fallback for (near-)degenerate angles
    double denom = std::sqrt(na2 * nb2);
    if (denom > 1e-30) {
        double omega = std::acos(std::clamp(dot / denom, -1.0, 1.0));
        double s = std::sin(omega);
        if (s > 1e-9) {
            wa = std::sin((1.0 - t) * omega) / s;
            wb = std::sin(t * omega) / s;
        }
    }
    Tensorf out(a.rows(), a.cols());
    for (int64_t i = 0; i < a.size(); ++i)
        out.data[i] = static_cast<float>(wa * a.data[i] + wb * b.data[i]);
    return out;
}

double axis_component(const Vec3& v, int axis) { return axis == 0 ? v.x : axis == 1 ? v.y : v.z; }

std::string zero_pad(int64_t value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%0*lld", width, static_cast<long long>(value));
    return buf;
}

Tensorf input_features_for(const MeshHierarchy& h, const GeneratorConfig& cfg) {
    if (cfg.input_channels() == 0) return Tensorf(h.face_count(1), 0);
    FeatureField f = assemble_input(h.mesh(1), h.table(1), make_feature_spec(cfg.feature_kind));
    return f.values.cast<float>();
}

// Leaves get gradients; everything else is frozen onto the tape as constants
// so backward never builds update paths for the passive side.
template <typename Pred>
ParamIds register_mixed(Tapef& tape, const ParamStore<float>& store, Pred&& is_leaf) {
    ParamIds ids;
    for (const auto& [name, t] : store.tensors)
        ids[name] = is_leaf(name) ? tape.leaf(t) : tape.constant(t);
    return ids;
}

std::map<std::string, Tensorf> extract_grads(Tapef& tape, const ParamIds& p,
                                             const std::vector<int32_t>& grads) {
    std::map<std::string, Tensorf> out;
    for (const auto& [name, id] : p) {
        if (id < 0 || id >= static_cast<int32_t>(grads.size())) continue;
        if (grads[id] >= 0) out.emplace(name, tape.value(grads[id]));
    }
    return out;
}

double grad_norm(const std::map<std::string, Tensorf>& grads) {
    double s = 0.0;
    for (const auto& [name, g] : grads)
        for (float v : g.data) s += static_cast<double>(v) * v;
    return std::sqrt(s);
}

RasterPlan plan_from_output(const RenderOutput& out) {
    RasterPlan plan;
    plan.height = out.height;
    plan.width = out.width;
    plan.face_ids = std::make_shared<const std::vector<int32_t>>(out.face_id);
    plan.coverage = out.coverage;
    plan.empty = out.empty;
    return plan;
}

Tensorf colors_from_latent(const ParamStore<float>& params, const GeneratorConfig& cfg,
                           const MeshHierarchy& h, const Tensorf& z) {
    Tapef tape;
    ParamIds p = register_constants(tape, params);
    int32_t style = map_latent(tape, tape.constant(z), p, cfg);
    int32_t feats = tape.constant(input_features_for(h, cfg));
    std::vector<int32_t> skips = encode(tape, feats, h, p, cfg);
    Rng noise_rng(kInferenceNoiseSeed);
    std::vector<Tensorf> noise = make_decoder_noise<float>(h, cfg, noise_rng);
    return tape.value(decode(tape, h, skips, style, noise, p, cfg));
}

// Pulls the generator out of raw checkpoint entries, preferring EMA shadows.
ParamStore<float> generator_from_checkpoint(const std::map<std::string, Tensorf>& entries,
                                            const GeneratorConfig& cfg, const MeshHierarchy& h) {
    ParamStore<float> params;
    for (const auto& [name, t] : entries) {
        if (!is_generator_param(name)) continue;
        auto ema = entries.find("ema." + name);
        params.add(name, ema != entries.end() ? ema->second : t);
    }
    require(params.has("dec.const"), ErrorKind::ConfigMismatch,
            "checkpoint has no decoder constant");
    require(params.at("dec.const").rows() == h.face_count(cfg.levels),
            ErrorKind::ConfigMismatch,
            "checkpoint coarsest-level face count does not match the hierarchy");
    return params;
}

void render_views(const QuadMesh& mesh, const Tensord& colors, Rng& rng, int64_t views,
                  int64_t render_res, const std::string& out_dir, const std::string& stem) {
    PoseConfig pose;
    pose.height = pose.width = render_res;
    for (int64_t v = 0; v < views; ++v) {
        Camera cam = sample_pose(rng, mesh, pose);
        RenderOutput out = rasterize(mesh, colors, cam);
        write_png(out_dir + "/" + stem + "_" + zero_pad(v, 3) + ".png", out.image, out.height,
                  out.width);
    }
}

}  // namespace

void validate_generator_config(const GeneratorConfig& cfg, const MeshHierarchy& h) {
    require(cfg.levels >= 2, ErrorKind::PreconditionViolation,
            "generator needs at least 2 levels");
    require(static_cast<int>(cfg.channels.size()) == cfg.levels, ErrorKind::ConfigMismatch,
            "channels must list one width per level");
    for (int64_t c : cfg.channels)
        require(c >= 1, ErrorKind::PreconditionViolation, "channel widths must be positive");
    require(cfg.latent_dim >= 1 && cfg.style_dim >= 1, ErrorKind::PreconditionViolation,
            "latent_dim and style_dim must be positive");
    require(cfg.mapping_depth >= 0, ErrorKind::PreconditionViolation,
            "mapping_depth must be non-negative");
    if (cfg.mapping_depth == 0)
        require(cfg.latent_dim == cfg.style_dim, ErrorKind::ConfigMismatch,
                "mapping depth 0 requires latent_dim == style_dim");
    require(cfg.levels == h.level_count(), ErrorKind::ConfigMismatch,
            "config levels != hierarchy levels");
}

void validate_train_config(const TrainConfig& cfg) {
    auto pow2 = [](int64_t v) { return v >= 1 && (v & (v - 1)) == 0; };
    require(cfg.steps >= 1, ErrorKind::PreconditionViolation, "steps must be >= 1");
    require(cfg.views >= 1, ErrorKind::PreconditionViolation, "views must be >= 1");
    require(cfg.render_res >= 4 && pow2(cfg.render_res), ErrorKind::PreconditionViolation,
            "render_res must be a power of two >= 4");
    require(cfg.patch_size >= 4 && pow2(cfg.patch_size) && cfg.patch_size <= cfg.render_res,
            ErrorKind::PreconditionViolation,
            "patch_size must be a power of two >= 4 and <= render_res");
    require(cfg.patches_per_view >= 1, ErrorKind::PreconditionViolation,
            "patches_per_view must be >= 1");
    require(cfg.image_weight >= 0.0 && cfg.patch_weight >= 0.0, ErrorKind::PreconditionViolation,
            "loss weights must be non-negative");
    require(cfg.r1_gamma >= 0.0 && cfg.pl_weight >= 0.0, ErrorKind::PreconditionViolation,
            "regularizer weights must be non-negative");
    require(cfg.d_reg_interval >= 1 && cfg.g_reg_interval >= 1, ErrorKind::PreconditionViolation,
            "regularization intervals must be >= 1");
    require(cfg.lr_encoder > 0.0 && cfg.lr_decoder > 0.0 && cfg.lr_disc > 0.0,
            ErrorKind::PreconditionViolation, "learning rates must be positive");
    require(cfg.ema_decay >= 0.0 && cfg.ema_decay < 1.0 && cfg.pl_ema_decay >= 0.0 &&
                cfg.pl_ema_decay < 1.0,
            ErrorKind::PreconditionViolation, "EMA decays must lie in [0, 1)");
    require(cfg.disc_base_channels >= 1 && cfg.disc_max_channels >= cfg.disc_base_channels,
            ErrorKind::PreconditionViolation, "bad discriminator channel bounds");
}

Tensord synthetic_coloring(const QuadMesh& mesh, Rng& rng) {
    int64_t f = mesh.face_count();
    Tensord colors(f, 3);
    if (rng.uniform_int(2) == 0) {  // solid
        double c[3] = {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)};
        for (int64_t i = 0; i < f; ++i)
            for (int64_t k = 0; k < 3; ++k) colors.at(i, k) = c[k];
        return colors;
    }
    // two-color stripes in centroid bands along one axis
    double c0[3] = {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)};
    double c1[3] = {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)};
    int axis = static_cast<int>(rng.uniform_int(3));
    int64_t bands = 2 + rng.uniform_int(3);
    std::vector<FaceGeometry> geom = face_geometry(mesh);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const FaceGeometry& g : geom) {
        double v = axis_component(g.centroid, axis);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double span = std::max(hi - lo, 1e-12);
    for (int64_t i = 0; i < f; ++i) {
        double u = (axis_component(geom[i].centroid, axis) - lo) / span;
        int64_t band = std::min<int64_t>(bands - 1, static_cast<int64_t>(u * bands));
        const double* c = band % 2 == 0 ? c0 : c1;
        for (int64_t k = 0; k < 3; ++k) colors.at(i, k) = c[k];
    }
    return colors;
}

TrainResult train(const std::vector<MeshHierarchy>& meshes, const GeneratorConfig& gcfg,
                  const TrainConfig& tcfg) {
    require(!meshes.empty(), ErrorKind::PreconditionViolation, "train: no meshes");
    validate_train_config(tcfg);
    for (const MeshHierarchy& h : meshes) validate_generator_config(gcfg, h);
    for (const MeshHierarchy& h : meshes)
        require(h.face_count(gcfg.levels) == meshes[0].face_count(gcfg.levels),
                ErrorKind::ConfigMismatch,
                "all hierarchies must share the coarsest face count");

    std::filesystem::create_directories(tcfg.out_dir);
    const std::string metrics_path = tcfg.out_dir + "/metrics.jsonl";
    const std::string checkpoint_path = tcfg.out_dir + "/checkpoint.rsck";
    std::ofstream metrics(metrics_path, std::ios::trunc);
    require(metrics.good(), ErrorKind::IoError, "cannot write " + metrics_path);

    Rng rng(tcfg.seed);
    Rng init_rng = rng.fork(1);

    ParamStore<float> params;
    init_generator_params(params, gcfg, meshes[0], init_rng);
    init_disc_params<float>(params, "disc_img", 3, tcfg.render_res, tcfg.disc_base_channels,
                            tcfg.disc_max_channels, init_rng);
    const int64_t patch_stack_channels = 3 * tcfg.views * tcfg.patches_per_view;
    init_disc_params<float>(params, "disc_patch", patch_stack_channels, tcfg.patch_size,
                            tcfg.disc_base_channels, tcfg.disc_max_channels, init_rng);

    ParamStore<float> ema;
    for (const auto& [name, t] : params.tensors)
        if (is_generator_param(name)) ema.add(name, t);

    Optimizer<float> opt_enc(tcfg.lr_encoder);
    Optimizer<float> opt_dec(tcfg.lr_decoder);
    Optimizer<float> opt_disc(tcfg.lr_disc);
    for (const auto& [name, t] : params.tensors) {
        if (name.starts_with("enc."))
            opt_enc.names.push_back(name);
        else if (name.starts_with("mapping.") || name.starts_with("dec."))
            opt_dec.names.push_back(name);
        else
            opt_disc.names.push_back(name);
    }

    std::vector<Tensorf> features;
    features.reserve(meshes.size());
    for (const MeshHierarchy& h : meshes) features.push_back(input_features_for(h, gcfg));

    PoseConfig pose;
    pose.height = pose.width = tcfg.render_res;
    const auto is_disc = [](const std::string& n) { return n.starts_with("disc_"); };

    double pl_a = 0.0;
    for (int64_t step = 1; step <= tcfg.steps; ++step) {
        int64_t mi = rng.uniform_int(static_cast<int64_t>(meshes.size()));
        const MeshHierarchy& h = meshes[mi];
        const QuadMesh& fine = h.mesh(1);

        // ---- discriminator step ----
        double d_loss_val = 0.0, d_img_acc = 0.0, d_gnorm = 0.0, r1_val = 0.0;
        bool did_r1 = false;
        {
            Tapef tape;
            ParamIds p = register_mixed(tape, params, is_disc);

            int32_t z = tape.constant(Tensorf::randn(1, gcfg.latent_dim, rng));
            int32_t style = map_latent(tape, z, p, gcfg);
            std::vector<int32_t> skips = encode(tape, tape.constant(features[mi]), h, p, gcfg);
            std::vector<Tensorf> noise = make_decoder_noise<float>(h, gcfg, rng);
            int32_t colors = decode(tape, h, skips, style, noise, p, gcfg);
            // stop-gradient: the D update must not walk the generator graph
            int32_t colors_d = tape.constant(tape.value(colors));

            std::vector<RasterPlan> plans;
            std::vector<int32_t> fake_imgs, fake_logits;
            for (int64_t k = 0; k < tcfg.views; ++k) {
                plans.push_back(build_raster_plan(fine, sample_pose(rng, fine, pose)));
                fake_imgs.push_back(rasterize_on_tape(tape, colors_d, plans.back()));
                fake_logits.push_back(
                    discriminate(tape, fake_imgs.back(), tcfg.render_res, "disc_img", p));
            }

            Tensord real_colors = synthetic_coloring(fine, rng);
            RenderOutput real_out = rasterize(fine, real_colors, sample_pose(rng, fine, pose));
            RasterPlan real_plan = plan_from_output(real_out);
            int32_t real_img = tape.leaf(real_out.image.cast<float>());
            int32_t real_logit = discriminate(tape, real_img, tcfg.render_res, "disc_img", p);

            std::vector<std::vector<PatchCrop>> fake_crops;
            for (int64_t k = 0; k < tcfg.views; ++k)
                fake_crops.push_back(
                    sample_patch_origins(plans[k], rng, tcfg.patch_size, tcfg.patches_per_view));
            std::vector<PatchCrop> real_crops = sample_patch_origins(
                real_plan, rng, tcfg.patch_size, tcfg.views * tcfg.patches_per_view);

            int32_t fake_stack = assemble_patch_batch(tape, fake_imgs, fake_crops,
                                                      tcfg.render_res, tcfg.render_res,
                                                      tcfg.patch_size);
            int32_t real_stack = assemble_patch_batch(tape, {real_img}, {real_crops},
                                                      tcfg.render_res, tcfg.render_res,
                                                      tcfg.patch_size);
            int32_t fake_patch_logit =
                discriminate(tape, fake_stack, tcfg.patch_size, "disc_patch", p);
            int32_t real_patch_logit =
                discriminate(tape, real_stack, tcfg.patch_size, "disc_patch", p);

            int32_t d_total = tape.add(loss_disc(tape, {real_logit}, fake_logits),
                                       loss_disc(tape, {real_patch_logit}, {fake_patch_logit}));
            if (tcfg.r1_gamma > 0.0 && step % tcfg.d_reg_interval == 0) {
                int32_t r1 = tape.add(r1_penalty(tape, real_logit, real_img, tcfg.r1_gamma),
                                      r1_penalty(tape, real_patch_logit, real_stack,
                                                 tcfg.r1_gamma));
                r1_val = tape.value(r1).at(0, 0);
                did_r1 = true;
                // lazy regularization: scale by the interval it stands in for
                d_total = tape.add(d_total,
                                   tape.scale(r1, static_cast<double>(tcfg.d_reg_interval)));
            }

            d_loss_val = tape.value(d_total).at(0, 0);
            require(std::isfinite(d_loss_val), ErrorKind::DivergenceAbort,
                    "discriminator loss is not finite at step " + std::to_string(step));

            auto grads = extract_grads(tape, p, tape.backward(d_total));
            d_gnorm = grad_norm(grads);
            opt_disc.step(params, grads);

            double fake_correct = 0.0;
            for (int32_t l : fake_logits)
                if (tape.value(l).at(0, 0) < 0.0f) fake_correct += 1.0;
            fake_correct /= static_cast<double>(fake_logits.size());
            d_img_acc = ((tape.value(real_logit).at(0, 0) > 0.0f ? 1.0 : 0.0) + fake_correct) / 2.0;
        }

        // ---- generator step ----
        double g_loss_val = 0.0, g_gnorm = 0.0, pl_val = 0.0;
        bool did_pl = false;
        {
            Tapef tape;
            ParamIds p = register_mixed(tape, params, is_generator_param);

            int32_t z = tape.constant(Tensorf::randn(1, gcfg.latent_dim, rng));
            int32_t style = map_latent(tape, z, p, gcfg);
            std::vector<int32_t> skips = encode(tape, tape.constant(features[mi]), h, p, gcfg);
            std::vector<Tensorf> noise = make_decoder_noise<float>(h, gcfg, rng);
            int32_t colors = decode(tape, h, skips, style, noise, p, gcfg);

            std::vector<RasterPlan> plans;
            std::vector<int32_t> imgs, logits;
            for (int64_t k = 0; k < tcfg.views; ++k) {
                plans.push_back(build_raster_plan(fine, sample_pose(rng, fine, pose)));
                imgs.push_back(rasterize_on_tape(tape, colors, plans.back()));
                logits.push_back(discriminate(tape, imgs.back(), tcfg.render_res, "disc_img", p));
            }
            std::vector<std::vector<PatchCrop>> crops;
            for (int64_t k = 0; k < tcfg.views; ++k)
                crops.push_back(
                    sample_patch_origins(plans[k], rng, tcfg.patch_size, tcfg.patches_per_view));
            int32_t stack = assemble_patch_batch(tape, imgs, crops, tcfg.render_res,
                                                 tcfg.render_res, tcfg.patch_size);
            int32_t patch_logit = discriminate(tape, stack, tcfg.patch_size, "disc_patch", p);

            int32_t g_total =
                tape.add(tape.scale(loss_nonsat(tape, logits), tcfg.image_weight),
                         tape.scale(loss_nonsat(tape, {patch_logit}), tcfg.patch_weight));
            if (tcfg.pl_weight > 0.0 && step % tcfg.g_reg_interval == 0) {
                Tensorf y = Tensorf::randn(tcfg.render_res * tcfg.render_res, 3, rng);
                PathLengthResult<float> pl = path_length_penalty(tape, imgs[0], style, y, pl_a);
                g_total = tape.add(
                    g_total, tape.scale(pl.penalty, tcfg.pl_weight *
                                                        static_cast<double>(tcfg.g_reg_interval)));
                pl_val = pl.norm_value;
                did_pl = true;
                pl_a = tcfg.pl_ema_decay * pl_a + (1.0 - tcfg.pl_ema_decay) * pl.norm_value;
            }

            g_loss_val = tape.value(g_total).at(0, 0);
            require(std::isfinite(g_loss_val), ErrorKind::DivergenceAbort,
                    "generator loss is not finite at step " + std::to_string(step));

            auto grads = extract_grads(tape, p, tape.backward(g_total));
            g_gnorm = grad_norm(grads);
            opt_enc.step(params, grads);
            opt_dec.step(params, grads);

            for (auto& [name, shadow] : ema.tensors) {
                const Tensorf& src = params.at(name);
                for (int64_t i = 0; i < shadow.size(); ++i)
                    shadow.data[i] = static_cast<float>(tcfg.ema_decay * shadow.data[i] +
                                                        (1.0 - tcfg.ema_decay) * src.data[i]);
            }
        }

        nlohmann::json line{{"step", step},       {"d_loss", d_loss_val},
                            {"g_loss", g_loss_val}, {"d_img_acc", d_img_acc},
                            {"d_grad_norm", d_gnorm}, {"g_grad_norm", g_gnorm}};
        if (did_r1) line["r1"] = r1_val;
        if (did_pl) {
            line["pl"] = pl_val;
            line["pl_ema"] = pl_a;
        }
        metrics << line.dump() << std::endl;
    }

    std::map<std::string, Tensorf> entries;
    for (const auto& [name, t] : params.tensors) entries[name] = t;
    for (const auto& [name, t] : ema.tensors) entries["ema." + name] = t;
    auto dump_opt = [&entries](const std::string& tag, const Optimizer<float>& opt) {
        entries["opt." + tag + ".t"] = scalar_entry(static_cast<double>(opt.t));
        for (const auto& [name, t] : opt.m)
            if (!t.data.empty()) entries["opt." + tag + ".m." + name] = t;
        for (const auto& [name, t] : opt.v)
            if (!t.data.empty()) entries["opt." + tag + ".v." + name] = t;
    };
    dump_opt("enc", opt_enc);
    dump_opt("dec", opt_dec);
    dump_opt("disc", opt_disc);
    entries["config.levels"] = scalar_entry(gcfg.levels);
    entries["config.latent_dim"] = scalar_entry(static_cast<double>(gcfg.latent_dim));
    entries["config.style_dim"] = scalar_entry(static_cast<double>(gcfg.style_dim));
    entries["config.mapping_depth"] = scalar_entry(gcfg.mapping_depth);
    entries["config.feature_kind"] = scalar_entry(static_cast<int>(gcfg.feature_kind));
    for (int l = 0; l < gcfg.levels; ++l)
        entries["config.channels." + std::to_string(l)] =
            scalar_entry(static_cast<double>(gcfg.channels[l]));
    entries["train.step"] = scalar_entry(static_cast<double>(tcfg.steps));
    entries["train.pl_a"] = scalar_entry(pl_a);
    save_checkpoint(checkpoint_path, entries);

    return TrainResult{tcfg.steps, checkpoint_path, metrics_path};
}

Tensorf generate_colors(const ParamStore<float>& params, const GeneratorConfig& cfg,
                        const MeshHierarchy& h, uint64_t seed) {
    return colors_from_latent(params, cfg, h, latent_from_seed(seed, cfg.latent_dim));
}

GeneratorConfig config_from_checkpoint(const std::map<std::string, Tensorf>& entries) {
    auto scalar = [&entries](const std::string& key) -> double {
        auto it = entries.find(key);
        require(it != entries.end(), ErrorKind::ConfigMismatch,
                "checkpoint missing '" + key + "'");
        require(it->second.rows() == 1 && it->second.cols() == 1, ErrorKind::ConfigMismatch,
                "'" + key + "' is not a scalar entry");
        return static_cast<double>(it->second.at(0, 0));
    };
    GeneratorConfig cfg;
    cfg.levels = static_cast<int>(std::lround(scalar("config.levels")));
    cfg.latent_dim = std::llround(scalar("config.latent_dim"));
    cfg.style_dim = std::llround(scalar("config.style_dim"));
    cfg.mapping_depth = static_cast<int>(std::lround(scalar("config.mapping_depth")));
    int kind = static_cast<int>(std::lround(scalar("config.feature_kind")));
    require(kind >= 0 && kind <= static_cast<int>(FeatureKind::kNormalsPlusCurvature),
            ErrorKind::ConfigMismatch, "checkpoint has an unknown feature kind");
    cfg.feature_kind = static_cast<FeatureKind>(kind);
    require(cfg.levels >= 2, ErrorKind::ConfigMismatch, "checkpoint has a bad level count");
    for (int l = 0; l < cfg.levels; ++l)
        cfg.channels.push_back(std::llround(scalar("config.channels." + std::to_string(l))));
    return cfg;
}

void generate(const std::string& checkpoint_path, const MeshHierarchy& h,
              const GenerateOptions& opts) {
    require(opts.views >= 1, ErrorKind::PreconditionViolation, "generate: views must be >= 1");
    require(opts.render_res >= 1, ErrorKind::PreconditionViolation,
            "generate: render_res must be >= 1");
    std::map<std::string, Tensorf> entries = load_checkpoint(checkpoint_path);
    GeneratorConfig cfg = config_from_checkpoint(entries);
    validate_generator_config(cfg, h);
    ParamStore<float> params = generator_from_checkpoint(entries, cfg, h);

    std::filesystem::create_directories(opts.out_dir);
    Tensorf colors_f = generate_colors(params, cfg, h, opts.seed);
    Tensord colors = colors_f.cast<double>();

    std::vector<std::array<float, 3>> face_colors(colors.rows());
    for (int64_t i = 0; i < colors.rows(); ++i)
        face_colors[i] = {colors_f.at(i, 0), colors_f.at(i, 1), colors_f.at(i, 2)};
    save_obj(h.mesh(1), face_colors, opts.out_dir + "/mesh.obj");

    Rng pose_rng(opts.seed ^ 0x9e3779b97f4a7c15ull);
    render_views(h.mesh(1), colors, pose_rng, opts.views, opts.render_res, opts.out_dir, "view");
}

void interpolate(const std::string& checkpoint_path, const MeshHierarchy& h, uint64_t seed_a,
                 uint64_t seed_b, int64_t steps, int64_t render_res,
                 const std::string& out_dir) {
    require(steps >= 2, ErrorKind::PreconditionViolation, "interpolate: need at least 2 steps");
    require(render_res >= 1, ErrorKind::PreconditionViolation,
            "interpolate: render_res must be >= 1");
    std::map<std::string, Tensorf> entries = load_checkpoint(checkpoint_path);
    GeneratorConfig cfg = config_from_checkpoint(entries);
    validate_generator_config(cfg, h);
    ParamStore<float> params = generator_from_checkpoint(entries, cfg, h);

    std::filesystem::create_directories(out_dir);
    Tensorf za = latent_from_seed(seed_a, cfg.latent_dim);
    Tensorf zb = latent_from_seed(seed_b, cfg.latent_dim);

    // one fixed camera for the whole strip, deterministic in the seed pair
    Rng cam_rng(seed_a ^ (seed_b * 0x9e3779b97f4a7c15ull) ^ 0x51ed);
    PoseConfig pose;
    pose.height = pose.width = render_res;
    Camera cam = sample_pose(cam_rng, h.mesh(1), pose);

    for (int64_t i = 0; i < steps; ++i) {
        double t = static_cast<double>(i) / static_cast<double>(steps - 1);
        Tensorf colors = colors_from_latent(params, cfg, h, slerp(za, zb, t));
        RenderOutput out = rasterize(h.mesh(1), colors.cast<double>(), cam);
        write_png(out_dir + "/interp_" + zero_pad(i, 3) + ".png", out.image, out.height,
                  out.width);
    }
}

}  // namespace rsg
