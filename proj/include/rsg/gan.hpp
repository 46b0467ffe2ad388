#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rsg/error.hpp"
#include "rsg/features.hpp"
#include "rsg/hierarchy.hpp"
#include "rsg/nn.hpp"
#include "rsg/render.hpp"
#include "rsg/rng.hpp"
#include "rsg/tape.hpp"

namespace rsg {

struct GeneratorConfig {
    int levels = 3;                    // must equal the hierarchy's level count
    std::vector<int64_t> channels;     // per level, finest first
    int64_t latent_dim = 64;
    int64_t style_dim = 64;
    int mapping_depth = 2;
    FeatureKind feature_kind = FeatureKind::kNormalsPlusCurvature;

    int64_t input_channels() const { return make_feature_spec(feature_kind).channel_count; }
};

void validate_generator_config(const GeneratorConfig& cfg, const MeshHierarchy& h);

struct TrainConfig {
    int64_t steps = 200;
    int64_t views = 4;              // K
    int64_t render_res = 64;
    int64_t patch_size = 16;
    int64_t patches_per_view = 4;   // P
    double image_weight = 1.0;
    double patch_weight = 0.1;      // 10:1 image:patch
    double r1_gamma = 10.0;
    double pl_weight = 2.0;
    int64_t d_reg_interval = 16;
    int64_t g_reg_interval = 4;
    double lr_encoder = 1e-4;
    double lr_decoder = 2e-3;       // also the mapping network
    double lr_disc = 1e-3;
    double ema_decay = 0.995;
    double pl_ema_decay = 0.99;
    int64_t disc_base_channels = 8;
    int64_t disc_max_channels = 64;
    uint64_t seed = 0;
    std::string out_dir = ".";
};

void validate_train_config(const TrainConfig& cfg);

// name -> tape node id for every registered parameter
using ParamIds = std::map<std::string, int32_t>;

template <typename T>
ParamIds register_leaves(Tape<T>& tape, const ParamStore<T>& store) {
    ParamIds ids;
    for (const auto& [name, t] : store.tensors) ids[name] = tape.leaf(t);
    return ids;
}

template <typename T>
ParamIds register_constants(Tape<T>& tape, const ParamStore<T>& store) {
    ParamIds ids;
    for (const auto& [name, t] : store.tensors) ids[name] = tape.constant(t);
    return ids;
}

inline int32_t pid(const ParamIds& p, const std::string& name) {
    auto it = p.find(name);
    require(it != p.end(), ErrorKind::ConfigMismatch, "missing parameter '" + name + "'");
    return it->second;
}

// ---- hierarchy transport on the tape ----

template <typename T>
int32_t pool_on_tape(Tape<T>& tape, int32_t x, const MeshHierarchy& h, int fine_level) {
    const auto& assignment = h.pool_assignment[fine_level - 1];
    const auto& groups = h.pool_groups[fine_level - 1];
    auto idx = std::make_shared<std::vector<int32_t>>(assignment.begin(), assignment.end());
    int64_t nc = h.face_count(fine_level + 1);
    auto w = std::make_shared<std::vector<T>>(nc, T(0));
    for (int64_t j = 0; j < nc; ++j)
        if (!groups[j].empty()) (*w)[j] = T(1) / static_cast<T>(groups[j].size());
    return tape.scale_rows(tape.scatter_rows(x, idx, nc), w);
}

template <typename T>
int32_t unpool_on_tape(Tape<T>& tape, int32_t x, const MeshHierarchy& h, int coarse_level) {
    const auto& assignment = h.pool_assignment[coarse_level - 2];
    auto idx = std::make_shared<std::vector<int32_t>>(assignment.begin(), assignment.end());
    return tape.gather_rows(x, idx);
}

// ---- parameter initialization ----

// Registers every generator tensor (mapping, encoder, decoder). The decoder's
// learned constant input lives on the coarsest level of `h`.
template <typename T>
void init_generator_params(ParamStore<T>& store, const GeneratorConfig& cfg,
                           const MeshHierarchy& h, Rng& rng) {
    validate_generator_config(cfg, h);
    const int n = cfg.levels;
    const int64_t wdim = cfg.style_dim;

    for (int i = 0; i < cfg.mapping_depth; ++i) {
        int64_t in = i == 0 ? cfg.latent_dim : wdim;
        store.add("mapping." + std::to_string(i) + ".w", init_weight<T>(rng, in, wdim, in));
        store.add("mapping." + std::to_string(i) + ".b", init_bias<T>(wdim));
    }

    if (cfg.input_channels() > 0) {
        int64_t cin = cfg.input_channels();
        for (int l = 1; l <= n; ++l) {
            int64_t c = cfg.channels[l - 1];
            std::string base = "enc.l" + std::to_string(l) + ".";
            store.add(base + "conv1.w", init_weight<T>(rng, 9 * cin, c, 9 * cin));
            store.add(base + "conv1.b", init_bias<T>(c));
            store.add(base + "conv2.w", init_weight<T>(rng, 9 * c, c, 9 * c));
            store.add(base + "conv2.b", init_bias<T>(c));
            if (cin != c) store.add(base + "skip.w", init_weight<T>(rng, cin, c, cin));
            cin = c;
        }
    }

    store.add("dec.const", Tensor<T>::randn(h.face_count(n), cfg.channels[n - 1], rng));
    for (int l = n; l >= 1; --l) {
        int64_t c = cfg.channels[l - 1];
        int64_t skip_c = cfg.input_channels() > 0 ? cfg.channels[l - 1] : 0;
        int64_t cin = (l == n ? cfg.channels[n - 1] : cfg.channels[l]) + skip_c;
        std::string base = "dec.l" + std::to_string(l) + ".";
        for (int j = 1; j <= 2; ++j) {
            std::string conv = base + "conv" + std::to_string(j) + ".";
            int64_t in_c = j == 1 ? cin : c;
            store.add(conv + "w", init_weight<T>(rng, 9 * in_c, c, 9 * in_c));
            store.add(conv + "b", init_bias<T>(c));
            store.add(conv + "affine.w", init_weight<T>(rng, wdim, in_c, wdim));
            store.add(conv + "affine.b", init_bias<T>(in_c, 1.0));  // styles start near identity
            store.add(conv + "nstr", init_bias<T>(c, 0.0));         // noise strength starts silent
        }
        store.add(base + "torgb.w", init_weight<T>(rng, c, 3, c));
        store.add(base + "torgb.b", init_bias<T>(3));
        store.add(base + "torgb.affine.w", init_weight<T>(rng, wdim, c, wdim));
        store.add(base + "torgb.affine.b", init_bias<T>(c, 1.0));
    }
}

// Strided conv stack: one stride-1 stem, stride-2 channel-doubling stages
// down to 4x4, then a dense head. Resolution must be a power of two >= 4.
template <typename T>
void init_disc_params(ParamStore<T>& store, const std::string& prefix, int64_t in_channels,
                      int64_t res, int64_t base_channels, int64_t max_channels, Rng& rng) {
    require(res >= 4 && (res & (res - 1)) == 0, ErrorKind::PreconditionViolation,
            "discriminator resolution must be a power of two >= 4");
    int64_t c = base_channels;
    store.add(prefix + ".conv0.w", init_weight<T>(rng, 9 * in_channels, c, 9 * in_channels));
    store.add(prefix + ".conv0.b", init_bias<T>(c));
    int stage = 0;
    for (int64_t extent = res; extent > 4; extent /= 2, ++stage) {
        int64_t c_next = std::min(c * 2, max_channels);
        std::string base = prefix + ".down" + std::to_string(stage) + ".";
        store.add(base + "w", init_weight<T>(rng, 9 * c, c_next, 9 * c));
        store.add(base + "b", init_bias<T>(c_next));
        c = c_next;
    }
    store.add(prefix + ".final.w", init_weight<T>(rng, 16 * c, 1, 16 * c));
    store.add(prefix + ".final.b", init_bias<T>(1));
}

// ---- generator graph ----

// sqrt(Z) * z / ||z|| then `mapping_depth` dense + leaky-ReLU layers.
// Depth 0 is a passthrough (requires latent_dim == style_dim).
template <typename T>
int32_t map_latent(Tape<T>& tape, int32_t z, const ParamIds& p, const GeneratorConfig& cfg) {
    require(tape.value(z).rows() == 1 && tape.value(z).cols() == cfg.latent_dim,
            ErrorKind::ShapeMismatch, "map_latent: z must be 1 x latent_dim");
    if (cfg.mapping_depth == 0)
        require(cfg.latent_dim == cfg.style_dim, ErrorKind::ConfigMismatch,
                "mapping depth 0 requires latent_dim == style_dim");
    int32_t norm = tape.sqrt_op(tape.add_scalar(tape.sum_all(tape.square(z)), 1e-12));
    int32_t factor = tape.scale(tape.reciprocal(norm), std::sqrt(static_cast<double>(cfg.latent_dim)));
    int32_t x = tape.mul(z, tape.broadcast_cols(factor, cfg.latent_dim));
    for (int i = 0; i < cfg.mapping_depth; ++i) {
        std::string base = "mapping." + std::to_string(i) + ".";
        x = tape.leaky_relu(dense(tape, x, pid(p, base + "w"), pid(p, base + "b")), 0.2);
    }
    return x;
}

// FaceResNet blocks interleaved with pooling; returns one feature node per
// level (finest first). With a zero-channel input the encoder has no
// parameters and every skip is an F_l x 0 constant.
template <typename T>
std::vector<int32_t> encode(Tape<T>& tape, int32_t input_features, const MeshHierarchy& h,
                            const ParamIds& p, const GeneratorConfig& cfg) {
    const int n = cfg.levels;
    std::vector<int32_t> skips;
    if (cfg.input_channels() == 0) {
        for (int l = 1; l <= n; ++l)
            skips.push_back(tape.constant(Tensor<T>(h.face_count(l), 0)));
        return skips;
    }
    require(tape.value(input_features).rows() == h.face_count(1) &&
                tape.value(input_features).cols() == cfg.input_channels(),
            ErrorKind::ShapeMismatch, "encode: bad input feature shape");
    int32_t x = input_features;
    for (int l = 1; l <= n; ++l) {
        std::string base = "enc.l" + std::to_string(l) + ".";
        int32_t skip_w = p.count(base + "skip.w") ? pid(p, base + "skip.w") : -1;
        int32_t out = face_resnet_block(tape, x, h.table(l), pid(p, base + "conv1.w"),
                                        pid(p, base + "conv1.b"), pid(p, base + "conv2.w"),
                                        pid(p, base + "conv2.b"), skip_w);
        skips.push_back(out);
        if (l < n) x = pool_on_tape(tape, out, h, l);
    }
    return skips;
}

// Per-face noise inputs for one decoder pass: levels n..1, two layers each.
template <typename T>
std::vector<Tensor<T>> make_decoder_noise(const MeshHierarchy& h, const GeneratorConfig& cfg,
                                          Rng& rng) {
    std::vector<Tensor<T>> noise;
    for (int l = cfg.levels; l >= 1; --l)
        for (int j = 0; j < 2; ++j)
            noise.push_back(Tensor<T>::randn(h.face_count(l), 1, rng));
    return noise;
}

// Style-modulated synthesis from the learned coarsest-level constant up to
// finest-level face colors in [0,1].
template <typename T>
int32_t decode(Tape<T>& tape, const MeshHierarchy& h, const std::vector<int32_t>& skips,
               int32_t style, const std::vector<Tensor<T>>& noise, const ParamIds& p,
               const GeneratorConfig& cfg) {
    validate_generator_config(cfg, h);
    const int n = cfg.levels;
    require(static_cast<int>(skips.size()) == n, ErrorKind::ShapeMismatch,
            "decode: need one skip per level");
    require(static_cast<int>(noise.size()) == 2 * n, ErrorKind::ShapeMismatch,
            "decode: need 2 noise fields per level");

    int32_t feat = -1;
    int32_t rgb = -1;
    for (int l = n; l >= 1; --l) {
        int32_t x = l == n ? pid(p, "dec.const") : unpool_on_tape(tape, feat, h, l + 1);
        if (tape.value(skips[l - 1]).cols() > 0) x = tape.concat_cols(x, skips[l - 1]);

        std::string base = "dec.l" + std::to_string(l) + ".";
        for (int j = 1; j <= 2; ++j) {
            std::string conv = base + "conv" + std::to_string(j) + ".";
            int32_t s = dense(tape, style, pid(p, conv + "affine.w"), pid(p, conv + "affine.b"));
            int32_t nz = tape.constant(noise[(n - l) * 2 + (j - 1)]);
            x = tape.leaky_relu(
                modulated_face_conv(tape, x, h.table(l), pid(p, conv + "w"), pid(p, conv + "b"),
                                    s, /*demodulate=*/true, nz, pid(p, conv + "nstr")),
                0.2);
        }
        feat = x;

        // toRGB: 1-tap modulated projection, no demodulation.
        int32_t s_rgb = dense(tape, style, pid(p, base + "torgb.affine.w"),
                              pid(p, base + "torgb.affine.b"));
        int64_t c = tape.value(feat).cols();
        int32_t w_mod = tape.mul(pid(p, base + "torgb.w"),
                                 tape.broadcast_cols(tape.transpose(s_rgb), 3));
        int32_t contrib = tape.add(tape.matmul(feat, w_mod),
                                   tape.broadcast_rows(pid(p, base + "torgb.b"),
                                                       tape.value(feat).rows()));
        (void)c;
        rgb = l == n ? contrib : tape.add(unpool_on_tape(tape, rgb, h, l + 1), contrib);
    }
    return tape.sigmoid(rgb);
}

// ---- discriminators ----

// Shared conv-stack evaluator for both discriminators; `res` and the
// parameter set must come from the same init_disc_params call.
template <typename T>
int32_t discriminate(Tape<T>& tape, int32_t image, int64_t res, const std::string& prefix,
                     const ParamIds& p) {
    require(tape.value(image).rows() == res * res, ErrorKind::ShapeMismatch,
            "discriminate: image rows != res^2");
    int32_t x = tape.leaky_relu(conv2d(tape, image, res, res, pid(p, prefix + ".conv0.w"),
                                       pid(p, prefix + ".conv0.b"), 3, 1, 1),
                                0.2);
    int stage = 0;
    for (int64_t extent = res; extent > 4; extent /= 2, ++stage) {
        std::string base = prefix + ".down" + std::to_string(stage) + ".";
        x = tape.leaky_relu(conv2d(tape, x, extent, extent, pid(p, base + "w"),
                                   pid(p, base + "b"), 3, 2, 1),
                            0.2);
    }
    int64_t flat = tape.value(x).rows() * tape.value(x).cols();
    x = tape.reshape(x, 1, flat);
    return dense(tape, x, pid(p, prefix + ".final.w"), pid(p, prefix + ".final.b"));
}

// ---- patch assembly ----

// Channel-concatenates patches in view-major, patch-minor order into a
// (ps*ps) x (3*K*P) stack. The generated path passes K view images with P
// crops each; the real path passes one image with K*P crops.
template <typename T>
int32_t assemble_patch_batch(Tape<T>& tape, const std::vector<int32_t>& view_images,
                             const std::vector<std::vector<PatchCrop>>& crops, int64_t height,
                             int64_t width, int64_t patch_size) {
    require(!view_images.empty() && view_images.size() == crops.size(), ErrorKind::ShapeMismatch,
            "assemble_patch_batch: views and crop lists must match");
    int32_t stack = -1;
    for (size_t v = 0; v < view_images.size(); ++v)
        for (const PatchCrop& crop : crops[v]) {
            int32_t patch = tape.gather_rows(view_images[v],
                                             patch_gather_indices(height, width, crop, patch_size));
            stack = stack < 0 ? patch : tape.concat_cols(stack, patch);
        }
    return stack;
}

// ---- losses and penalties ----

template <typename T>
int32_t mean_of(Tape<T>& tape, const std::vector<int32_t>& scalars) {
    require(!scalars.empty(), ErrorKind::ShapeMismatch, "mean_of: empty list");
    int32_t acc = scalars[0];
    for (size_t i = 1; i < scalars.size(); ++i) acc = tape.add(acc, scalars[i]);
    return tape.scale(acc, 1.0 / static_cast<double>(scalars.size()));
}

// Non-saturating generator loss: mean softplus(-logit_fake).
template <typename T>
int32_t loss_nonsat(Tape<T>& tape, const std::vector<int32_t>& fake_logits) {
    std::vector<int32_t> terms;
    terms.reserve(fake_logits.size());
    for (int32_t l : fake_logits) terms.push_back(tape.softplus(tape.scale(l, -1.0)));
    return mean_of(tape, terms);
}

// Discriminator loss: mean softplus(-logit_real) + mean softplus(logit_fake).
template <typename T>
int32_t loss_disc(Tape<T>& tape, const std::vector<int32_t>& real_logits,
                  const std::vector<int32_t>& fake_logits) {
    std::vector<int32_t> real_terms, fake_terms;
    for (int32_t l : real_logits) real_terms.push_back(tape.softplus(tape.scale(l, -1.0)));
    for (int32_t l : fake_logits) fake_terms.push_back(tape.softplus(l));
    return tape.add(mean_of(tape, real_terms), mean_of(tape, fake_terms));
}

// (gamma/2) * ||d logit / d input||^2, where `input_leaf` is an ancestor leaf
// of `logit`. The gradient is emitted symbolically, so differentiating the
// penalty (for the parameter update) is an exact second-order computation.
template <typename T>
int32_t r1_penalty(Tape<T>& tape, int32_t logit, int32_t input_leaf, double gamma) {
    auto grads = tape.backward(logit);
    int32_t gx = grads[input_leaf];
    if (gx < 0) return tape.constant(Tensor<T>::zeros(1, 1));
    return tape.scale(tape.sum_all(tape.square(gx)), gamma / 2.0);
}

template <typename T>
struct PathLengthResult {
    int32_t penalty = -1;  // (||J|| - a)^2 node
    double norm_value = 0.0;
};

// J = d<image, y>/d style for unit-variance noise y; penalty pulls ||J||
// toward the moving average a (updated by the caller from norm_value).
template <typename T>
PathLengthResult<T> path_length_penalty(Tape<T>& tape, int32_t image, int32_t style,
                                        const Tensor<T>& y, double a) {
    require(tape.value(image).same_shape(y), ErrorKind::ShapeMismatch,
            "path_length_penalty: noise shape != image shape");
    int32_t s = tape.dot_all(image, tape.constant(y));
    auto grads = tape.backward(s);
    int32_t j = grads[style];
    PathLengthResult<T> out;
    if (j < 0) {
        int32_t zero = tape.constant(Tensor<T>::zeros(1, 1));
        out.penalty = tape.square(tape.add_scalar(zero, -a));
        out.norm_value = 0.0;
        return out;
    }
    int32_t norm = tape.sqrt_op(tape.add_scalar(tape.sum_all(tape.square(j)), 1e-12));
    out.norm_value = static_cast<double>(tape.value(norm).at(0, 0));
    out.penalty = tape.square(tape.add_scalar(norm, -a));
    return out;
}

// ---- training / inference entry points (float) ----

struct TrainResult {
    int64_t steps_run = 0;
    std::string checkpoint_path;
    std::string metrics_path;
};

TrainResult train(const std::vector<MeshHierarchy>& meshes, const GeneratorConfig& gcfg,
                  const TrainConfig& tcfg);

// Deterministic synthetic "real" texture family: solid or axis-striped face
// colorings drawn from rng.
Tensord synthetic_coloring(const QuadMesh& mesh, Rng& rng);

// Runs the generator for one latent seed. Decoder noise comes from a fixed
// stream so the same seed always yields the same surface.
Tensorf generate_colors(const ParamStore<float>& params, const GeneratorConfig& cfg,
                        const MeshHierarchy& h, uint64_t seed);

struct GenerateOptions {
    uint64_t seed = 0;
    int64_t views = 4;
    int64_t render_res = 64;
    std::string out_dir = ".";
};

// Loads a checkpoint, reconstructs the generator config, writes an OBJ with a
// color sidecar plus one PNG per view. Throws ConfigMismatch when the
// checkpoint does not fit the hierarchy.
void generate(const std::string& checkpoint_path, const MeshHierarchy& h,
              const GenerateOptions& opts);

// Spherical interpolation between the latents of two seeds; emits `steps`
// renders (t = 0 and t = 1 reproduce the base generations).
void interpolate(const std::string& checkpoint_path, const MeshHierarchy& h, uint64_t seed_a,
                 uint64_t seed_b, int64_t steps, int64_t render_res, const std::string& out_dir);

// Reconstructs the generator config stored in a checkpoint.
GeneratorConfig config_from_checkpoint(const std::map<std::string, Tensorf>& entries);

}  // namespace rsg
