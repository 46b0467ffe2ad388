#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <utility>
#include <string>
#include <vector>

#include "rsg/error.hpp"
#include "rsg/gradcheck.hpp"
#include "rsg/mesh.hpp"
#include "rsg/neighborhood.hpp"
#include "rsg/nn.hpp"
#include "rsg/rng.hpp"
#include "rsg/tape.hpp"
#include "rsg/tensor.hpp"

using namespace rsg;

namespace {

constexpr double kGradTol = 1e-4;

using BuildFn = std::function<int32_t(Taped&, const std::vector<int32_t>&)>;

// Worst relative error of `build` over three seeded random instantiations.
double check3(const BuildFn& build, const std::vector<std::pair<int64_t, int64_t>>& shapes,
              uint64_t base_seed = 101) {
    double worst = 0.0;
    for (uint64_t s = 0; s < 3; ++s) {
        Rng rng(base_seed + s);
        std::vector<Tensord> args;
        for (auto [r, c] : shapes) args.push_back(Tensord::randn(r, c, rng));
        worst = std::max(worst, gradcheck(build, args).overall());
    }
    return worst;
}

// Mixes an N x C node down to 1 x 1 with fixed pseudo-random coefficients so
// element permutation bugs cannot cancel.
int32_t mix(Taped& tape, int32_t a, uint64_t seed = 999) {
    Rng rng(seed);
    const Tensord& v = tape.value(a);
    return tape.sum_all(tape.mul(a, tape.constant(Tensord::randn(v.rows(), v.cols(), rng))));
}

QuadMesh make_torus_grid(int nu, int nv) {
    QuadMesh m;
    const double R = 2.0, r = 0.8;
    for (int j = 0; j < nv; ++j)
        for (int i = 0; i < nu; ++i) {
            double a = 2.0 * kPi * i / nu;
            double b = 2.0 * kPi * j / nv;
            m.vertices.push_back({(R + r * std::cos(b)) * std::cos(a),
                                  (R + r * std::cos(b)) * std::sin(a), r * std::sin(b)});
        }
    auto vid = [&](int i, int j) { return static_cast<int32_t>((j % nv) * nu + (i % nu)); };
    for (int j = 0; j < nv; ++j)
        for (int i = 0; i < nu; ++i)
            m.faces.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
    return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// primitive gradients

TEST_CASE("elementwise op gradients") {
    CHECK(check3([](Taped& t, const std::vector<int32_t>& a) {
              return mix(t, t.add(a[0], a[1]));
          },
          {{3, 4}, {3, 4}}) <= kGradTol);
    CHECK(check3([](Taped& t, const std::vector<int32_t>& a) {
              return mix(t, t.sub(a[0], a[1]));
          },
          {{3, 4}, {3, 4}}) <= kGradTol);
    CHECK(check3([](Taped& t, const std::vector<int32_t>& a) {
              return mix(t, t.mul(a[0], a[1]));
          },
          {{3, 4}, {3, 4}}) <= kGradTol);
    CHECK(check3([](Taped& t, const std::vector<int32_t>& a) {
              return mix(t, t.scale(t.add_scalar(a[0], 0.7), -1.3));
          },
          {{2, 5}}) <= kGradTol);
    CHECK(check3([](Taped& t, const std::vector<int32_t>& a) {
              return mix(t, t.square(a[0]));
          },
          {{4, 3}}) <= kGradTol);
}

TEST_CASE("matmul and transpose gradients") {
    CHECK(check3([](Taped& t, const std::vector<int32_t>& a) {
              return mix(t, t.matmul(a[0], a[1]));
          },
          {{3, 5}, {5, 2}}) <= kGradTol);
    CHECK(check3([](Taped& t, const std::vector<int32_t>& a) {
              return mix(t, t.matmul(t.transpose(a[0]), a[1]));
          },
          {{5, 3}, {5, 2}}) <= kGradTol);
}

TEST_CASE("row and column reduction gradients") {
    CHECK(check3([](Taped& t, const std::vector<int32_t>& a) {
              return mix(t, t.broadcast_rows(t.sum_rows(a[0]), 6));
          },
          {{4, 3}}) <= kGradTol);
    CHECK(check3([](Taped& t, const std::vector<int32_t>& a) {
              return mix(t, t.broadcast_cols(t.sum_cols(a[0]), 5));
          },
          {{4, 3}}) <= kGradTol);
    CHECK(check3([](Taped& t, const std::vector<int32_t>& a) {
              return mix(t, t.broadcast_all(t.mean_all(a[0]), 3, 3));
          },
          {{4, 3}}) <= kGradTol);
}

TEST_CASE("layout op gradients") {
    CHECK(check3([](Taped& t, const std::vector<int32_t>& a) {
              return mix(t, t.concat_cols(a[0], a[1]));
          },
          {{3, 2}, {3, 4}}) <= kGradTol);
    CHECK(check3([](Taped& t, const std::vector<int32_t>& a) {
              return mix(t, t.slice_cols(a[0], 1, 4));
          },
          {{3, 5}}) <= kGradTol);
    CHECK(check3([](Taped& t, const std::vector<int32_t>& a) {
              return mix(t, t.pad_cols(a[0], 2, 7));
          },
          {{3, 3}}) <= kGradTol);
    CHECK(check3([](Taped& t, const std::vector<int32_t>& a) {
              return mix(t, t.reshape(a[0], 2, 6));
          },
          {{3, 4}}) <= kGradTol);
    CHECK(check3([](Taped& t, const std::vector<int32_t>& a) {
              return mix(t, t.tile_cols(a[0], 3));
          },
          {{3, 2}}) <= kGradTol);
}

TEST_CASE("gather scatter and row scaling gradients") {
    auto idx = std::make_shared<const std::vector<int32_t>>(
        std::vector<int32_t>{1, -1, 0, 2, 1, -1});
    CHECK(check3([idx](Taped& t, const std::vector<int32_t>& a) {
              return mix(t, t.gather_rows(a[0], idx));
          },
          {{3, 4}}) <= kGradTol);
    auto sidx = std::make_shared<const std::vector<int32_t>>(std::vector<int32_t>{2, 0, 2, -1});
    CHECK(check3([sidx](Taped& t, const std::vector<int32_t>& a) {
              return mix(t, t.scatter_rows(a[0], sidx, 5));
          },
          {{4, 3}}) <= kGradTol);
    auto w = std::make_shared<const std::vector<double>>(std::vector<double>{0.5, -2.0, 3.0});
    CHECK(check3([w](Taped& t, const std::vector<int32_t>& a) {
              return mix(t, t.scale_rows(a[0], w));
          },
          {{3, 4}}) <= kGradTol);
}

TEST_CASE("nonlinearity gradients") {
    CHECK(check3([](Taped& t, const std::vector<int32_t>& a) {
              return mix(t, t.sigmoid(a[0]));
          },
          {{3, 4}}) <= kGradTol);
    CHECK(check3([](Taped& t, const std::vector<int32_t>& a) {
              return mix(t, t.softplus(a[0]));
          },
          {{3, 4}}) <= kGradTol);
    CHECK(check3([](Taped& t, const std::vector<int32_t>& a) {
              return mix(t, t.leaky_relu(a[0], 0.2));
          },
          {{3, 4}}) <= kGradTol);
    // keep arguments strictly positive for sqrt / reciprocal
    CHECK(check3([](Taped& t, const std::vector<int32_t>& a) {
              return mix(t, t.sqrt_op(t.add_scalar(t.square(a[0]), 0.5)));
          },
          {{3, 4}}) <= kGradTol);
    CHECK(check3([](Taped& t, const std::vector<int32_t>& a) {
              return mix(t, t.reciprocal(t.add_scalar(t.square(a[0]), 1.0)));
          },
          {{3, 4}}) <= kGradTol);
}

TEST_CASE("gradient of a linear form is exact") {
    Rng rng(5);
    Tensord w = Tensord::randn(4, 3, rng);
    Taped tape;
    int32_t x = tape.leaf(Tensord::randn(4, 3, rng));
    int32_t loss = tape.sum_all(tape.mul(x, tape.constant(w)));
    auto grads = tape.backward(loss);
    REQUIRE(grads[x] >= 0);
    const Tensord& g = tape.value(grads[x]);
    for (size_t i = 0; i < w.data.size(); ++i) CHECK(std::fabs(g.data[i] - w.data[i]) <= 1e-6);
}

TEST_CASE("constants receive no gradient") {
    Taped tape;
    int32_t x = tape.leaf(Tensord::full(2, 2, 3.0));
    int32_t c = tape.constant(Tensord::full(2, 2, 4.0));
    int32_t loss = tape.sum_all(tape.mul(x, c));
    auto grads = tape.backward(loss);
    CHECK(grads[c] == -1);
    REQUIRE(grads[x] >= 0);
    CHECK(tape.value(grads[x]).at(0, 0) == doctest::Approx(4.0));
}

TEST_CASE("closed-form derivatives at fixed points") {
    Taped t2;
    Tensord v(1, 3);  // x = (0, 1.5, -2)
    v.at(0, 0) = 0.0;
    v.at(0, 1) = 1.5;
    v.at(0, 2) = -2.0;
    int32_t xx = t2.leaf(v);
    auto grads = t2.backward(t2.sum_all(t2.sigmoid(xx)));
    const Tensord& gs = t2.value(grads[xx]);
    auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
    for (int j = 0; j < 3; ++j) {
        double s = sig(v.at(0, j));
        CHECK(gs.at(0, j) == doctest::Approx(s * (1.0 - s)).epsilon(1e-12));
    }
    CHECK(gs.at(0, 0) == doctest::Approx(0.25).epsilon(1e-12));

    Taped t3;
    int32_t x3 = t3.leaf(v);
    auto g3 = t3.backward(t3.sum_all(t3.softplus(x3)));
    for (int j = 0; j < 3; ++j)
        CHECK(t3.value(g3[x3]).at(0, j) == doctest::Approx(sig(v.at(0, j))).epsilon(1e-12));

    Taped t4;
    int32_t x4 = t4.leaf(v);
    auto g4 = t4.backward(t4.sum_all(t4.leaky_relu(x4, 0.2)));
    CHECK(t4.value(g4[x4]).at(0, 1) == doctest::Approx(1.0));
    CHECK(t4.value(g4[x4]).at(0, 2) == doctest::Approx(0.2));
}

TEST_CASE("second derivatives come out of a double backward") {
    // d2/dx2 of sigmoid: s(1-s)(1-2s)
    Tensord v(1, 1);
    v.at(0, 0) = 0.3;
    Taped tape;
    int32_t x = tape.leaf(v);
    int32_t y = tape.sigmoid(x);
    auto g1 = tape.backward(tape.sum_all(y));
    REQUIRE(g1[x] >= 0);
    auto g2 = tape.backward(g1[x]);
    REQUIRE(g2[x] >= 0);
    double s = 1.0 / (1.0 + std::exp(-0.3));
    CHECK(tape.value(g2[x]).at(0, 0) == doctest::Approx(s * (1 - s) * (1 - 2 * s)).epsilon(1e-10));

    // d2/dx2 of x^3 via mul chain: 6x
    Taped t2;
    int32_t a = t2.leaf(v);
    int32_t cube = t2.mul(t2.mul(a, a), a);
    auto h1 = t2.backward(t2.sum_all(cube));
    auto h2 = t2.backward(h1[a]);
    CHECK(t2.value(h2[a]).at(0, 0) == doctest::Approx(6.0 * 0.3).epsilon(1e-10));
}

// ---------------------------------------------------------------------------
// face convolutions

TEST_CASE("face_conv matches an explicit dense matrix") {
    for (int depth : {1, 2}) {
        QuadMesh m = make_cube_hierarchy_level(depth);
        NeighborhoodTable nbr = build_neighborhood(m);
        int64_t F = m.face_count();
        const int64_t C0 = 3, C1 = 2;
        Rng rng(depth);
        Tensord x = Tensord::randn(F, C0, rng);
        Tensord w = Tensord::randn(9 * C0, C1, rng);
        Tensord b = Tensord::randn(1, C1, rng);

        // assemble the (F*C1) x (F*C0) operator row by row
        std::vector<std::vector<double>> A(F * C1, std::vector<double>(F * C0, 0.0));
        for (int64_t i = 0; i < F; ++i)
            for (int tap = 0; tap < 9; ++tap) {
                int64_t src = tap == 0 ? i : nbr.neighbors[i][tap - 1];
                if (src < 0) continue;
                for (int64_t ci = 0; ci < C0; ++ci)
                    for (int64_t co = 0; co < C1; ++co)
                        A[i * C1 + co][src * C0 + ci] += w.at(tap * C0 + ci, co);
            }
        std::vector<double> expect(F * C1, 0.0);
        for (int64_t r = 0; r < F * C1; ++r) {
            for (int64_t c = 0; c < F * C0; ++c) expect[r] += A[r][c] * x.data[c];
            expect[r] += b.at(0, r % C1);
        }

        Taped tape;
        int32_t out = face_conv(tape, tape.leaf(x), nbr, tape.leaf(w), tape.leaf(b));
        const Tensord& got = tape.value(out);
        REQUIRE(got.rows() == F);
        REQUIRE(got.cols() == C1);
        double max_diff = 0.0;
        for (int64_t i = 0; i < F; ++i)
            for (int64_t co = 0; co < C1; ++co)
                max_diff = std::max(max_diff, std::fabs(got.at(i, co) - expect[i * C1 + co]));
        CHECK(max_diff <= 1e-6);
    }
}

TEST_CASE("face_conv zero pads sentinel taps") {
    QuadMesh m = make_cube_hierarchy_level(1);  // every face has one sentinel
    NeighborhoodTable nbr = build_neighborhood(m);
    int64_t F = m.face_count();
    Taped tape;
    // all-ones weights turn the output into a count of live taps
    int32_t x = tape.leaf(Tensord::full(F, 1, 1.0));
    int32_t w = tape.leaf(Tensord::full(9, 1, 1.0));
    int32_t out = face_conv(tape, x, nbr, w, -1);
    for (int64_t f = 0; f < F; ++f)
        CHECK(tape.value(out).at(f, 0) == doctest::Approx(1.0 + nbr.real_neighbor_count(f)));
}

TEST_CASE("demodulated weights have unit second moment per output channel") {
    QuadMesh torus = make_torus_grid(6, 6);  // all taps real
    NeighborhoodTable nbr = build_neighborhood(torus);
    int64_t F = torus.face_count();
    const int64_t C0 = 3, C1 = 4;
    Rng rng(42);
    Tensord xv = Tensord::randn(F, C0, rng);
    Tensord wv = Tensord::randn(9 * C0, C1, rng);
    Tensord sv(1, C0);
    for (int64_t c = 0; c < C0; ++c) sv.at(0, c) = 1.0 + 0.3 * rng.normal();

    for (int64_t pick_face : {int64_t(0), int64_t(17)}) {
        for (int64_t cout = 0; cout < C1; ++cout) {
            Taped tape;
            int32_t x = tape.leaf(xv);
            int32_t out = modulated_face_conv(tape, x, nbr, tape.constant(wv), -1,
                                              tape.constant(sv), true);
            auto one = std::make_shared<const std::vector<int32_t>>(
                std::vector<int32_t>{static_cast<int32_t>(pick_face)});
            int32_t scalar = tape.slice_cols(tape.gather_rows(out, one), cout, cout + 1);
            auto grads = tape.backward(scalar);
            REQUIRE(grads[x] >= 0);
            const Tensord& g = tape.value(grads[x]);
            double second_moment = 0.0;
            for (double e : g.data) second_moment += e * e;
            CHECK(second_moment == doctest::Approx(1.0).epsilon(1e-5));
        }
    }
}

TEST_CASE("modulation without demodulation keeps the scaled weights") {
    QuadMesh torus = make_torus_grid(6, 6);
    NeighborhoodTable nbr = build_neighborhood(torus);
    int64_t F = torus.face_count();
    const int64_t C0 = 2, C1 = 3;
    Rng rng(7);
    Tensord wv = Tensord::randn(9 * C0, C1, rng);
    Tensord sv(1, C0);
    sv.at(0, 0) = 1.7;
    sv.at(0, 1) = -0.4;

    Taped tape;
    int32_t x = tape.leaf(Tensord::randn(F, C0, rng));
    int32_t out = modulated_face_conv(tape, x, nbr, tape.constant(wv), -1, tape.constant(sv),
                                      false);
    auto one = std::make_shared<const std::vector<int32_t>>(std::vector<int32_t>{3});
    int32_t scalar = tape.slice_cols(tape.gather_rows(out, one), 1, 2);
    auto grads = tape.backward(scalar);
    const Tensord& g = tape.value(grads[x]);
    double second_moment = 0.0;
    for (double e : g.data) second_moment += e * e;
    double expect = 0.0;
    for (int tap = 0; tap < 9; ++tap)
        for (int64_t ci = 0; ci < C0; ++ci) {
            double w_eff = wv.at(tap * C0 + ci, 1) * sv.at(0, ci);
            expect += w_eff * w_eff;
        }
    CHECK(second_moment == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("noise injection adds per-channel scaled noise") {
    QuadMesh m = make_cube_hierarchy_level(1);
    NeighborhoodTable nbr = build_neighborhood(m);
    int64_t F = m.face_count();
    Rng rng(3);
    Tensord noise = Tensord::randn(F, 1, rng);
    Tensord strength(1, 2);
    strength.at(0, 0) = 0.5;
    strength.at(0, 1) = -2.0;

    Taped tape;
    int32_t x = tape.leaf(Tensord::randn(F, 2, rng));
    int32_t w = tape.constant(Tensord::randn(18, 2, rng));
    int32_t s = tape.constant(Tensord::full(1, 2, 1.0));
    int32_t base = modulated_face_conv(tape, x, nbr, w, -1, s, true);
    int32_t noisy = modulated_face_conv(tape, x, nbr, w, -1, s, true, tape.constant(noise),
                                        tape.constant(strength));
    for (int64_t f = 0; f < F; ++f)
        for (int64_t c = 0; c < 2; ++c)
            CHECK(tape.value(noisy).at(f, c) - tape.value(base).at(f, c) ==
                  doctest::Approx(noise.at(f, 0) * strength.at(0, c)).epsilon(1e-9));
}

TEST_CASE("resnet block skip scaling") {
    QuadMesh m = make_cube_hierarchy_level(1);
    NeighborhoodTable nbr = build_neighborhood(m);
    int64_t F = m.face_count();
    Rng rng(9);
    Tensord xv = Tensord::randn(F, 3, rng);

    // zero weights collapse the block to x / sqrt(2) (identity skip)
    Taped tape;
    int32_t x = tape.leaf(xv);
    int32_t z1 = tape.constant(Tensord::zeros(27, 3));
    int32_t zb = tape.constant(Tensord::zeros(1, 3));
    int32_t out = face_resnet_block(tape, x, nbr, z1, zb, z1, zb);
    for (int64_t f = 0; f < F; ++f)
        for (int64_t c = 0; c < 3; ++c)
            CHECK(tape.value(out).at(f, c) ==
                  doctest::Approx(xv.at(f, c) / std::sqrt(2.0)).epsilon(1e-12));

    // channel change without a projection is a shape error
    Taped t2;
    int32_t x2 = t2.leaf(xv);
    int32_t w1 = t2.constant(Tensord::zeros(27, 5));
    int32_t b1 = t2.constant(Tensord::zeros(1, 5));
    int32_t w2 = t2.constant(Tensord::zeros(45, 5));
    int32_t b2 = t2.constant(Tensord::zeros(1, 5));
    bool threw = false;
    try {
        face_resnet_block(t2, x2, nbr, w1, b1, w2, b2);
    } catch (const Error& e) {
        threw = e.kind() == ErrorKind::ShapeMismatch;
    }
    CHECK(threw);
}

// ---------------------------------------------------------------------------
// conv2d

TEST_CASE("conv2d matches a naive loop") {
    const int64_t H = 5, W = 4, C = 2, K = 3, S = 2, P = 1, CO = 3;
    Rng rng(21);
    Tensord img = Tensord::randn(H * W, C, rng);
    Tensord ker = Tensord::randn(K * K * C, CO, rng);
    Tensord bias = Tensord::randn(1, CO, rng);

    Taped tape;
    int32_t out = conv2d(tape, tape.leaf(img), H, W, tape.leaf(ker), tape.leaf(bias), K, S, P);
    int64_t HO = conv2d_out_extent(H, K, S, P);
    int64_t WO = conv2d_out_extent(W, K, S, P);
    REQUIRE(tape.value(out).rows() == HO * WO);
    REQUIRE(tape.value(out).cols() == CO);

    for (int64_t oy = 0; oy < HO; ++oy)
        for (int64_t ox = 0; ox < WO; ++ox)
            for (int64_t co = 0; co < CO; ++co) {
                double acc = bias.at(0, co);
                for (int64_t ky = 0; ky < K; ++ky)
                    for (int64_t kx = 0; kx < K; ++kx) {
                        int64_t iy = oy * S - P + ky;
                        int64_t ix = ox * S - P + kx;
                        if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                        for (int64_t ci = 0; ci < C; ++ci)
                            acc += img.at(iy * W + ix, ci) * ker.at((ky * K + kx) * C + ci, co);
                    }
                CHECK(tape.value(out).at(oy * WO + ox, co) == doctest::Approx(acc).epsilon(1e-9));
            }
}

TEST_CASE("conv2d output extents") {
    CHECK(conv2d_out_extent(64, 3, 2, 1) == 32);
    CHECK(conv2d_out_extent(7, 3, 1, 1) == 7);
    CHECK(conv2d_out_extent(4, 4, 4, 0) == 1);
}

// ---------------------------------------------------------------------------
// optimizer

TEST_CASE("adam takes signed unit steps under constant gradients") {
    Tensorf p = Tensorf::zeros(1, 2);
    Tensorf g(1, 2);
    g.at(0, 0) = 3.7f;
    g.at(0, 1) = -0.002f;
    Tensorf m, v;
    const double lr = 0.1;
    adam_step(p, g, m, v, 1, lr);
    CHECK(std::fabs(p.at(0, 0) + lr) <= 0.01 * lr);
    CHECK(std::fabs(p.at(0, 1) - lr) <= 0.01 * lr);
    for (int64_t t = 2; t <= 10; ++t) adam_step(p, g, m, v, t, lr);
    CHECK(std::fabs(p.at(0, 0) + 10 * lr) <= 0.02 * 10 * lr);
}

TEST_CASE("adam solves a quadratic bowl") {
    Tensorf x = Tensorf::full(1, 3, 1.0f);
    x.at(0, 1) = -2.0f;
    x.at(0, 2) = 0.5f;
    Tensorf m, v;
    for (int64_t t = 1; t <= 200; ++t) {
        Tensorf g = x;  // grad of 0.5 * |x|^2
        adam_step(x, g, m, v, t, 0.05);
    }
    for (double e : x.data) CHECK(std::fabs(e) < 0.01);
}

TEST_CASE("adam ignores zero gradients") {
    Tensorf p = Tensorf::full(2, 2, 1.5f);
    Tensorf g = Tensorf::zeros(2, 2);
    Tensorf m, v;
    adam_step(p, g, m, v, 1, 0.1);
    for (double e : p.data) CHECK(e == 1.5f);
}

TEST_CASE("optimizer updates only owned parameters with gradients") {
    ParamStore<float> params;
    params.add("a", Tensorf::full(1, 2, 1.0f));
    params.add("b", Tensorf::full(1, 2, 1.0f));
    Optimizer<float> opt(0.1);
    opt.names = {"a"};

    std::map<std::string, Tensorf> grads;
    grads["b"] = Tensorf::full(1, 2, 1.0f);  // not owned, must be ignored
    opt.step(params, grads);
    CHECK(opt.t == 1);
    CHECK(params.at("a").at(0, 0) == 1.0f);
    CHECK(params.at("b").at(0, 0) == 1.0f);

    grads["a"] = Tensorf::full(1, 2, 1.0f);
    opt.step(params, grads);
    CHECK(opt.t == 2);
    CHECK(params.at("a").at(0, 0) < 1.0f);
    CHECK(params.at("b").at(0, 0) == 1.0f);
}

TEST_CASE("weight init tracks fan-in") {
    Rng rng(33);
    Tensorf w = init_weight<float>(rng, 900, 40, 900);
    double sum2 = 0.0;
    for (double e : w.data) sum2 += e * e;
    double stddev = std::sqrt(sum2 / static_cast<double>(w.data.size()));
    CHECK(stddev == doctest::Approx(1.0 / 30.0).epsilon(0.05));
    Tensorf b = init_bias<float>(4, 1.0);
    CHECK(b.rows() == 1);
    CHECK(b.cols() == 4);
    for (double e : b.data) CHECK(e == 1.0f);
}

TEST_CASE("random tensors are reproducible") {
    Rng a(77), b(77);
    Tensord ta = Tensord::randn(4, 5, a);
    Tensord tb = Tensord::randn(4, 5, b);
    for (size_t i = 0; i < ta.data.size(); ++i) CHECK(ta.data[i] == tb.data[i]);
}
