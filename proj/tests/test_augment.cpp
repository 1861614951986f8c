// Augmentation module: policy parsing, the resize-crop-flip training
// augmentation (against an independent replay of the sampling sequence),
// and the differentiable transform pipeline with hand-chosen parameters.
#include <cmath>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "scgan/augment.hpp"
#include "scgan/ops.hpp"
#include "scgan/resize.hpp"
#include "scgan/rng.hpp"
#include "scgan/tape.hpp"

using namespace scgan;

namespace {

TensorF random_batch(std::size_t n, std::size_t c, std::size_t s,
                     std::uint64_t seed) {
    Rng rng(seed);
    TensorF t(Shape{n, c, s, s});
    for (std::size_t i = 0; i < t.numel(); ++i)
        t.data()[i] = float(rng.uniform(-1.0, 1.0));
    return t;
}

TensorF mirror_cols(const TensorF& t) {
    const Shape& s = t.shape();
    TensorF out(s);
    for (std::size_t n = 0; n < s[0]; ++n)
        for (std::size_t c = 0; c < s[1]; ++c)
            for (std::size_t y = 0; y < s[2]; ++y)
                for (std::size_t x = 0; x < s[3]; ++x)
                    out.at(n, c, y, x) = t.at(n, c, y, s[3] - 1 - x);
    return out;
}

bool same_values(const TensorF& a, const TensorF& b, float tol = 0.0f) {
    if (!(a.shape() == b.shape())) return false;
    for (std::size_t i = 0; i < a.numel(); ++i)
        if (std::abs(a.data()[i] - b.data()[i]) > tol) return false;
    return true;
}

} // namespace

TEST_CASE("policy strings parse into transform flags") {
    DiffAugPolicy none = parse_policy("");
    REQUIRE_FALSE(none.any());

    DiffAugPolicy c = parse_policy("color");
    REQUIRE(c.color);
    REQUIRE_FALSE(c.translation);
    REQUIRE_FALSE(c.cutout);

    DiffAugPolicy all = parse_policy("color,translation,cutout");
    REQUIRE((all.color && all.translation && all.cutout));

    DiffAugPolicy spaced = parse_policy(" color ,  cutout ");
    REQUIRE((spaced.color && spaced.cutout));
    REQUIRE_FALSE(spaced.translation);

    REQUIRE_NOTHROW(parse_policy("color,,cutout")); // empty tokens ignored
    REQUIRE_THROWS_AS(parse_policy("colour"), ConfigError);
    REQUIRE_THROWS_AS(parse_policy("color,flips"), ConfigError);
}

TEST_CASE("bilinear resize with half-pixel centers matches hand values") {
    // identity when sizes match
    TensorF x = random_batch(1, 2, 3, 11);
    REQUIRE(same_values(bilinear_resize(x, 3, 3), x));

    // 2x upsample of a 2x2 patch, evaluated by hand at every output pixel
    TensorF small(Shape{1, 1, 2, 2}, std::vector<float>{0, 1, 2, 3});
    TensorF up = bilinear_resize(small, 4, 4);
    const float expect[16] = {0.0f,  0.25f, 0.75f, 1.0f,  0.5f,  0.75f,
                              1.25f, 1.5f,  1.5f,  1.75f, 2.25f, 2.5f,
                              2.0f,  2.25f, 2.75f, 3.0f};
    for (std::size_t i = 0; i < 16; ++i)
        REQUIRE(up.data()[i] == Catch::Approx(expect[i]).margin(1e-6));

    // 2x downsample of a ramp averages each 2x2 block
    std::vector<float> ramp(16);
    for (std::size_t i = 0; i < 16; ++i) ramp[i] = float(i);
    TensorF down = bilinear_resize(TensorF(Shape{1, 1, 4, 4}, ramp), 2, 2);
    REQUIRE(down.at(0, 0, 0, 0) == Catch::Approx(2.5).margin(1e-6));
    REQUIRE(down.at(0, 0, 0, 1) == Catch::Approx(4.5).margin(1e-6));
    REQUIRE(down.at(0, 0, 1, 0) == Catch::Approx(10.5).margin(1e-6));
    REQUIRE(down.at(0, 0, 1, 1) == Catch::Approx(12.5).margin(1e-6));

    // constants are fixed points at any size
    TensorF flat(Shape{1, 1, 5, 5}, 0.37f);
    TensorF flat9 = bilinear_resize(flat, 9, 9);
    for (std::size_t i = 0; i < flat9.numel(); ++i)
        REQUIRE(flat9.data()[i] == Catch::Approx(0.37f).margin(1e-6));

    REQUIRE_THROWS_AS(bilinear_resize(x, 0, 4), ArgumentError);
    REQUIRE_THROWS_AS(bilinear_resize(TensorF(Shape{2, 2}), 4, 4),
                      DimensionError);
}

TEST_CASE("training augmentation crops and flips exactly as drawn") {
    const std::size_t size = 64;
    TensorF batch = random_batch(3, 3, size, 21);

    Rng rng(99);
    TensorF out = standard_augment(batch, rng);
    REQUIRE(out.shape() == batch.shape());

    // replay the same draw sequence and rebuild the output independently
    const std::size_t up = 72; // lround(1.12 * 64)
    const std::size_t margin = up - size;
    TensorF big = bilinear_resize(batch, up, up);
    Rng replay(99);
    TensorF expect(batch.shape());
    bool saw_flip = false, saw_noflip = false;
    for (std::size_t i = 0; i < 3; ++i) {
        const std::size_t oy = replay.uniform_index(margin + 1);
        const std::size_t ox = replay.uniform_index(margin + 1);
        const bool flip = replay.bernoulli(0.5);
        (flip ? saw_flip : saw_noflip) = true;
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t y = 0; y < size; ++y)
                for (std::size_t x = 0; x < size; ++x)
                    expect.at(i, c, y, x) =
                        big.at(i, c, oy + y, ox + (flip ? size - 1 - x : x));
    }
    REQUIRE(same_values(out, expect));

    // mirroring is an involution, so mirrored draw decisions undo each other
    REQUIRE(same_values(mirror_cols(mirror_cols(out)), out));
    REQUIRE_FALSE(same_values(mirror_cols(expect), expect));

    // deterministic given the seed
    Rng again(99);
    REQUIRE(same_values(standard_augment(batch, again), out));

    // different stream, different crops
    Rng other(100);
    REQUIRE_FALSE(same_values(standard_augment(batch, other), out));

    REQUIRE_THROWS_AS(standard_augment(TensorF(Shape{3, 64, 64}), rng),
                      DimensionError);
}

TEST_CASE("augmentation keeps constant images constant") {
    TensorF flat(Shape{2, 3, 32, 32}, -0.25f);
    Rng rng(5);
    TensorF out = standard_augment(flat, rng);
    for (std::size_t i = 0; i < out.numel(); ++i)
        REQUIRE(out.data()[i] == Catch::Approx(-0.25f).margin(1e-6));
}

TEST_CASE("empty policy returns the input untouched") {
    VarF x = make_leaf(random_batch(2, 3, 16, 3), false);
    DiffAugParams<float> params;
    VarF out = diffaug_apply(x, DiffAugPolicy{}, params);
    REQUIRE(out == x); // the very same node, not a copy
}

TEST_CASE("translation shifts columns and zero-fills the vacated band") {
    const std::size_t size = 64;
    VarF x = make_leaf(random_batch(1, 3, size, 7), false);
    DiffAugPolicy policy;
    policy.translation = true;
    DiffAugParams<float> params;
    params.shift_x = {8};
    params.shift_y = {0};
    VarF out = diffaug_apply(x, policy, params);
    const TensorF& o = out->value;
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t y = 0; y < size; ++y) {
            for (std::size_t col = 0; col < 8; ++col)
                REQUIRE(o.at(0, c, y, col) == 0.0f);
            for (std::size_t col = 8; col < size; ++col)
                REQUIRE(o.at(0, c, y, col) == x->value.at(0, c, y, col - 8));
        }
}

TEST_CASE("cutout zeroes one half-size square per image") {
    const std::size_t size = 64;
    // strictly positive input so zeros can only come from the mask
    TensorF base = random_batch(2, 3, size, 13);
    for (std::size_t i = 0; i < base.numel(); ++i)
        base.data()[i] = std::abs(base.data()[i]) + 0.01f;
    VarF x = make_leaf(std::move(base), false);

    DiffAugPolicy policy;
    policy.cutout = true;
    DiffAugParams<float> params;
    params.cut_y = {5, 0};
    params.cut_x = {9, 32};
    VarF out = diffaug_apply(x, policy, params);

    for (std::size_t n = 0; n < 2; ++n) {
        std::size_t zeros = 0;
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t y = 0; y < size; ++y)
                for (std::size_t xx = 0; xx < size; ++xx)
                    if (out->value.at(n, c, y, xx) == 0.0f) {
                        ++zeros;
                        REQUIRE(y >= params.cut_y[n]);
                        REQUIRE(y < params.cut_y[n] + 32);
                        REQUIRE(xx >= params.cut_x[n]);
                        REQUIRE(xx < params.cut_x[n] + 32);
                    }
        REQUIRE(zeros == 32 * 32 * 3);
    }
}

TEST_CASE("sampled parameters stay in their documented ranges") {
    DiffAugPolicy all = parse_policy("color,translation,cutout");
    Rng rng(77);
    auto p = DiffAugParams<float>::sample(all, 64, 64, rng);
    REQUIRE(p.brightness.size() == 64);
    for (float b : p.brightness) {
        REQUIRE(b >= -0.5f);
        REQUIRE(b < 0.5f);
    }
    for (float s : p.saturation) {
        REQUIRE(s >= 0.0f);
        REQUIRE(s < 2.0f);
    }
    for (float c : p.contrast) {
        REQUIRE(c >= 0.5f);
        REQUIRE(c < 1.5f);
    }
    bool shift_seen_nonzero = false;
    for (std::size_t i = 0; i < 64; ++i) {
        REQUIRE(p.shift_x[i] >= -8);
        REQUIRE(p.shift_x[i] <= 8);
        REQUIRE(p.shift_y[i] >= -8);
        REQUIRE(p.shift_y[i] <= 8);
        shift_seen_nonzero |= (p.shift_x[i] != 0 || p.shift_y[i] != 0);
        REQUIRE(p.cut_y[i] <= 32);
        REQUIRE(p.cut_x[i] <= 32);
    }
    REQUIRE(shift_seen_nonzero);

    // same stream position -> identical parameters
    Rng a(123), b(123);
    auto pa = DiffAugParams<float>::sample(all, 8, 64, a);
    auto pb = DiffAugParams<float>::sample(all, 8, 64, b);
    REQUIRE(pa.brightness == pb.brightness);
    REQUIRE(pa.saturation == pb.saturation);
    REQUIRE(pa.contrast == pb.contrast);
    REQUIRE(pa.shift_x == pb.shift_x);
    REQUIRE(pa.cut_y == pb.cut_y);

    // policy off -> nothing drawn for that transform
    auto pc = DiffAugParams<float>::sample(parse_policy("cutout"), 4, 64, a);
    REQUIRE(pc.brightness.empty());
    REQUIRE(pc.shift_x.empty());
    REQUIRE(pc.cut_y.size() == 4);
}

TEST_CASE("applying with mismatched parameter batch is rejected") {
    VarF x = make_leaf(random_batch(3, 3, 16, 1), false);
    DiffAugPolicy policy = parse_policy("translation");
    DiffAugParams<float> params;
    params.shift_x = {1, 2}; // sampled for 2, applied to 3
    params.shift_y = {0, 0};
    REQUIRE_THROWS_AS(diffaug_apply(x, policy, params), ArgumentError);

    DiffAugPolicy color = parse_policy("color");
    DiffAugParams<float> none;
    REQUIRE_THROWS_AS(diffaug_apply(x, color, none), ArgumentError);
}

TEST_CASE("same parameter draw transforms two batches identically") {
    // the trainer applies one sampled transform set to both real and
    // generated batches; identical inputs must then map to identical outputs
    DiffAugPolicy all = parse_policy("color,translation,cutout");
    Rng rng(31);
    auto params = DiffAugParams<float>::sample(all, 2, 32, rng);
    TensorF imgs = random_batch(2, 3, 32, 17);
    VarF a = make_leaf(TensorF(imgs), false);
    VarF b = make_leaf(TensorF(imgs), false);
    REQUIRE(same_values(diffaug_apply(a, all, params)->value,
                        diffaug_apply(b, all, params)->value));
}

TEST_CASE("color pipeline gradient matches finite differences") {
    // double precision end-to-end so central differences resolve the slope
    Rng rng(41);
    Tensor<double> base(Shape{2, 3, 8, 8});
    for (std::size_t i = 0; i < base.numel(); ++i)
        base.data()[i] = rng.uniform(-1.0, 1.0);

    DiffAugPolicy color = parse_policy("color");
    Rng prng(42);
    auto params = DiffAugParams<double>::sample(color, 2, 8, prng);

    auto loss_at = [&](const Tensor<double>& t) {
        NoGradGuard guard;
        Var<double> leaf = make_leaf(Tensor<double>(t), false);
        return scalar(mean_all(diffaug_apply(leaf, color, params)));
    };

    Var<double> leaf = make_leaf(Tensor<double>(base), true);
    Var<double> loss = mean_all(diffaug_apply(leaf, color, params));
    backward(loss);

    const double h = 1e-6;
    std::size_t checked = 0;
    Rng pick(43);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t idx = pick.uniform_index(base.numel());
        Tensor<double> plus(base), minus(base);
        plus.data()[idx] += h;
        minus.data()[idx] -= h;
        const double fd = (loss_at(plus) - loss_at(minus)) / (2 * h);
        const double an = leaf->grad.data()[idx];
        const double tol = 1e-3 * std::max({std::abs(an), std::abs(fd), 1e-8});
        REQUIRE(std::abs(an - fd) <= tol);
        ++checked;
    }
    REQUIRE(checked == 30);
}
