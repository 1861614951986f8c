#ifndef SCGAN_NN_HPP
#define SCGAN_NN_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "scgan/common.hpp"
#include "scgan/ops.hpp"
#include "scgan/rng.hpp"
#include "scgan/tape.hpp"

namespace scgan {

// ---------------------------------------------------------------------------
// Model definitions.
//
// Generator: 7x7 stem, two stride-2 downsampling convs, a chain of residual
// blocks at the bottleneck, two stride-2 transposed convs back up, 7x7 head
// with tanh. Reflection padding and instance norm throughout; shape-
// preserving for any input with spatial size divisible by 4.
//
// SslDiscriminator: stack of stride-2 4x4 convs (LeakyReLU 0.2, instance
// norm after all but the first) with two tapped feature maps — f_part at
// 16x16 and f_full at 8x8 — a 1x1 patch-logit head at spatial size/16, and
// two four-conv decoders that reconstruct 64x64 images from f_full and from
// an 8x8 quadrant crop of f_part. The decoders give the discriminator its
// self-supervised reconstruction task on real samples.
// ---------------------------------------------------------------------------

// Named parameter registry. Registration order defines checkpoint order;
// initialization is keyed by name so it is order-independent.
template <typename T>
class ParamStore {
public:
    Var<T> add(const std::string& name, Tensor<T> init) {
        for (const auto& [existing, _] : items_)
            SCGAN_CHECK(existing != name, ArgumentError,
                        "duplicate parameter name: ", name);
        Var<T> p = make_param(std::move(init));
        items_.emplace_back(name, p);
        return p;
    }

    const std::vector<std::pair<std::string, Var<T>>>& items() const {
        return items_;
    }

    Var<T> find(const std::string& name) const {
        for (const auto& [n, p] : items_)
            if (n == name) return p;
        fail<ArgumentError>("unknown parameter: ", name);
    }

    std::size_t total_count() const {
        std::size_t n = 0;
        for (const auto& [_, p] : items_) n += p->value.numel();
        return n;
    }

private:
    std::vector<std::pair<std::string, Var<T>>> items_;
};

template <typename T>
void set_requires_grad(const std::vector<std::pair<std::string, Var<T>>>& ps,
                       bool on) {
    for (const auto& [_, p] : ps) p->needs_grad = on;
}

// Weight init: N(0, 0.02) weights, zero biases, each tensor drawn from a
// stream keyed by (seed, parameter name) so values do not depend on
// construction order.
template <typename T>
void init_params(ParamStore<T>& params, std::uint64_t seed) {
    for (const auto& [name, p] : params.items()) {
        const bool is_bias = name.size() >= 4 &&
                             name.compare(name.size() - 4, 4, "bias") == 0;
        if (is_bias) {
            p->value.fill(T(0));
        } else {
            Rng rng = Rng::stream(seed, "init." + name);
            for (std::size_t i = 0; i < p->value.numel(); ++i)
                p->value[i] = T(rng.normal(0.0, 0.02));
        }
    }
}

// --- layers ----------------------------------------------------------------

template <typename T>
struct Conv2dLayer {
    Var<T> weight, bias;
    int stride = 1, pad = 0;

    Conv2dLayer() = default;
    Conv2dLayer(ParamStore<T>& ps, const std::string& prefix, std::size_t c_in,
                std::size_t c_out, std::size_t k, int stride_, int pad_)
        : stride(stride_), pad(pad_) {
        weight = ps.add(prefix + ".weight", Tensor<T>(Shape{c_out, c_in, k, k}));
        bias = ps.add(prefix + ".bias", Tensor<T>(Shape{c_out}));
    }

    Var<T> operator()(const Var<T>& x) const {
        return conv2d(x, weight, bias, stride, pad);
    }
};

template <typename T>
struct ConvTranspose2dLayer {
    Var<T> weight, bias;

    ConvTranspose2dLayer() = default;
    ConvTranspose2dLayer(ParamStore<T>& ps, const std::string& prefix,
                         std::size_t c_in, std::size_t c_out)
        : weight(ps.add(prefix + ".weight", Tensor<T>(Shape{c_in, c_out, 3, 3}))),
          bias(ps.add(prefix + ".bias", Tensor<T>(Shape{c_out}))) {}

    // Fixed stride-2 exact doubler: 3x3, pad 1, output padding 1.
    Var<T> operator()(const Var<T>& x) const {
        return conv_transpose2d(x, weight, bias, 2, 1, 1);
    }
};

// --- generator -------------------------------------------------------------

template <typename T>
struct ResidualBlock {
    Conv2dLayer<T> conv1, conv2;

    ResidualBlock() = default;
    ResidualBlock(ParamStore<T>& ps, const std::string& prefix, std::size_t ch)
        : conv1(ps, prefix + ".conv1", ch, ch, 3, 1, 0),
          conv2(ps, prefix + ".conv2", ch, ch, 3, 1, 0) {}

    Var<T> operator()(const Var<T>& x) const {
        auto h = relu(instance_norm(conv1(pad2d_reflect(x, 1))));
        h = instance_norm(conv2(pad2d_reflect(h, 1)));
        return add(x, h);
    }
};

template <typename T>
class Generator {
public:
    Generator() = default;

    Generator(ParamStore<T>& ps, const std::string& prefix,
              std::size_t n_res = 9, std::size_t base = 64)
        : stem_(ps, prefix + ".stem", 3, base, 7, 1, 0),
          down1_(ps, prefix + ".down1", base, base * 2, 3, 2, 0),
          down2_(ps, prefix + ".down2", base * 2, base * 4, 3, 2, 0),
          up1_(ps, prefix + ".up1", base * 4, base * 2),
          up2_(ps, prefix + ".up2", base * 2, base),
          head_(ps, prefix + ".head", base, 3, 7, 1, 0) {
        res_.reserve(n_res);
        for (std::size_t i = 0; i < n_res; ++i)
            res_.emplace_back(ps, cat(prefix, ".res", i), base * 4);
    }

    Var<T> operator()(const Var<T>& x) const {
        const Shape& s = x->value.shape();
        SCGAN_CHECK(s.rank() == 4 && s[1] == 3, DimensionError,
                    "generator expects (n,3,h,w), got ", s.str());
        SCGAN_CHECK(s[2] % 4 == 0 && s[3] % 4 == 0, DimensionError,
                    "generator input spatial size must be divisible by 4, got ",
                    s[2], "x", s[3]);
        auto h = relu(instance_norm(stem_(pad2d_reflect(x, 3))));
        h = relu(instance_norm(down1_(pad2d_reflect(h, 1))));
        h = relu(instance_norm(down2_(pad2d_reflect(h, 1))));
        for (const auto& block : res_) h = block(h);
        h = relu(instance_norm(up1_(h)));
        h = relu(instance_norm(up2_(h)));
        return tanh_op(head_(pad2d_reflect(h, 3)));
    }

private:
    Conv2dLayer<T> stem_, down1_, down2_;
    std::vector<ResidualBlock<T>> res_;
    ConvTranspose2dLayer<T> up1_, up2_;
    Conv2dLayer<T> head_;
};

// --- self-supervised discriminator -----------------------------------------

enum class Quadrant { top_left, top_right, bottom_left, bottom_right };

inline const char* quadrant_name(Quadrant q) {
    switch (q) {
        case Quadrant::top_left: return "top_left";
        case Quadrant::top_right: return "top_right";
        case Quadrant::bottom_left: return "bottom_left";
        case Quadrant::bottom_right: return "bottom_right";
    }
    return "?";
}

template <typename T>
struct DiscOutput {
    Var<T> logits; // (n, 1, s/16, s/16)
    Var<T> f_part; // (n, c_part, 16, 16)
    Var<T> f_full; // (n, c_full, 8, 8)
};

// Four plain convs, the first three preceded by x2 nearest upsampling:
// c_in -> 128 -> 64 -> 32 -> 3, LeakyReLU between, tanh out, no norm.
// Maps an 8x8 feature map to a 64x64 image.
template <typename T>
struct Decoder {
    Conv2dLayer<T> c1, c2, c3, c4;

    Decoder() = default;
    Decoder(ParamStore<T>& ps, const std::string& prefix, std::size_t c_in)
        : c1(ps, prefix + ".c1", c_in, 128, 3, 1, 1),
          c2(ps, prefix + ".c2", 128, 64, 3, 1, 1),
          c3(ps, prefix + ".c3", 64, 32, 3, 1, 1),
          c4(ps, prefix + ".c4", 32, 3, 3, 1, 1) {}

    Var<T> operator()(const Var<T>& f) const {
        auto h = leaky_relu(c1(upsample_nearest2x(f)), T(0.2));
        h = leaky_relu(c2(upsample_nearest2x(h)), T(0.2));
        h = leaky_relu(c3(upsample_nearest2x(h)), T(0.2));
        return tanh_op(c4(h));
    }
};

template <typename T>
class SslDiscriminator {
public:
    SslDiscriminator() = default;

    SslDiscriminator(ParamStore<T>& ps, const std::string& prefix,
                     std::size_t image_size)
        : image_size_(image_size) {
        SCGAN_CHECK(image_size >= 64 && (image_size & (image_size - 1)) == 0,
                    DimensionError,
                    "discriminator needs a power-of-two image size >= 64, got ",
                    image_size);
        // Stride-2 stages: 64, 128, 256, 512, then 512 for every further
        // halving. Taps are placed by absolute spatial size; the encoder
        // descends far enough to cover both the 8x8 tap and the size/16
        // logit head.
        std::size_t spatial = image_size, c_in = 3, c_out = 64;
        std::size_t index = 0;
        while (spatial > 8 || spatial > image_size / 16) {
            stages_.emplace_back(ps, cat(prefix, ".enc", index), c_in, c_out, 4,
                                 2, 1);
            spatial /= 2;
            if (spatial == 16) { part_stage_ = index; c_part_ = c_out; }
            if (spatial == 8) { full_stage_ = index; c_full_ = c_out; }
            if (spatial == image_size / 16) {
                head_stage_ = index;
                head_ = Conv2dLayer<T>(ps, prefix + ".patch_head", c_out, 1, 1,
                                       1, 0);
            }
            c_in = c_out;
            c_out = std::min<std::size_t>(c_out * 2, 512);
            ++index;
        }
        SCGAN_CHECK(c_part_ > 0 && c_full_ > 0 && head_.weight, Error,
                    "discriminator taps not wired for size ", image_size);
        dec_full_ = Decoder<T>(ps, prefix + ".dec_full", c_full_);
        dec_part_ = Decoder<T>(ps, prefix + ".dec_part", c_part_);
    }

    DiscOutput<T> operator()(const Var<T>& x) const {
        const Shape& s = x->value.shape();
        SCGAN_CHECK(s.rank() == 4 && s[1] == 3, DimensionError,
                    "discriminator expects (n,3,h,w), got ", s.str());
        SCGAN_CHECK(s[2] == image_size_ && s[3] == image_size_, DimensionError,
                    "discriminator built for ", image_size_, "px, got ", s[2],
                    "x", s[3]);
        DiscOutput<T> out;
        Var<T> h = x;
        for (std::size_t i = 0; i < stages_.size(); ++i) {
            h = stages_[i](h);
            if (i > 0) h = instance_norm(h);
            h = leaky_relu(h, T(0.2));
            if (i == part_stage_) out.f_part = h;
            if (i == full_stage_) out.f_full = h;
            if (i == head_stage_) out.logits = head_(h);
        }
        return out;
    }

    // Reconstruct a 64x64 image from the full 8x8 feature map.
    Var<T> decode_full(const Var<T>& f_full) {
        SCGAN_CHECK(f_full->value.shape()[2] == 8 &&
                        f_full->value.shape()[3] == 8,
                    DimensionError, "decode_full expects an 8x8 map, got ",
                    f_full->value.shape().str());
        ++decode_full_calls_;
        return dec_full_(f_full);
    }

    // Crop the named 8x8 quadrant out of the 16x16 f_part map and decode it.
    Var<T> decode_part(const Var<T>& f_part, Quadrant q) {
        SCGAN_CHECK(f_part->value.shape()[2] == 16 &&
                        f_part->value.shape()[3] == 16,
                    DimensionError, "decode_part expects a 16x16 map, got ",
                    f_part->value.shape().str());
        const std::size_t h0 = (q == Quadrant::bottom_left ||
                                q == Quadrant::bottom_right)
                                   ? 8
                                   : 0;
        const std::size_t w0 = (q == Quadrant::top_right ||
                                q == Quadrant::bottom_right)
                                   ? 8
                                   : 0;
        ++decode_part_calls_;
        return dec_part_(crop2d(f_part, h0, w0, 8, 8));
    }

    std::size_t image_size() const { return image_size_; }
    std::size_t part_channels() const { return c_part_; }
    std::size_t full_channels() const { return c_full_; }
    std::size_t stage_count() const { return stages_.size(); }

    // Structural accounting used to assert that baseline configurations do
    // no self-supervision work at all.
    std::size_t decode_full_calls() const { return decode_full_calls_; }
    std::size_t decode_part_calls() const { return decode_part_calls_; }

private:
    std::size_t image_size_ = 0;
    std::vector<Conv2dLayer<T>> stages_;
    Conv2dLayer<T> head_;
    Decoder<T> dec_full_, dec_part_;
    std::size_t part_stage_ = 0, full_stage_ = 0, head_stage_ = 0;
    std::size_t c_part_ = 0, c_full_ = 0;
    std::size_t decode_full_calls_ = 0, decode_part_calls_ = 0;
};

// --- full two-domain model -------------------------------------------------

// Both generators and both discriminators plus all parameters, ready for
// training: gen_ab maps domain A to B, disc_b judges domain-B images, and
// symmetrically for the reverse direction.
template <typename T>
struct TranslationModel {
    ParamStore<T> params;
    Generator<T> gen_ab, gen_ba;
    SslDiscriminator<T> disc_a, disc_b;

    TranslationModel(std::size_t image_size, std::uint64_t seed,
                     std::size_t n_res = 9)
        : gen_ab((check_size(image_size), params), "gen_ab", n_res),
          gen_ba(params, "gen_ba", n_res),
          disc_a(params, "disc_a", image_size),
          disc_b(params, "disc_b", image_size) {
        init_params(params, seed);
    }

    std::vector<std::pair<std::string, Var<T>>> generator_params() const {
        return params_with_prefix("gen_");
    }

    std::vector<std::pair<std::string, Var<T>>> discriminator_params() const {
        return params_with_prefix("disc_");
    }

private:
    static void check_size(std::size_t image_size) {
        SCGAN_CHECK(image_size == 64 || image_size == 128 || image_size == 256,
                    ConfigError, "image_size must be one of 64, 128, 256; got ",
                    image_size);
    }

    std::vector<std::pair<std::string, Var<T>>> params_with_prefix(
        const std::string& prefix) const {
        std::vector<std::pair<std::string, Var<T>>> out;
        for (const auto& item : params.items())
            if (item.first.compare(0, prefix.size(), prefix) == 0)
                out.push_back(item);
        return out;
    }
};

} // namespace scgan

#endif
