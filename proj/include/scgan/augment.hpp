#ifndef SCGAN_AUGMENT_HPP
#define SCGAN_AUGMENT_HPP

#include <cmath>
#include <string>
#include <vector>

#include "scgan/common.hpp"
#include "scgan/ops.hpp"
#include "scgan/resize.hpp"
#include "scgan/rng.hpp"

namespace scgan {

// ---------------------------------------------------------------------------
// Differentiable augmentation for discriminator inputs, plus the standard
// resize-crop-flip augmentation for training data.
//
// The differentiable pipeline applies up to three transforms in the fixed
// order color -> translation -> cutout. Parameters are sampled once per
// batch item and held in a DiffAugParams value so the same transforms can
// be applied to every batch a discriminator sees within one training step
// (real and generated alike).
// ---------------------------------------------------------------------------

struct DiffAugPolicy {
    bool color = false, translation = false, cutout = false;

    bool any() const { return color || translation || cutout; }
};

// Comma-separated tokens from {color, translation, cutout}; empty string
// means no augmentation. Unknown tokens are configuration errors.
inline DiffAugPolicy parse_policy(const std::string& text) {
    DiffAugPolicy policy;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        std::string tok = text.substr(pos, comma - pos);
        // trim ascii whitespace
        while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.front())))
            tok.erase(tok.begin());
        while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.back())))
            tok.pop_back();
        if (!tok.empty()) {
            if (tok == "color") policy.color = true;
            else if (tok == "translation") policy.translation = true;
            else if (tok == "cutout") policy.cutout = true;
            else fail<ConfigError>("unknown augmentation token: '", tok,
                                   "' (expected color, translation, cutout)");
        }
        pos = comma + 1;
    }
    return policy;
}

// Per-item transform parameters for one discriminator within one step.
template <typename T>
struct DiffAugParams {
    std::vector<T> brightness;  // additive, U(-0.5, 0.5)
    std::vector<T> saturation;  // scale about per-pixel channel mean, U(0, 2)
    std::vector<T> contrast;    // scale about per-image mean, U(0.5, 1.5)
    std::vector<int> shift_x, shift_y; // integers in [-size/8, size/8]
    std::vector<std::size_t> cut_y, cut_x; // cutout corner in [0, size-size/2]

    // Draw in a fixed canonical order so the sequence is reproducible from
    // the rng stream alone.
    static DiffAugParams sample(const DiffAugPolicy& policy, std::size_t n,
                                std::size_t image_size, Rng& rng) {
        DiffAugParams p;
        if (policy.color) {
            p.brightness.resize(n);
            p.saturation.resize(n);
            p.contrast.resize(n);
            for (std::size_t i = 0; i < n; ++i)
                p.brightness[i] = T(rng.uniform(-0.5, 0.5));
            for (std::size_t i = 0; i < n; ++i)
                p.saturation[i] = T(rng.uniform(0.0, 2.0));
            for (std::size_t i = 0; i < n; ++i)
                p.contrast[i] = T(rng.uniform(0.5, 1.5));
        }
        if (policy.translation) {
            const std::size_t m = image_size / 8;
            p.shift_x.resize(n);
            p.shift_y.resize(n);
            for (std::size_t i = 0; i < n; ++i)
                p.shift_x[i] = int(rng.uniform_index(2 * m + 1)) - int(m);
            for (std::size_t i = 0; i < n; ++i)
                p.shift_y[i] = int(rng.uniform_index(2 * m + 1)) - int(m);
        }
        if (policy.cutout) {
            const std::size_t span = image_size - image_size / 2; // inclusive max
            p.cut_y.resize(n);
            p.cut_x.resize(n);
            for (std::size_t i = 0; i < n; ++i)
                p.cut_y[i] = rng.uniform_index(span + 1);
            for (std::size_t i = 0; i < n; ++i)
                p.cut_x[i] = rng.uniform_index(span + 1);
        }
        return p;
    }
};

// Differentiable application; x is (n,3,s,s) and params must have been
// sampled for the same n and s.
template <typename T>
Var<T> diffaug_apply(const Var<T>& x, const DiffAugPolicy& policy,
                     const DiffAugParams<T>& params) {
    if (!policy.any()) return x;
    const Shape& s = x->value.shape();
    SCGAN_CHECK(s.rank() == 4, DimensionError, "diffaug expects a rank-4 batch");
    const std::size_t n = s[0], size = s[2];
    Var<T> h = x;
    if (policy.color) {
        SCGAN_CHECK(params.brightness.size() == n, ArgumentError,
                    "diffaug params sampled for batch ",
                    params.brightness.size(), ", applied to ", n);
        h = brightness_shift(h, params.brightness);
        h = saturation_scale(h, params.saturation);
        h = contrast_scale(h, params.contrast);
    }
    if (policy.translation) {
        SCGAN_CHECK(params.shift_x.size() == n, ArgumentError,
                    "diffaug params sampled for batch ", params.shift_x.size(),
                    ", applied to ", n);
        h = translate2d(h, params.shift_x, params.shift_y);
    }
    if (policy.cutout) {
        SCGAN_CHECK(params.cut_y.size() == n, ArgumentError,
                    "diffaug params sampled for batch ", params.cut_y.size(),
                    ", applied to ", n);
        h = cutout2d(h, params.cut_y, params.cut_x, size / 2);
    }
    return h;
}

// Training-data augmentation: upscale to 1.12x the target size, take a
// random crop back to target, and mirror horizontally with probability 0.5.
// Per-image draws in order (crop_y, crop_x, flip). Plain tensors; never
// differentiated.
template <typename T>
Tensor<T> standard_augment(const Tensor<T>& batch, Rng& rng) {
    const Shape& s = batch.shape();
    SCGAN_CHECK(s.rank() == 4, DimensionError,
                "standard_augment expects a rank-4 batch");
    const std::size_t n = s[0], c = s[1], size = s[2];
    SCGAN_CHECK(s[2] == s[3], DimensionError, "images must be square");
    const std::size_t up =
        static_cast<std::size_t>(std::lround(1.12 * double(size)));
    Tensor<T> big = bilinear_resize(batch, up, up);
    Tensor<T> out(s);
    const std::size_t margin = up - size;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t oy = rng.uniform_index(margin + 1);
        const std::size_t ox = rng.uniform_index(margin + 1);
        const bool flip = rng.bernoulli(0.5);
        for (std::size_t ch = 0; ch < c; ++ch)
            for (std::size_t y = 0; y < size; ++y)
                for (std::size_t xx = 0; xx < size; ++xx) {
                    const std::size_t sx = flip ? (size - 1 - xx) : xx;
                    out.at(i, ch, y, xx) = big.at(i, ch, oy + y, ox + sx);
                }
    }
    return out;
}

} // namespace scgan

#endif
