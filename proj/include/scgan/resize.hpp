#ifndef SCGAN_RESIZE_HPP
#define SCGAN_RESIZE_HPP

#include <algorithm>
#include <cmath>

#include "scgan/common.hpp"
#include "scgan/tensor.hpp"

namespace scgan {

// Bilinear resampling with half-pixel centers: source coordinate for output
// index i is (i + 0.5) * (in/out) - 0.5, clamped at the edges. When the
// sizes match, every sample lands exactly on a pixel center and the result
// equals the input. Used for dataset loading, augmentation, reconstruction
// targets, and the flatten-downsample feature extractor; not differentiated.
template <typename T>
Tensor<T> bilinear_resize(const Tensor<T>& x, std::size_t out_h,
                          std::size_t out_w) {
    const Shape& s = x.shape();
    SCGAN_CHECK(s.rank() == 3 || s.rank() == 4, DimensionError,
                "bilinear_resize expects (c,h,w) or (n,c,h,w), got ", s.str());
    SCGAN_CHECK(out_h > 0 && out_w > 0, ArgumentError,
                "resize target must be positive");
    const bool batched = s.rank() == 4;
    const std::size_t n = batched ? s[0] : 1;
    const std::size_t c = batched ? s[1] : s[0];
    const std::size_t in_h = batched ? s[2] : s[1];
    const std::size_t in_w = batched ? s[3] : s[2];

    // per-axis sample positions
    std::vector<std::size_t> y0(out_h), y1(out_h), x0(out_w), x1(out_w);
    std::vector<T> wy(out_h), wx(out_w);
    auto plan = [](std::size_t out, std::size_t in, std::vector<std::size_t>& i0,
                   std::vector<std::size_t>& i1, std::vector<T>& w) {
        const double scale = double(in) / double(out);
        for (std::size_t i = 0; i < out; ++i) {
            double src = (double(i) + 0.5) * scale - 0.5;
            src = std::max(0.0, std::min(src, double(in - 1)));
            const std::size_t lo = static_cast<std::size_t>(std::floor(src));
            i0[i] = lo;
            i1[i] = std::min(lo + 1, in - 1);
            w[i] = T(src - double(lo));
        }
    };
    plan(out_h, in_h, y0, y1, wy);
    plan(out_w, in_w, x0, x1, wx);

    Shape out_shape = batched ? Shape{n, c, out_h, out_w}
                              : Shape{c, out_h, out_w};
    Tensor<T> out(out_shape);
    const std::size_t planes = n * c;
    for (std::size_t p = 0; p < planes; ++p) {
        const T* src = x.data() + p * in_h * in_w;
        T* dst = out.data() + p * out_h * out_w;
        for (std::size_t i = 0; i < out_h; ++i) {
            const T* r0 = src + y0[i] * in_w;
            const T* r1 = src + y1[i] * in_w;
            const T fy = wy[i];
            for (std::size_t j = 0; j < out_w; ++j) {
                const T top = r0[x0[j]] + (r0[x1[j]] - r0[x0[j]]) * wx[j];
                const T bot = r1[x0[j]] + (r1[x1[j]] - r1[x0[j]]) * wx[j];
                dst[i * out_w + j] = top + (bot - top) * fy;
            }
        }
    }
    return out;
}

} // namespace scgan

#endif
