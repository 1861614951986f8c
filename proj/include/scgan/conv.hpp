#ifndef SCGAN_CONV_HPP
#define SCGAN_CONV_HPP

#include <cstdlib>
#include <type_traits>
#include <vector>

#include "scgan/blas.hpp"
#include "scgan/common.hpp"
#include "scgan/tensor.hpp"
#include "scgan/winograd.hpp"

namespace scgan {

// ---------------------------------------------------------------------------
// Plain-tensor convolution kernels: im2col + GEMM as the reference path, with
// automatic dispatch to the Winograd implementation for unit-stride 3x3
// float32 convs. Gradients use the standard dualities:
//   input grad  = GEMM with the transposed weight matrix + col2im scatter
//   weight grad = output grad times the im2col matrix, accumulated over batch
// Transposed convolution reuses these three primitives with roles swapped.
// ---------------------------------------------------------------------------

namespace conv {

inline std::size_t out_extent(std::size_t in, std::size_t k, int stride,
                              int pad) {
    SCGAN_CHECK(in + 2 * std::size_t(pad) >= k, DimensionError,
                "conv input extent ", in, " too small for kernel ", k,
                " with padding ", pad);
    return (in + 2 * pad - k) / stride + 1;
}

// Winograd can be disabled for A/B comparisons without rebuilding.
inline bool winograd_allowed() {
    static const bool allowed = std::getenv("SCGAN_NO_WINOGRAD") == nullptr;
    return allowed;
}

template <typename T>
bool winograd_applies(std::size_t kh, std::size_t kw, int stride, int pad,
                      std::size_t out_h, std::size_t out_w) {
    return std::is_same_v<T, float> && winograd_allowed() &&
           winograd::applicable(kh, kw, stride, pad, out_h, out_w);
}

namespace detail {

// x plane set [C, H, W] -> col rows [C*kh*kw] of length out_h*out_w, zero
// padding. Row r lands at col + r*row_stride, so several images can share one
// column matrix side by side (row_stride = images_in_chunk * out_h*out_w).
template <typename T>
void im2col(const T* x, std::size_t c_cnt, std::size_t h, std::size_t w,
            std::size_t kh, std::size_t kw, int stride, int pad,
            std::size_t out_h, std::size_t out_w, T* col,
            std::size_t row_stride) {
    for (std::size_t c = 0; c < c_cnt; ++c)
        for (std::size_t ki = 0; ki < kh; ++ki)
            for (std::size_t kj = 0; kj < kw; ++kj) {
                T* row = col + ((c * kh + ki) * kw + kj) * row_stride;
                for (std::size_t oh = 0; oh < out_h; ++oh) {
                    const long ih = long(oh) * stride - pad + long(ki);
                    if (ih < 0 || ih >= long(h)) {
                        for (std::size_t ow = 0; ow < out_w; ++ow)
                            row[oh * out_w + ow] = T(0);
                        continue;
                    }
                    const T* src = x + (c * h + std::size_t(ih)) * w;
                    T* dst = row + oh * out_w;
                    const long base = -long(pad) + long(kj);
                    if (stride == 1 && base >= 0 && base + long(out_w) <= long(w)) {
                        std::copy_n(src + base, out_w, dst);
                        continue;
                    }
                    for (std::size_t ow = 0; ow < out_w; ++ow) {
                        const long iw = long(ow) * stride + base;
                        dst[ow] = (iw >= 0 && iw < long(w)) ? src[iw] : T(0);
                    }
                }
            }
}

// Adjoint of im2col: scatter-add col rows back into an image plane set.
template <typename T>
void col2im(const T* col, std::size_t c_cnt, std::size_t h, std::size_t w,
            std::size_t kh, std::size_t kw, int stride, int pad,
            std::size_t out_h, std::size_t out_w, T* x,
            std::size_t row_stride) {
    for (std::size_t c = 0; c < c_cnt; ++c)
        for (std::size_t ki = 0; ki < kh; ++ki)
            for (std::size_t kj = 0; kj < kw; ++kj) {
                const T* row = col + ((c * kh + ki) * kw + kj) * row_stride;
                for (std::size_t oh = 0; oh < out_h; ++oh) {
                    const long ih = long(oh) * stride - pad + long(ki);
                    if (ih < 0 || ih >= long(h)) continue;
                    T* dst = x + (c * h + std::size_t(ih)) * w;
                    const T* src = row + oh * out_w;
                    const long base = -long(pad) + long(kj);
                    if (stride == 1 && base >= 0 && base + long(out_w) <= long(w)) {
                        T* d = dst + base;
                        for (std::size_t ow = 0; ow < out_w; ++ow) d[ow] += src[ow];
                        continue;
                    }
                    for (std::size_t ow = 0; ow < out_w; ++ow) {
                        const long iw = long(ow) * stride + base;
                        if (iw >= 0 && iw < long(w)) dst[iw] += src[ow];
                    }
                }
            }
}

// Images per GEMM chunk under a fixed scratch budget. Batching several images
// into one column matrix turns many skinny GEMMs into one wide GEMM, which is
// where single-threaded BLAS earns its keep.
inline std::size_t chunk_images(std::size_t n, std::size_t bytes_per_image) {
    constexpr std::size_t scratch_cap = std::size_t(192) << 20;
    const std::size_t g = scratch_cap / std::max<std::size_t>(bytes_per_image, 1);
    return std::min(n, std::max<std::size_t>(g, 1));
}

} // namespace detail

// Forward convolution. x [N, C_in, H, W], w [C_out, C_in, kh, kw],
// bias [C_out] or nullptr.
template <typename T>
Tensor<T> forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>* bias,
                  int stride, int pad) {
    SCGAN_CHECK(x.shape().rank() == 4 && w.shape().rank() == 4, DimensionError,
                "conv expects rank-4 input and weight, got ", x.shape().str(),
                " and ", w.shape().str());
    const std::size_t n = x.shape()[0], c_in = x.shape()[1], h = x.shape()[2],
                      wd = x.shape()[3];
    const std::size_t c_out = w.shape()[0], kh = w.shape()[2],
                      kw = w.shape()[3];
    SCGAN_CHECK(w.shape()[1] == c_in, DimensionError, "conv weight expects ",
                w.shape()[1], " input channels, got ", c_in);
    const std::size_t out_h = out_extent(h, kh, stride, pad);
    const std::size_t out_w = out_extent(wd, kw, stride, pad);

    Tensor<T> y;
    if (winograd_applies<T>(kh, kw, stride, pad, out_h, out_w)) {
        y = winograd::conv_forward(x, w, pad);
    } else {
        y = Tensor<T>(Shape{n, c_out, out_h, out_w});
        const std::size_t ckk = c_in * kh * kw, hw = out_h * out_w;
        const std::size_t g =
            detail::chunk_images(n, (ckk + c_out) * hw * sizeof(T));
        std::vector<T> col(g * ckk * hw);
        std::vector<T> ybuf(g * c_out * hw);
        for (std::size_t s0 = 0; s0 < n; s0 += g) {
            const std::size_t gc = std::min(g, n - s0);
            const std::size_t row_stride = gc * hw;
            for (std::size_t i = 0; i < gc; ++i)
                detail::im2col(x.data() + (s0 + i) * c_in * h * wd, c_in, h,
                               wd, kh, kw, stride, pad, out_h, out_w,
                               col.data() + i * hw, row_stride);
            blas::matmul(w.data(), col.data(), ybuf.data(), int(c_out),
                         int(ckk), int(row_stride));
            for (std::size_t i = 0; i < gc; ++i)
                for (std::size_t oc = 0; oc < c_out; ++oc)
                    std::copy_n(ybuf.data() + oc * row_stride + i * hw, hw,
                                y.data() + ((s0 + i) * c_out + oc) * hw);
        }
    }
    if (bias) {
        SCGAN_CHECK(bias->numel() == c_out, DimensionError, "conv bias has ",
                    bias->numel(), " entries, expected ", c_out);
        const std::size_t hw = out_h * out_w;
        for (std::size_t s = 0; s < n; ++s)
            for (std::size_t oc = 0; oc < c_out; ++oc) {
                T* plane = y.data() + (s * c_out + oc) * hw;
                const T b = (*bias)[oc];
                for (std::size_t i = 0; i < hw; ++i) plane[i] += b;
            }
    }
    return y;
}

template <typename T>
Tensor<T> forward(const Tensor<T>& x, const Tensor<T>& w, int stride,
                  int pad) {
    return forward(x, w, static_cast<const Tensor<T>*>(nullptr), stride, pad);
}

// Gradient w.r.t. the input.
template <typename T>
Tensor<T> input_grad(const Tensor<T>& dy, const Tensor<T>& w,
                     const Shape& x_shape, int stride, int pad) {
    const std::size_t n = x_shape[0], c_in = x_shape[1], h = x_shape[2],
                      wd = x_shape[3];
    const std::size_t c_out = w.shape()[0], kh = w.shape()[2],
                      kw = w.shape()[3];
    const std::size_t out_h = dy.shape()[2], out_w = dy.shape()[3];
    if (winograd_applies<T>(kh, kw, stride, pad, out_h, out_w))
        return winograd::conv_input_grad(dy, w, x_shape, pad);

    Tensor<T> dx(Shape{n, c_in, h, wd});
    const std::size_t ckk = c_in * kh * kw, hw = out_h * out_w;
    const std::size_t g =
        detail::chunk_images(n, (ckk + c_out) * hw * sizeof(T));
    std::vector<T> dcol(g * ckk * hw);
    std::vector<T> dybuf(g * c_out * hw);
    for (std::size_t s0 = 0; s0 < n; s0 += g) {
        const std::size_t gc = std::min(g, n - s0);
        const std::size_t row_stride = gc * hw;
        for (std::size_t i = 0; i < gc; ++i)
            for (std::size_t oc = 0; oc < c_out; ++oc)
                std::copy_n(dy.data() + ((s0 + i) * c_out + oc) * hw, hw,
                            dybuf.data() + oc * row_stride + i * hw);
        blas::matmul(w.data(), dybuf.data(), dcol.data(), int(ckk),
                     int(c_out), int(row_stride), /*transpose_a=*/true);
        for (std::size_t i = 0; i < gc; ++i)
            detail::col2im(dcol.data() + i * hw, c_in, h, wd, kh, kw, stride,
                           pad, out_h, out_w,
                           dx.data() + (s0 + i) * c_in * h * wd, row_stride);
    }
    return dx;
}

// Gradient w.r.t. the weights, summed over the batch.
template <typename T>
Tensor<T> weight_grad(const Tensor<T>& x, const Tensor<T>& dy,
                      const Shape& w_shape, int stride, int pad) {
    const std::size_t n = x.shape()[0], c_in = x.shape()[1], h = x.shape()[2],
                      wd = x.shape()[3];
    const std::size_t c_out = w_shape[0], kh = w_shape[2], kw = w_shape[3];
    const std::size_t out_h = dy.shape()[2], out_w = dy.shape()[3];
    if (winograd_applies<T>(kh, kw, stride, pad, out_h, out_w))
        return winograd::conv_weight_grad(x, dy, w_shape, pad);

    Tensor<T> dw(w_shape);
    const std::size_t ckk = c_in * kh * kw, hw = out_h * out_w;
    const std::size_t g =
        detail::chunk_images(n, (ckk + c_out) * hw * sizeof(T));
    std::vector<T> col(g * ckk * hw);
    std::vector<T> dybuf(g * c_out * hw);
    for (std::size_t s0 = 0; s0 < n; s0 += g) {
        const std::size_t gc = std::min(g, n - s0);
        const std::size_t row_stride = gc * hw;
        for (std::size_t i = 0; i < gc; ++i) {
            detail::im2col(x.data() + (s0 + i) * c_in * h * wd, c_in, h, wd,
                           kh, kw, stride, pad, out_h, out_w,
                           col.data() + i * hw, row_stride);
            for (std::size_t oc = 0; oc < c_out; ++oc)
                std::copy_n(dy.data() + ((s0 + i) * c_out + oc) * hw, hw,
                            dybuf.data() + oc * row_stride + i * hw);
        }
        blas::gemm(blas::no_trans, blas::trans, int(c_out), int(ckk),
                   int(row_stride), T(1), dybuf.data(), int(row_stride),
                   col.data(), int(row_stride), T(1), dw.data(), int(ckk));
    }
    return dw;
}

// Gradient w.r.t. the bias: sum of dy over batch and spatial dims.
template <typename T>
Tensor<T> bias_grad(const Tensor<T>& dy) {
    const std::size_t n = dy.shape()[0], c_cnt = dy.shape()[1];
    const std::size_t hw = dy.shape()[2] * dy.shape()[3];
    Tensor<T> db(Shape{c_cnt});
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t c = 0; c < c_cnt; ++c)
            db[c] += vec_sum(dy.data() + (s * c_cnt + c) * hw, hw);
    return db;
}

// --- transposed convolution ------------------------------------------------
// x [N, C_in, H, W], w [C_in, C_out, kh, kw]. Output extent:
// (H-1)*stride - 2*pad + kh + output_pad. Implemented through the conv
// primitives above: forward is conv's input-gradient, and vice versa.

template <typename T>
Tensor<T> transposed_forward(const Tensor<T>& x, const Tensor<T>& w,
                             const Tensor<T>* bias, int stride, int pad,
                             int output_pad) {
    SCGAN_CHECK(w.shape()[0] == x.shape()[1], DimensionError,
                "transposed conv weight expects ", w.shape()[0],
                " input channels, got ", x.shape()[1]);
    const std::size_t out_h = (x.shape()[2] - 1) * stride - 2 * pad +
                              w.shape()[2] + output_pad;
    const std::size_t out_w = (x.shape()[3] - 1) * stride - 2 * pad +
                              w.shape()[3] + output_pad;
    const Shape y_shape{x.shape()[0], w.shape()[1], out_h, out_w};
    Tensor<T> y = input_grad(x, w, y_shape, stride, pad);
    if (bias) {
        SCGAN_CHECK(bias->numel() == w.shape()[1], DimensionError,
                    "transposed conv bias has ", bias->numel(),
                    " entries, expected ", w.shape()[1]);
        const std::size_t hw = out_h * out_w;
        for (std::size_t s = 0; s < y.shape()[0]; ++s)
            for (std::size_t oc = 0; oc < w.shape()[1]; ++oc) {
                T* plane = y.data() + (s * w.shape()[1] + oc) * hw;
                for (std::size_t i = 0; i < hw; ++i) plane[i] += (*bias)[oc];
            }
    }
    return y;
}

template <typename T>
Tensor<T> transposed_input_grad(const Tensor<T>& dy, const Tensor<T>& w,
                                int stride, int pad) {
    return forward(dy, w, stride, pad);
}

template <typename T>
Tensor<T> transposed_weight_grad(const Tensor<T>& x, const Tensor<T>& dy,
                                 const Shape& w_shape, int stride, int pad) {
    return weight_grad(dy, x, w_shape, stride, pad);
}

} // namespace conv

} // namespace scgan

#endif
