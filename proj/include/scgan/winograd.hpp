#ifndef SCGAN_WINOGRAD_HPP
#define SCGAN_WINOGRAD_HPP

#include <cstring>
#include <vector>

#include "scgan/blas.hpp"
#include "scgan/common.hpp"
#include "scgan/tensor.hpp"

namespace scgan {

// ---------------------------------------------------------------------------
// Winograd F(4x4, 3x3) convolution: forward, input gradient, weight gradient.
//
// For unit-stride 3x3 kernels this trades the 36 multiply-adds per output
// pixel per channel pair for 36 elementwise products shared across a 4x4
// output tile — a 2.25x arithmetic reduction realized as 36 independent
// [C_out x C_in] x [C_in x tiles] GEMMs. Applies when both output extents are
// multiples of 4; the im2col path in conv.hpp is the reference
// implementation and equality of the two is covered by tests.
//
// The transform matrices are the standard F(4,3) set (interpolation points
// 0, ±1, ±2, ∞). All transforms are computed as coefficient-matrix sandwiches
// P·M·Pᵀ applied across *vectors of tiles*: every inner loop runs over a
// contiguous tile axis so it vectorizes, which matters as much as the GEMM
// savings on this machine.
// ---------------------------------------------------------------------------

namespace winograd {

constexpr int tile_out = 4; // output tile edge
constexpr int tile_in = 6;  // input tile edge (4 + 3 - 1)

namespace detail {

// Input-side analysis transform B^T (6x6) and its adjoint B.
template <typename T>
struct Coeff {
    static constexpr T bt[6][6] = {
        {4, 0, -5, 0, 1, 0},  {0, -4, -4, 1, 1, 0}, {0, 4, -4, -1, 1, 0},
        {0, -2, -1, 2, 1, 0}, {0, 2, -1, -2, 1, 0}, {0, 4, 0, -5, 0, 1}};
    static constexpr T b[6][6] = {
        {4, 0, 0, 0, 0, 0},      {0, -4, 4, -2, 2, 4},
        {-5, -4, -4, -1, -1, 0}, {0, 1, -1, 2, -2, -5},
        {1, 1, 1, 1, 1, 0},      {0, 0, 0, 0, 0, 1}};
    // Filter transform G (6x3) and adjoint G^T.
    static constexpr T g[6][3] = {{T(0.25), 0, 0},
                                  {T(-1) / 6, T(-1) / 6, T(-1) / 6},
                                  {T(-1) / 6, T(1) / 6, T(-1) / 6},
                                  {T(1) / 24, T(1) / 12, T(1) / 6},
                                  {T(1) / 24, T(-1) / 12, T(1) / 6},
                                  {0, 0, 1}};
    static constexpr T gt[3][6] = {
        {T(0.25), T(-1) / 6, T(-1) / 6, T(1) / 24, T(1) / 24, 0},
        {0, T(-1) / 6, T(1) / 6, T(1) / 12, T(-1) / 12, 0},
        {0, T(-1) / 6, T(-1) / 6, T(1) / 6, T(1) / 6, 1}};
    // Output synthesis A^T (4x6) and adjoint A.
    static constexpr T at[4][6] = {{1, 1, 1, 1, 1, 0},
                                   {0, 1, -1, 2, -2, 0},
                                   {0, 1, 1, 4, 4, 0},
                                   {0, 1, -1, 8, -8, 1}};
    static constexpr T a[6][4] = {{1, 0, 0, 0},  {1, 1, 1, 1},
                                  {1, -1, 1, -1}, {1, 2, 4, 8},
                                  {1, -2, 4, -8}, {0, 0, 0, 1}};
};

// result = P · M · Pᵀ over tile vectors. `in` holds In*In row pointers of
// length `len`; `out` holds Out*Out. `mid` is caller scratch of Out*In rows.
template <typename T, int In, int Out>
void sandwich_block(const T (&coeff)[Out][In], const T* const* in, T** mid,
                    T** out, std::size_t len) {
    // column pass: mid[o][j] = sum_i coeff[o][i] * in[i][j]
    for (int o = 0; o < Out; ++o)
        for (int j = 0; j < In; ++j) {
            T* dst = mid[o * In + j];
            bool first = true;
            for (int i = 0; i < In; ++i) {
                const T c = coeff[o][i];
                if (c == T(0)) continue;
                const T* src = in[i * In + j];
                if (first) {
                    for (std::size_t t = 0; t < len; ++t) dst[t] = c * src[t];
                    first = false;
                } else {
                    for (std::size_t t = 0; t < len; ++t) dst[t] += c * src[t];
                }
            }
            if (first)
                for (std::size_t t = 0; t < len; ++t) dst[t] = T(0);
        }
    // row pass: out[o1][o2] = sum_j coeff[o2][j] * mid[o1][j]
    for (int o1 = 0; o1 < Out; ++o1)
        for (int o2 = 0; o2 < Out; ++o2) {
            T* dst = out[o1 * Out + o2];
            bool first = true;
            for (int j = 0; j < In; ++j) {
                const T c = coeff[o2][j];
                if (c == T(0)) continue;
                const T* src = mid[o1 * In + j];
                if (first) {
                    for (std::size_t t = 0; t < len; ++t) dst[t] = c * src[t];
                    first = false;
                } else {
                    for (std::size_t t = 0; t < len; ++t) dst[t] += c * src[t];
                }
            }
            if (first)
                for (std::size_t t = 0; t < len; ++t) dst[t] = T(0);
        }
}

// Zero-padded copy of one [C, H, W] plane set.
template <typename T>
void pad_plane_set(const T* x, std::size_t c_count, std::size_t h,
                   std::size_t w, int pad, std::vector<T>& out) {
    const std::size_t hp = h + 2 * pad, wp = w + 2 * pad;
    out.assign(c_count * hp * wp, T(0));
    for (std::size_t c = 0; c < c_count; ++c)
        for (std::size_t i = 0; i < h; ++i)
            std::memcpy(out.data() + (c * hp + i + pad) * wp + pad,
                        x + (c * h + i) * w, w * sizeof(T));
}

// Scratch pointer table into a slab of `rows` vectors of length `len`.
template <typename T>
void slab_rows(std::vector<T>& slab, std::size_t rows, std::size_t len,
               std::vector<T*>& ptrs) {
    slab.resize(rows * len);
    ptrs.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) ptrs[r] = slab.data() + r * len;
}

} // namespace detail

// True when this implementation covers the given conv configuration.
inline bool applicable(std::size_t kh, std::size_t kw, int stride, int pad,
                       std::size_t out_h, std::size_t out_w) {
    return kh == 3 && kw == 3 && stride == 1 && pad >= 0 && pad <= 1 &&
           out_h > 0 && out_w > 0 && out_h % tile_out == 0 &&
           out_w % tile_out == 0;
}

// Filter transform: w [C_out, C_in, 3, 3] -> U as [36][C_out][C_in].
template <typename T>
std::vector<T> transform_filters(const Tensor<T>& w) {
    const std::size_t c_out = w.shape()[0], c_in = w.shape()[1];
    std::vector<T> u(std::size_t(36) * c_out * c_in);
    std::vector<T> g_slab, mid_slab;
    std::vector<T*> g_rows, mid_rows;
    detail::slab_rows(g_slab, 9, c_in, g_rows);
    detail::slab_rows(mid_slab, 18, c_in, mid_rows);
    std::vector<T*> out_rows(36);
    for (std::size_t oc = 0; oc < c_out; ++oc) {
        for (int k = 0; k < 9; ++k)
            for (std::size_t ic = 0; ic < c_in; ++ic)
                g_rows[k][ic] = w.data()[(oc * c_in + ic) * 9 + k];
        for (int k = 0; k < 36; ++k)
            out_rows[k] = u.data() + (std::size_t(k) * c_out + oc) * c_in;
        detail::sandwich_block<T, 3, 6>(detail::Coeff<T>::g, g_rows.data(),
                                        mid_rows.data(), out_rows.data(),
                                        c_in);
    }
    return u;
}

namespace detail {

// Gather one channel's 4x4 or 6x6 tile grids across the whole batch into
// row vectors indexed by in-tile position; tile index (sample-major) is the
// fast axis, so the transform inner loops below run long and contiguous.
template <typename T>
void gather_tiles(const T* base, std::size_t plane_stride, std::size_t n,
                  std::size_t row_stride, std::size_t tiles_h,
                  std::size_t tiles_w, int edge, T* const* rows) {
    const std::size_t tiles_per = tiles_h * tiles_w;
    for (int i = 0; i < edge; ++i)
        for (int j = 0; j < edge; ++j) {
            T* dst = rows[i * edge + j];
            std::size_t t = 0;
            for (std::size_t s = 0; s < n; ++s) {
                const T* plane = base + s * plane_stride;
                for (std::size_t th = 0; th < tiles_h; ++th) {
                    const T* row = plane + (th * 4 + i) * row_stride + j;
                    for (std::size_t tw = 0; tw < tiles_w; ++tw)
                        dst[t++] = row[tw * 4];
                }
            }
            (void)tiles_per;
        }
}

// Input transform: x [N, C, H, W] (+pad) -> V as [36][C][n*tiles_per].
template <typename T>
std::vector<T> transform_input(const Tensor<T>& x, int pad,
                               std::size_t tiles_h, std::size_t tiles_w) {
    const std::size_t n = x.shape()[0], c_cnt = x.shape()[1],
                      h = x.shape()[2], w = x.shape()[3];
    const std::size_t hp = h + 2 * pad, wp = w + 2 * pad;
    const std::size_t tiles_per = tiles_h * tiles_w;
    const std::size_t total = n * tiles_per;
    std::vector<T> v(std::size_t(36) * c_cnt * total);

    const T* base = x.data();
    std::vector<T> padded;
    if (pad > 0) { // pad the whole batch once
        pad_plane_set(x.data(), n * c_cnt, h, w, pad, padded);
        base = padded.data();
    }

    std::vector<T> d_slab, mid_slab;
    std::vector<T*> d_rows, mid_rows;
    slab_rows(d_slab, 36, total, d_rows);
    slab_rows(mid_slab, 36, total, mid_rows);
    std::vector<T*> out_rows(36);
    for (std::size_t c = 0; c < c_cnt; ++c) {
        gather_tiles(base + c * hp * wp, c_cnt * hp * wp, n, wp, tiles_h,
                     tiles_w, 6, d_rows.data());
        for (int k = 0; k < 36; ++k)
            out_rows[k] = v.data() + (std::size_t(k) * c_cnt + c) * total;
        sandwich_block<T, 6, 6>(Coeff<T>::bt, d_rows.data(), mid_rows.data(),
                                out_rows.data(), total);
    }
    return v;
}

// Output-gradient transform: dy [N, C_out, H_o, W_o] -> dM [36][C_out][total].
template <typename T>
std::vector<T> transform_output_grad(const Tensor<T>& dy, std::size_t tiles_h,
                                     std::size_t tiles_w) {
    const std::size_t n = dy.shape()[0], c_out = dy.shape()[1],
                      out_h = dy.shape()[2], out_w = dy.shape()[3];
    const std::size_t total = n * tiles_h * tiles_w;
    std::vector<T> dm(std::size_t(36) * c_out * total);
    std::vector<T> g_slab, mid_slab;
    std::vector<T*> g_rows, mid_rows;
    slab_rows(g_slab, 16, total, g_rows);
    slab_rows(mid_slab, 24, total, mid_rows);
    std::vector<T*> out_rows(36);
    for (std::size_t oc = 0; oc < c_out; ++oc) {
        gather_tiles(dy.data() + oc * out_h * out_w, c_out * out_h * out_w, n,
                     out_w, tiles_h, tiles_w, 4, g_rows.data());
        for (int k = 0; k < 36; ++k)
            out_rows[k] = dm.data() + (std::size_t(k) * c_out + oc) * total;
        sandwich_block<T, 4, 6>(Coeff<T>::a, g_rows.data(), mid_rows.data(),
                                out_rows.data(), total);
    }
    return dm;
}

} // namespace detail

// Forward: y = conv(x, w), unit stride, no bias (callers add it).
template <typename T>
Tensor<T> conv_forward(const Tensor<T>& x, const Tensor<T>& w, int pad) {
    const std::size_t n = x.shape()[0], c_in = x.shape()[1], h = x.shape()[2],
                      wd = x.shape()[3];
    const std::size_t c_out = w.shape()[0];
    SCGAN_CHECK(w.shape()[1] == c_in, DimensionError,
                "conv weight expects ", w.shape()[1], " channels, input has ",
                c_in);
    const std::size_t out_h = h + 2 * pad - 2, out_w = wd + 2 * pad - 2;
    const std::size_t tiles_h = out_h / 4, tiles_w = out_w / 4;
    const std::size_t tiles_per = tiles_h * tiles_w, total = n * tiles_per;

    const std::vector<T> u = transform_filters(w);
    const std::vector<T> v = detail::transform_input(x, pad, tiles_h, tiles_w);

    std::vector<T> m(std::size_t(36) * c_out * total);
    for (int k = 0; k < 36; ++k)
        blas::matmul(u.data() + std::size_t(k) * c_out * c_in,
                     v.data() + std::size_t(k) * c_in * total,
                     m.data() + std::size_t(k) * c_out * total, int(c_out),
                     int(c_in), int(total));

    Tensor<T> y(Shape{n, c_out, out_h, out_w});
    std::vector<T> y_slab, mid_slab;
    std::vector<T*> y_rows, mid_rows;
    detail::slab_rows(y_slab, 16, total, y_rows);
    detail::slab_rows(mid_slab, 24, total, mid_rows);
    std::vector<const T*> m_rows(36);
    for (std::size_t oc = 0; oc < c_out; ++oc) {
        for (int k = 0; k < 36; ++k)
            m_rows[k] = m.data() + (std::size_t(k) * c_out + oc) * total;
        detail::sandwich_block<T, 6, 4>(detail::Coeff<T>::at, m_rows.data(),
                                        mid_rows.data(), y_rows.data(), total);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                const T* src = y_rows[i * 4 + j];
                std::size_t t = 0;
                for (std::size_t s = 0; s < n; ++s) {
                    T* plane = y.data() + (s * c_out + oc) * out_h * out_w;
                    for (std::size_t th = 0; th < tiles_h; ++th) {
                        T* row = plane + (th * 4 + i) * out_w + j;
                        for (std::size_t tw = 0; tw < tiles_w; ++tw)
                            row[tw * 4] = src[t++];
                    }
                }
            }
    }
    return y;
}

// Gradient w.r.t. the input. dy [N, C_out, H_o, W_o] -> dx shaped like x.
template <typename T>
Tensor<T> conv_input_grad(const Tensor<T>& dy, const Tensor<T>& w,
                          const Shape& x_shape, int pad) {
    const std::size_t n = x_shape[0], c_in = x_shape[1], h = x_shape[2],
                      wd = x_shape[3];
    const std::size_t c_out = w.shape()[0];
    const std::size_t out_h = dy.shape()[2], out_w = dy.shape()[3];
    const std::size_t tiles_h = out_h / 4, tiles_w = out_w / 4;
    const std::size_t tiles_per = tiles_h * tiles_w, total = n * tiles_per;

    const std::vector<T> u = transform_filters(w);
    const std::vector<T> dm =
        detail::transform_output_grad(dy, tiles_h, tiles_w);

    // dV_k = U_k^T dM_k
    std::vector<T> dv(std::size_t(36) * c_in * total);
    for (int k = 0; k < 36; ++k)
        blas::matmul(u.data() + std::size_t(k) * c_out * c_in,
                     dm.data() + std::size_t(k) * c_out * total,
                     dv.data() + std::size_t(k) * c_in * total, int(c_in),
                     int(c_out), int(total), /*transpose_a=*/true);

    // Per plane: un-transform to 6x6 tiles and scatter-add into the padded
    // input (tiles overlap by two pixels), then crop the padding off.
    const std::size_t hp = h + 2 * pad, wp = wd + 2 * pad;
    Tensor<T> dx(Shape{n, c_in, h, wd});
    std::vector<T> d_slab, mid_slab, dpad(hp * wp);
    std::vector<T*> d_rows, mid_rows;
    detail::slab_rows(d_slab, 36, total, d_rows);
    detail::slab_rows(mid_slab, 36, total, mid_rows);
    std::vector<const T*> dv_rows(36);
    for (std::size_t c = 0; c < c_in; ++c) {
        for (int k = 0; k < 36; ++k)
            dv_rows[k] = dv.data() + (std::size_t(k) * c_in + c) * total;
        detail::sandwich_block<T, 6, 6>(detail::Coeff<T>::b, dv_rows.data(),
                                        mid_rows.data(), d_rows.data(), total);
        for (std::size_t s = 0; s < n; ++s) {
            std::fill(dpad.begin(), dpad.end(), T(0));
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j) {
                    const T* src = d_rows[i * 6 + j] + s * tiles_per;
                    std::size_t t = 0;
                    for (std::size_t th = 0; th < tiles_h; ++th) {
                        T* row = dpad.data() + (th * 4 + i) * wp + j;
                        for (std::size_t tw = 0; tw < tiles_w; ++tw)
                            row[tw * 4] += src[t++];
                    }
                }
            T* out_plane = dx.data() + (s * c_in + c) * h * wd;
            for (std::size_t i = 0; i < h; ++i)
                for (std::size_t j = 0; j < wd; ++j)
                    out_plane[i * wd + j] = dpad[(i + pad) * wp + j + pad];
        }
    }
    return dx;
}

// Gradient w.r.t. the weights. Returns dw [C_out, C_in, 3, 3].
template <typename T>
Tensor<T> conv_weight_grad(const Tensor<T>& x, const Tensor<T>& dy,
                           const Shape& w_shape, int pad) {
    const std::size_t c_out = w_shape[0], c_in = w_shape[1];
    const std::size_t n = x.shape()[0];
    const std::size_t out_h = dy.shape()[2], out_w = dy.shape()[3];
    const std::size_t tiles_h = out_h / 4, tiles_w = out_w / 4;
    const std::size_t total = n * tiles_h * tiles_w;

    const std::vector<T> v = detail::transform_input(x, pad, tiles_h, tiles_w);
    const std::vector<T> dm =
        detail::transform_output_grad(dy, tiles_h, tiles_w);

    // dU_k = dM_k V_k^T
    std::vector<T> du(std::size_t(36) * c_out * c_in);
    for (int k = 0; k < 36; ++k)
        blas::matmul(dm.data() + std::size_t(k) * c_out * total,
                     v.data() + std::size_t(k) * c_in * total,
                     du.data() + std::size_t(k) * c_out * c_in, int(c_out),
                     int(total), int(c_in), /*transpose_a=*/false,
                     /*transpose_b=*/true);

    Tensor<T> dw(Shape{c_out, c_in, 3, 3});
    std::vector<T> g_slab, mid_slab;
    std::vector<T*> g_rows, mid_rows;
    detail::slab_rows(g_slab, 9, c_in, g_rows);
    detail::slab_rows(mid_slab, 18, c_in, mid_rows);
    std::vector<const T*> du_rows(36);
    for (std::size_t oc = 0; oc < c_out; ++oc) {
        for (int k = 0; k < 36; ++k)
            du_rows[k] = du.data() + (std::size_t(k) * c_out + oc) * c_in;
        detail::sandwich_block<T, 6, 3>(detail::Coeff<T>::gt, du_rows.data(),
                                        mid_rows.data(), g_rows.data(), c_in);
        for (int k = 0; k < 9; ++k)
            for (std::size_t ic = 0; ic < c_in; ++ic)
                dw.data()[(oc * c_in + ic) * 9 + k] = g_rows[k][ic];
    }
    return dw;
}

} // namespace winograd

} // namespace scgan

#endif
