#ifndef SCGAN_OPS_HPP
#define SCGAN_OPS_HPP

#include <cmath>
#include <cstddef>
#include <memory>
#include <vector>

#include "scgan/common.hpp"
#include "scgan/conv.hpp"
#include "scgan/tape.hpp"
#include "scgan/tensor.hpp"

namespace scgan {

// ---------------------------------------------------------------------------
// Differentiable operations. Each returns a Var wired into the graph; the
// backward closures accumulate into whichever operands require gradients.
// Convolution heavy lifting lives in conv.hpp / winograd.hpp; everything
// here is elementwise, normalization, or data-movement work.
// ---------------------------------------------------------------------------

namespace ops_detail {

template <typename T>
bool wants_grad(const Var<T>& v) {
    return v && v->needs_grad;
}

template <typename T>
void accumulate(Tensor<T>& dst, const Tensor<T>& src) {
    SCGAN_CHECK(dst.shape() == src.shape(), DimensionError,
                "gradient shape mismatch: ", dst.shape().str(), " vs ",
                src.shape().str());
    T* d = dst.data();
    const T* s = src.data();
    for (std::size_t i = 0; i < dst.numel(); ++i) d[i] += s[i];
}

template <typename T>
void check_same_shape(const Var<T>& a, const Var<T>& b, const char* op) {
    SCGAN_CHECK(a->value.shape() == b->value.shape(), DimensionError, op,
                ": shape mismatch ", a->value.shape().str(), " vs ",
                b->value.shape().str());
}

} // namespace ops_detail

// --- elementwise arithmetic ------------------------------------------------

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
    ops_detail::check_same_shape(a, b, "add");
    Tensor<T> out(a->value.shape());
    for (std::size_t i = 0; i < out.numel(); ++i)
        out[i] = a->value[i] + b->value[i];
    return make_op<T>(std::move(out), {a, b}, [a, b](Node<T>& self) {
        if (ops_detail::wants_grad(a))
            ops_detail::accumulate(grad_of(a), self.grad);
        if (ops_detail::wants_grad(b))
            ops_detail::accumulate(grad_of(b), self.grad);
    });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
    ops_detail::check_same_shape(a, b, "sub");
    Tensor<T> out(a->value.shape());
    for (std::size_t i = 0; i < out.numel(); ++i)
        out[i] = a->value[i] - b->value[i];
    return make_op<T>(std::move(out), {a, b}, [a, b](Node<T>& self) {
        if (ops_detail::wants_grad(a))
            ops_detail::accumulate(grad_of(a), self.grad);
        if (ops_detail::wants_grad(b)) {
            Tensor<T>& g = grad_of(b);
            for (std::size_t i = 0; i < g.numel(); ++i) g[i] -= self.grad[i];
        }
    });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
    ops_detail::check_same_shape(a, b, "mul");
    Tensor<T> out(a->value.shape());
    for (std::size_t i = 0; i < out.numel(); ++i)
        out[i] = a->value[i] * b->value[i];
    return make_op<T>(std::move(out), {a, b}, [a, b](Node<T>& self) {
        if (ops_detail::wants_grad(a)) {
            Tensor<T>& g = grad_of(a);
            for (std::size_t i = 0; i < g.numel(); ++i)
                g[i] += self.grad[i] * b->value[i];
        }
        if (ops_detail::wants_grad(b)) {
            Tensor<T>& g = grad_of(b);
            for (std::size_t i = 0; i < g.numel(); ++i)
                g[i] += self.grad[i] * a->value[i];
        }
    });
}

template <typename T>
Var<T> add_scalar(const Var<T>& x, T s) {
    Tensor<T> out(x->value.shape());
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = x->value[i] + s;
    return make_op<T>(std::move(out), {x}, [x](Node<T>& self) {
        if (ops_detail::wants_grad(x))
            ops_detail::accumulate(grad_of(x), self.grad);
    });
}

template <typename T>
Var<T> mul_scalar(const Var<T>& x, T s) {
    Tensor<T> out(x->value.shape());
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = x->value[i] * s;
    return make_op<T>(std::move(out), {x}, [x, s](Node<T>& self) {
        if (ops_detail::wants_grad(x)) {
            Tensor<T>& g = grad_of(x);
            for (std::size_t i = 0; i < g.numel(); ++i)
                g[i] += self.grad[i] * s;
        }
    });
}

// --- activations -----------------------------------------------------------

template <typename T>
Var<T> relu(const Var<T>& x) {
    Tensor<T> out(x->value.shape());
    for (std::size_t i = 0; i < out.numel(); ++i)
        out[i] = x->value[i] > T(0) ? x->value[i] : T(0);
    return make_op<T>(std::move(out), {x}, [x](Node<T>& self) {
        if (!ops_detail::wants_grad(x)) return;
        Tensor<T>& g = grad_of(x);
        const T* v = self.value.data();
        const T* dy = self.grad.data();
        T* gd = g.data();
        for (std::size_t i = 0; i < g.numel(); ++i)
            gd[i] += v[i] > T(0) ? dy[i] : T(0);
    });
}

template <typename T>
Var<T> leaky_relu(const Var<T>& x, T slope = T(0.2)) {
    Tensor<T> out(x->value.shape());
    for (std::size_t i = 0; i < out.numel(); ++i)
        out[i] = x->value[i] > T(0) ? x->value[i] : slope * x->value[i];
    return make_op<T>(std::move(out), {x}, [x, slope](Node<T>& self) {
        if (!ops_detail::wants_grad(x)) return;
        Tensor<T>& g = grad_of(x);
        const T* v = self.value.data();
        const T* dy = self.grad.data();
        T* gd = g.data();
        for (std::size_t i = 0; i < g.numel(); ++i)
            gd[i] += dy[i] * (v[i] > T(0) ? T(1) : slope);
    });
}

template <typename T>
Var<T> tanh_op(const Var<T>& x) {
    Tensor<T> out(x->value.shape());
    for (std::size_t i = 0; i < out.numel(); ++i)
        out[i] = std::tanh(x->value[i]);
    return make_op<T>(std::move(out), {x}, [x](Node<T>& self) {
        if (!ops_detail::wants_grad(x)) return;
        Tensor<T>& g = grad_of(x);
        for (std::size_t i = 0; i < g.numel(); ++i) {
            const T y = self.value[i];
            g[i] += self.grad[i] * (T(1) - y * y);
        }
    });
}

// --- reductions & scalar losses --------------------------------------------

template <typename T>
Var<T> sum_all(const Var<T>& x) {
    Tensor<T> out(Shape{1});
    out[0] = vec_sum(x->value.data(), x->value.numel());
    return make_op<T>(std::move(out), {x}, [x](Node<T>& self) {
        if (!ops_detail::wants_grad(x)) return;
        Tensor<T>& g = grad_of(x);
        const T dy = self.grad[0];
        for (std::size_t i = 0; i < g.numel(); ++i) g[i] += dy;
    });
}

template <typename T>
Var<T> mean_all(const Var<T>& x) {
    SCGAN_CHECK(x->value.numel() > 0, ArgumentError, "mean over empty tensor");
    const T inv_n = T(1) / T(x->value.numel());
    Tensor<T> out(Shape{1});
    out[0] = vec_sum(x->value.data(), x->value.numel()) * inv_n;
    return make_op<T>(std::move(out), {x}, [x, inv_n](Node<T>& self) {
        if (!ops_detail::wants_grad(x)) return;
        Tensor<T>& g = grad_of(x);
        const T dy = self.grad[0] * inv_n;
        for (std::size_t i = 0; i < g.numel(); ++i) g[i] += dy;
    });
}

// mean |a - b|, the reconstruction norm used throughout. Subgradient 0 where
// a == b.
template <typename T>
Var<T> l1_loss(const Var<T>& a, const Var<T>& b) {
    ops_detail::check_same_shape(a, b, "l1_loss");
    SCGAN_CHECK(a->value.numel() > 0, ArgumentError, "l1_loss on empty tensor");
    const T inv_n = T(1) / T(a->value.numel());
    Tensor<T> out(Shape{1});
    out[0] =
        vec_abs_diff_sum(a->value.data(), b->value.data(), a->value.numel()) *
        inv_n;
    return make_op<T>(std::move(out), {a, b}, [a, b, inv_n](Node<T>& self) {
        const T dy = self.grad[0] * inv_n;
        const bool ga = ops_detail::wants_grad(a);
        const bool gb = ops_detail::wants_grad(b);
        if (!ga && !gb) return;
        T* pga = ga ? grad_of(a).data() : nullptr;
        T* pgb = gb ? grad_of(b).data() : nullptr;
        for (std::size_t i = 0; i < a->value.numel(); ++i) {
            const T d = a->value[i] - b->value[i];
            const T s = d > T(0) ? T(1) : (d < T(0) ? T(-1) : T(0));
            if (pga) pga[i] += dy * s;
            if (pgb) pgb[i] -= dy * s;
        }
    });
}

// mean (x - t)^2 against a fixed scalar target: the least-squares GAN
// objective for a patch logit map.
template <typename T>
Var<T> mse_to_scalar(const Var<T>& x, T target) {
    SCGAN_CHECK(x->value.numel() > 0, ArgumentError,
                "mse_to_scalar on empty tensor");
    const T inv_n = T(1) / T(x->value.numel());
    Tensor<T> out(Shape{1});
    out[0] =
        vec_sq_dev_sum(x->value.data(), x->value.numel(), target) * inv_n;
    return make_op<T>(std::move(out), {x},
                      [x, target, inv_n](Node<T>& self) {
                          if (!ops_detail::wants_grad(x)) return;
                          Tensor<T>& g = grad_of(x);
                          const T dy = self.grad[0] * inv_n * T(2);
                          for (std::size_t i = 0; i < g.numel(); ++i)
                              g[i] += dy * (x->value[i] - target);
                      });
}

// --- spatial data movement -------------------------------------------------

template <typename T>
Var<T> pad2d_reflect(const Var<T>& x, std::size_t pad) {
    const Shape& s = x->value.shape();
    SCGAN_CHECK(s.rank() == 4, DimensionError, "pad2d_reflect expects NCHW");
    const std::size_t n = s[0], c = s[1], h = s[2], w = s[3];
    SCGAN_CHECK(pad < h && pad < w, DimensionError, "reflect pad ", pad,
                " too large for spatial size ", h, "x", w);
    auto reflect = [](long i, long extent) {
        if (i < 0) return -i;
        if (i >= extent) return 2 * extent - 2 - i;
        return i;
    };
    const std::size_t oh = h + 2 * pad, ow = w + 2 * pad;
    Tensor<T> out(Shape{n, c, oh, ow});
    for (std::size_t p = 0; p < n * c; ++p) {
        const T* src_plane = x->value.data() + p * h * w;
        T* dst_plane = out.data() + p * oh * ow;
        for (std::size_t i = 0; i < oh; ++i) {
            const T* src =
                src_plane + std::size_t(reflect(long(i) - long(pad), long(h))) * w;
            T* dst = dst_plane + i * ow;
            for (std::size_t j = 0; j < pad; ++j) dst[j] = src[pad - j];
            std::copy_n(src, w, dst + pad);
            for (std::size_t j = 0; j < pad; ++j)
                dst[pad + w + j] = src[w - 2 - j];
        }
    }
    return make_op<T>(std::move(out), {x}, [x, pad, reflect](Node<T>& self) {
        if (!ops_detail::wants_grad(x)) return;
        Tensor<T>& g = grad_of(x);
        const Shape& s2 = g.shape();
        const std::size_t n2 = s2[0], c2 = s2[1], h2 = s2[2], w2 = s2[3];
        const std::size_t oh2 = h2 + 2 * pad, ow2 = w2 + 2 * pad;
        for (std::size_t p = 0; p < n2 * c2; ++p) {
            T* g_plane = g.data() + p * h2 * w2;
            const T* dy_plane = self.grad.data() + p * oh2 * ow2;
            for (std::size_t i = 0; i < oh2; ++i) {
                T* gr = g_plane +
                        std::size_t(reflect(long(i) - long(pad), long(h2))) * w2;
                const T* dy = dy_plane + i * ow2;
                for (std::size_t j = 0; j < pad; ++j) gr[pad - j] += dy[j];
                const T* mid = dy + pad;
                for (std::size_t j = 0; j < w2; ++j) gr[j] += mid[j];
                for (std::size_t j = 0; j < pad; ++j)
                    gr[w2 - 2 - j] += dy[pad + w2 + j];
            }
        }
    });
}

template <typename T>
Var<T> crop2d(const Var<T>& x, std::size_t h0, std::size_t w0, std::size_t hs,
              std::size_t ws) {
    const Shape& s = x->value.shape();
    SCGAN_CHECK(s.rank() == 4, DimensionError, "crop2d expects NCHW");
    SCGAN_CHECK(h0 + hs <= s[2] && w0 + ws <= s[3], DimensionError,
                "crop region (", h0, ",", w0, ")+", hs, "x", ws,
                " exceeds spatial size ", s[2], "x", s[3]);
    const std::size_t n = s[0], c = s[1], sh = s[2], sw = s[3];
    Tensor<T> out(Shape{n, c, hs, ws});
    for (std::size_t p = 0; p < n * c; ++p)
        for (std::size_t i = 0; i < hs; ++i)
            std::copy_n(x->value.data() + (p * sh + h0 + i) * sw + w0, ws,
                        out.data() + (p * hs + i) * ws);
    return make_op<T>(std::move(out), {x},
                      [x, h0, w0, hs, ws](Node<T>& self) {
                          if (!ops_detail::wants_grad(x)) return;
                          Tensor<T>& g = grad_of(x);
                          const std::size_t n2 = g.shape()[0],
                                            c2 = g.shape()[1],
                                            gh = g.shape()[2],
                                            gw = g.shape()[3];
                          for (std::size_t p = 0; p < n2 * c2; ++p)
                              for (std::size_t i = 0; i < hs; ++i) {
                                  T* gr = g.data() + (p * gh + h0 + i) * gw + w0;
                                  const T* dy =
                                      self.grad.data() + (p * hs + i) * ws;
                                  for (std::size_t j = 0; j < ws; ++j)
                                      gr[j] += dy[j];
                              }
                      });
}

template <typename T>
Var<T> concat_batch(const std::vector<Var<T>>& parts) {
    SCGAN_CHECK(!parts.empty(), ArgumentError, "concat_batch of nothing");
    const Shape& first = parts[0]->value.shape();
    SCGAN_CHECK(first.rank() == 4, DimensionError, "concat_batch expects NCHW");
    std::size_t total_n = 0;
    for (const auto& p : parts) {
        const Shape& s = p->value.shape();
        SCGAN_CHECK(s.rank() == 4 && s[1] == first[1] && s[2] == first[2] &&
                        s[3] == first[3],
                    DimensionError, "concat_batch: incompatible shapes ",
                    first.str(), " vs ", s.str());
        total_n += s[0];
    }
    const std::size_t stride = first[1] * first[2] * first[3];
    Tensor<T> out(Shape{total_n, first[1], first[2], first[3]});
    std::size_t offset = 0;
    std::vector<std::size_t> offsets;
    for (const auto& p : parts) {
        offsets.push_back(offset);
        const std::size_t count = p->value.numel();
        std::copy(p->value.data(), p->value.data() + count,
                  out.data() + offset * stride);
        offset += p->value.shape()[0];
    }
    return make_op<T>(std::move(out), parts,
                      [parts, offsets, stride](Node<T>& self) {
                          for (std::size_t k = 0; k < parts.size(); ++k) {
                              if (!ops_detail::wants_grad(parts[k])) continue;
                              Tensor<T>& g = grad_of(parts[k]);
                              const T* src =
                                  self.grad.data() + offsets[k] * stride;
                              for (std::size_t i = 0; i < g.numel(); ++i)
                                  g[i] += src[i];
                          }
                      });
}

template <typename T>
Var<T> slice_batch(const Var<T>& x, std::size_t n0, std::size_t n1) {
    const Shape& s = x->value.shape();
    SCGAN_CHECK(s.rank() == 4, DimensionError, "slice_batch expects NCHW");
    SCGAN_CHECK(n0 < n1 && n1 <= s[0], ArgumentError, "slice_batch range [",
                n0, ",", n1, ") invalid for batch of ", s[0]);
    const std::size_t stride = s[1] * s[2] * s[3];
    Tensor<T> out(Shape{n1 - n0, s[1], s[2], s[3]});
    std::copy(x->value.data() + n0 * stride, x->value.data() + n1 * stride,
              out.data());
    return make_op<T>(std::move(out), {x}, [x, n0, stride](Node<T>& self) {
        if (!ops_detail::wants_grad(x)) return;
        Tensor<T>& g = grad_of(x);
        T* dst = g.data() + n0 * stride;
        for (std::size_t i = 0; i < self.grad.numel(); ++i)
            dst[i] += self.grad[i];
    });
}

template <typename T>
Var<T> upsample_nearest2x(const Var<T>& x) {
    const Shape& s = x->value.shape();
    SCGAN_CHECK(s.rank() == 4, DimensionError, "upsample expects NCHW");
    const std::size_t n = s[0], c = s[1], h = s[2], w = s[3];
    Tensor<T> out(Shape{n, c, 2 * h, 2 * w});
    for (std::size_t ni = 0; ni < n; ++ni)
        for (std::size_t ci = 0; ci < c; ++ci)
            for (std::size_t i = 0; i < 2 * h; ++i)
                for (std::size_t j = 0; j < 2 * w; ++j)
                    out.at(ni, ci, i, j) = x->value.at(ni, ci, i / 2, j / 2);
    return make_op<T>(std::move(out), {x}, [x](Node<T>& self) {
        if (!ops_detail::wants_grad(x)) return;
        Tensor<T>& g = grad_of(x);
        const Shape& s2 = g.shape();
        for (std::size_t ni = 0; ni < s2[0]; ++ni)
            for (std::size_t ci = 0; ci < s2[1]; ++ci)
                for (std::size_t i = 0; i < 2 * s2[2]; ++i)
                    for (std::size_t j = 0; j < 2 * s2[3]; ++j)
                        g.at(ni, ci, i / 2, j / 2) +=
                            self.grad.at(ni, ci, i, j);
    });
}

// [N, C, H, W] -> [N, C]: spatial mean per channel.
template <typename T>
Var<T> global_avg_pool(const Var<T>& x) {
    const Shape& s = x->value.shape();
    SCGAN_CHECK(s.rank() == 4, DimensionError, "global_avg_pool expects NCHW");
    const std::size_t n = s[0], c = s[1], hw = s[2] * s[3];
    const T inv = T(1) / T(hw);
    Tensor<T> out(Shape{n, c});
    for (std::size_t ni = 0; ni < n; ++ni)
        for (std::size_t ci = 0; ci < c; ++ci) {
            const T* plane = x->value.data() + (ni * c + ci) * hw;
            T acc = T(0);
            for (std::size_t i = 0; i < hw; ++i) acc += plane[i];
            out[ni * c + ci] = acc * inv;
        }
    return make_op<T>(std::move(out), {x}, [x, hw, inv](Node<T>& self) {
        if (!ops_detail::wants_grad(x)) return;
        Tensor<T>& g = grad_of(x);
        const std::size_t n2 = g.shape()[0], c2 = g.shape()[1];
        for (std::size_t ni = 0; ni < n2; ++ni)
            for (std::size_t ci = 0; ci < c2; ++ci) {
                T* plane = g.data() + (ni * c2 + ci) * hw;
                const T dy = self.grad[ni * c2 + ci] * inv;
                for (std::size_t i = 0; i < hw; ++i) plane[i] += dy;
            }
    });
}

// --- convolution wrappers ---------------------------------------------------

// x [N, C_in, H, W], w [C_out, C_in, kh, kw], bias [C_out] or null Var.
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b, int stride,
              int pad) {
    Tensor<T> y =
        conv::forward(x->value, w->value, b ? &b->value : nullptr, stride, pad);
    std::vector<Var<T>> parents{x, w};
    if (b) parents.push_back(b);
    return make_op<T>(
        std::move(y), std::move(parents), [x, w, b, stride, pad](Node<T>& self) {
            if (ops_detail::wants_grad(x))
                ops_detail::accumulate(
                    grad_of(x), conv::input_grad(self.grad, w->value,
                                                 x->value.shape(), stride, pad));
            if (ops_detail::wants_grad(w))
                ops_detail::accumulate(
                    grad_of(w), conv::weight_grad(x->value, self.grad,
                                                  w->value.shape(), stride,
                                                  pad));
            if (b && ops_detail::wants_grad(b))
                ops_detail::accumulate(grad_of(b), conv::bias_grad(self.grad));
        });
}

// x [N, C_in, H, W], w [C_in, C_out, kh, kw].
template <typename T>
Var<T> conv_transpose2d(const Var<T>& x, const Var<T>& w, const Var<T>& b,
                        int stride, int pad, int output_pad) {
    Tensor<T> y = conv::transposed_forward(
        x->value, w->value, b ? &b->value : nullptr, stride, pad, output_pad);
    std::vector<Var<T>> parents{x, w};
    if (b) parents.push_back(b);
    return make_op<T>(
        std::move(y), std::move(parents), [x, w, b, stride, pad](Node<T>& self) {
            if (ops_detail::wants_grad(x))
                ops_detail::accumulate(
                    grad_of(x), conv::transposed_input_grad(self.grad, w->value,
                                                            stride, pad));
            if (ops_detail::wants_grad(w))
                ops_detail::accumulate(
                    grad_of(w),
                    conv::transposed_weight_grad(x->value, self.grad,
                                                 w->value.shape(), stride,
                                                 pad));
            if (b && ops_detail::wants_grad(b))
                ops_detail::accumulate(grad_of(b), conv::bias_grad(self.grad));
        });
}

// --- instance normalization -------------------------------------------------

// Per-sample, per-channel standardization over the spatial dims; no learned
// affine, no running statistics.
template <typename T>
Var<T> instance_norm(const Var<T>& x, T eps = T(1e-5)) {
    const Shape& s = x->value.shape();
    SCGAN_CHECK(s.rank() == 4, DimensionError, "instance_norm expects NCHW");
    const std::size_t n = s[0], c = s[1], hw = s[2] * s[3];
    SCGAN_CHECK(hw > 0, DimensionError, "instance_norm on empty plane");
    Tensor<T> out(s);
    auto inv_std = std::make_shared<std::vector<T>>(n * c);
    for (std::size_t ni = 0; ni < n; ++ni)
        for (std::size_t ci = 0; ci < c; ++ci) {
            const T* plane = x->value.data() + (ni * c + ci) * hw;
            const T mean = vec_sum(plane, hw) / T(hw);
            const T var = vec_sq_dev_sum(plane, hw, mean) / T(hw);
            const T is = T(1) / std::sqrt(var + eps);
            (*inv_std)[ni * c + ci] = is;
            T* dst = out.data() + (ni * c + ci) * hw;
            for (std::size_t i = 0; i < hw; ++i)
                dst[i] = (plane[i] - mean) * is;
        }
    return make_op<T>(std::move(out), {x}, [x, inv_std, hw](Node<T>& self) {
        if (!ops_detail::wants_grad(x)) return;
        Tensor<T>& g = grad_of(x);
        const std::size_t n2 = g.shape()[0], c2 = g.shape()[1];
        const T inv_hw = T(1) / T(hw);
        for (std::size_t ni = 0; ni < n2; ++ni)
            for (std::size_t ci = 0; ci < c2; ++ci) {
                const T* dy = self.grad.data() + (ni * c2 + ci) * hw;
                const T* y = self.value.data() + (ni * c2 + ci) * hw;
                T* dst = g.data() + (ni * c2 + ci) * hw;
                const T sum_dy = vec_sum(dy, hw);
                const T sum_dy_y = vec_dot(dy, y, hw);
                const T is = (*inv_std)[ni * c2 + ci];
                const T m1 = sum_dy * inv_hw, m2 = sum_dy_y * inv_hw;
                for (std::size_t i = 0; i < hw; ++i)
                    dst[i] += is * (dy[i] - m1 - y[i] * m2);
            }
    });
}

// --- differentiable augmentation primitives ---------------------------------
// Parameters are per batch item; gradients flow only through the image.

template <typename T>
Var<T> brightness_shift(const Var<T>& x, const std::vector<T>& shift) {
    const Shape& s = x->value.shape();
    SCGAN_CHECK(s.rank() == 4 && shift.size() == s[0], ArgumentError,
                "brightness_shift needs one shift per batch item");
    const std::size_t per = s[1] * s[2] * s[3];
    Tensor<T> out(s);
    for (std::size_t ni = 0; ni < s[0]; ++ni) {
        const T b = shift[ni];
        for (std::size_t i = 0; i < per; ++i)
            out[ni * per + i] = x->value[ni * per + i] + b;
    }
    return make_op<T>(std::move(out), {x}, [x](Node<T>& self) {
        if (ops_detail::wants_grad(x))
            ops_detail::accumulate(grad_of(x), self.grad);
    });
}

// y = (x - m) * s + m with m the per-pixel mean across channels.
template <typename T>
Var<T> saturation_scale(const Var<T>& x, const std::vector<T>& scale) {
    const Shape& sh = x->value.shape();
    SCGAN_CHECK(sh.rank() == 4 && scale.size() == sh[0], ArgumentError,
                "saturation_scale needs one scale per batch item");
    const std::size_t n = sh[0], c = sh[1], hw = sh[2] * sh[3];
    const T inv_c = T(1) / T(c);
    Tensor<T> out(sh);
    for (std::size_t ni = 0; ni < n; ++ni) {
        const T sc = scale[ni];
        for (std::size_t i = 0; i < hw; ++i) {
            T m = T(0);
            for (std::size_t ci = 0; ci < c; ++ci)
                m += x->value[(ni * c + ci) * hw + i];
            m *= inv_c;
            for (std::size_t ci = 0; ci < c; ++ci) {
                const T v = x->value[(ni * c + ci) * hw + i];
                out[(ni * c + ci) * hw + i] = (v - m) * sc + m;
            }
        }
    }
    return make_op<T>(std::move(out), {x}, [x, scale](Node<T>& self) {
        if (!ops_detail::wants_grad(x)) return;
        Tensor<T>& g = grad_of(x);
        const Shape& sh2 = g.shape();
        const std::size_t n2 = sh2[0], c2 = sh2[1], hw2 = sh2[2] * sh2[3];
        const T inv_c = T(1) / T(c2);
        for (std::size_t ni = 0; ni < n2; ++ni) {
            const T sc = scale[ni];
            for (std::size_t i = 0; i < hw2; ++i) {
                T dsum = T(0);
                for (std::size_t ci = 0; ci < c2; ++ci)
                    dsum += self.grad[(ni * c2 + ci) * hw2 + i];
                const T shared = (T(1) - sc) * inv_c * dsum;
                for (std::size_t ci = 0; ci < c2; ++ci)
                    g[(ni * c2 + ci) * hw2 + i] +=
                        sc * self.grad[(ni * c2 + ci) * hw2 + i] + shared;
            }
        }
    });
}

// y = (x - m) * s + m with m the per-image mean over all channels and pixels.
template <typename T>
Var<T> contrast_scale(const Var<T>& x, const std::vector<T>& scale) {
    const Shape& sh = x->value.shape();
    SCGAN_CHECK(sh.rank() == 4 && scale.size() == sh[0], ArgumentError,
                "contrast_scale needs one scale per batch item");
    const std::size_t n = sh[0], per = sh[1] * sh[2] * sh[3];
    const T inv_per = T(1) / T(per);
    Tensor<T> out(sh);
    for (std::size_t ni = 0; ni < n; ++ni) {
        T m = T(0);
        for (std::size_t i = 0; i < per; ++i) m += x->value[ni * per + i];
        m *= inv_per;
        const T sc = scale[ni];
        for (std::size_t i = 0; i < per; ++i)
            out[ni * per + i] = (x->value[ni * per + i] - m) * sc + m;
    }
    return make_op<T>(std::move(out), {x}, [x, scale](Node<T>& self) {
        if (!ops_detail::wants_grad(x)) return;
        Tensor<T>& g = grad_of(x);
        const std::size_t n2 = g.shape()[0];
        const std::size_t per = g.numel() / n2;
        const T inv_per = T(1) / T(per);
        for (std::size_t ni = 0; ni < n2; ++ni) {
            T dsum = T(0);
            for (std::size_t i = 0; i < per; ++i)
                dsum += self.grad[ni * per + i];
            const T sc = scale[ni];
            const T shared = (T(1) - sc) * inv_per * dsum;
            for (std::size_t i = 0; i < per; ++i)
                g[ni * per + i] += sc * self.grad[ni * per + i] + shared;
        }
    });
}

// Integer shift with zero fill; +shift_x moves content right, +shift_y down.
template <typename T>
Var<T> translate2d(const Var<T>& x, const std::vector<int>& shift_x,
                   const std::vector<int>& shift_y) {
    const Shape& s = x->value.shape();
    SCGAN_CHECK(s.rank() == 4 && shift_x.size() == s[0] &&
                    shift_y.size() == s[0],
                ArgumentError, "translate2d needs one shift pair per item");
    const std::size_t n = s[0], c = s[1], h = s[2], w = s[3];
    Tensor<T> out(s);
    for (std::size_t ni = 0; ni < n; ++ni) {
        const long sx = shift_x[ni], sy = shift_y[ni];
        for (std::size_t ci = 0; ci < c; ++ci)
            for (std::size_t i = 0; i < h; ++i) {
                const long ih = long(i) - sy;
                for (std::size_t j = 0; j < w; ++j) {
                    const long iw = long(j) - sx;
                    out.at(ni, ci, i, j) =
                        (ih >= 0 && ih < long(h) && iw >= 0 && iw < long(w))
                            ? x->value.at(ni, ci, std::size_t(ih),
                                          std::size_t(iw))
                            : T(0);
                }
            }
    }
    return make_op<T>(std::move(out), {x},
                      [x, shift_x, shift_y](Node<T>& self) {
                          if (!ops_detail::wants_grad(x)) return;
                          Tensor<T>& g = grad_of(x);
                          const Shape& s2 = g.shape();
                          const std::size_t n2 = s2[0], c2 = s2[1], h2 = s2[2],
                                            w2 = s2[3];
                          for (std::size_t ni = 0; ni < n2; ++ni) {
                              const long sx = shift_x[ni], sy = shift_y[ni];
                              for (std::size_t ci = 0; ci < c2; ++ci)
                                  for (std::size_t i = 0; i < h2; ++i) {
                                      const long ih = long(i) - sy;
                                      if (ih < 0 || ih >= long(h2)) continue;
                                      for (std::size_t j = 0; j < w2; ++j) {
                                          const long iw = long(j) - sx;
                                          if (iw < 0 || iw >= long(w2))
                                              continue;
                                          g.at(ni, ci, std::size_t(ih),
                                               std::size_t(iw)) +=
                                              self.grad.at(ni, ci, i, j);
                                      }
                                  }
                          }
                      });
}

// Zero out one square of the given edge length per image, fully inside.
template <typename T>
Var<T> cutout2d(const Var<T>& x, const std::vector<std::size_t>& off_y,
                const std::vector<std::size_t>& off_x, std::size_t size) {
    const Shape& s = x->value.shape();
    SCGAN_CHECK(s.rank() == 4 && off_y.size() == s[0] && off_x.size() == s[0],
                ArgumentError, "cutout2d needs one offset pair per item");
    const std::size_t n = s[0], c = s[1], h = s[2], w = s[3];
    for (std::size_t ni = 0; ni < n; ++ni)
        SCGAN_CHECK(off_y[ni] + size <= h && off_x[ni] + size <= w,
                    ArgumentError, "cutout square leaves the image");
    Tensor<T> out = x->value;
    for (std::size_t ni = 0; ni < n; ++ni)
        for (std::size_t ci = 0; ci < c; ++ci)
            for (std::size_t i = 0; i < size; ++i)
                for (std::size_t j = 0; j < size; ++j)
                    out.at(ni, ci, off_y[ni] + i, off_x[ni] + j) = T(0);
    return make_op<T>(std::move(out), {x},
                      [x, off_y, off_x, size](Node<T>& self) {
                          if (!ops_detail::wants_grad(x)) return;
                          Tensor<T>& g = grad_of(x);
                          Tensor<T> masked = self.grad;
                          const Shape& s2 = g.shape();
                          for (std::size_t ni = 0; ni < s2[0]; ++ni)
                              for (std::size_t ci = 0; ci < s2[1]; ++ci)
                                  for (std::size_t i = 0; i < size; ++i)
                                      for (std::size_t j = 0; j < size; ++j)
                                          masked.at(ni, ci, off_y[ni] + i,
                                                    off_x[ni] + j) = T(0);
                          ops_detail::accumulate(g, masked);
                      });
}

} // namespace scgan

#endif
