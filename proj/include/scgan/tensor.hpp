#ifndef SCGAN_TENSOR_HPP
#define SCGAN_TENSOR_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "scgan/common.hpp"

namespace scgan {

// ---------------------------------------------------------------------------
// Shape: up to 4 dimensions, stored dense. Images are NCHW throughout.
// ---------------------------------------------------------------------------

class Shape {
public:
    Shape() : rank_(0), dims_{1, 1, 1, 1} {}

    Shape(std::initializer_list<std::size_t> dims) {
        SCGAN_CHECK(dims.size() <= 4, DimensionError,
                    "shape rank ", dims.size(), " exceeds 4");
        rank_ = dims.size();
        dims_ = {1, 1, 1, 1};
        std::size_t i = 0;
        for (std::size_t d : dims) dims_[i++] = d;
    }

    explicit Shape(const std::vector<std::size_t>& dims) {
        SCGAN_CHECK(dims.size() <= 4, DimensionError,
                    "shape rank ", dims.size(), " exceeds 4");
        rank_ = dims.size();
        dims_ = {1, 1, 1, 1};
        for (std::size_t i = 0; i < dims.size(); ++i) dims_[i] = dims[i];
    }

    std::size_t rank() const { return rank_; }

    std::size_t operator[](std::size_t i) const {
        SCGAN_CHECK(i < rank_, DimensionError, "shape axis ", i,
                    " out of range for rank ", rank_);
        return dims_[i];
    }

    std::size_t numel() const {
        std::size_t n = 1;
        for (std::size_t i = 0; i < rank_; ++i) n *= dims_[i];
        return n;
    }

    bool operator==(const Shape& other) const {
        if (rank_ != other.rank_) return false;
        for (std::size_t i = 0; i < rank_; ++i)
            if (dims_[i] != other.dims_[i]) return false;
        return true;
    }

    bool operator!=(const Shape& other) const { return !(*this == other); }

    std::string str() const {
        std::string s = "(";
        for (std::size_t i = 0; i < rank_; ++i) {
            if (i) s += ", ";
            s += std::to_string(dims_[i]);
        }
        s += ")";
        return s;
    }

    std::vector<std::size_t> dims() const {
        return std::vector<std::size_t>(dims_.begin(), dims_.begin() + rank_);
    }

private:
    std::size_t rank_;
    std::array<std::size_t, 4> dims_;
};

// ---------------------------------------------------------------------------
// Tensor: dense row-major storage. Copyable; copies are deep.
// ---------------------------------------------------------------------------

template <typename T>
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape, T fill = T(0))
        : shape_(shape), data_(shape.numel(), fill) {}

    Tensor(Shape shape, std::vector<T> data)
        : shape_(shape), data_(std::move(data)) {
        SCGAN_CHECK(data_.size() == shape_.numel(), DimensionError,
                    "tensor data size ", data_.size(),
                    " does not match shape ", shape_.str());
    }

    static Tensor zeros(Shape shape) { return Tensor(shape, T(0)); }

    static Tensor full(Shape shape, T value) { return Tensor(shape, value); }

    const Shape& shape() const { return shape_; }
    std::size_t numel() const { return data_.size(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    // NCHW accessors for rank-4 tensors.
    T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
        return data_[index4(n, c, h, w)];
    }
    const T& at(std::size_t n, std::size_t c, std::size_t h,
                std::size_t w) const {
        return data_[index4(n, c, h, w)];
    }

    std::size_t index4(std::size_t n, std::size_t c, std::size_t h,
                       std::size_t w) const {
        return ((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w;
    }

    void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> out(shape_);
        for (std::size_t i = 0; i < data_.size(); ++i)
            out[i] = static_cast<U>(data_[i]);
        return out;
    }

    Tensor reshaped(Shape new_shape) const {
        SCGAN_CHECK(new_shape.numel() == numel(), DimensionError,
                    "cannot reshape ", shape_.str(), " to ", new_shape.str());
        Tensor out = *this;
        out.shape_ = new_shape;
        return out;
    }

    std::vector<T>& storage() { return data_; }
    const std::vector<T>& storage() const { return data_; }

private:
    Shape shape_;
    std::vector<T> data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

// Lane-parallel reductions. Plain `acc += p[i]` over floats cannot be
// vectorized under strict IEEE semantics; fixed lane arrays give the compiler
// an order it may keep while still using SIMD.
template <typename T>
T vec_sum(const T* p, std::size_t n) {
    constexpr std::size_t L = 16;
    T lanes[L] = {};
    std::size_t i = 0;
    for (; i + L <= n; i += L)
        for (std::size_t j = 0; j < L; ++j) lanes[j] += p[i + j];
    T acc = T(0);
    for (std::size_t j = 0; j < L; ++j) acc += lanes[j];
    for (; i < n; ++i) acc += p[i];
    return acc;
}

template <typename T>
T vec_dot(const T* a, const T* b, std::size_t n) {
    constexpr std::size_t L = 16;
    T lanes[L] = {};
    std::size_t i = 0;
    for (; i + L <= n; i += L)
        for (std::size_t j = 0; j < L; ++j) lanes[j] += a[i + j] * b[i + j];
    T acc = T(0);
    for (std::size_t j = 0; j < L; ++j) acc += lanes[j];
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

template <typename T>
T vec_abs_diff_sum(const T* a, const T* b, std::size_t n) {
    constexpr std::size_t L = 16;
    T lanes[L] = {};
    std::size_t i = 0;
    for (; i + L <= n; i += L)
        for (std::size_t j = 0; j < L; ++j)
            lanes[j] += std::abs(a[i + j] - b[i + j]);
    T acc = T(0);
    for (std::size_t j = 0; j < L; ++j) acc += lanes[j];
    for (; i < n; ++i) acc += std::abs(a[i] - b[i]);
    return acc;
}

// Sum of squared deviations from a precomputed mean.
template <typename T>
T vec_sq_dev_sum(const T* p, std::size_t n, T mean) {
    constexpr std::size_t L = 16;
    T lanes[L] = {};
    std::size_t i = 0;
    for (; i + L <= n; i += L)
        for (std::size_t j = 0; j < L; ++j) {
            const T d = p[i + j] - mean;
            lanes[j] += d * d;
        }
    T acc = T(0);
    for (std::size_t j = 0; j < L; ++j) acc += lanes[j];
    for (; i < n; ++i) {
        const T d = p[i] - mean;
        acc += d * d;
    }
    return acc;
}

} // namespace scgan

#endif
