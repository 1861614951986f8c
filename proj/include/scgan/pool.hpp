#ifndef SCGAN_POOL_HPP
#define SCGAN_POOL_HPP

#include <vector>

#include "scgan/common.hpp"
#include "scgan/rng.hpp"
#include "scgan/tensor.hpp"

namespace scgan {

// History buffer of generated images fed to a discriminator. Until full it
// stores and returns each incoming image; once full, each incoming image
// either (p = 0.5) swaps with a random stored one — the discriminator then
// sees the older image — or passes straight through. Per image, the rng
// draws are: swap decision, then (only if swapping) the slot index.
template <typename T>
class ImagePool {
public:
    explicit ImagePool(std::size_t capacity) : capacity_(capacity) {}

    // batch is (n,c,h,w), detached from any gradient graph
    Tensor<T> query(const Tensor<T>& batch, Rng& rng) {
        const Shape& s = batch.shape();
        SCGAN_CHECK(s.rank() == 4, DimensionError,
                    "pool expects a rank-4 batch");
        if (capacity_ == 0) return batch;
        Tensor<T> out(s);
        const std::size_t chw = s[1] * s[2] * s[3];
        for (std::size_t i = 0; i < s[0]; ++i) {
            const T* fresh = batch.data() + i * chw;
            T* dst = out.data() + i * chw;
            if (stored_.size() < capacity_) {
                stored_.emplace_back(std::vector<T>(fresh, fresh + chw));
                std::copy_n(fresh, chw, dst);
            } else if (rng.bernoulli(0.5)) {
                const std::size_t j = rng.uniform_index(capacity_);
                SCGAN_CHECK(stored_[j].size() == chw, DimensionError,
                            "pool holds images of a different size");
                std::copy_n(stored_[j].data(), chw, dst);
                std::copy_n(fresh, chw, stored_[j].data());
            } else {
                std::copy_n(fresh, chw, dst);
            }
        }
        return out;
    }

    std::size_t capacity() const { return capacity_; }
    std::size_t stored_count() const { return stored_.size(); }

    // flat image blobs, for checkpointing
    const std::vector<std::vector<T>>& contents() const { return stored_; }
    void restore(std::vector<std::vector<T>> contents) {
        SCGAN_CHECK(contents.size() <= capacity_, ArgumentError,
                    "pool restore exceeds capacity");
        stored_ = std::move(contents);
    }

private:
    std::size_t capacity_;
    std::vector<std::vector<T>> stored_;
};

} // namespace scgan

#endif
