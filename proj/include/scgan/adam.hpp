#ifndef SCGAN_ADAM_HPP
#define SCGAN_ADAM_HPP

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "scgan/common.hpp"
#include "scgan/tape.hpp"
#include "scgan/tensor.hpp"

namespace scgan {

// Adam with bias correction over a fixed set of named parameters. A
// parameter that received no gradient this step is treated as having a zero
// gradient, so the update sweep is a pure function of optimizer state.
// Per-element math runs in double and stores back in T, keeping updates
// reproducible across runs and checkpoint round-trips.
template <typename T>
class Adam {
public:
    Adam(std::vector<std::pair<std::string, Var<T>>> params, double beta1 = 0.5,
         double beta2 = 0.999, double eps = 1e-8)
        : params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps) {
        m_.reserve(params_.size());
        v_.reserve(params_.size());
        for (const auto& [_, p] : params_) {
            m_.emplace_back(p->value.shape(), T(0));
            v_.emplace_back(p->value.shape(), T(0));
        }
    }

    void step(double lr) {
        SCGAN_CHECK(lr >= 0, ArgumentError, "negative learning rate");
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, double(t_));
        const double bc2 = 1.0 - std::pow(beta2_, double(t_));
        for (std::size_t k = 0; k < params_.size(); ++k) {
            Node<T>& node = *params_[k].second;
            const bool has_grad = node.has_grad;
            T* m = m_[k].data();
            T* v = v_[k].data();
            T* p = node.value.data();
            const T* g = has_grad ? node.grad.data() : nullptr;
            for (std::size_t i = 0; i < node.value.numel(); ++i) {
                const double gi = g ? double(g[i]) : 0.0;
                const double mi = beta1_ * double(m[i]) + (1.0 - beta1_) * gi;
                const double vi =
                    beta2_ * double(v[i]) + (1.0 - beta2_) * gi * gi;
                m[i] = T(mi);
                v[i] = T(vi);
                if (lr != 0.0)
                    p[i] = T(double(p[i]) - lr * (mi / bc1) /
                                               (std::sqrt(vi / bc2) + eps_));
            }
        }
    }

    const std::vector<std::pair<std::string, Var<T>>>& params() const {
        return params_;
    }
    std::uint64_t step_count() const { return t_; }
    void set_step_count(std::uint64_t t) { t_ = t; }
    std::vector<Tensor<T>>& first_moments() { return m_; }
    std::vector<Tensor<T>>& second_moments() { return v_; }

private:
    std::vector<std::pair<std::string, Var<T>>> params_;
    std::vector<Tensor<T>> m_, v_;
    double beta1_, beta2_, eps_;
    std::uint64_t t_ = 0;
};

} // namespace scgan

#endif
