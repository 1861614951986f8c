#ifndef SCGAN_LOSSES_HPP
#define SCGAN_LOSSES_HPP

#include <cmath>
#include <string>

#include "scgan/common.hpp"
#include "scgan/ops.hpp"

namespace scgan {

// ---------------------------------------------------------------------------
// Training objectives as pure differentiable scalar functions.
//
// Adversarial terms use the least-squares form: the generator drives its
// fakes' patch logits toward 1; the discriminator drives real logits toward
// 1 and fake logits toward 0. Reconstruction-style terms (cycle, identity,
// self-supervised decoding) all use mean absolute error, averaged over
// batch, channel, and spatial dimensions alike.
// ---------------------------------------------------------------------------

struct LossWeights {
    double lambda_cyc = 10.0; // weight on cycle reconstruction
    double lambda_id = 0.5;   // weight on identity mapping
    double ssl_weight = 1.0;  // weight on decoder reconstruction inside D loss
};

struct LossBreakdown {
    double adv_g = 0, adv_f = 0;   // generator-side adversarial terms
    double adv_dx = 0, adv_dy = 0; // discriminator least-squares terms
    double ssl_dx = 0, ssl_dy = 0; // decoder reconstruction terms (real only)
    double cyc = 0, id = 0;
    double total = 0;
};

namespace loss_detail {

template <typename T>
void check_nonempty(const Var<T>& v, const char* what) {
    SCGAN_CHECK(v && v->value.numel() > 0, ArgumentError, what,
                ": empty logit map");
}

template <typename T>
void check_pair(const Var<T>& a, const Var<T>& b, const char* what) {
    SCGAN_CHECK(a->value.shape() == b->value.shape(), DimensionError, what,
                ": shape mismatch ", a->value.shape().str(), " vs ",
                b->value.shape().str());
}

} // namespace loss_detail

// mean((logits - 1)^2): how far the discriminator is from accepting fakes
template <typename T>
Var<T> lsgan_generator_loss(const Var<T>& d_fake_logits) {
    loss_detail::check_nonempty(d_fake_logits, "lsgan_generator_loss");
    return mse_to_scalar(d_fake_logits, T(1));
}

// mean((real - 1)^2) + mean(fake^2)
template <typename T>
Var<T> lsgan_discriminator_loss(const Var<T>& d_real_logits,
                                const Var<T>& d_fake_logits) {
    loss_detail::check_nonempty(d_real_logits, "lsgan_discriminator_loss");
    loss_detail::check_nonempty(d_fake_logits, "lsgan_discriminator_loss");
    return add(mse_to_scalar(d_real_logits, T(1)),
               mse_to_scalar(d_fake_logits, T(0)));
}

// MAE(decoded_full, target_full) + MAE(decoded_part, target_part), where the
// targets are degraded views (downsampled image / downsampled quadrant crop)
// of real samples.
template <typename T>
Var<T> ssl_reconstruction_loss(const Var<T>& decoded_full,
                               const Var<T>& target_full,
                               const Var<T>& decoded_part,
                               const Var<T>& target_part) {
    loss_detail::check_pair(decoded_full, target_full,
                            "ssl_reconstruction_loss(full)");
    loss_detail::check_pair(decoded_part, target_part,
                            "ssl_reconstruction_loss(part)");
    for (const Var<T>& v : {decoded_full, decoded_part}) {
        const Shape& s = v->value.shape();
        SCGAN_CHECK(s.rank() == 4 && s[1] == 3 && s[2] == 64 && s[3] == 64,
                    DimensionError,
                    "ssl_reconstruction_loss expects (b,3,64,64) pairs, got ",
                    s.str());
    }
    return add(l1_loss(decoded_full, target_full),
               l1_loss(decoded_part, target_part));
}

// MAE(x_cycled, x) + MAE(y_cycled, y)
template <typename T>
Var<T> cycle_loss(const Var<T>& x, const Var<T>& x_cycled, const Var<T>& y,
                  const Var<T>& y_cycled) {
    loss_detail::check_pair(x, x_cycled, "cycle_loss(x)");
    loss_detail::check_pair(y, y_cycled, "cycle_loss(y)");
    return add(l1_loss(x_cycled, x), l1_loss(y_cycled, y));
}

// MAE(F(x), x) + MAE(G(y), y): generators fed their own target domain
// should change nothing
template <typename T>
Var<T> identity_loss(const Var<T>& x, const Var<T>& f_of_x, const Var<T>& y,
                     const Var<T>& g_of_y) {
    loss_detail::check_pair(x, f_of_x, "identity_loss(x)");
    loss_detail::check_pair(y, g_of_y, "identity_loss(y)");
    return add(l1_loss(f_of_x, x), l1_loss(g_of_y, y));
}

// Assemble the weighted total from already-computed component scalars:
// total = adv_g + adv_f + (adv_dx + w_ssl*ssl_dx) + (adv_dy + w_ssl*ssl_dy)
//         + lambda_cyc*cyc + lambda_id*id
inline LossBreakdown total_loss(const LossBreakdown& parts,
                                const LossWeights& w = {}) {
    SCGAN_CHECK(w.lambda_cyc >= 0 && w.lambda_id >= 0 && w.ssl_weight >= 0,
                ArgumentError, "loss weights must be non-negative");
    auto check = [](double v, const char* name) {
        SCGAN_CHECK(!std::isnan(v), NumericError, "NaN in loss component ",
                    name);
    };
    LossBreakdown out = parts;
    check(out.adv_g, "adv_g");
    check(out.adv_f, "adv_f");
    check(out.adv_dx, "adv_dx");
    check(out.adv_dy, "adv_dy");
    check(out.ssl_dx, "ssl_dx");
    check(out.ssl_dy, "ssl_dy");
    check(out.cyc, "cyc");
    check(out.id, "id");
    out.total = out.adv_g + out.adv_f + out.adv_dx + out.adv_dy +
                w.ssl_weight * (out.ssl_dx + out.ssl_dy) +
                w.lambda_cyc * out.cyc + w.lambda_id * out.id;
    check(out.total, "total");
    return out;
}

} // namespace scgan

#endif
