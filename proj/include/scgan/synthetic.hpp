#ifndef SCGAN_SYNTHETIC_HPP
#define SCGAN_SYNTHETIC_HPP

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "scgan/common.hpp"
#include "scgan/dataset.hpp"
#include "scgan/png_io.hpp"
#include "scgan/rng.hpp"
#include "scgan/tensor.hpp"

namespace scgan {

// ---------------------------------------------------------------------------
// Synthetic two-domain datasets with a known ground-truth translation.
//
// channel-swap: domain A holds 2-5 anti-aliased random shapes on a gray
// background; domain B applies the channel rotation (R,G,B) -> (G,B,R) to
// independently drawn content. The rotation is the oracle translation, so
// a learned A->B map can be scored against it.
//
// stripes: both domains share the shape-content family; A adds a horizontal
// sinusoidal stripe field, B a vertical one. Its oracle needs the per-image
// stripe parameters, which exist only at generation time, so the
// parameter-free oracle entry point refuses the stripes task.
//
// Domain content streams are disjoint by construction: no B image derives
// from the same draw as any A image.
// ---------------------------------------------------------------------------

enum class TaskKind { channel_swap, stripes };

inline const char* task_name(TaskKind k) {
    return k == TaskKind::channel_swap ? "channel-swap" : "stripes";
}

inline TaskKind parse_task(const std::string& s) {
    if (s == "channel-swap") return TaskKind::channel_swap;
    if (s == "stripes") return TaskKind::stripes;
    fail<ConfigError>("unknown task '", s,
                      "' (expected channel-swap or stripes)");
}

struct SyntheticTask {
    TaskKind kind = TaskKind::channel_swap;
    std::size_t n_train = 200, n_test = 50;
    std::size_t size = 64;
    std::uint64_t seed = 1;
};

struct StripeParams {
    double amplitude = 0, frequency = 0, phase = 0;
};

namespace synth_detail {

// Composite one anti-aliased shape (4x4 supersampled coverage) over img.
template <typename T>
void draw_shape(Tensor<T>& img, Rng& rng) {
    const std::size_t s = img.shape()[1];
    const bool ellipse = rng.bernoulli(0.5);
    const double cx = rng.uniform(0.15, 0.85) * double(s);
    const double cy = rng.uniform(0.15, 0.85) * double(s);
    const double rx = rng.uniform(0.08, 0.30) * double(s);
    const double ry = rng.uniform(0.08, 0.30) * double(s);
    // warm palette: channels get distinct, non-overlapping value ranges so
    // the channel rotation produces a visibly different domain
    const T col[3] = {T(rng.uniform(0.25, 0.95)), T(rng.uniform(-0.4, 0.4)),
                      T(rng.uniform(-0.95, -0.2))};
    const std::size_t hw = s * s;
    const std::size_t y_lo = static_cast<std::size_t>(
        std::max(0.0, std::floor(cy - ry - 1)));
    const std::size_t y_hi = static_cast<std::size_t>(
        std::min(double(s), std::ceil(cy + ry + 2)));
    const std::size_t x_lo = static_cast<std::size_t>(
        std::max(0.0, std::floor(cx - rx - 1)));
    const std::size_t x_hi = static_cast<std::size_t>(
        std::min(double(s), std::ceil(cx + rx + 2)));
    for (std::size_t y = y_lo; y < y_hi; ++y)
        for (std::size_t x = x_lo; x < x_hi; ++x) {
            int covered = 0;
            for (int sy = 0; sy < 4; ++sy)
                for (int sx = 0; sx < 4; ++sx) {
                    const double px = double(x) + (sx + 0.5) / 4.0;
                    const double py = double(y) + (sy + 0.5) / 4.0;
                    const double dx = (px - cx) / rx, dy = (py - cy) / ry;
                    const bool inside = ellipse
                                            ? (dx * dx + dy * dy <= 1.0)
                                            : (std::abs(dx) <= 1.0 &&
                                               std::abs(dy) <= 1.0);
                    covered += inside;
                }
            if (!covered) continue;
            const T alpha = T(covered) / T(16);
            for (std::size_t c = 0; c < 3; ++c) {
                T& v = img[c * hw + y * s + x];
                v = col[c] * alpha + v * (T(1) - alpha);
            }
        }
}

} // namespace synth_detail

// One content draw: gray background, 2-5 shapes, Gaussian pixel noise
// (sigma 0.02 in [-1,1] units), clamped to [-1,1].
template <typename T = float>
Tensor<T> synth_content(std::size_t size, Rng& rng, Rng& noise_rng) {
    Tensor<T> img(Shape{3, size, size}, T(0.1));
    const std::size_t n_shapes = 2 + rng.uniform_index(4);
    for (std::size_t i = 0; i < n_shapes; ++i)
        synth_detail::draw_shape(img, rng);
    for (std::size_t i = 0; i < img.numel(); ++i) {
        double v = double(img[i]) + noise_rng.normal(0.0, 0.02);
        img[i] = T(std::clamp(v, -1.0, 1.0));
    }
    return img;
}

// horizontal=true adds a field varying along y (stripes run horizontally)
template <typename T>
void add_stripe_field(Tensor<T>& img, const StripeParams& p, bool horizontal) {
    const std::size_t s = img.shape()[1];
    const std::size_t hw = s * s;
    for (std::size_t y = 0; y < s; ++y)
        for (std::size_t x = 0; x < s; ++x) {
            const double t = double(horizontal ? y : x) / double(s);
            const T add =
                T(p.amplitude *
                  std::sin(2.0 * 3.14159265358979323846 * p.frequency * t +
                           p.phase));
            for (std::size_t c = 0; c < 3; ++c) {
                T& v = img[c * hw + y * s + x];
                v = std::clamp(v + add, T(-1), T(1));
            }
        }
}

inline StripeParams sample_stripe_params(Rng& rng) {
    StripeParams p;
    p.amplitude = rng.uniform(0.15, 0.30);
    p.frequency = rng.uniform(4.0, 8.0);
    p.phase = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    return p;
}

// (R,G,B) -> (G,B,R) on a (3,h,w) image or (n,3,h,w) batch
template <typename T>
Tensor<T> channel_swap(const Tensor<T>& x) {
    const Shape& s = x.shape();
    SCGAN_CHECK((s.rank() == 3 && s[0] == 3) || (s.rank() == 4 && s[1] == 3),
                DimensionError, "channel_swap expects 3-channel input, got ",
                s.str());
    Tensor<T> out(s);
    const std::size_t n = s.rank() == 4 ? s[0] : 1;
    const std::size_t hw = s.rank() == 4 ? s[2] * s[3] : s[1] * s[2];
    for (std::size_t i = 0; i < n; ++i) {
        const T* src = x.data() + i * 3 * hw;
        T* dst = out.data() + i * 3 * hw;
        std::copy_n(src + hw, hw, dst);          // out R = in G
        std::copy_n(src + 2 * hw, hw, dst + hw); // out G = in B
        std::copy_n(src, hw, dst + 2 * hw);      // out B = in R
    }
    return out;
}

// Ground-truth translation for tasks whose oracle needs no per-image
// context. The stripes oracle requires generation-time stripe parameters,
// so it is unsupported here.
template <typename T>
Tensor<T> oracle_translate(TaskKind kind, const Tensor<T>& x) {
    if (kind == TaskKind::channel_swap) return channel_swap(x);
    fail<UnsupportedOracleError>(
        "stripes oracle needs per-image stripe parameters from the dataset "
        "manifest's generation seed; images without them cannot be "
        "oracle-translated");
}

// Stripes oracle for images with known parameters: remove the horizontal
// field, add the vertical one at the same parameters.
template <typename T>
Tensor<T> oracle_translate_stripes(const Tensor<T>& x, const StripeParams& p) {
    Tensor<T> out = x;
    StripeParams neg = p;
    neg.amplitude = -p.amplitude;
    add_stripe_field(out, neg, true); // subtract horizontal
    add_stripe_field(out, p, false);  // add vertical
    return out;
}

// --- dataset writer --------------------------------------------------------

namespace synth_detail {

// domain_tag keeps every folder on a disjoint rng stream
template <typename T>
void write_domain(const std::string& dir, std::size_t count,
                  const SyntheticTask& task, std::uint64_t domain_tag,
                  bool apply_oracle, bool horizontal_stripes) {
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < count; ++i) {
        Rng content = Rng::stream(task.seed, "synth.content", domain_tag, i);
        Rng noise = Rng::stream(task.seed, "synth.noise", domain_tag, i);
        Tensor<T> img = synth_content<T>(task.size, content, noise);
        if (task.kind == TaskKind::channel_swap) {
            if (apply_oracle) img = channel_swap(img);
        } else {
            Rng stripe = Rng::stream(task.seed, "synth.stripe", domain_tag, i);
            add_stripe_field(img, sample_stripe_params(stripe),
                             horizontal_stripes);
        }
        char name[32];
        std::snprintf(name, sizeof(name), "img_%04zu.png", i);
        write_png(dir + "/" + name, from_unit_range(img));
    }
}

} // namespace synth_detail

// Writes root/{trainA,trainB,testA,testB}/*.png plus manifest.json.
// Refuses an existing non-empty output directory unless overwrite is set.
template <typename T = float>
DatasetSpec generate_synthetic(const SyntheticTask& task,
                               const std::string& out, bool overwrite = false) {
    namespace fs = std::filesystem;
    SCGAN_CHECK(task.n_train >= 1 && task.size >= 16 && task.size % 16 == 0,
                ConfigError, "need n_train >= 1 and size a multiple of 16");
    if (fs::exists(out) && !fs::is_empty(out)) {
        SCGAN_CHECK(overwrite, IoError, "output directory ", out,
                    " is not empty; pass the overwrite flag to replace it");
        for (const char* sub : {"trainA", "trainB", "testA", "testB"})
            fs::remove_all(fs::path(out) / sub);
        fs::remove(fs::path(out) / "manifest.json");
    }
    fs::create_directories(out);

    // domain tags: trainA 0, trainB 1, testA 2, testB 3
    const bool swap = task.kind == TaskKind::channel_swap;
    synth_detail::write_domain<T>(out + "/trainA", task.n_train, task, 0,
                                  false, true);
    synth_detail::write_domain<T>(out + "/trainB", task.n_train, task, 1,
                                  swap, false);
    synth_detail::write_domain<T>(out + "/testA", task.n_test, task, 2, false,
                                  true);
    synth_detail::write_domain<T>(out + "/testB", task.n_test, task, 3, swap,
                                  false);

    nlohmann::json manifest = {{"task", task_name(task.kind)},
                               {"seed", task.seed},
                               {"n_train", task.n_train},
                               {"n_test", task.n_test},
                               {"size", task.size}};
    std::ofstream mf(out + "/manifest.json");
    SCGAN_CHECK(mf.good(), IoError, "cannot write manifest in ", out);
    mf << manifest.dump(2) << "\n";

    DatasetSpec spec;
    spec.root = out;
    spec.size = task.size;
    return spec;
}

inline SyntheticTask read_manifest(const std::string& root) {
    std::ifstream f(root + "/manifest.json");
    SCGAN_CHECK(f.good(), IoError, "missing manifest.json in ", root);
    nlohmann::json j = nlohmann::json::parse(f, nullptr, false);
    SCGAN_CHECK(!j.is_discarded(), IoError, "malformed manifest.json in ",
                root);
    SyntheticTask task;
    task.kind = parse_task(j.at("task").get<std::string>());
    task.seed = j.at("seed").get<std::uint64_t>();
    task.n_train = j.at("n_train").get<std::size_t>();
    task.n_test = j.at("n_test").get<std::size_t>();
    task.size = j.at("size").get<std::size_t>();
    return task;
}

} // namespace scgan

#endif
