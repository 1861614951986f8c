#ifndef SCGAN_FEATURES_HPP
#define SCGAN_FEATURES_HPP

#include <cmath>
#include <string>
#include <vector>

#include "scgan/checkpoint.hpp"
#include "scgan/common.hpp"
#include "scgan/conv.hpp"
#include "scgan/resize.hpp"
#include "scgan/rng.hpp"
#include "scgan/tensor.hpp"

namespace scgan {

// ---------------------------------------------------------------------------
// Seeded feature extractors for distribution metrics.
//
// random-conv: four stride-2 4x4 convolutions (32/64/128/256 channels,
// LeakyReLU 0.2) followed by global average pooling, d = 256. Weights are
// He-scaled normals fully determined by the seed — a fixed random embedding,
// not a trained network, so metric values are only comparable across runs
// that share the extractor seed.
//
// flatten-downsample: bilinear resize to 8x8 and flatten, d = 192.
//
// external-file: the random-conv architecture with weights loaded from a
// tensor directory (manifest.txt + .bin files, names conv0..conv3 .weight/
// .bias as written by save_extractor_weights).
// ---------------------------------------------------------------------------

enum class ExtractorKind { random_conv, flatten_downsample, external_file };

inline const char* extractor_name(ExtractorKind k) {
    switch (k) {
        case ExtractorKind::random_conv: return "random-conv";
        case ExtractorKind::flatten_downsample: return "flatten-downsample";
        case ExtractorKind::external_file: return "external-file";
    }
    return "?";
}

inline ExtractorKind parse_extractor(const std::string& s) {
    if (s == "random-conv") return ExtractorKind::random_conv;
    if (s == "flatten-downsample") return ExtractorKind::flatten_downsample;
    if (s == "external-file") return ExtractorKind::external_file;
    fail<ConfigError>("unknown extractor '", s,
                      "' (expected random-conv, flatten-downsample, "
                      "external-file)");
}

class FeatureExtractor {
public:
    static constexpr std::size_t conv_channels[4] = {32, 64, 128, 256};

    explicit FeatureExtractor(ExtractorKind kind, std::uint64_t seed = 2021,
                              const std::string& weight_dir = "")
        : kind_(kind), seed_(seed) {
        if (kind == ExtractorKind::random_conv) init_weights(seed);
        else if (kind == ExtractorKind::external_file) load_weights(weight_dir);
    }

    ExtractorKind kind() const { return kind_; }
    std::uint64_t seed() const { return seed_; }

    std::size_t dim() const {
        return kind_ == ExtractorKind::flatten_downsample ? 192 : 256;
    }

    // images: each (3,h,w); result row i is the feature vector of image i
    std::vector<std::vector<double>> extract(
        const std::vector<Tensor<float>>& images) const {
        SCGAN_CHECK(images.size() >= 2, ArgumentError,
                    "feature extraction needs at least 2 images, got ",
                    images.size());
        std::vector<std::vector<double>> out;
        out.reserve(images.size());
        for (const auto& img : images) {
            SCGAN_CHECK(img.shape().rank() == 3 && img.shape()[0] == 3,
                        DimensionError, "expected (3,h,w) image, got ",
                        img.shape().str());
            out.push_back(kind_ == ExtractorKind::flatten_downsample
                              ? flatten_features(img)
                              : conv_features(img));
        }
        return out;
    }

    void save_weights(const std::string& dir) const {
        SCGAN_CHECK(kind_ != ExtractorKind::flatten_downsample, ArgumentError,
                    "flatten-downsample has no weights");
        std::vector<std::pair<std::string, const Tensor<float>*>> tensors;
        for (std::size_t i = 0; i < 4; ++i) {
            tensors.emplace_back(cat("conv", i, ".weight"), &weights_[i]);
            tensors.emplace_back(cat("conv", i, ".bias"), &biases_[i]);
        }
        save_tensors(dir, tensors);
    }

private:
    void init_weights(std::uint64_t seed) {
        std::size_t c_in = 3;
        for (std::size_t i = 0; i < 4; ++i) {
            const std::size_t c_out = conv_channels[i];
            weights_[i] = Tensor<float>(Shape{c_out, c_in, 4, 4});
            biases_[i] = Tensor<float>(Shape{c_out}, 0.f);
            const double sigma = std::sqrt(2.0 / double(c_in * 16));
            Rng rng = Rng::stream(seed, "feat.conv", i);
            for (std::size_t k = 0; k < weights_[i].numel(); ++k)
                weights_[i][k] = float(rng.normal(0.0, sigma));
            c_in = c_out;
        }
    }

    void load_weights(const std::string& dir) {
        SCGAN_CHECK(!dir.empty(), ConfigError,
                    "external-file extractor needs a weight directory");
        std::size_t c_in = 3;
        std::vector<std::pair<std::string, Tensor<float>*>> tensors;
        for (std::size_t i = 0; i < 4; ++i) {
            const std::size_t c_out = conv_channels[i];
            weights_[i] = Tensor<float>(Shape{c_out, c_in, 4, 4});
            biases_[i] = Tensor<float>(Shape{c_out}, 0.f);
            tensors.emplace_back(cat("conv", i, ".weight"), &weights_[i]);
            tensors.emplace_back(cat("conv", i, ".bias"), &biases_[i]);
            c_in = c_out;
        }
        load_tensors(dir, tensors);
    }

    std::vector<double> flatten_features(const Tensor<float>& img) const {
        Tensor<float> small = img;
        if (img.shape()[1] != 8 || img.shape()[2] != 8)
            small = bilinear_resize(img, 8, 8);
        std::vector<double> f(192);
        for (std::size_t i = 0; i < 192; ++i) f[i] = double(small[i]);
        return f;
    }

    std::vector<double> conv_features(const Tensor<float>& img) const {
        SCGAN_CHECK(img.shape()[1] >= 16 && img.shape()[2] >= 16,
                    DimensionError,
                    "random-conv extractor needs images of at least 16px");
        Tensor<float> h(Shape{1, 3, img.shape()[1], img.shape()[2]},
                        std::vector<float>(img.data(),
                                           img.data() + img.numel()));
        for (std::size_t i = 0; i < 4; ++i) {
            h = conv::forward(h, weights_[i], &biases_[i], 2, 1);
            for (std::size_t k = 0; k < h.numel(); ++k)
                if (h[k] < 0) h[k] *= 0.2f;
        }
        const std::size_t c = h.shape()[1], hw = h.shape()[2] * h.shape()[3];
        std::vector<double> f(c);
        for (std::size_t ch = 0; ch < c; ++ch) {
            double s = 0;
            for (std::size_t k = 0; k < hw; ++k) s += double(h[ch * hw + k]);
            f[ch] = s / double(hw);
        }
        return f;
    }

    ExtractorKind kind_;
    std::uint64_t seed_;
    Tensor<float> weights_[4], biases_[4];
};

} // namespace scgan

#endif
