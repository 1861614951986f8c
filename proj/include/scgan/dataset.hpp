#ifndef SCGAN_DATASET_HPP
#define SCGAN_DATASET_HPP

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "scgan/common.hpp"
#include "scgan/png_io.hpp"
#include "scgan/resize.hpp"
#include "scgan/rng.hpp"
#include "scgan/tensor.hpp"

namespace scgan {

// ---------------------------------------------------------------------------
// Unpaired two-domain image dataset.
//
// On-disk layout: root/{trainA,trainB,testA,testB}/*.png. Domains are
// unpaired; nothing links a trainA file to any trainB file. Images load as
// RGB in [-1,1], optionally resized to a square target. Epoch order is a
// pure function of (seed, epoch), and the smaller domain cycles so each
// epoch covers the larger domain once.
// ---------------------------------------------------------------------------

struct DatasetSpec {
    std::string root;
    std::size_t size = 64; // target square size in pixels

    std::string train_a() const { return root + "/trainA"; }
    std::string train_b() const { return root + "/trainB"; }
    std::string test_a() const { return root + "/testA"; }
    std::string test_b() const { return root + "/testB"; }
};

// All images of one folder, decoded and normalized, with their filenames.
template <typename T = float>
struct DomainData {
    std::vector<Tensor<T>> images; // each (3,h,w)
    std::vector<std::string> names;

    std::size_t count() const { return images.size(); }
};

inline std::vector<std::string> list_pngs(const std::string& dir) {
    namespace fs = std::filesystem;
    SCGAN_CHECK(fs::is_directory(dir), IoError, "missing folder: ", dir);
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string name = entry.path().filename().string();
        if (name.size() > 4 && name.compare(name.size() - 4, 4, ".png") == 0)
            names.push_back(name);
    }
    std::sort(names.begin(), names.end());
    return names;
}

// target_size 0 keeps native resolution (all images must then agree on it)
template <typename T = float>
DomainData<T> load_domain(const std::string& dir, std::size_t target_size) {
    DomainData<T> out;
    out.names = list_pngs(dir);
    out.images.reserve(out.names.size());
    for (const std::string& name : out.names) {
        ImageU8 raw = read_png(dir + "/" + name);
        Tensor<T> img = to_unit_range<T>(raw);
        if (target_size != 0 &&
            (raw.height != target_size || raw.width != target_size))
            img = bilinear_resize(img, target_size, target_size);
        if (!out.images.empty())
            SCGAN_CHECK(img.shape() == out.images.front().shape(),
                        DimensionError, "image size mismatch in ", dir, ": ",
                        name);
        out.images.push_back(std::move(img));
    }
    return out;
}

template <typename T = float>
struct UnpairedDataset {
    DomainData<T> train_a, train_b, test_a, test_b;
    std::size_t size = 0;

    static UnpairedDataset load(const DatasetSpec& spec) {
        SCGAN_CHECK(spec.size >= 16 && spec.size % 16 == 0, ConfigError,
                    "target size must be a positive multiple of 16, got ",
                    spec.size);
        UnpairedDataset ds;
        ds.size = spec.size;
        ds.train_a = load_domain<T>(spec.train_a(), spec.size);
        ds.train_b = load_domain<T>(spec.train_b(), spec.size);
        ds.test_a = load_domain<T>(spec.test_a(), spec.size);
        ds.test_b = load_domain<T>(spec.test_b(), spec.size);
        SCGAN_CHECK(ds.train_a.count() >= 1, IoError,
                    "no training images in ", spec.train_a());
        SCGAN_CHECK(ds.train_b.count() >= 1, IoError,
                    "no training images in ", spec.train_b());
        return ds;
    }
};

inline std::size_t steps_per_epoch(std::size_t n_a, std::size_t n_b,
                                   std::size_t batch_size) {
    SCGAN_CHECK(batch_size >= 1, ArgumentError, "batch_size must be >= 1");
    const std::size_t n = std::max(n_a, n_b);
    return (n + batch_size - 1) / batch_size;
}

// Image index for each of the n_slots batch positions of one epoch: a
// seeded shuffle of the domain, cycled if the epoch needs more slots than
// the domain has images. Pure in (seed, epoch, domain_tag).
inline std::vector<std::size_t> epoch_order(std::size_t n_images,
                                            std::size_t n_slots,
                                            std::uint64_t seed,
                                            std::uint64_t epoch,
                                            std::uint64_t domain_tag) {
    SCGAN_CHECK(n_images >= 1, ArgumentError, "empty domain");
    Rng rng = Rng::stream(seed, "data.epoch", epoch, domain_tag);
    std::vector<std::size_t> perm;
    rng.permutation(n_images, perm);
    std::vector<std::size_t> order(n_slots);
    for (std::size_t i = 0; i < n_slots; ++i) order[i] = perm[i % n_images];
    return order;
}

// Assemble (b,3,h,w) from selected images of one domain.
template <typename T>
Tensor<T> gather_batch(const DomainData<T>& domain,
                       const std::vector<std::size_t>& order,
                       std::size_t first, std::size_t batch_size) {
    SCGAN_CHECK(first + batch_size <= order.size(), ArgumentError,
                "batch range exceeds epoch plan");
    const Shape& s = domain.images.front().shape();
    Tensor<T> out(Shape{batch_size, s[0], s[1], s[2]});
    const std::size_t chw = s.numel();
    for (std::size_t i = 0; i < batch_size; ++i) {
        const Tensor<T>& img = domain.images[order[first + i]];
        std::copy_n(img.data(), chw, out.data() + i * chw);
    }
    return out;
}

} // namespace scgan

#endif
