#ifndef SCGAN_TRANSLATE_HPP
#define SCGAN_TRANSLATE_HPP

#include <filesystem>
#include <functional>
#include <string>

#include "scgan/common.hpp"
#include "scgan/dataset.hpp"
#include "scgan/nn.hpp"
#include "scgan/png_io.hpp"

namespace scgan {

// Run a per-image mapping over every PNG in a directory, writing results
// under the same filenames. The mapping is injectable so tests can swap in
// stubs (identity, oracle) for a trained generator.
using ImageFn = std::function<Tensor<float>(const Tensor<float>&)>;

inline std::size_t translate_directory(const std::string& input_dir,
                                       const std::string& output_dir,
                                       const ImageFn& fn) {
    const std::vector<std::string> names = list_pngs(input_dir);
    SCGAN_CHECK(!names.empty(), IoError, "no PNG images in ", input_dir);
    std::filesystem::create_directories(output_dir);
    for (const std::string& name : names) {
        Tensor<float> img = to_unit_range(read_png(input_dir + "/" + name));
        write_png(output_dir + "/" + name, from_unit_range(fn(img)));
    }
    return names.size();
}

// Wrap one generator as a single-image mapping (gradient-free).
inline ImageFn generator_fn(Generator<float>& gen) {
    return [&gen](const Tensor<float>& img) {
        const Shape& s = img.shape();
        Tensor<float> batch(Shape{1, s[0], s[1], s[2]},
                            std::vector<float>(img.data(),
                                               img.data() + img.numel()));
        NoGradGuard no_grad;
        VarF out = gen(make_leaf(batch));
        return slice_image(out->value, 0);
    };
}

enum class Direction { a_to_b, b_to_a };

inline Direction parse_direction(const std::string& s) {
    if (s == "AtoB") return Direction::a_to_b;
    if (s == "BtoA") return Direction::b_to_a;
    fail<ConfigError>("invalid direction '", s, "' (expected AtoB or BtoA)");
}

} // namespace scgan

#endif
