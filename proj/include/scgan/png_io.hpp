#ifndef SCGAN_PNG_IO_HPP
#define SCGAN_PNG_IO_HPP

#include <png.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "scgan/common.hpp"
#include "scgan/tensor.hpp"

namespace scgan {

// ---------------------------------------------------------------------------
// PNG codec and pixel normalization.
//
// All on-disk images are 8-bit RGB PNG. Reading converts grayscale and
// alpha variants to plain RGB; writing always emits RGB8. Normalization
// maps byte b to b/127.5 - 1 in [-1,1], and the inverse rounds back to the
// original byte exactly, so codec round-trips are lossless.
// ---------------------------------------------------------------------------

struct ImageU8 {
    std::size_t height = 0, width = 0;
    std::vector<unsigned char> rgb; // interleaved, row-major, 3*height*width
};

inline ImageU8 read_png(const std::string& path) {
    png_image img;
    std::memset(&img, 0, sizeof(img));
    img.version = PNG_IMAGE_VERSION;
    SCGAN_CHECK(png_image_begin_read_from_file(&img, path.c_str()) != 0,
                IoError, "cannot read PNG ", path, ": ", img.message);
    img.format = PNG_FORMAT_RGB; // libpng converts gray/alpha variants
    ImageU8 out;
    out.height = img.height;
    out.width = img.width;
    out.rgb.resize(PNG_IMAGE_SIZE(img));
    if (png_image_finish_read(&img, nullptr, out.rgb.data(), 0, nullptr) == 0) {
        std::string msg = img.message;
        png_image_free(&img);
        fail<IoError>("cannot decode PNG ", path, ": ", msg);
    }
    return out;
}

inline void write_png(const std::string& path, const ImageU8& im) {
    SCGAN_CHECK(im.rgb.size() == 3 * im.height * im.width, DimensionError,
                "image buffer size ", im.rgb.size(), " != 3*", im.height, "*",
                im.width);
    png_image img;
    std::memset(&img, 0, sizeof(img));
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(im.width);
    img.height = static_cast<png_uint_32>(im.height);
    img.format = PNG_FORMAT_RGB;
    SCGAN_CHECK(png_image_write_to_file(&img, path.c_str(), 0, im.rgb.data(), 0,
                                        nullptr) != 0,
                IoError, "cannot write PNG ", path, ": ", img.message);
}

// byte -> [-1,1]
template <typename T = float>
Tensor<T> to_unit_range(const ImageU8& im) {
    Tensor<T> t(Shape{3, im.height, im.width});
    const std::size_t hw = im.height * im.width;
    for (std::size_t p = 0; p < hw; ++p)
        for (std::size_t c = 0; c < 3; ++c)
            t[c * hw + p] = T(im.rgb[p * 3 + c]) / T(127.5) - T(1);
    return t;
}

// [-1,1] -> byte, rounding; inverse of to_unit_range on exact grid values
template <typename T>
ImageU8 from_unit_range(const Tensor<T>& t) {
    SCGAN_CHECK(t.shape().rank() == 3 && t.shape()[0] == 3, DimensionError,
                "expected (3,h,w) image tensor, got ", t.shape().str());
    ImageU8 im;
    im.height = t.shape()[1];
    im.width = t.shape()[2];
    const std::size_t hw = im.height * im.width;
    im.rgb.resize(3 * hw);
    for (std::size_t p = 0; p < hw; ++p)
        for (std::size_t c = 0; c < 3; ++c) {
            double v = (double(t[c * hw + p]) + 1.0) * 127.5;
            v = std::floor(v + 0.5);
            if (v < 0) v = 0;
            if (v > 255) v = 255;
            im.rgb[p * 3 + c] = static_cast<unsigned char>(v);
        }
    return im;
}

// (n,3,h,w) batch slice -> standalone (3,h,w) tensor
template <typename T>
Tensor<T> slice_image(const Tensor<T>& batch, std::size_t i) {
    const Shape& s = batch.shape();
    SCGAN_CHECK(s.rank() == 4, DimensionError, "expected rank-4 batch");
    SCGAN_CHECK(i < s[0], ArgumentError, "image index ", i, " out of range ",
                s[0]);
    Tensor<T> out(Shape{s[1], s[2], s[3]});
    const std::size_t chw = s[1] * s[2] * s[3];
    std::copy_n(batch.data() + i * chw, chw, out.data());
    return out;
}

} // namespace scgan

#endif
