// Dense tensor container: shape algebra, NCHW indexing, vectorized reductions.
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "scgan/tensor.hpp"

using namespace scgan;

TEST_CASE("shape reports rank, extents, and element count") {
    Shape s{2, 3, 4, 5};
    REQUIRE(s.rank() == 4);
    REQUIRE(s[0] == 2);
    REQUIRE(s[3] == 5);
    REQUIRE(s.numel() == 120);
    REQUIRE(Shape{}.numel() == 1);
    Shape v{7};
    REQUIRE(v.rank() == 1);
    REQUIRE(v.numel() == 7);
}

TEST_CASE("shape equality compares rank and every extent") {
    REQUIRE(Shape{2, 3} == Shape{2, 3});
    REQUIRE(Shape{2, 3} != Shape{3, 2});
    REQUIRE(Shape{2, 3} != Shape{2, 3, 1});
}

TEST_CASE("tensor constructors fill, copy deeply, and validate sizes") {
    TensorF t(Shape{2, 3}, 1.5f);
    REQUIRE(t.numel() == 6);
    for (std::size_t i = 0; i < 6; ++i) REQUIRE(t[i] == 1.5f);

    TensorF z = TensorF::zeros(Shape{4});
    for (std::size_t i = 0; i < 4; ++i) REQUIRE(z[i] == 0.0f);

    TensorF f = TensorF::full(Shape{2, 2}, -3.0f);
    REQUIRE(f[3] == -3.0f);

    TensorF from_data(Shape{2, 2}, std::vector<float>{1, 2, 3, 4});
    REQUIRE(from_data[2] == 3.0f);
    REQUIRE_THROWS_AS(TensorF(Shape{2, 2}, std::vector<float>{1, 2, 3}),
                      DimensionError);

    TensorF copy = from_data;
    copy[0] = 99.0f;
    REQUIRE(from_data[0] == 1.0f);
}

TEST_CASE("NCHW accessor addresses row-major layout") {
    TensorF t(Shape{2, 3, 4, 5});
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = float(i);
    REQUIRE(t.at(0, 0, 0, 0) == 0.0f);
    REQUIRE(t.at(0, 0, 0, 4) == 4.0f);
    REQUIRE(t.at(0, 0, 1, 0) == 5.0f);
    REQUIRE(t.at(0, 1, 0, 0) == 20.0f);
    REQUIRE(t.at(1, 0, 0, 0) == 60.0f);
    REQUIRE(t.at(1, 2, 3, 4) == float(t.numel() - 1));
    REQUIRE(t.index4(1, 2, 3, 4) == t.numel() - 1);
}

TEST_CASE("fill, cast, and reshape preserve or convert contents") {
    TensorF t(Shape{2, 2});
    t.fill(2.5f);
    REQUIRE(t[3] == 2.5f);

    TensorD d = t.cast<double>();
    REQUIRE(d.shape() == t.shape());
    REQUIRE(d[1] == 2.5);

    TensorF r = t.reshaped(Shape{4});
    REQUIRE(r.shape() == Shape{4});
    REQUIRE(r[2] == 2.5f);
    REQUIRE_THROWS_AS(t.reshaped(Shape{3}), DimensionError);
}

TEST_CASE("lane-parallel reductions agree with sequential references") {
    // Sizes straddle the 16-lane boundary to exercise both main loop and tail.
    for (std::size_t n : {std::size_t(1), std::size_t(15), std::size_t(16),
                          std::size_t(17), std::size_t(100)}) {
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = 0.1 * double(i) - 1.0;
            b[i] = 0.3 * double(i % 7) + 0.5;
        }
        double sum = 0, dot = 0, absdiff = 0;
        for (std::size_t i = 0; i < n; ++i) {
            sum += a[i];
            dot += a[i] * b[i];
            absdiff += std::abs(a[i] - b[i]);
        }
        const double mean = sum / double(n);
        double sqdev = 0;
        for (std::size_t i = 0; i < n; ++i)
            sqdev += (a[i] - mean) * (a[i] - mean);

        REQUIRE(vec_sum(a.data(), n) == Catch::Approx(sum).epsilon(1e-12));
        REQUIRE(vec_dot(a.data(), b.data(), n) ==
                Catch::Approx(dot).epsilon(1e-12));
        REQUIRE(vec_abs_diff_sum(a.data(), b.data(), n) ==
                Catch::Approx(absdiff).epsilon(1e-12));
        REQUIRE(vec_sq_dev_sum(a.data(), n, mean) ==
                Catch::Approx(sqdev).epsilon(1e-12));
    }
}
