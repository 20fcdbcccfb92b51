#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "groundkit/encoding.hpp"
#include "groundkit/rng.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

using namespace groundkit::encoding;
using groundkit::geom::Box;
using groundkit::geom::Extent;
using groundkit::rng::Rng;

namespace {

FeatureGrid constant_grid(std::size_t h, std::size_t w, std::size_t c, double stride,
                          float value) {
    FeatureGrid grid{h, w, c, stride, std::vector<float>(h * w * c, value)};
    return grid;
}

// f(x, y) = base + ax + by per channel; bilinear interpolation must
// reproduce affine functions exactly (up to float rounding).
FeatureGrid ramp_grid(std::size_t h, std::size_t w, double stride, double base, double ax,
                      double by) {
    FeatureGrid grid{h, w, 1, stride, std::vector<float>(h * w, 0.0f)};
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            grid.at(y, x, 0) = static_cast<float>(base + ax * x + by * y);
    return grid;
}

FeaturePyramid single_level(FeatureGrid grid) {
    FeaturePyramid pyramid;
    pyramid.levels.push_back(std::move(grid));
    return pyramid;
}

} // namespace

TEST_CASE("grid validation") {
    CHECK_NOTHROW(validate(constant_grid(4, 4, 2, 8.0, 0.0f)));
    FeatureGrid bad = constant_grid(4, 4, 2, 8.0, 0.0f);
    bad.values.pop_back();
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    FeatureGrid zero_stride = constant_grid(4, 4, 2, 0.0, 0.0f);
    CHECK_THROWS_AS(validate(zero_stride), std::invalid_argument);
}

TEST_CASE("pyramid validation enforces stride order and shared channels") {
    FeaturePyramid pyramid;
    pyramid.levels.push_back(constant_grid(8, 8, 2, 8.0, 0.0f));
    pyramid.levels.push_back(constant_grid(4, 4, 2, 16.0, 0.0f));
    CHECK_NOTHROW(validate(pyramid));

    FeaturePyramid disordered = pyramid;
    std::swap(disordered.levels[0], disordered.levels[1]);
    CHECK_THROWS_AS(validate(disordered), std::invalid_argument);

    FeaturePyramid mixed = pyramid;
    mixed.levels[1].channels = 3;
    mixed.levels[1].values.resize(4 * 4 * 3);
    CHECK_THROWS_AS(validate(mixed), std::invalid_argument);

    CHECK_THROWS_AS(validate(FeaturePyramid{}), std::invalid_argument);
}

TEST_CASE("level selection follows the canonical scale rule") {
    RoiAlignConfig config;
    // sqrt(area) = 224 -> floor(log2(1) + 4) - 2 = 2.
    Box canonical{0, 0, 224, 224};
    CHECK(select_level(canonical, 4, config) == 2);
    // Half the canonical size: level 1.
    CHECK(select_level(Box{0, 0, 112, 112}, 4, config) == 1);
    // Quarter: level 0.
    CHECK(select_level(Box{0, 0, 56, 56}, 4, config) == 0);
    // Double: level 3.
    CHECK(select_level(Box{0, 0, 448, 448}, 4, config) == 3);
    // Tiny and huge boxes clamp to the ends.
    CHECK(select_level(Box{0, 0, 2, 2}, 4, config) == 0);
    CHECK(select_level(Box{0, 0, 10000, 10000}, 4, config) == 3);
    // Single-level pyramids always use level 0.
    CHECK(select_level(canonical, 1, config) == 0);
}

TEST_CASE("bilinear sampling at cell centers returns stored values") {
    FeatureGrid grid = ramp_grid(4, 4, 1.0, 3.0, 2.0, 5.0);
    CHECK(bilinear_sample(grid, 0.0, 0.0, 0) == doctest::Approx(3.0));
    CHECK(bilinear_sample(grid, 2.0, 1.0, 0) == doctest::Approx(3.0 + 4.0 + 5.0));
    // Halfway between cells: exact average for an affine field.
    CHECK(bilinear_sample(grid, 0.5, 0.0, 0) == doctest::Approx(4.0));
    // Outside the grid clamps to the border.
    CHECK(bilinear_sample(grid, -3.0, 0.0, 0) == doctest::Approx(3.0));
    CHECK(bilinear_sample(grid, 5.0, 0.0, 0) == doctest::Approx(3.0 + 2.0 * 3.0));
}

TEST_CASE("roi_align over a constant grid returns the constant") {
    FeaturePyramid pyramid = single_level(constant_grid(16, 16, 3, 4.0, 2.5f));
    RoiAlignConfig config;
    config.output_size = 7;
    std::vector<double> pooled = roi_align(pyramid, Box{3, 3, 40, 50}, config);
    REQUIRE(pooled.size() == 7 * 7 * 3);
    for (double v : pooled) CHECK(v == doctest::Approx(2.5));
    std::vector<double> content = pooled_mean(pooled, 3);
    REQUIRE(content.size() == 3);
    for (double v : content) CHECK(v == doctest::Approx(2.5));
}

TEST_CASE("roi_align reproduces affine ramps to float precision") {
    // f(px, py) = 3 + 2 * gx + 5 * gy with gx = px / stride - 0.5.
    const double stride = 4.0;
    FeaturePyramid pyramid = single_level(ramp_grid(32, 32, stride, 3.0, 2.0, 5.0));
    RoiAlignConfig config;
    config.output_size = 4;
    config.samples_per_bin = 2;
    Box box{8, 12, 72, 60};
    std::vector<double> pooled = roi_align(pyramid, box, config);
    REQUIRE(pooled.size() == 16);

    // Mean of an affine function over symmetric sample points equals the
    // function at the bin center.
    const double bin_w = (box.xmax - box.xmin) / 4.0;
    const double bin_h = (box.ymax - box.ymin) / 4.0;
    for (std::size_t by = 0; by < 4; ++by) {
        for (std::size_t bx = 0; bx < 4; ++bx) {
            double cx = box.xmin + (bx + 0.5) * bin_w;
            double cy = box.ymin + (by + 0.5) * bin_h;
            double gx = cx / stride - 0.5;
            double gy = cy / stride - 0.5;
            double expected = 3.0 + 2.0 * gx + 5.0 * gy;
            CHECK(pooled[by * 4 + bx] == doctest::Approx(expected).epsilon(1e-6));
        }
    }
}

TEST_CASE("roi_align is linear in the feature values") {
    Rng rng(2025);
    for (int trial = 0; trial < 50; ++trial) {
        FeatureGrid a = constant_grid(8, 8, 2, 8.0, 0.0f);
        FeatureGrid b = constant_grid(8, 8, 2, 8.0, 0.0f);
        for (std::size_t i = 0; i < a.values.size(); ++i) {
            a.values[i] = static_cast<float>(rng.uniform(-2, 2));
            b.values[i] = static_cast<float>(rng.uniform(-2, 2));
        }
        FeatureGrid sum = a;
        for (std::size_t i = 0; i < sum.values.size(); ++i) sum.values[i] += b.values[i];

        double x = rng.uniform(0, 50);
        double y = rng.uniform(0, 50);
        Box box{x, y, x + rng.uniform(2, 14), y + rng.uniform(2, 14)};
        RoiAlignConfig config;
        config.output_size = 3;

        std::vector<double> pa = roi_align(single_level(a), box, config);
        std::vector<double> pb = roi_align(single_level(b), box, config);
        std::vector<double> ps = roi_align(single_level(sum), box, config);
        REQUIRE(pa.size() == ps.size());
        for (std::size_t i = 0; i < ps.size(); ++i)
            CHECK(ps[i] == doctest::Approx(pa[i] + pb[i]).epsilon(1e-5));
    }
}

TEST_CASE("roi_align rejects degenerate boxes") {
    FeaturePyramid pyramid = single_level(constant_grid(8, 8, 1, 8.0, 1.0f));
    CHECK_THROWS_AS(roi_align(pyramid, Box{4, 4, 4, 10}, RoiAlignConfig{}),
                    std::invalid_argument);
}

TEST_CASE("position embedding shape and bounds") {
    PositionEmbeddingConfig config;
    config.dimensions = 64;
    Extent frame{640, 480};
    Rng rng(31);
    for (int i = 0; i < 200; ++i) {
        double x = rng.uniform(0, 600);
        double y = rng.uniform(0, 440);
        Box box{x, y, x + rng.uniform(0, 40), y + rng.uniform(0, 40)};
        std::vector<double> embedding = box_position_embedding(box, frame, config);
        REQUIRE(embedding.size() == 64);
        for (double v : embedding) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("zero box embeds to the sin0 cos0 pattern") {
    PositionEmbeddingConfig config;
    config.dimensions = 32;
    std::vector<double> embedding =
        box_position_embedding(Box{0, 0, 0, 0}, Extent{640, 480}, config);
    REQUIRE(embedding.size() == 32);
    for (std::size_t i = 0; i < embedding.size(); i += 2) {
        CHECK(embedding[i] == 0.0);      // sin(0)
        CHECK(embedding[i + 1] == 1.0);  // cos(0)
    }
}

TEST_CASE("position embedding separates distant boxes") {
    PositionEmbeddingConfig config;
    config.dimensions = 64;
    Extent frame{1000, 1000};
    std::vector<double> a = box_position_embedding(Box{0, 0, 100, 100}, frame, config);
    std::vector<double> b = box_position_embedding(Box{800, 800, 950, 950}, frame, config);
    std::vector<double> c = box_position_embedding(Box{0, 0, 100, 100}, frame, config);
    CHECK(a == c);
    double distance = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) distance += std::abs(a[i] - b[i]);
    CHECK(distance > 1.0);
}

TEST_CASE("position embedding frequency layout per corner quarter") {
    PositionEmbeddingConfig config;
    config.dimensions = 8;  // quarter = 2: one sin/cos pair per coordinate
    Extent frame{100, 100};
    Box box{25, 50, 75, 100};
    std::vector<double> e = box_position_embedding(box, frame, config);
    REQUIRE(e.size() == 8);
    CHECK(e[0] == doctest::Approx(std::sin(0.25)));
    CHECK(e[1] == doctest::Approx(std::cos(0.25)));
    CHECK(e[2] == doctest::Approx(std::sin(0.5)));
    CHECK(e[3] == doctest::Approx(std::cos(0.5)));
    CHECK(e[4] == doctest::Approx(std::sin(0.75)));
    CHECK(e[5] == doctest::Approx(std::cos(0.75)));
    CHECK(e[6] == doctest::Approx(std::sin(1.0)));
    CHECK(e[7] == doctest::Approx(std::cos(1.0)));
}

TEST_CASE("position embedding dimension constraint") {
    PositionEmbeddingConfig config;
    config.dimensions = 30;
    CHECK_THROWS_AS(box_position_embedding(Box{0, 0, 1, 1}, Extent{10, 10}, config),
                    std::invalid_argument);
}

TEST_CASE("object token adds content and position") {
    std::vector<double> content = {1.0, 2.0, 3.0};
    std::vector<double> position = {0.5, -0.5, 0.25};
    std::vector<double> token = object_token(content, position);
    CHECK(token == std::vector<double>{1.5, 1.5, 3.25});
    CHECK_THROWS_AS(object_token(content, {1.0}), std::invalid_argument);
}

TEST_CASE("dual feature fusion concatenates per token") {
    std::vector<std::vector<double>> first = {{1, 2}, {3, 4}};
    std::vector<std::vector<double>> second = {{5}, {6}};
    std::vector<std::vector<double>> fused = fuse_dual_features(first, second);
    REQUIRE(fused.size() == 2);
    CHECK(fused[0] == std::vector<double>{1, 2, 5});
    CHECK(fused[1] == std::vector<double>{3, 4, 6});
    CHECK_THROWS_AS(fuse_dual_features(first, {{1}}), std::invalid_argument);
}

TEST_CASE("grid binary round trip") {
    Rng rng(77);
    FeatureGrid grid = constant_grid(5, 3, 2, 16.0, 0.0f);
    for (float& v : grid.values) v = static_cast<float>(rng.uniform(-10, 10));

    std::stringstream stream;
    write_grid(stream, grid);
    FeatureGrid back = read_grid(stream);
    CHECK(back.height == grid.height);
    CHECK(back.width == grid.width);
    CHECK(back.channels == grid.channels);
    CHECK(back.stride == doctest::Approx(grid.stride));
    CHECK(back.values == grid.values);
}

TEST_CASE("grid file round trip and truncation error") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "groundkit_grid_test";
    fs::create_directories(dir);
    fs::path path = dir / "grid.bin";

    FeatureGrid grid = constant_grid(4, 4, 1, 8.0, 1.5f);
    write_grid_file(path.string(), grid);
    FeatureGrid back = read_grid_file(path.string());
    CHECK(back.values == grid.values);

    // Chop the file mid-payload: the reader must notice.
    fs::resize_file(path, fs::file_size(path) - 7);
    CHECK_THROWS_AS(read_grid_file(path.string()), std::runtime_error);
    fs::remove_all(dir);
}
