#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "groundkit/geometry.hpp"
#include "groundkit/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

using namespace groundkit::geom;
using groundkit::rng::Rng;

namespace {

Box random_box(Rng& rng, double frame = 100.0) {
    double x1 = rng.uniform(0.0, frame);
    double x2 = rng.uniform(0.0, frame);
    double y1 = rng.uniform(0.0, frame);
    double y2 = rng.uniform(0.0, frame);
    return {std::min(x1, x2), std::min(y1, y2), std::max(x1, x2), std::max(y1, y2)};
}

// Straightforward overlap computed from first principles, as a check on
// the library's branchier implementation.
double iou_oracle(const Box& a, const Box& b) {
    double iw = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
    double ih = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
    double inter = (iw > 0 && ih > 0) ? iw * ih : 0.0;
    double uni = area(a) + area(b) - inter;
    return uni > 0 ? inter / uni : 0.0;
}

} // namespace

TEST_CASE("validate accepts ordinary and degenerate boxes") {
    CHECK_NOTHROW(validate(Box{0, 0, 10, 10}));
    CHECK_NOTHROW(validate(Box{5, 5, 5, 5}));
    CHECK(is_valid(Box{1, 2, 3, 4}));
}

TEST_CASE("validate rejects inverted and non-finite boxes") {
    CHECK_THROWS_AS(validate(Box{10, 0, 0, 10}), std::invalid_argument);
    CHECK_THROWS_AS(validate(Box{0, 10, 10, 0}), std::invalid_argument);
    double nan = std::numeric_limits<double>::quiet_NaN();
    double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(validate(Box{nan, 0, 1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(validate(Box{0, 0, inf, 1}), std::invalid_argument);
    CHECK_FALSE(is_valid(Box{10, 0, 0, 10}));
}

TEST_CASE("validate rejects non-positive extents") {
    CHECK_NOTHROW(validate(Extent{100, 50}));
    CHECK_THROWS_AS(validate(Extent{0, 50}), std::invalid_argument);
    CHECK_THROWS_AS(validate(Extent{100, -1}), std::invalid_argument);
}

TEST_CASE("area of hand-picked boxes") {
    CHECK(area(Box{0, 0, 10, 5}) == 50.0);
    CHECK(area(Box{2, 3, 2, 9}) == 0.0);
}

TEST_CASE("iou on hand-picked configurations") {
    Box unit{0, 0, 1, 1};
    CHECK(iou(unit, unit) == 1.0);
    CHECK(iou(unit, Box{2, 2, 3, 3}) == 0.0);
    CHECK(iou(Box{0, 0, 2, 2}, Box{1, 1, 3, 3}) == doctest::Approx(1.0 / 7.0));
    // Shared edge only: zero intersection area.
    CHECK(iou(unit, Box{1, 0, 2, 1}) == 0.0);
    // Both degenerate: zero union, defined as 0.
    CHECK(iou(Box{1, 1, 1, 1}, Box{1, 1, 1, 1}) == 0.0);
}

TEST_CASE("iou matches the first-principles oracle on random pairs") {
    Rng rng(101);
    for (int i = 0; i < 5000; ++i) {
        Box a = random_box(rng);
        Box b = random_box(rng);
        CHECK(iou(a, b) == doctest::Approx(iou_oracle(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("giou on hand-picked configurations") {
    Box unit{0, 0, 1, 1};
    CHECK(giou(unit, unit) == 1.0);
    // Touching neighbors: hull equals union, no penalty.
    CHECK(giou(unit, Box{1, 0, 2, 1}) == 0.0);
    // One unit gap: hull 3, union 2 -> -1/3.
    CHECK(giou(unit, Box{2, 0, 3, 1}) == doctest::Approx(-1.0 / 3.0));
    // Containment: penalty vanishes, giou == iou.
    Box outer{0, 0, 4, 4};
    Box inner{1, 1, 2, 2};
    CHECK(giou(outer, inner) == doctest::Approx(iou(outer, inner)));
}

TEST_CASE("giou refuses two zero-area boxes") {
    CHECK_THROWS_AS(giou(Box{1, 1, 1, 1}, Box{2, 2, 2, 2}), std::invalid_argument);
    // One degenerate input is fine.
    CHECK_NOTHROW(giou(Box{1, 1, 1, 1}, Box{0, 0, 4, 4}));
}

TEST_CASE("giou properties on random pairs") {
    Rng rng(103);
    for (int i = 0; i < 5000; ++i) {
        Box a = random_box(rng);
        Box b = random_box(rng);
        if (area(a) == 0.0 && area(b) == 0.0) continue;
        double g = giou(a, b);
        CHECK(g <= iou(a, b));
        CHECK(g >= -1.0);
        CHECK(g <= 1.0);
        CHECK(g == doctest::Approx(giou(b, a)));
    }
}

TEST_CASE("l1 distance normalizes by frame dimensions") {
    Extent frame{100, 50};
    Box a{0, 0, 100, 50};
    Box b{10, 0, 110, 50};
    CHECK(l1_distance(a, b, frame) == doctest::Approx(0.2));
    Box c{0, 5, 100, 55};
    CHECK(l1_distance(a, c, frame) == doctest::Approx(0.2));
    CHECK(l1_distance(a, a, frame) == 0.0);
}

TEST_CASE("l1 distance satisfies the triangle inequality") {
    Rng rng(107);
    Extent frame{100, 100};
    for (int i = 0; i < 5000; ++i) {
        Box a = random_box(rng);
        Box b = random_box(rng);
        Box c = random_box(rng);
        double ab = l1_distance(a, b, frame);
        double bc = l1_distance(b, c, frame);
        double ac = l1_distance(a, c, frame);
        CHECK(ac <= ab + bc + 1e-9);
    }
}

TEST_CASE("quantize maps coordinates to expected bins") {
    Extent frame{10, 10};
    QuantizedBox q = quantize(Box{0, 0, 1, 1}, frame, 10);
    CHECK(q.qxmin == 0);
    CHECK(q.qymin == 0);
    CHECK(q.qxmax == 1);
    CHECK(q.qymax == 1);
    CHECK(q.bins == 10);

    // Coordinates on the far frame edge land in the last bin.
    QuantizedBox edge = quantize(Box{9.5, 9.5, 10, 10}, frame, 10);
    CHECK(edge.qxmax == 9);
    CHECK(edge.qymax == 9);
}

TEST_CASE("quantize validates its inputs") {
    Extent frame{10, 10};
    CHECK_THROWS_AS(quantize(Box{0, 0, 1, 1}, frame, 1), std::invalid_argument);
    CHECK_THROWS_AS(quantize(Box{-1, 0, 1, 1}, frame, 10), std::invalid_argument);
    CHECK_THROWS_AS(quantize(Box{0, 0, 11, 1}, frame, 10), std::invalid_argument);
}

TEST_CASE("dequantize returns bin centers") {
    Extent frame{10, 10};
    Box box = dequantize(QuantizedBox{0, 0, 1, 1, 10}, frame);
    CHECK(box.xmin == doctest::Approx(0.5));
    CHECK(box.ymin == doctest::Approx(0.5));
    CHECK(box.xmax == doctest::Approx(1.5));
    CHECK(box.ymax == doctest::Approx(1.5));
}

TEST_CASE("round trip perturbs each coordinate by at most one bin") {
    Rng rng(109);
    Extent frame{1000, 1000};
    const std::int64_t bins = 1000;
    const double bin_size = 1.0;
    for (int i = 0; i < 2000; ++i) {
        Box box = random_box(rng, 1000.0);
        Box back = dequantize(quantize(box, frame, bins), frame);
        CHECK(std::abs(back.xmin - box.xmin) <= bin_size);
        CHECK(std::abs(back.ymin - box.ymin) <= bin_size);
        CHECK(std::abs(back.xmax - box.xmax) <= bin_size);
        CHECK(std::abs(back.ymax - box.ymax) <= bin_size);
        CHECK(is_valid(back));
    }
}

TEST_CASE("round trip of a box already on bin centers is exact") {
    Extent frame{100, 100};
    Box centered{10.5, 20.5, 30.5, 40.5};
    Box back = dequantize(quantize(centered, frame, 100), frame);
    CHECK(back == centered);
}
