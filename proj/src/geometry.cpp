#include "groundkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace groundkit::geom {

namespace {

double intersection_area(const Box& a, const Box& b) {
    double w = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
    double h = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
    if (w <= 0.0 || h <= 0.0) return 0.0;
    return w * h;
}

std::int64_t quantize_coord(double coord, double dim, std::int64_t bins) {
    auto idx = static_cast<std::int64_t>(std::floor(coord / dim * static_cast<double>(bins)));
    return std::clamp<std::int64_t>(idx, 0, bins - 1);
}

} // namespace

bool is_valid(const Box& b) {
    return std::isfinite(b.xmin) && std::isfinite(b.ymin) &&
           std::isfinite(b.xmax) && std::isfinite(b.ymax) &&
           b.xmin <= b.xmax && b.ymin <= b.ymax;
}

void validate(const Box& b) {
    if (!is_valid(b)) {
        throw std::invalid_argument("Box: requires finite coordinates with xmin <= xmax and ymin <= ymax");
    }
}

void validate(const Extent& e) {
    if (!(std::isfinite(e.width) && std::isfinite(e.height) && e.width > 0.0 && e.height > 0.0)) {
        throw std::invalid_argument("Extent: width and height must be finite and strictly positive");
    }
}

double area(const Box& b) {
    validate(b);
    return (b.xmax - b.xmin) * (b.ymax - b.ymin);
}

double iou(const Box& a, const Box& b) {
    validate(a);
    validate(b);
    double inter = intersection_area(a, b);
    double uni = area(a) + area(b) - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

double giou(const Box& a, const Box& b) {
    validate(a);
    validate(b);
    double area_a = area(a);
    double area_b = area(b);
    if (area_a == 0.0 && area_b == 0.0) {
        throw std::invalid_argument("giou: undefined when both boxes have zero area");
    }
    double inter = intersection_area(a, b);
    double uni = area_a + area_b - inter;

    Box enclosing{std::min(a.xmin, b.xmin), std::min(a.ymin, b.ymin),
                  std::max(a.xmax, b.xmax), std::max(a.ymax, b.ymax)};
    double enclosing_area = area(enclosing);

    // The enclosing box contains the union, so the penalty is nonnegative
    // up to rounding; the clamp keeps giou <= iou exact.
    double penalty = enclosing_area > 0.0
                         ? std::max(0.0, (enclosing_area - uni) / enclosing_area)
                         : 0.0;
    double overlap = uni > 0.0 ? inter / uni : 0.0;
    return overlap - penalty;
}

double l1_distance(const Box& a, const Box& b, const Extent& frame) {
    validate(a);
    validate(b);
    validate(frame);
    return std::abs(a.xmin - b.xmin) / frame.width +
           std::abs(a.ymin - b.ymin) / frame.height +
           std::abs(a.xmax - b.xmax) / frame.width +
           std::abs(a.ymax - b.ymax) / frame.height;
}

QuantizedBox quantize(const Box& b, const Extent& frame, std::int64_t bins) {
    validate(b);
    validate(frame);
    if (bins < 2) {
        throw std::invalid_argument("quantize: bins must be >= 2");
    }
    if (b.xmin < 0.0 || b.ymin < 0.0 || b.xmax > frame.width || b.ymax > frame.height) {
        throw std::invalid_argument("quantize: box lies outside the frame");
    }
    return QuantizedBox{
        quantize_coord(b.xmin, frame.width, bins),
        quantize_coord(b.ymin, frame.height, bins),
        quantize_coord(b.xmax, frame.width, bins),
        quantize_coord(b.ymax, frame.height, bins),
        bins,
    };
}

Box dequantize(const QuantizedBox& q, const Extent& frame) {
    validate(frame);
    if (q.bins < 2) {
        throw std::invalid_argument("dequantize: bins must be >= 2");
    }
    auto center = [&](std::int64_t idx, double dim) {
        return (static_cast<double>(idx) + 0.5) * dim / static_cast<double>(q.bins);
    };
    return Box{center(q.qxmin, frame.width), center(q.qymin, frame.height),
               center(q.qxmax, frame.width), center(q.qymax, frame.height)};
}

} // namespace groundkit::geom
