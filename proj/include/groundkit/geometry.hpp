#pragma once

// Box algebra, overlap measures and coordinate quantization.
//
// Convention: continuous xyxy pixel coordinates, origin at the top-left.
// All functions are pure and safe for unrestricted parallel use.

#include <array>
#include <cstdint>

namespace groundkit::geom {

/// Axis-aligned rectangle in pixel coordinates. xmin <= xmax, ymin <= ymax,
/// all coordinates finite. Zero-width / zero-height boxes are valid.
struct Box {
    double xmin = 0.0;
    double ymin = 0.0;
    double xmax = 0.0;
    double ymax = 0.0;

    bool operator==(const Box&) const = default;
};

/// Image frame dimensions in pixels. Strictly positive.
struct Extent {
    double width = 0.0;
    double height = 0.0;

    bool operator==(const Extent&) const = default;
};

/// Box coordinates mapped to integer bin indices in [0, bins-1].
/// Index ordering mirrors the source box: qxmin <= qxmax, qymin <= qymax.
struct QuantizedBox {
    std::int64_t qxmin = 0;
    std::int64_t qymin = 0;
    std::int64_t qxmax = 0;
    std::int64_t qymax = 0;
    std::int64_t bins = 0;

    bool operator==(const QuantizedBox&) const = default;
};

/// Throws std::invalid_argument when the xyxy ordering or finiteness
/// invariants are violated.
void validate(const Box& b);
void validate(const Extent& e);

bool is_valid(const Box& b);

double area(const Box& b);

/// Intersection area over union area. Returns 0 when the union has zero
/// area (degenerate inputs never abort a metric run).
double iou(const Box& a, const Box& b);

/// IoU minus the enclosing-box penalty |C \ (A u B)| / |C|, where C is the
/// smallest box containing both inputs. Always <= iou, range (-1, 1].
/// Throws std::invalid_argument when both boxes have zero area (the
/// enclosing ratio is undefined there).
double giou(const Box& a, const Box& b);

/// Sum of absolute coordinate differences, x coordinates normalized by
/// frame width and y coordinates by frame height.
double l1_distance(const Box& a, const Box& b, const Extent& frame);

/// Maps each coordinate to floor(coord / frame_dim * bins), clamped to
/// [0, bins-1]. Requires bins >= 2 and the box inside the frame.
QuantizedBox quantize(const Box& b, const Extent& frame, std::int64_t bins);

/// Returns bin centers: (index + 0.5) * frame_dim / bins. Centering halves
/// the worst-case round-trip displacement relative to lower-edge decoding;
/// simulator round-trip numbers assume this choice.
Box dequantize(const QuantizedBox& q, const Extent& frame);

} // namespace groundkit::geom
