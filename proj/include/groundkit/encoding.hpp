#pragma once

// Region feature encoding: multi-scale feature grids, bilinear RoIAlign
// pooling, sinusoidal box position embeddings, and the per-object token
// assembly that fuses pooled content with box position.

#include "groundkit/geometry.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace groundkit::encoding {

/// Dense H x W x C feature map at one pyramid level. values are row-major,
/// channel-minor: index (y * width + x) * channels + c.
struct FeatureGrid {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;
    double stride = 1.0;  // image pixels per cell
    std::vector<float> values;

    float at(std::size_t y, std::size_t x, std::size_t c) const {
        return values[(y * width + x) * channels + c];
    }
    float& at(std::size_t y, std::size_t x, std::size_t c) {
        return values[(y * width + x) * channels + c];
    }
};

/// Levels ordered by strictly increasing stride, all sharing one channel
/// count. validate() throws std::invalid_argument otherwise.
struct FeaturePyramid {
    std::vector<FeatureGrid> levels;
};

void validate(const FeatureGrid& grid);
void validate(const FeaturePyramid& pyramid);

struct RoiAlignConfig {
    std::size_t output_size = 7;     // pooled grid is output_size x output_size
    std::size_t samples_per_bin = 2;  // sample points per bin axis
    /// Subtracted inside the canonical level selector
    /// floor(log2(sqrt(area) / 224) + 4) - offset, clamped to valid levels.
    int level_offset = 2;
};

/// Picks the pyramid level for a box by its scale. Returned index is always
/// valid for the given level count.
std::size_t select_level(const geom::Box& box, std::size_t level_count,
                         const RoiAlignConfig& config = {});

/// Bilinear value lookup at continuous grid coordinates (cell-center
/// convention: pixel p maps to p / stride - 0.5), borders clamped.
double bilinear_sample(const FeatureGrid& grid, double gx, double gy, std::size_t channel);

/// Average-pooled RoIAlign over the level chosen by select_level. Returns
/// output_size * output_size * channels values in grid layout. Zero-area
/// boxes are rejected.
std::vector<double> roi_align(const FeaturePyramid& pyramid, const geom::Box& box,
                              const RoiAlignConfig& config = {});

/// Mean over the pooled grid cells: one channels-long content vector.
std::vector<double> pooled_mean(const std::vector<double>& pooled, std::size_t channels);

struct PositionEmbeddingConfig {
    std::size_t dimensions = 256;  // must be divisible by 8
    double temperature = 10000.0;
};

/// Sinusoidal embedding of the box corners normalized by the frame size.
/// Each corner coordinate fills dimensions / 4 entries as interleaved
/// sin/cos pairs; all entries lie in [-1, 1], and a zero box in any frame
/// embeds to the exact pattern sin(0), cos(0) repeated.
std::vector<double> box_position_embedding(const geom::Box& box, const geom::Extent& frame,
                                           const PositionEmbeddingConfig& config = {});

/// Content vector plus position embedding (elementwise). Sizes must agree.
std::vector<double> object_token(const std::vector<double>& content,
                                 const std::vector<double>& position);

/// Concatenates per-object vectors from two encoders token by token. Both
/// lists must have the same length.
std::vector<std::vector<double>> fuse_dual_features(
    const std::vector<std::vector<double>>& first,
    const std::vector<std::vector<double>>& second);

/// Binary grid file: header of three little-endian uint32 (height, width,
/// channels) and one float32 stride, then height*width*channels float32
/// values in grid layout.
void write_grid(std::ostream& out, const FeatureGrid& grid);
FeatureGrid read_grid(std::istream& in);
void write_grid_file(const std::string& path, const FeatureGrid& grid);
FeatureGrid read_grid_file(const std::string& path);

} // namespace groundkit::encoding
