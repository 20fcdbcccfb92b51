#include "groundkit/encoding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace groundkit::encoding {
namespace {

void put_u32(std::ostream& out, std::uint32_t value) {
    char bytes[4] = {static_cast<char>(value & 0xff),
                     static_cast<char>((value >> 8) & 0xff),
                     static_cast<char>((value >> 16) & 0xff),
                     static_cast<char>((value >> 24) & 0xff)};
    out.write(bytes, 4);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    if (!in) throw std::runtime_error("grid stream truncated");
    return static_cast<std::uint32_t>(bytes[0]) |
           (static_cast<std::uint32_t>(bytes[1]) << 8) |
           (static_cast<std::uint32_t>(bytes[2]) << 16) |
           (static_cast<std::uint32_t>(bytes[3]) << 24);
}

void put_f32(std::ostream& out, float value) {
    put_u32(out, std::bit_cast<std::uint32_t>(value));
}

float get_f32(std::istream& in) {
    return std::bit_cast<float>(get_u32(in));
}

} // namespace

void validate(const FeatureGrid& grid) {
    if (grid.height == 0 || grid.width == 0 || grid.channels == 0)
        throw std::invalid_argument("feature grid dimensions must be positive");
    if (!(grid.stride > 0.0))
        throw std::invalid_argument("feature grid stride must be positive");
    if (grid.values.size() != grid.height * grid.width * grid.channels)
        throw std::invalid_argument("feature grid storage size " +
                                    std::to_string(grid.values.size()) + " does not match " +
                                    std::to_string(grid.height) + "x" +
                                    std::to_string(grid.width) + "x" +
                                    std::to_string(grid.channels));
}

void validate(const FeaturePyramid& pyramid) {
    if (pyramid.levels.empty())
        throw std::invalid_argument("feature pyramid needs at least one level");
    for (const FeatureGrid& level : pyramid.levels) validate(level);
    for (std::size_t i = 1; i < pyramid.levels.size(); ++i) {
        if (!(pyramid.levels[i].stride > pyramid.levels[i - 1].stride))
            throw std::invalid_argument("pyramid strides must strictly increase");
        if (pyramid.levels[i].channels != pyramid.levels[0].channels)
            throw std::invalid_argument("pyramid levels must share one channel count");
    }
}

std::size_t select_level(const geom::Box& box, std::size_t level_count,
                         const RoiAlignConfig& config) {
    geom::validate(box);
    if (level_count == 0)
        throw std::invalid_argument("level selection needs at least one level");
    const double scale = std::sqrt(geom::area(box));
    double raw = std::floor(std::log2(scale / 224.0) + 4.0) - config.level_offset;
    if (std::isnan(raw)) raw = 0.0;
    raw = std::clamp(raw, 0.0, static_cast<double>(level_count - 1));
    return static_cast<std::size_t>(raw);
}

double bilinear_sample(const FeatureGrid& grid, double gx, double gy, std::size_t channel) {
    gx = std::clamp(gx, 0.0, static_cast<double>(grid.width - 1));
    gy = std::clamp(gy, 0.0, static_cast<double>(grid.height - 1));
    const auto x0 = static_cast<std::size_t>(gx);
    const auto y0 = static_cast<std::size_t>(gy);
    const std::size_t x1 = std::min(x0 + 1, grid.width - 1);
    const std::size_t y1 = std::min(y0 + 1, grid.height - 1);
    const double fx = gx - static_cast<double>(x0);
    const double fy = gy - static_cast<double>(y0);

    const double top = (1.0 - fx) * grid.at(y0, x0, channel) + fx * grid.at(y0, x1, channel);
    const double bottom = (1.0 - fx) * grid.at(y1, x0, channel) + fx * grid.at(y1, x1, channel);
    return (1.0 - fy) * top + fy * bottom;
}

std::vector<double> roi_align(const FeaturePyramid& pyramid, const geom::Box& box,
                              const RoiAlignConfig& config) {
    validate(pyramid);
    geom::validate(box);
    if (geom::area(box) <= 0.0)
        throw std::invalid_argument("cannot pool a zero-area box");
    if (config.output_size == 0 || config.samples_per_bin == 0)
        throw std::invalid_argument("pooling sizes must be positive");

    const FeatureGrid& grid = pyramid.levels[select_level(box, pyramid.levels.size(), config)];
    const double gx0 = box.xmin / grid.stride - 0.5;
    const double gy0 = box.ymin / grid.stride - 0.5;
    const double bin_w = (box.xmax - box.xmin) / grid.stride / config.output_size;
    const double bin_h = (box.ymax - box.ymin) / grid.stride / config.output_size;

    const std::size_t size = config.output_size;
    const std::size_t samples = config.samples_per_bin;
    std::vector<double> pooled(size * size * grid.channels, 0.0);
    const double inv_count = 1.0 / static_cast<double>(samples * samples);
    for (std::size_t i = 0; i < size; ++i) {
        for (std::size_t j = 0; j < size; ++j) {
            for (std::size_t c = 0; c < grid.channels; ++c) {
                double sum = 0.0;
                for (std::size_t sy = 0; sy < samples; ++sy) {
                    const double gy = gy0 + bin_h * (i + (sy + 0.5) / samples);
                    for (std::size_t sx = 0; sx < samples; ++sx) {
                        const double gx = gx0 + bin_w * (j + (sx + 0.5) / samples);
                        sum += bilinear_sample(grid, gx, gy, c);
                    }
                }
                pooled[(i * size + j) * grid.channels + c] = sum * inv_count;
            }
        }
    }
    return pooled;
}

std::vector<double> pooled_mean(const std::vector<double>& pooled, std::size_t channels) {
    if (channels == 0 || pooled.empty() || pooled.size() % channels != 0)
        throw std::invalid_argument("pooled size must be a positive multiple of channels");
    const std::size_t cells = pooled.size() / channels;
    std::vector<double> mean(channels, 0.0);
    for (std::size_t cell = 0; cell < cells; ++cell)
        for (std::size_t c = 0; c < channels; ++c) mean[c] += pooled[cell * channels + c];
    for (double& value : mean) value /= static_cast<double>(cells);
    return mean;
}

std::vector<double> box_position_embedding(const geom::Box& box, const geom::Extent& frame,
                                           const PositionEmbeddingConfig& config) {
    geom::validate(box);
    geom::validate(frame);
    if (config.dimensions == 0 || config.dimensions % 8 != 0)
        throw std::invalid_argument("embedding dimensions must be a positive multiple of 8");
    if (!(config.temperature > 0.0))
        throw std::invalid_argument("embedding temperature must be positive");

    const double coords[4] = {box.xmin / frame.width, box.ymin / frame.height,
                              box.xmax / frame.width, box.ymax / frame.height};
    const std::size_t quarter = config.dimensions / 4;
    std::vector<double> embedding(config.dimensions);
    for (std::size_t q = 0; q < 4; ++q) {
        for (std::size_t k = 0; k < quarter / 2; ++k) {
            const double exponent = 2.0 * static_cast<double>(k) / static_cast<double>(quarter);
            const double angle = coords[q] / std::pow(config.temperature, exponent);
            embedding[q * quarter + 2 * k] = std::sin(angle);
            embedding[q * quarter + 2 * k + 1] = std::cos(angle);
        }
    }
    return embedding;
}

std::vector<double> object_token(const std::vector<double>& content,
                                 const std::vector<double>& position) {
    if (content.size() != position.size())
        throw std::invalid_argument("content and position vectors differ in size: " +
                                    std::to_string(content.size()) + " vs " +
                                    std::to_string(position.size()));
    std::vector<double> token(content.size());
    for (std::size_t i = 0; i < content.size(); ++i) token[i] = content[i] + position[i];
    return token;
}

std::vector<std::vector<double>> fuse_dual_features(
    const std::vector<std::vector<double>>& first,
    const std::vector<std::vector<double>>& second) {
    if (first.size() != second.size())
        throw std::invalid_argument("cannot fuse feature lists of different lengths: " +
                                    std::to_string(first.size()) + " vs " +
                                    std::to_string(second.size()));
    std::vector<std::vector<double>> fused(first.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        fused[i].reserve(first[i].size() + second[i].size());
        fused[i].insert(fused[i].end(), first[i].begin(), first[i].end());
        fused[i].insert(fused[i].end(), second[i].begin(), second[i].end());
    }
    return fused;
}

void write_grid(std::ostream& out, const FeatureGrid& grid) {
    validate(grid);
    put_u32(out, static_cast<std::uint32_t>(grid.height));
    put_u32(out, static_cast<std::uint32_t>(grid.width));
    put_u32(out, static_cast<std::uint32_t>(grid.channels));
    put_f32(out, static_cast<float>(grid.stride));
    for (float value : grid.values) put_f32(out, value);
    if (!out) throw std::runtime_error("grid write failed");
}

FeatureGrid read_grid(std::istream& in) {
    FeatureGrid grid;
    grid.height = get_u32(in);
    grid.width = get_u32(in);
    grid.channels = get_u32(in);
    grid.stride = get_f32(in);
    if (grid.height == 0 || grid.width == 0 || grid.channels == 0)
        throw std::runtime_error("grid header has zero dimension");
    const std::uint64_t count = static_cast<std::uint64_t>(grid.height) * grid.width *
                                grid.channels;
    if (count > (std::uint64_t{1} << 30))
        throw std::runtime_error("grid header implausibly large");
    grid.values.resize(count);
    for (float& value : grid.values) value = get_f32(in);
    validate(grid);
    return grid;
}

void write_grid_file(const std::string& path, const FeatureGrid& grid) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_grid(out, grid);
}

FeatureGrid read_grid_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return read_grid(in);
}

} // namespace groundkit::encoding
