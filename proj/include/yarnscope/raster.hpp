#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "yarnscope/errors.hpp"

namespace yarnscope {

struct GrayTag {};
struct BinaryTag {};
struct LabelTag {};
struct RealTag {};

/// Row-major single-channel raster. The tag keeps gray, binary, label and
/// real-valued planes from being mixed up at call sites.
template <typename Pixel, typename Tag>
class Raster {
public:
    using value_type = Pixel;

    Raster() = default;

    Raster(int width, int height, Pixel fill = Pixel{})
        : width_(width), height_(height) {
        check_dims(width, height);
        data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
        if constexpr (std::is_same_v<Tag, BinaryTag>) {
            if (fill > 1) throw ParameterError("binary image values must be 0 or 1");
        }
    }

    Raster(int width, int height, std::vector<Pixel> data)
        : width_(width), height_(height), data_(std::move(data)) {
        check_dims(width, height);
        if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
            throw ParameterError("raster data length does not match width*height");
        }
        if constexpr (std::is_same_v<Tag, BinaryTag>) {
            for (Pixel v : data_) {
                if (v > 1) throw ParameterError("binary image values must be 0 or 1");
            }
        }
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    bool contains(int x, int y) const noexcept {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }

    Pixel operator()(int x, int y) const { return data_[index(x, y)]; }
    Pixel& operator()(int x, int y) { return data_[index(x, y)]; }

    /// Edge-replicating read: coordinates outside the raster are clamped.
    Pixel clamped(int x, int y) const {
        x = std::clamp(x, 0, width_ - 1);
        y = std::clamp(y, 0, height_ - 1);
        return data_[index(x, y)];
    }

    /// Zero outside the raster.
    Pixel or_zero(int x, int y) const { return contains(x, y) ? data_[index(x, y)] : Pixel{}; }

    std::span<const Pixel> pixels() const noexcept { return data_; }
    std::span<Pixel> pixels() noexcept { return data_; }
    std::span<const Pixel> row(int y) const {
        return std::span<const Pixel>(data_).subspan(index(0, y), static_cast<std::size_t>(width_));
    }
    const std::vector<Pixel>& data() const noexcept { return data_; }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    static void check_dims(int width, int height) {
        if (width < 1 || height < 1) throw ParameterError("raster dimensions must be >= 1");
    }
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<Pixel> data_;
};

using GrayImage = Raster<std::uint8_t, GrayTag>;
using BinaryImage = Raster<std::uint8_t, BinaryTag>;
using RealImage = Raster<double, RealTag>;

struct LabelImage {
    Raster<std::int32_t, LabelTag> labels;
    int count = 0;
};

struct Histogram256 {
    std::array<std::uint64_t, 256> bins{};

    std::uint64_t total() const noexcept {
        std::uint64_t s = 0;
        for (auto b : bins) s += b;
        return s;
    }
};

struct Point {
    int x = 0;
    int y = 0;
    friend bool operator==(const Point&, const Point&) = default;
};

enum class Connectivity { Four = 4, Eight = 8 };

/// Which side of the threshold is foreground.
enum class Polarity { BrightForeground, DarkForeground };

// ---------------------------------------------------------------------------
// Filters. All window operations replicate edge pixels.

GrayImage median_filter(const GrayImage& img, int window);

/// Switched median: keep y(m) when |y - med| < k * Q, where Q is the median
/// absolute deviation of the window; otherwise take the median. An infinite k
/// keeps every pixel.
GrayImage switched_median_filter(const GrayImage& img, int window, double k = 1.5);

/// Pixels strictly below tmin or strictly above tmax become 0.
GrayImage band_threshold(const GrayImage& img, int tmin, int tmax);

/// Box blur over a (2r+1)^2 window, integer mean rounded down.
GrayImage low_pass(const GrayImage& img, int radius);

struct Gradient {
    GrayImage magnitude;  ///< hypot(gx, gy) clamped to [0, 255]
    RealImage angle;      ///< atan2(gy, gx) in radians, y pointing down
};

Gradient sobel_gradient(const GrayImage& img);

// ---------------------------------------------------------------------------
// Segmentation.

/// Otsu level t; binarize with pixel > t as the bright class.
std::uint8_t otsu_threshold(const GrayImage& img);
std::uint8_t otsu_threshold(const Histogram256& hist);

BinaryImage binarize(const GrayImage& img, int threshold, Polarity polarity = Polarity::BrightForeground);
BinaryImage otsu_binarize(const GrayImage& img, Polarity polarity = Polarity::BrightForeground);

/// Labels follow raster order of each component's first pixel.
LabelImage connected_components(const BinaryImage& bin, Connectivity connectivity);

/// Area per label; index 0 is the background count.
std::vector<std::size_t> component_areas(const LabelImage& labels);

/// Drops 8-connected components with fewer than min_area pixels.
BinaryImage remove_small_objects(const BinaryImage& bin, int min_area);

/// Fills background regions not 4-connected to the border.
BinaryImage fill_holes(const BinaryImage& bin);

// ---------------------------------------------------------------------------
// Histograms and projections.

Histogram256 histogram(const GrayImage& img);
std::vector<std::uint64_t> row_projection(const GrayImage& img);
std::vector<std::uint64_t> column_projection(const GrayImage& img);
std::vector<std::uint64_t> row_projection(const BinaryImage& img);
std::vector<std::uint64_t> column_projection(const BinaryImage& img);

// ---------------------------------------------------------------------------
// Small utilities.

GrayImage invert(const GrayImage& img);
GrayImage to_gray(const BinaryImage& bin, std::uint8_t on = 255);

template <typename Pixel, typename Tag>
Raster<Pixel, Tag> crop(const Raster<Pixel, Tag>& img, int x0, int y0, int width, int height) {
    if (x0 < 0 || y0 < 0 || width < 1 || height < 1 || x0 + width > img.width() || y0 + height > img.height()) {
        throw ParameterError("crop rectangle outside image");
    }
    Raster<Pixel, Tag> out(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) out(x, y) = img(x0 + x, y0 + y);
    return out;
}

template <typename Pixel, typename Tag>
Raster<Pixel, Tag> flip_horizontal(const Raster<Pixel, Tag>& img) {
    Raster<Pixel, Tag> out = img;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) out(x, y) = img(img.width() - 1 - x, y);
    return out;
}

std::size_t count_foreground(const BinaryImage& bin);

}  // namespace yarnscope
