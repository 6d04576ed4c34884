#include "yarnscope/raster.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <string>

namespace yarnscope {

namespace {

void check_odd_window(int window) {
    if (window < 1 || window % 2 == 0) {
        throw ParameterError("window must be odd and >= 1, got " + std::to_string(window));
    }
}

// Collects the clamped window around (x, y) into buf.
void gather_window(const GrayImage& img, int x, int y, int half, std::vector<std::uint8_t>& buf) {
    buf.clear();
    for (int dy = -half; dy <= half; ++dy)
        for (int dx = -half; dx <= half; ++dx) buf.push_back(img.clamped(x + dx, y + dy));
}

std::uint8_t median_of(std::vector<std::uint8_t>& buf) {
    auto mid = buf.begin() + static_cast<std::ptrdiff_t>(buf.size() / 2);
    std::nth_element(buf.begin(), mid, buf.end());
    return *mid;
}

}  // namespace

GrayImage median_filter(const GrayImage& img, int window) {
    check_odd_window(window);
    const int half = window / 2;
    GrayImage out(img.width(), img.height());
    std::vector<std::uint8_t> buf;
    buf.reserve(static_cast<std::size_t>(window) * static_cast<std::size_t>(window));
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            gather_window(img, x, y, half, buf);
            out(x, y) = median_of(buf);
        }
    return out;
}

GrayImage switched_median_filter(const GrayImage& img, int window, double k) {
    check_odd_window(window);
    if (!(k > 0)) throw ParameterError("switched median coefficient k must be > 0");
    if (std::isinf(k)) return img;
    const int half = window / 2;
    GrayImage out(img.width(), img.height());
    std::vector<std::uint8_t> buf;
    std::vector<std::uint8_t> dev;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            gather_window(img, x, y, half, buf);
            const int med = median_of(buf);
            dev.clear();
            for (auto v : buf) dev.push_back(static_cast<std::uint8_t>(std::abs(int(v) - med)));
            const double mad = median_of(dev);
            const int value = img(x, y);
            out(x, y) = std::abs(value - med) < k * mad ? static_cast<std::uint8_t>(value)
                                                        : static_cast<std::uint8_t>(med);
        }
    return out;
}

GrayImage band_threshold(const GrayImage& img, int tmin, int tmax) {
    if (tmin < 0 || tmax > 255 || tmin > tmax) {
        throw ParameterError("band threshold requires 0 <= tmin <= tmax <= 255");
    }
    GrayImage out = img;
    for (auto& v : out.pixels()) {
        if (v < tmin || v > tmax) v = 0;
    }
    return out;
}

GrayImage low_pass(const GrayImage& img, int radius) {
    if (radius < 1) throw ParameterError("low-pass radius must be >= 1");
    const int w = img.width();
    const int h = img.height();
    // Clamped box sums are separable.
    std::vector<std::uint32_t> rows(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::uint32_t s = 0;
            for (int d = -radius; d <= radius; ++d) s += img.clamped(x + d, y);
            rows[static_cast<std::size_t>(y) * w + x] = s;
        }
    const std::uint32_t area = static_cast<std::uint32_t>((2 * radius + 1) * (2 * radius + 1));
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::uint32_t s = 0;
            for (int d = -radius; d <= radius; ++d) {
                const int yy = std::clamp(y + d, 0, h - 1);
                s += rows[static_cast<std::size_t>(yy) * w + x];
            }
            out(x, y) = static_cast<std::uint8_t>(s / area);
        }
    return out;
}

Gradient sobel_gradient(const GrayImage& img) {
    if (img.width() < 3 || img.height() < 3) {
        throw ParameterError("sobel_gradient needs an image of at least 3x3");
    }
    Gradient g{GrayImage(img.width(), img.height()), RealImage(img.width(), img.height())};
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            auto p = [&](int dx, int dy) { return static_cast<int>(img.clamped(x + dx, y + dy)); };
            const int gx = (p(1, -1) + 2 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1));
            const int gy = (p(-1, 1) + 2 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2 * p(0, -1) + p(1, -1));
            const double mag = std::hypot(static_cast<double>(gx), static_cast<double>(gy));
            g.magnitude(x, y) = static_cast<std::uint8_t>(std::min(255.0, std::round(mag)));
            g.angle(x, y) = std::atan2(static_cast<double>(gy), static_cast<double>(gx));
        }
    return g;
}

std::uint8_t otsu_threshold(const Histogram256& hist) {
    const std::uint64_t total = hist.total();
    int distinct = 0;
    for (auto b : hist.bins) distinct += b > 0 ? 1 : 0;
    if (distinct < 2) throw AnalysisError("degenerate histogram: fewer than two intensity levels");

    double sum_all = 0;
    for (int i = 0; i < 256; ++i) sum_all += static_cast<double>(i) * static_cast<double>(hist.bins[i]);

    std::array<double, 256> between{};
    double w0 = 0;
    double sum0 = 0;
    double best = -1;
    for (int t = 0; t < 256; ++t) {
        w0 += static_cast<double>(hist.bins[t]);
        sum0 += static_cast<double>(t) * static_cast<double>(hist.bins[t]);
        const double w1 = static_cast<double>(total) - w0;
        if (w0 == 0 || w1 == 0) {
            between[t] = -1;
            continue;
        }
        const double mu0 = sum0 / w0;
        const double mu1 = (sum_all - sum0) / w1;
        between[t] = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        best = std::max(best, between[t]);
    }
    // Empty bins make runs of equal scores; take the middle of the best run.
    const double tol = best * 1e-12;
    int first = -1;
    int last = -1;
    for (int t = 0; t < 256; ++t) {
        if (between[t] >= best - tol) {
            if (first < 0) first = t;
            last = t;
        } else if (first >= 0) {
            break;
        }
    }
    return static_cast<std::uint8_t>((first + last) / 2);
}

std::uint8_t otsu_threshold(const GrayImage& img) { return otsu_threshold(histogram(img)); }

BinaryImage binarize(const GrayImage& img, int threshold, Polarity polarity) {
    BinaryImage out(img.width(), img.height());
    auto src = img.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const bool bright = src[i] > threshold;
        dst[i] = (polarity == Polarity::BrightForeground) == bright ? 1 : 0;
    }
    return out;
}

BinaryImage otsu_binarize(const GrayImage& img, Polarity polarity) {
    return binarize(img, otsu_threshold(img), polarity);
}

LabelImage connected_components(const BinaryImage& bin, Connectivity connectivity) {
    LabelImage out{Raster<std::int32_t, LabelTag>(bin.width(), bin.height(), 0), 0};
    static constexpr int dx8[] = {1, -1, 0, 0, 1, 1, -1, -1};
    static constexpr int dy8[] = {0, 0, 1, -1, 1, -1, 1, -1};
    const int nbrs = connectivity == Connectivity::Eight ? 8 : 4;
    std::deque<Point> queue;
    for (int y = 0; y < bin.height(); ++y)
        for (int x = 0; x < bin.width(); ++x) {
            if (!bin(x, y) || out.labels(x, y)) continue;
            const int label = ++out.count;
            out.labels(x, y) = label;
            queue.push_back({x, y});
            while (!queue.empty()) {
                const Point p = queue.front();
                queue.pop_front();
                for (int k = 0; k < nbrs; ++k) {
                    const int nx = p.x + dx8[k];
                    const int ny = p.y + dy8[k];
                    if (bin.contains(nx, ny) && bin(nx, ny) && !out.labels(nx, ny)) {
                        out.labels(nx, ny) = label;
                        queue.push_back({nx, ny});
                    }
                }
            }
        }
    return out;
}

std::vector<std::size_t> component_areas(const LabelImage& labels) {
    std::vector<std::size_t> areas(static_cast<std::size_t>(labels.count) + 1, 0);
    for (auto l : labels.labels.pixels()) ++areas[static_cast<std::size_t>(l)];
    return areas;
}

BinaryImage remove_small_objects(const BinaryImage& bin, int min_area) {
    if (min_area < 1) throw ParameterError("min_area must be >= 1");
    const LabelImage labels = connected_components(bin, Connectivity::Eight);
    const auto areas = component_areas(labels);
    BinaryImage out(bin.width(), bin.height());
    auto src = labels.labels.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const auto l = static_cast<std::size_t>(src[i]);
        dst[i] = (l != 0 && areas[l] >= static_cast<std::size_t>(min_area)) ? 1 : 0;
    }
    return out;
}

BinaryImage fill_holes(const BinaryImage& bin) {
    const int w = bin.width();
    const int h = bin.height();
    BinaryImage outside(w, h);
    std::deque<Point> queue;
    auto seed = [&](int x, int y) {
        if (!bin(x, y) && !outside(x, y)) {
            outside(x, y) = 1;
            queue.push_back({x, y});
        }
    };
    for (int x = 0; x < w; ++x) {
        seed(x, 0);
        seed(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        seed(0, y);
        seed(w - 1, y);
    }
    static constexpr int dx4[] = {1, -1, 0, 0};
    static constexpr int dy4[] = {0, 0, 1, -1};
    while (!queue.empty()) {
        const Point p = queue.front();
        queue.pop_front();
        for (int k = 0; k < 4; ++k) {
            const int nx = p.x + dx4[k];
            const int ny = p.y + dy4[k];
            if (bin.contains(nx, ny)) seed(nx, ny);
        }
    }
    BinaryImage out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out(x, y) = outside(x, y) ? 0 : 1;
    return out;
}

Histogram256 histogram(const GrayImage& img) {
    Histogram256 hist;
    for (auto v : img.pixels()) ++hist.bins[v];
    return hist;
}

namespace {

template <typename Image>
std::vector<std::uint64_t> rows_of(const Image& img) {
    std::vector<std::uint64_t> out(static_cast<std::size_t>(img.height()), 0);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) out[static_cast<std::size_t>(y)] += img(x, y);
    return out;
}

template <typename Image>
std::vector<std::uint64_t> columns_of(const Image& img) {
    std::vector<std::uint64_t> out(static_cast<std::size_t>(img.width()), 0);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) out[static_cast<std::size_t>(x)] += img(x, y);
    return out;
}

}  // namespace

std::vector<std::uint64_t> row_projection(const GrayImage& img) { return rows_of(img); }
std::vector<std::uint64_t> column_projection(const GrayImage& img) { return columns_of(img); }
std::vector<std::uint64_t> row_projection(const BinaryImage& img) { return rows_of(img); }
std::vector<std::uint64_t> column_projection(const BinaryImage& img) { return columns_of(img); }

GrayImage invert(const GrayImage& img) {
    GrayImage out = img;
    for (auto& v : out.pixels()) v = static_cast<std::uint8_t>(255 - v);
    return out;
}

GrayImage to_gray(const BinaryImage& bin, std::uint8_t on) {
    GrayImage out(bin.width(), bin.height());
    auto src = bin.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? on : 0;
    return out;
}

std::size_t count_foreground(const BinaryImage& bin) {
    std::size_t n = 0;
    for (auto v : bin.pixels()) n += v;
    return n;
}

}  // namespace yarnscope
