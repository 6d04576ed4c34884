#include "yarnscope/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace yarnscope::synth {

namespace {

int band_top(int axis, int width) { return axis - (width - 1) / 2; }

// Band height at column x, slubs included.
int band_width_at(const YarnRenderSpec& spec, int x) {
    for (const auto& s : spec.slubs)
        if (x >= s.start && x < s.start + s.length) return s.width;
    return spec.core_width;
}

std::uint8_t to_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

void apply_noise(GrayImage& img, const YarnRenderSpec& spec) {
    if (spec.noise_amplitude <= 0 && spec.impulse_fraction <= 0) return;
    std::mt19937_64 gen(spec.seed);
    const double scale = 1.0 / 18446744073709551616.0;  // 2^-64
    const auto span = static_cast<std::uint64_t>(2 * spec.noise_amplitude + 1);
    for (auto& v : img.pixels()) {
        if (spec.impulse_fraction > 0 && static_cast<double>(gen()) * scale < spec.impulse_fraction) {
            v = static_cast<std::uint8_t>(gen() % 256);
            continue;
        }
        if (spec.noise_amplitude > 0) {
            const int delta = static_cast<int>(gen() % span) - spec.noise_amplitude;
            v = static_cast<std::uint8_t>(std::clamp(int(v) + delta, 0, 255));
        }
    }
}

}  // namespace

int core_top(const YarnRenderSpec& spec) { return band_top(spec.core_axis, spec.core_width); }
int core_bottom(const YarnRenderSpec& spec) { return core_top(spec) + spec.core_width - 1; }

void validate(const YarnRenderSpec& spec) {
    if (spec.width < 1 || spec.height < 1) throw ParameterError("render size must be >= 1");
    if (spec.core_width < 1) throw ParameterError("core_width must be >= 1");
    if (core_top(spec) < 0 || core_bottom(spec) >= spec.height) throw ParameterError("core outside image");
    if (!(spec.stripe_period > 0)) throw ParameterError("stripe_period must be > 0");
    if (spec.impulse_fraction < 0 || spec.impulse_fraction > 1) throw ParameterError("impulse_fraction in [0,1]");

    auto slubs = spec.slubs;
    std::sort(slubs.begin(), slubs.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
    for (std::size_t i = 0; i < slubs.size(); ++i) {
        const auto& s = slubs[i];
        if (s.length < 1 || s.width < 1) throw ParameterError("slub length and width must be >= 1");
        if (s.start < 0 || s.start + s.length > spec.width) throw ParameterError("slub outside image");
        const int top = band_top(spec.core_axis, s.width);
        if (top < 0 || top + s.width > spec.height) throw ParameterError("slub taller than image");
        if (i > 0 && slubs[i - 1].start + slubs[i - 1].length > s.start) {
            throw ParameterError("overlapping slubs");
        }
    }
    for (const auto& h : spec.hairs) {
        if (h.length_px < 1) throw ParameterError("hair length must be >= 1");
        if (h.column < 0 || h.column >= spec.width) throw ParameterError("hair column outside image");
        const int w = band_width_at(spec, h.column);
        const int top = band_top(spec.core_axis, w);
        const bool fits = h.side == Side::Above ? top - h.length_px >= 0 : top + w - 1 + h.length_px < spec.height;
        if (!fits) throw ParameterError("hair leaves the image");
    }
}

GrayImage render_yarn(const YarnRenderSpec& spec, bool stripes) {
    validate(spec);
    GrayImage img(spec.width, spec.height, spec.bg);
    const double theta = spec.twist_angle_deg * std::numbers::pi / 180.0;
    const double c = std::cos(theta);
    const double s = spec.stripe_sign * std::sin(theta);
    const double low = spec.stripe_low ? spec.stripe_low : 0.5 * (spec.fg + spec.bg);
    for (int x = 0; x < spec.width; ++x) {
        const int w = band_width_at(spec, x);
        const int top = band_top(spec.core_axis, w);
        for (int y = top; y < top + w; ++y) {
            if (stripes) {
                const double phase = 2 * std::numbers::pi * (x * c + y * s) / spec.stripe_period;
                img(x, y) = to_u8(low + (spec.fg - low) * (0.5 + 0.5 * std::cos(phase)));
            } else {
                img(x, y) = spec.fg;
            }
        }
    }
    for (const auto& h : spec.hairs) {
        const int w = band_width_at(spec, h.column);
        const int top = band_top(spec.core_axis, w);
        for (int k = 1; k <= h.length_px; ++k) {
            const int y = h.side == Side::Above ? top - k : top + w - 1 + k;
            img(h.column, y) = spec.fg;
        }
    }
    apply_noise(img, spec);
    return img;
}

GrayImage render_plain_yarn(const YarnRenderSpec& spec) {
    YarnRenderSpec plain = spec;
    plain.hairs.clear();
    plain.slubs.clear();
    return render_yarn(plain, false);
}

GrayImage render_twist_stripes(const YarnRenderSpec& spec) {
    if (!(spec.twist_angle_deg >= 0 && spec.twist_angle_deg < 90)) {
        throw ParameterError("degenerate stripe angle: need 0 <= angle < 90");
    }
    return render_yarn(spec, true);
}

GrayImage render_hairy_yarn(const YarnRenderSpec& spec) { return render_yarn(spec, false); }

GrayImage render_slub_yarn(const YarnRenderSpec& spec) { return render_yarn(spec, false); }

void validate(const OpeningShapeSpec& spec) {
    if (!(spec.px_per_mm > 0)) throw ParameterError("px_per_mm must be > 0");
    if (spec.parent_width < 1 || spec.parent_length < 1) throw ParameterError("parent yarn must be non-empty");
    if (spec.opening_length < 0 || spec.w1 < 0 || spec.w2 < 0 || spec.w3 < 0 || spec.margin < 0) {
        throw ParameterError("opening dimensions must be >= 0");
    }
}

BinaryImage render_opening_contour(const OpeningShapeSpec& spec) {
    validate(spec);
    const int tallest = std::max({spec.parent_width, spec.w1, spec.w2, spec.w3});
    const int width = 2 * spec.margin + spec.parent_length + spec.opening_length;
    const int height = 2 * spec.margin + tallest;
    const int axis = spec.margin + (tallest - 1) / 2;
    const int zone1 = static_cast<int>(std::lround(5.0 * spec.px_per_mm));
    const int zone2 = static_cast<int>(std::lround(10.0 * spec.px_per_mm));
    BinaryImage img(width, height);
    auto fill_column = [&](int x, int w) {
        const int top = band_top(axis, w);
        for (int y = top; y < top + w; ++y) img(x, y) = 1;
    };
    for (int i = 0; i < spec.parent_length; ++i) fill_column(spec.margin + i, spec.parent_width);
    const int start = spec.margin + spec.parent_length;
    for (int o = 0; o < spec.opening_length; ++o) {
        const int w = o < zone1 ? spec.w1 : (o < zone2 ? spec.w2 : spec.w3);
        fill_column(start + o, w);
    }
    return img;
}

void validate(const CrossSectionSpec& spec) {
    if (spec.width < 1 || spec.height < 1) throw ParameterError("render size must be >= 1");
    if (spec.major < 2 || spec.minor < 2) throw ParameterError("ellipse axes must be >= 2");
    for (const auto& f : spec.fibers)
        if (!(f.r > 0)) throw ParameterError("fiber radius must be > 0");
}

CrossSectionRender render_cross_section(const CrossSectionSpec& spec) {
    validate(spec);
    CrossSectionRender out{BinaryImage(spec.width, spec.height), BinaryImage(spec.width, spec.height),
                           (spec.width - 1) / 2.0, (spec.height - 1) / 2.0};
    const double a = spec.major / 2;
    const double b = spec.minor / 2;
    for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x) {
            const double u = (x - out.cx) / a;
            const double v = (y - out.cy) / b;
            if (u * u + v * v <= 1.0) out.yarn(x, y) = 1;
            for (const auto& f : spec.fibers) {
                const double dx = x - f.cx;
                const double dy = y - f.cy;
                if (dx * dx + dy * dy <= f.r * f.r) {
                    out.fibers(x, y) = 1;
                    break;
                }
            }
        }
    return out;
}

GrayImage render_fiber_field(const FiberFieldSpec& spec) {
    if (spec.width < 1 || spec.height < 1) throw ParameterError("render size must be >= 1");
    if (!(spec.spacing >= 3)) throw ParameterError("filament spacing must be >= 3 px");
    GrayImage img(spec.width, spec.height, spec.bg);
    const double theta = spec.angle_deg * std::numbers::pi / 180.0;
    const double sn = std::sin(theta);
    const double cs = std::cos(theta);
    // Offsets c of the lines -x*sin + y*cos = c that cross the image.
    double cmin = 0;
    double cmax = 0;
    bool first = true;
    for (int cx : {0, spec.width - 1})
        for (int cy : {0, spec.height - 1}) {
            const double c = -cx * sn + cy * cs;
            cmin = first ? c : std::min(cmin, c);
            cmax = first ? c : std::max(cmax, c);
            first = false;
        }
    const long kmin = static_cast<long>(std::floor(cmin / spec.spacing)) - 1;
    const long kmax = static_cast<long>(std::ceil(cmax / spec.spacing)) + 1;
    const bool x_major = std::abs(cs) >= std::abs(sn);
    for (long k = kmin; k <= kmax; ++k) {
        const double c = (static_cast<double>(k) + spec.phase) * spec.spacing;
        if (x_major) {
            for (int x = 0; x < spec.width; ++x) {
                const int y = static_cast<int>(std::floor((c + x * sn) / cs + 0.5));
                if (img.contains(x, y)) img(x, y) = spec.fg;
            }
        } else {
            for (int y = 0; y < spec.height; ++y) {
                const int x = static_cast<int>(std::floor((y * cs - c) / sn + 0.5));
                if (img.contains(x, y)) img(x, y) = spec.fg;
            }
        }
    }
    return img;
}

}  // namespace yarnscope::synth
