#pragma once

// Deterministic synthetic yarn renders. Every spec doubles as the ground truth
// for the image it produces, so tests can compare pipeline output against the
// planted values directly.

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "yarnscope/raster.hpp"

namespace yarnscope::synth {

enum class Side { Above, Below };

struct Hair {
    int column = 0;
    int length_px = 1;
    Side side = Side::Above;
};

struct SlubPlant {
    int start = 0;    ///< first column
    int length = 0;   ///< columns
    int width = 0;    ///< band height over the slub, pixels
};

struct YarnRenderSpec {
    int width = 256;
    int height = 64;
    int core_width = 11;
    int core_axis = 32;          ///< row the band is centred on
    double twist_angle_deg = 0;  ///< stripe inclination from the cross-axis
    double stripe_period = 12;   ///< pixels, measured along the stripe normal
    int stripe_sign = -1;        ///< -1 leans stripes like '\' (Z), +1 like '/' (S)
    std::uint8_t stripe_low = 0; ///< trough level of the stripes; 0 means (fg+bg)/2
    std::vector<Hair> hairs;
    std::vector<SlubPlant> slubs;
    std::uint8_t fg = 220;
    std::uint8_t bg = 30;
    int noise_amplitude = 0;      ///< additive uniform noise in [-a, a]
    double impulse_fraction = 0;  ///< share of pixels replaced by uniform 0..255
    std::uint64_t seed = 1;
};

/// First and last row of the core band for a given width and axis.
int core_top(const YarnRenderSpec& spec);
int core_bottom(const YarnRenderSpec& spec);

/// Throws ParameterError when the core leaves the image, slubs overlap or a
/// hair has length < 1.
void validate(const YarnRenderSpec& spec);

GrayImage render_plain_yarn(const YarnRenderSpec& spec);
/// Stripes at twist_angle_deg in [0, 90) inside the core band.
GrayImage render_twist_stripes(const YarnRenderSpec& spec);
GrayImage render_hairy_yarn(const YarnRenderSpec& spec);
GrayImage render_slub_yarn(const YarnRenderSpec& spec);
/// Band, slubs, optional stripes, hairs, then noise.
GrayImage render_yarn(const YarnRenderSpec& spec, bool stripes);

/// Splice opening geometry in pixels. Zones start at the end of the parent
/// yarn: W1 covers [0, 5 mm), W2 [5 mm, 10 mm), W3 beyond 10 mm.
struct OpeningShapeSpec {
    double px_per_mm = 20;
    int parent_width = 8;    ///< Y
    int parent_length = 200;
    int opening_length = 240;  ///< L
    int w1 = 24;
    int w2 = 20;
    int w3 = 16;
    int margin = 20;  ///< blank border around the shape
};

void validate(const OpeningShapeSpec& spec);
BinaryImage render_opening_contour(const OpeningShapeSpec& spec);

struct Disk {
    double cx = 0;
    double cy = 0;
    double r = 1;
};

struct CrossSectionSpec {
    int width = 128;
    int height = 96;
    double major = 100;  ///< M, along x
    double minor = 60;   ///< N, along y
    std::vector<Disk> fibers;
};

struct CrossSectionRender {
    BinaryImage yarn;    ///< filled ellipse
    BinaryImage fibers;  ///< fiber disks, inside or outside the ellipse
    double cx = 0;
    double cy = 0;
};

void validate(const CrossSectionSpec& spec);
/// Pixel centres (x, y) are covered when they satisfy the shape equation.
CrossSectionRender render_cross_section(const CrossSectionSpec& spec);

/// Parallel 1-pixel filaments at angle_deg from the x axis.
struct FiberFieldSpec {
    int width = 320;
    int height = 160;
    double angle_deg = 30;
    double spacing = 10;  ///< perpendicular distance between filaments
    double phase = 0.3;   ///< sub-pixel offset of the family
    std::uint8_t fg = 220;
    std::uint8_t bg = 30;
};

GrayImage render_fiber_field(const FiberFieldSpec& spec);

// Ground-truth sidecars. Missing keys fall back to the defaults above.
NLOHMANN_JSON_SERIALIZE_ENUM(Side, {{Side::Above, "above"}, {Side::Below, "below"}})
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(Hair, column, length_px, side)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SlubPlant, start, length, width)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(YarnRenderSpec, width, height, core_width, core_axis,
                                                twist_angle_deg, stripe_period, stripe_sign, stripe_low,
                                                hairs, slubs, fg, bg, noise_amplitude, impulse_fraction, seed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(OpeningShapeSpec, px_per_mm, parent_width, parent_length,
                                                opening_length, w1, w2, w3, margin)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(Disk, cx, cy, r)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(CrossSectionSpec, width, height, major, minor, fibers)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(FiberFieldSpec, width, height, angle_deg, spacing, phase, fg, bg)

}  // namespace yarnscope::synth
