#pragma once

#include <optional>
#include <string>
#include <vector>

#include "yarnscope/raster.hpp"

namespace yarnscope::twist {

enum class Direction { S, Z };

std::string to_string(Direction d);

struct TwistResult {
    double angle_deg = 0;  ///< inclination of the surface stripes, [0, 90)
    double tpm = 0;
    Direction direction = Direction::Z;
};

struct RingFrameParams {
    double n_bobbin = 0;  ///< rev/min
    double v_f = 0;       ///< front-roll delivery, m/min
    double d_bobbin = 0;  ///< m
};

/// T = alpha_m * Nm^0.6
double neckar_twist(double alpha_m, double nm);
/// T = n/v_f - 1/(pi d) for S, + for Z.
double ring_twist(const RingFrameParams& p, Direction direction);

/// Ideal helix tan(angle) = pi d T, d in mm on the interface.
double angle_to_tpm(double angle_deg, double diameter_mm);
double tpm_to_angle(double tpm, double diameter_mm);

/// 100 (1 - |ref - est| / ref)
double accuracy_pct(double ref_tpm, double est_tpm);

struct CoreBand {
    GrayImage core;
    int top = 0;     ///< first kept row
    int bottom = 0;  ///< last kept row
};

/// Keeps the contiguous run of rows around the brightest row whose projection
/// rises above min + fraction * (max - min).
CoreBand extract_core(const GrayImage& img, double fraction = 0.5);

struct AngleEstimate {
    double angle_deg = 0;
    Direction direction = Direction::Z;
    int n_segments = 0;  ///< segments in the dominant direction (line method only)
};

struct FftOptions {
    int pad_factor = 8;
    int dc_guard = 2;             ///< bins, at unpadded resolution
    double min_peak_ratio = 50;   ///< peak power over mean power
};

AngleEstimate dominant_angle_fft(const GrayImage& core, const FftOptions& options = {});

struct LineOptions {
    int low_pass_radius = 1;
    double min_len = 10;          ///< px
    double merge_angle_deg = 5;
    double merge_dist_px = 3;
    double bin_deg = 10;
};

/// Straight line fitted to a skeleton branch.
struct Segment {
    double cx = 0;
    double cy = 0;
    double dx = 0;  ///< unit direction, dy >= 0
    double dy = 1;
    double length = 0;
    /// Signed inclination from the vertical in (-90, 90]; positive leans like '\'.
    double signed_angle() const;
};

/// Line segments surviving the merge and length filter, before direction voting.
std::vector<Segment> extract_segments(const GrayImage& core, const LineOptions& options = {});
AngleEstimate dominant_angle_lines(const GrayImage& core, const LineOptions& options = {});

}  // namespace yarnscope::twist
