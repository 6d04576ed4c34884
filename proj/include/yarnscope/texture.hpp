#pragma once

#include <vector>

#include "yarnscope/raster.hpp"
#include "yarnscope/skeleton.hpp"

namespace yarnscope::texture {

struct FiberTrace {
    PixelPath path;
    std::vector<double> segment_angles_deg;  ///< folded to [0, 90] against the yarn axis
    std::vector<double> segment_lengths;     ///< px
    double length = 0;                       ///< sum of segment lengths
    double angle_deg = 0;                    ///< length-weighted segment mean
};

struct OrientationResult {
    double mean_angle_deg = 0;
    double cv_pct = 0;
    double orientation_index = 1;  ///< F = 1 - 1.5 <sin^2>
    int n_traces = 0;
};

struct TextureOptions {
    int spur_len = 10;
    Connectivity neighborhood = Connectivity::Eight;
    int min_trace_len = 15;  ///< pixels per trace
    int chord = 11;          ///< pixels per local-angle chord
    Polarity polarity = Polarity::BrightForeground;
};

/// Strips branches shorter than spur_len that hang off a junction, then
/// re-thins; repeats until nothing changes.
BinaryImage corrective_procedure(const BinaryImage& skel, int spur_len);

std::vector<FiberTrace> trace_fibers(const BinaryImage& skel, Connectivity neighborhood, int min_trace_len,
                                     int chord = 11);

OrientationResult orientation_stats(const std::vector<FiberTrace>& traces);

/// Otsu, thinning, spur removal, tracing, statistics.
OrientationResult analyze_texture(const GrayImage& img, const TextureOptions& options = {});

struct AngleCheck {
    std::vector<double> abs_error_deg;
    double max_abs_error_deg = 0;
    double mean_abs_error_deg = 0;
};

/// Estimated mean angle of each image against its manually measured angle.
AngleCheck angle_accuracy_check(const std::vector<GrayImage>& images, const std::vector<double>& manual_deg,
                                const TextureOptions& options = {});

}  // namespace yarnscope::texture
