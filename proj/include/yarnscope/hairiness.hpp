#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "yarnscope/metrology.hpp"
#include "yarnscope/raster.hpp"

namespace yarnscope::hairiness {

/// Rows [top, bottom] occupied by the yarn core.
struct CoreRows {
    int top = 0;
    int bottom = 0;
};

/// Hair Density Distribution Profile: hairs per mm of scanned yarn, binned by
/// hair length.
struct HDDP {
    double bin_width_mm = 0.25;
    double scan_length_mm = 0;
    std::vector<std::uint64_t> counts;
    std::vector<double> density;  ///< counts / scan_length_mm

    double bin_center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * bin_width_mm; }
    std::size_t size() const { return counts.size(); }
};

/// A protruding hair: its column range and farthest distance from the core edge.
struct HairTrace {
    int x_min = 0;
    int x_max = 0;
    int extent_px = 0;
    bool above = true;
};

/// 8-connected foreground outside the core that touches the row next to it.
std::vector<HairTrace> trace_hairs(const BinaryImage& bin, CoreRows core);

HDDP compute_hddp(const BinaryImage& bin, const metrology::Calibration& cal, CoreRows core,
                  double bin_width_mm = 0.25);
/// Builds a profile from hair lengths directly.
HDDP hddp_from_lengths(const std::vector<double>& lengths_mm, double scan_length_mm, double bin_width_mm = 0.25);
/// Counts added, scan lengths added.
HDDP merge_hddp(const HDDP& a, const HDDP& b);

/// Sum of densities over bins whose centre is >= threshold_mm.
double hairiness_count_ge(const HDDP& hddp, double threshold_mm = 2.0);

struct LogFit {
    double m = 0;
    double b = 0;
    double r2 = 0;
    std::size_t n_points = 0;
    std::size_t n_excluded = 0;  ///< zero bins skipped
};

/// log10(density) against log10(length) for the bins with centre in (lo, hi].
LogFit fit_loglinear(const HDDP& hddp, double lo_mm, double hi_mm);

struct SegmentFit {
    std::optional<LogFit> fit;
    std::string error;  ///< set when the segment has too few nonzero bins
};

struct HddpFits {
    SegmentFit short_hairs;  ///< length <= split
    SegmentFit long_hairs;   ///< length > split
};

HddpFits fit_hddp_loglinear(const HDDP& hddp, double split_mm = 0.75);

}  // namespace yarnscope::hairiness
