#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "yarnscope/metrology.hpp"
#include "yarnscope/raster.hpp"

namespace yarnscope::slub {

struct SlubSegment {
    int start_col = 0;
    int end_col = 0;  ///< inclusive
    double start_mm = 0;
    double length_mm = 0;
    double mean_width_px = 0;
    double amplitude_pct = 0;  ///< 100 * mean width / base width
};

struct SlubReport {
    int base_width_px = 0;
    std::vector<SlubSegment> segments;
    std::vector<double> distances_mm;  ///< gap from each slub's end to the next one's start
    double scanned_length_mm = 0;
    double leading_margin_mm = 0;
    double trailing_margin_mm = 0;
};

struct SlubOptions {
    double amplitude_threshold_pct = 140;
    double min_len_mm = 20;
    int median_window = 5;
};

/// Mode of the nonzero widths, ties to the smaller width.
int detect_base_width(const metrology::WidthProfile& profile);

SlubReport detect_slubs(const metrology::WidthProfile& profile, const metrology::Calibration& cal,
                        const SlubOptions& options = {});

/// Repeat cycle of (length, amplitude, distance) in segments; empty when aperiodic.
std::optional<int> slub_period(const SlubReport& report, double tolerance = 0.10);

/// Row ranges [first, last] of strands separated by near-empty rows.
std::vector<std::pair<int, int>> split_lanes(const BinaryImage& bin, double valley_fraction = 0.02);

}  // namespace yarnscope::slub
