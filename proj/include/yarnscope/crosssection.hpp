#pragma once

#include <vector>

#include "yarnscope/raster.hpp"
#include "yarnscope/stats.hpp"

namespace yarnscope::crosssection {

struct Ellipse {
    double cx = 0;
    double cy = 0;
    double major = 0;  ///< M, full axis length in px
    double minor = 0;  ///< N
    double orientation_deg = 0;  ///< major axis against the x axis

    double area() const;  ///< pi M N / 4
    /// Pixel centre satisfies the ellipse equation (<= 1).
    bool contains(double x, double y) const;
};

enum class EllipseMode { Moments, BoundingBox };

/// Moments: principal axes of the foreground, axes set to its extents along
/// them. BoundingBox: axis-aligned, M x N equal to the foreground's box.
Ellipse fit_yarn_ellipse(const BinaryImage& bin, EllipseMode mode = EllipseMode::Moments);

struct CrossSectionMeasurement {
    Ellipse ellipse;
    std::size_t fiber_area_px = 0;  ///< fiber pixels inside the ellipse
    double yarn_area_px = 0;
    double packing_density_pct = 0;
};

CrossSectionMeasurement packing_density(const BinaryImage& fibers, const Ellipse& ellipse);

struct PretreatOptions {
    bool remove_small = true;
    int min_area = 20;
    bool fill_lumens = true;
    Polarity polarity = Polarity::BrightForeground;
};

/// Otsu, then optional small-object removal and hole filling.
BinaryImage pretreat(const GrayImage& img, const PretreatOptions& options = {});

struct SystemComparison {
    stats::AnovaTable anova;
    std::vector<stats::PairwiseDiff> pairwise;
};

SystemComparison compare_systems(const stats::Groups& groups);

}  // namespace yarnscope::crosssection
