#include "yarnscope/crosssection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace yarnscope::crosssection {

double Ellipse::area() const { return std::numbers::pi * major * minor / 4.0; }

bool Ellipse::contains(double x, double y) const {
    const double phi = orientation_deg * std::numbers::pi / 180.0;
    const double dx = x - cx;
    const double dy = y - cy;
    const double u = (dx * std::cos(phi) + dy * std::sin(phi)) / (major / 2);
    const double v = (-dx * std::sin(phi) + dy * std::cos(phi)) / (minor / 2);
    return u * u + v * v <= 1.0;
}

Ellipse fit_yarn_ellipse(const BinaryImage& bin, EllipseMode mode) {
    double n = 0;
    double mx = 0;
    double my = 0;
    int x0 = bin.width();
    int x1 = -1;
    int y0 = bin.height();
    int y1 = -1;
    for (int y = 0; y < bin.height(); ++y)
        for (int x = 0; x < bin.width(); ++x) {
            if (!bin(x, y)) continue;
            n += 1;
            mx += x;
            my += y;
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    if (n == 0) throw AnalysisError("empty cross-section mask");
    if (mode == EllipseMode::BoundingBox) {
        if (x1 == x0 || y1 == y0) throw AnalysisError("degenerate cross-section mask");
        return {0.5 * (x0 + x1), 0.5 * (y0 + y1), double(x1 - x0 + 1), double(y1 - y0 + 1), 0};
    }
    mx /= n;
    my /= n;
    double sxx = 0;
    double syy = 0;
    double sxy = 0;
    for (int y = 0; y < bin.height(); ++y)
        for (int x = 0; x < bin.width(); ++x) {
            if (!bin(x, y)) continue;
            sxx += (x - mx) * (x - mx);
            syy += (y - my) * (y - my);
            sxy += (x - mx) * (y - my);
        }
    sxx /= n;
    syy /= n;
    sxy /= n;
    const double disc = std::sqrt(0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy);
    const double minor_var = 0.5 * (sxx + syy) - disc;
    if (minor_var < 1e-9) throw AnalysisError("degenerate cross-section mask");
    const double phi = 0.5 * std::atan2(2 * sxy, sxx - syy);
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    constexpr double kInf = std::numeric_limits<double>::infinity();
    double u0 = kInf, u1 = -kInf, v0 = kInf, v1 = -kInf;
    for (int y = 0; y < bin.height(); ++y)
        for (int x = 0; x < bin.width(); ++x) {
            if (!bin(x, y)) continue;
            const double u = x * c + y * s;
            const double v = -x * s + y * c;
            u0 = std::min(u0, u);
            u1 = std::max(u1, u);
            v0 = std::min(v0, v);
            v1 = std::max(v1, v);
        }
    const double uc = 0.5 * (u0 + u1);
    const double vc = 0.5 * (v0 + v1);
    Ellipse e;
    e.cx = uc * c - vc * s;
    e.cy = uc * s + vc * c;
    e.major = u1 - u0 + 1;
    e.minor = v1 - v0 + 1;
    e.orientation_deg = phi * 180.0 / std::numbers::pi;
    return e;
}

CrossSectionMeasurement packing_density(const BinaryImage& fibers, const Ellipse& ellipse) {
    if (!(ellipse.major > 0 && ellipse.minor > 0)) throw AnalysisError("zero yarn area");
    CrossSectionMeasurement m;
    m.ellipse = ellipse;
    for (int y = 0; y < fibers.height(); ++y)
        for (int x = 0; x < fibers.width(); ++x)
            if (fibers(x, y) && ellipse.contains(x, y)) ++m.fiber_area_px;
    m.yarn_area_px = ellipse.area();
    m.packing_density_pct = std::min(100.0, 100.0 * static_cast<double>(m.fiber_area_px) / m.yarn_area_px);
    return m;
}

BinaryImage pretreat(const GrayImage& img, const PretreatOptions& options) {
    BinaryImage bin = otsu_binarize(img, options.polarity);
    if (options.remove_small) bin = remove_small_objects(bin, options.min_area);
    if (options.fill_lumens) bin = fill_holes(bin);
    return bin;
}

SystemComparison compare_systems(const stats::Groups& groups) {
    SystemComparison out;
    out.anova = stats::one_way_anova(groups);
    out.pairwise = stats::pairwise_mean_diff(groups, out.anova.error.mean_square, out.anova.error.df);
    return out;
}

}  // namespace yarnscope::crosssection
