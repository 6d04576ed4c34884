#include "yarnscope/hairiness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "yarnscope/stats.hpp"

namespace yarnscope::hairiness {

namespace {

std::size_t bin_index(double length_mm, double bin_width_mm) {
    return static_cast<std::size_t>(std::floor(length_mm / bin_width_mm + 1e-9));
}

void check_bin_width(double bin_width_mm) {
    if (!(bin_width_mm > 0)) throw ParameterError("bin width must be positive");
}

void normalize(HDDP& h) {
    if (!(h.scan_length_mm > 0)) throw ParameterError("zero scan length");
    h.density.resize(h.counts.size());
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        h.density[i] = static_cast<double>(h.counts[i]) / h.scan_length_mm;
    }
}

}  // namespace

std::vector<HairTrace> trace_hairs(const BinaryImage& bin, CoreRows core) {
    if (core.top < 0 || core.bottom >= bin.height() || core.top > core.bottom) {
        throw ParameterError("core rows outside the image");
    }
    BinaryImage outside = bin;
    for (int y = core.top; y <= core.bottom; ++y)
        for (int x = 0; x < bin.width(); ++x) outside(x, y) = 0;
    const LabelImage lab = connected_components(outside, Connectivity::Eight);

    struct Acc {
        int x_min = 1 << 30, x_max = -1, y_min = 1 << 30, y_max = -1;
        bool touches = false;
    };
    std::vector<Acc> acc(static_cast<std::size_t>(lab.count) + 1);
    for (int y = 0; y < bin.height(); ++y)
        for (int x = 0; x < bin.width(); ++x) {
            const int l = lab.labels(x, y);
            if (l == 0) continue;
            auto& a = acc[l];
            a.x_min = std::min(a.x_min, x);
            a.x_max = std::max(a.x_max, x);
            a.y_min = std::min(a.y_min, y);
            a.y_max = std::max(a.y_max, y);
            if (y == core.top - 1 || y == core.bottom + 1) a.touches = true;
        }
    std::vector<HairTrace> hairs;
    for (int l = 1; l <= lab.count; ++l) {
        const auto& a = acc[l];
        if (!a.touches) continue;
        const bool above = a.y_max < core.top;
        hairs.push_back({a.x_min, a.x_max, above ? core.top - a.y_min : a.y_max - core.bottom, above});
    }
    return hairs;
}

HDDP hddp_from_lengths(const std::vector<double>& lengths_mm, double scan_length_mm, double bin_width_mm) {
    check_bin_width(bin_width_mm);
    HDDP h;
    h.bin_width_mm = bin_width_mm;
    h.scan_length_mm = scan_length_mm;
    for (double len : lengths_mm) {
        if (!(len >= 0)) throw ParameterError("hair length must be >= 0");
        const std::size_t i = bin_index(len, bin_width_mm);
        if (i >= h.counts.size()) h.counts.resize(i + 1, 0);
        ++h.counts[i];
    }
    if (h.counts.empty()) h.counts.assign(1, 0);
    normalize(h);
    return h;
}

HDDP compute_hddp(const BinaryImage& bin, const metrology::Calibration& cal, CoreRows core, double bin_width_mm) {
    std::vector<double> lengths;
    for (const auto& hair : trace_hairs(bin, core)) lengths.push_back(cal.to_mm(hair.extent_px));
    return hddp_from_lengths(lengths, cal.to_mm(bin.width()), bin_width_mm);
}

HDDP merge_hddp(const HDDP& a, const HDDP& b) {
    if (std::abs(a.bin_width_mm - b.bin_width_mm) > 1e-12) throw ParameterError("HDDP bin widths differ");
    HDDP h;
    h.bin_width_mm = a.bin_width_mm;
    h.scan_length_mm = a.scan_length_mm + b.scan_length_mm;
    h.counts.assign(std::max(a.counts.size(), b.counts.size()), 0);
    for (std::size_t i = 0; i < a.counts.size(); ++i) h.counts[i] += a.counts[i];
    for (std::size_t i = 0; i < b.counts.size(); ++i) h.counts[i] += b.counts[i];
    normalize(h);
    return h;
}

double hairiness_count_ge(const HDDP& hddp, double threshold_mm) {
    if (!(threshold_mm >= 0)) throw ParameterError("threshold must be >= 0");
    double sum = 0;
    for (std::size_t i = 0; i < hddp.size(); ++i)
        if (hddp.bin_center(i) >= threshold_mm) sum += hddp.density[i];
    return sum;
}

LogFit fit_loglinear(const HDDP& hddp, double lo_mm, double hi_mm) {
    std::vector<double> xs;
    std::vector<double> ys;
    LogFit fit;
    for (std::size_t i = 0; i < hddp.size(); ++i) {
        const double c = hddp.bin_center(i);
        if (!(c > lo_mm && c <= hi_mm)) continue;
        if (!(hddp.density[i] > 0)) {
            ++fit.n_excluded;
            continue;
        }
        xs.push_back(std::log10(c));
        ys.push_back(std::log10(hddp.density[i]));
    }
    if (xs.size() < 2) throw AnalysisError("fewer than two nonzero bins in segment");
    const auto lf = stats::linfit(xs, ys);
    fit.m = lf.slope;
    fit.b = lf.intercept;
    fit.r2 = lf.r2;
    fit.n_points = xs.size();
    return fit;
}

HddpFits fit_hddp_loglinear(const HDDP& hddp, double split_mm) {
    if (!(split_mm > 0)) throw ParameterError("split must be positive");
    auto run = [&](double lo, double hi) {
        SegmentFit s;
        try {
            s.fit = fit_loglinear(hddp, lo, hi);
        } catch (const AnalysisError& e) {
            s.error = e.what();
        }
        return s;
    };
    return {run(0.0, split_mm), run(split_mm, std::numeric_limits<double>::infinity())};
}

}  // namespace yarnscope::hairiness
