#include "yarnscope/metrology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace yarnscope::metrology {

Calibration::Calibration(double pixels_per_mm) : pixels_per_mm_(pixels_per_mm) {
    if (!(pixels_per_mm > 0) || !std::isfinite(pixels_per_mm)) {
        throw ParameterError("pixels_per_mm must be positive");
    }
}

Calibration calibrate(double pixels, double mm) {
    if (!(pixels > 0) || !(mm > 0)) throw ParameterError("calibration needs pixels > 0 and mm > 0");
    return Calibration(pixels / mm);
}

double px_to_mm(const Calibration& cal, double pixels) { return cal.to_mm(pixels); }

std::size_t WidthProfile::nonzero_columns() const {
    return static_cast<std::size_t>(std::count_if(widths.begin(), widths.end(), [](int w) { return w > 0; }));
}

WidthProfile width_profile(const BinaryImage& bin) {
    WidthProfile profile;
    profile.widths.assign(static_cast<std::size_t>(bin.width()), 0);
    for (int x = 0; x < bin.width(); ++x) {
        int top = -1;
        int bottom = -1;
        for (int y = 0; y < bin.height(); ++y) {
            if (bin(x, y)) {
                if (top < 0) top = y;
                bottom = y;
            }
        }
        if (top >= 0) profile.widths[static_cast<std::size_t>(x)] = bottom - top + 1;
    }
    return profile;
}

DiameterStats mean_diameter(const WidthProfile& profile, const Calibration& cal) {
    std::vector<double> w;
    for (int v : profile.widths)
        if (v > 0) w.push_back(v);
    if (w.empty()) throw AnalysisError("no yarn found");

    const double n = static_cast<double>(w.size());
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / n;
    double var = 0;
    for (double v : w) var += (v - mean) * (v - mean);
    var /= n;

    DiameterStats s;
    s.n_columns = w.size();
    s.mean_px = mean;
    s.mean_mm = cal.to_mm(mean);
    s.min_mm = cal.to_mm(*std::min_element(w.begin(), w.end()));
    s.max_mm = cal.to_mm(*std::max_element(w.begin(), w.end()));
    s.cv = std::sqrt(var) / mean;
    return s;
}

namespace {

std::vector<double> smoothed_row_profile(const GrayImage& img, int radius) {
    const int h = img.height();
    std::vector<double> raw(static_cast<std::size_t>(h));
    const auto rows = row_projection(img);
    for (int y = 0; y < h; ++y) raw[y] = static_cast<double>(rows[y]) / img.width();
    if (radius <= 0) return raw;
    std::vector<double> out(raw.size());
    for (int y = 0; y < h; ++y) {
        double s = 0;
        for (int d = -radius; d <= radius; ++d) s += raw[std::clamp(y + d, 0, h - 1)];
        out[y] = s / (2 * radius + 1);
    }
    return out;
}

double percentile_width(const std::vector<double>& p, int peak, double level) {
    const int h = static_cast<int>(p.size());
    int yl = peak;
    while (yl >= 0 && p[yl] >= level) --yl;
    int yr = peak;
    while (yr < h && p[yr] >= level) ++yr;
    if (yl < 0 || yr >= h) throw AnalysisError("no plateau: yarn profile touches the image border");
    const double left = yl + (level - p[yl]) / (p[yl + 1] - p[yl]);
    const double right = (yr - 1) + (p[yr - 1] - level) / (p[yr - 1] - p[yr]);
    return right - left;
}

// Edge position as the centroid of the gradient lobe around its extreme.
double lobe_centroid(const std::vector<double>& d, int lo, int hi, double sign) {
    int best = -1;
    double best_v = 0;
    for (int i = lo; i < hi; ++i) {
        if (sign * d[i] > best_v) {
            best_v = sign * d[i];
            best = i;
        }
    }
    if (best < 0) throw AnalysisError("no plateau: missing edge");
    int a = best;
    while (a - 1 >= lo && sign * d[a - 1] > 0) --a;
    int b = best;
    while (b + 1 < hi && sign * d[b + 1] > 0) ++b;
    double wsum = 0;
    double xsum = 0;
    for (int i = a; i <= b; ++i) {
        wsum += sign * d[i];
        xsum += sign * d[i] * (i + 0.5);
    }
    return xsum / wsum;
}

}  // namespace

double histogram_level_diameter(const GrayImage& img, const HistogramDiameterOptions& options) {
    if (!(options.percentile > 0 && options.percentile < 1)) {
        throw ParameterError("percentile must lie in (0, 1)");
    }
    std::vector<double> p = smoothed_row_profile(img, options.smoothing_radius);
    const int h = static_cast<int>(p.size());
    if (h < 3) throw AnalysisError("no plateau: image too short");

    const double background = 0.5 * (p.front() + p.back());
    const auto [mn, mx] = std::minmax_element(p.begin(), p.end());
    if (background - *mn > *mx - background) {
        for (auto& v : p) v = -v;  // dark yarn: flip so the plateau is a peak
    }
    const double bg = 0.5 * (p.front() + p.back());
    const int peak = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    const double height = p[peak] - bg;
    if (height < 1.0) throw AnalysisError("no plateau: profile has no yarn peak");

    if (options.mode == DiameterMode::Percentile) {
        return percentile_width(p, peak, bg + options.percentile * height);
    }
    std::vector<double> d(static_cast<std::size_t>(h - 1));
    for (int i = 0; i + 1 < h; ++i) d[i] = p[i + 1] - p[i];
    const double left = lobe_centroid(d, 0, peak, +1.0);
    const double right = lobe_centroid(d, peak, h - 1, -1.0);
    return right - left;
}

YarnCount count_convert(YarnCount count, CountSystem target) {
    if (!(count.value > 0)) throw ParameterError("yarn count must be positive");
    double tex = 0;
    switch (count.system) {
        case CountSystem::Tex: tex = count.value; break;
        case CountSystem::Nm: tex = 1000.0 / count.value; break;
        case CountSystem::Ne1: tex = kTexPerNe1 / count.value; break;
    }
    switch (target) {
        case CountSystem::Tex: return {tex, target};
        case CountSystem::Nm: return {1000.0 / tex, target};
        case CountSystem::Ne1: return {kTexPerNe1 / tex, target};
    }
    return {tex, CountSystem::Tex};
}

std::string to_string(CountSystem system) {
    switch (system) {
        case CountSystem::Tex: return "tex";
        case CountSystem::Nm: return "Nm";
        case CountSystem::Ne1: return "Ne1";
    }
    return "tex";
}

CountSystem parse_count_system(const std::string& name) {
    if (name == "tex") return CountSystem::Tex;
    if (name == "Nm" || name == "nm") return CountSystem::Nm;
    if (name == "Ne1" || name == "ne1" || name == "Ne") return CountSystem::Ne1;
    throw ParameterError("unknown count system '" + name + "' (tex, Nm, Ne1)");
}

DiameterBand trommer_band(YarnCount count) {
    const double root = std::sqrt(count_convert(count, CountSystem::Tex).value);
    return {0.035 * root, 0.040 * root};
}

}  // namespace yarnscope::metrology
