#include "yarnscope/grade.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace yarnscope::grade {

namespace {

using Line = std::vector<std::int32_t>;

// floor(v / 2^k) for any sign.
std::int32_t floor_shift(std::int32_t v, int k) { return v >> k; }

void haar_forward(Line& x) {
    const std::size_t n = x.size() / 2;
    Line s(n);
    Line d(n);
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = x[2 * i + 1] - x[2 * i];
        s[i] = x[2 * i] + floor_shift(d[i], 1);
    }
    std::copy(s.begin(), s.end(), x.begin());
    std::copy(d.begin(), d.end(), x.begin() + static_cast<std::ptrdiff_t>(n));
}

void haar_inverse(Line& x) {
    const std::size_t n = x.size() / 2;
    Line out(x.size());
    for (std::size_t i = 0; i < n; ++i) {
        const std::int32_t s = x[i];
        const std::int32_t d = x[n + i];
        out[2 * i] = s - floor_shift(d, 1);
        out[2 * i + 1] = d + out[2 * i];
    }
    x = std::move(out);
}

void legall_forward(Line& x) {
    const std::size_t n = x.size() / 2;
    auto even = [&](std::size_t i) { return x[std::min(2 * i, 2 * n - 2)]; };
    Line s(n);
    Line d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = x[2 * i + 1] - floor_shift(even(i) + even(i + 1), 1);
    for (std::size_t i = 0; i < n; ++i) s[i] = x[2 * i] + floor_shift(d[i == 0 ? 0 : i - 1] + d[i] + 2, 2);
    std::copy(s.begin(), s.end(), x.begin());
    std::copy(d.begin(), d.end(), x.begin() + static_cast<std::ptrdiff_t>(n));
}

void legall_inverse(Line& x) {
    const std::size_t n = x.size() / 2;
    Line out(x.size());
    for (std::size_t i = 0; i < n; ++i) out[2 * i] = x[i] - floor_shift(x[n + (i == 0 ? 0 : i - 1)] + x[n + i] + 2, 2);
    auto even = [&](std::size_t i) { return out[std::min(2 * i, 2 * n - 2)]; };
    for (std::size_t i = 0; i < n; ++i) out[2 * i + 1] = x[n + i] + floor_shift(even(i) + even(i + 1), 1);
    x = std::move(out);
}

void forward_1d(Line& x, WaveletKind kind) { kind == WaveletKind::Haar ? haar_forward(x) : legall_forward(x); }
void inverse_1d(Line& x, WaveletKind kind) { kind == WaveletKind::Haar ? haar_inverse(x) : legall_inverse(x); }

int level_width(const WaveletDecomposition& dec, int level) { return dec.coeffs.width() >> (level - 1); }
int level_height(const WaveletDecomposition& dec, int level) { return dec.coeffs.height() >> (level - 1); }

double percentile(std::vector<double> v, double q) {
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
    return v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
}

}  // namespace

std::string to_string(WaveletKind kind) { return kind == WaveletKind::Haar ? "haar" : "legall53"; }

WaveletKind parse_wavelet(const std::string& name) {
    if (name == "haar") return WaveletKind::Haar;
    if (name == "legall53" || name == "5/3") return WaveletKind::LeGall53;
    throw ParameterError("unknown wavelet '" + name + "' (haar, legall53)");
}

WaveletDecomposition wavelet_decompose(const GrayImage& img, int levels, WaveletKind kind) {
    if (levels < 1) throw ParameterError("wavelet levels must be >= 1");
    if (levels > 12) throw ParameterError("wavelet levels must be <= 12");
    const int block = 1 << levels;
    const int pw = (img.width() + block - 1) / block * block;
    const int ph = (img.height() + block - 1) / block * block;
    WaveletDecomposition dec{CoeffImage(pw, ph), levels, img.width(), img.height(), kind};
    auto& c = dec.coeffs;
    for (int y = 0; y < ph; ++y)
        for (int x = 0; x < pw; ++x) c(x, y) = img.clamped(x, y);

    Line line;
    for (int l = 1; l <= levels; ++l) {
        const int w = level_width(dec, l);
        const int h = level_height(dec, l);
        for (int y = 0; y < h; ++y) {
            line.assign(static_cast<std::size_t>(w), 0);
            for (int x = 0; x < w; ++x) line[x] = c(x, y);
            forward_1d(line, kind);
            for (int x = 0; x < w; ++x) c(x, y) = line[x];
        }
        for (int x = 0; x < w; ++x) {
            line.assign(static_cast<std::size_t>(h), 0);
            for (int y = 0; y < h; ++y) line[y] = c(x, y);
            forward_1d(line, kind);
            for (int y = 0; y < h; ++y) c(x, y) = line[y];
        }
    }
    return dec;
}

GrayImage wavelet_reconstruct(const WaveletDecomposition& dec) {
    CoeffImage c = dec.coeffs;
    Line line;
    for (int l = dec.levels; l >= 1; --l) {
        const int w = level_width(dec, l);
        const int h = level_height(dec, l);
        for (int x = 0; x < w; ++x) {
            line.assign(static_cast<std::size_t>(h), 0);
            for (int y = 0; y < h; ++y) line[y] = c(x, y);
            inverse_1d(line, dec.kind);
            for (int y = 0; y < h; ++y) c(x, y) = line[y];
        }
        for (int y = 0; y < h; ++y) {
            line.assign(static_cast<std::size_t>(w), 0);
            for (int x = 0; x < w; ++x) line[x] = c(x, y);
            inverse_1d(line, dec.kind);
            for (int x = 0; x < w; ++x) c(x, y) = line[x];
        }
    }
    GrayImage out(dec.width, dec.height);
    for (int y = 0; y < dec.height; ++y)
        for (int x = 0; x < dec.width; ++x) out(x, y) = static_cast<std::uint8_t>(std::clamp(c(x, y), 0, 255));
    return out;
}

double detail_energy(const WaveletDecomposition& dec, int level) {
    if (level < 1 || level > dec.levels) throw ParameterError("level out of range");
    const int w = level_width(dec, level);
    const int h = level_height(dec, level);
    double e = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (x < w / 2 && y < h / 2) continue;
            const double v = dec.coeffs(x, y);
            e += v * v;
        }
    return e;
}

void suppress_cross_axis_detail(WaveletDecomposition& dec) {
    for (int l = 1; l <= dec.levels; ++l) {
        const int w = level_width(dec, l);
        const int h = level_height(dec, l);
        for (int y = 0; y < h; ++y)
            for (int x = w / 2; x < w; ++x) dec.coeffs(x, y) = 0;
    }
}

void keep_approximation(WaveletDecomposition& dec) {
    for (int l = 1; l <= dec.levels; ++l) {
        const int w = level_width(dec, l);
        const int h = level_height(dec, l);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (x >= w / 2 || y >= h / 2) dec.coeffs(x, y) = 0;
    }
}

BinaryImage separate_core(const GrayImage& img, const GradeOptions& options) {
    auto dec = wavelet_decompose(img, options.levels, options.kind);
    suppress_cross_axis_detail(dec);
    const GrayImage smooth = wavelet_reconstruct(dec);
    const BinaryImage coarse = otsu_binarize(smooth, options.polarity);
    BinaryImage core = otsu_binarize(img, options.polarity);
    auto dst = core.pixels();
    auto src = coarse.pixels();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = dst[i] & src[i];
    return core;
}

std::vector<double> saliency_map(const std::vector<int>& widths, int window) {
    if (window < 1 || window % 2 == 0) throw ParameterError("saliency window must be odd and >= 1");
    const int n = static_cast<int>(widths.size());
    const int r = window / 2;
    std::vector<double> out(widths.size());
    std::vector<int> buf;
    for (int i = 0; i < n; ++i) {
        buf.clear();
        for (int d = -r; d <= r; ++d) buf.push_back(widths[std::clamp(i + d, 0, n - 1)]);
        std::nth_element(buf.begin(), buf.begin() + r, buf.end());
        const double med = buf[r];
        out[i] = med > 0 ? std::abs(widths[i] - med) / med : 0.0;
    }
    return out;
}

GradeFeatures extract_grade_features(const GrayImage& img, const metrology::Calibration& cal,
                                     const GradeOptions& options) {
    if (!(options.defect_threshold > 0)) throw ParameterError("defect threshold must be positive");
    const BinaryImage core = separate_core(img, options);
    GradeFeatures f;
    f.width_map = metrology::width_profile(core).widths;
    std::vector<double> nonzero;
    for (int w : f.width_map) {
        ++f.diameter_histogram.bins[static_cast<std::size_t>(std::min(w, 255))];
        if (w > 0) nonzero.push_back(w);
    }
    if (nonzero.empty()) throw AnalysisError("no core found");
    f.saliency = saliency_map(f.width_map, options.saliency_window);

    const int n = static_cast<int>(f.saliency.size());
    for (int x = 0; x < n;) {
        if (f.saliency[x] <= options.defect_threshold) {
            ++x;
            continue;
        }
        Defect d{x, x, 0, 0};
        while (d.last_col + 1 < n && f.saliency[d.last_col + 1] > options.defect_threshold) ++d.last_col;
        d.center_col = 0.5 * (d.first_col + d.last_col);
        d.peak_saliency = *std::max_element(f.saliency.begin() + d.first_col, f.saliency.begin() + d.last_col + 1);
        f.defects.push_back(d);
        x = d.last_col + 1;
    }

    auto& s = f.summary;
    const double mean = std::accumulate(nonzero.begin(), nonzero.end(), 0.0) / static_cast<double>(nonzero.size());
    double var = 0;
    for (double w : nonzero) var += (w - mean) * (w - mean);
    var /= static_cast<double>(nonzero.size());
    s.mean_width_px = mean;
    s.mean_width_mm = cal.to_mm(mean);
    s.cv_pct = 100.0 * std::sqrt(var) / mean;
    s.defect_count = static_cast<int>(f.defects.size());
    s.defects_per_m = s.defect_count / (cal.to_mm(img.width()) / 1000.0);
    s.saliency_p95 = percentile(f.saliency, 0.95);
    return f;
}

GradeDecision classify_grade(const GradeSummary& sample, const std::vector<GradeReference>& references) {
    if (references.empty()) throw ParameterError("empty reference set");
    auto vec = [](double cv, double rate, double p95) { return std::array<double, 3>{cv, rate, p95}; };
    std::vector<std::array<double, 3>> pts;
    for (const auto& r : references) pts.push_back(vec(r.cv_pct, r.defects_per_m, r.saliency_p95));

    std::array<double, 3> scale{};
    for (std::size_t k = 0; k < 3; ++k) {
        double m = 0;
        for (const auto& p : pts) m += p[k];
        m /= static_cast<double>(pts.size());
        double v = 0;
        for (const auto& p : pts) v += (p[k] - m) * (p[k] - m);
        const double sd = std::sqrt(v / static_cast<double>(pts.size()));
        scale[k] = sd > 0 ? sd : 1.0;
    }

    std::map<std::string, std::pair<std::array<double, 3>, int>> centroids;
    for (std::size_t i = 0; i < references.size(); ++i) {
        auto& [sum, count] = centroids[references[i].label];
        for (std::size_t k = 0; k < 3; ++k) sum[k] += pts[i][k];
        ++count;
    }
    const auto x = vec(sample.cv_pct, sample.defects_per_m, sample.saliency_p95);
    GradeDecision out;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [label, acc] : centroids) {
        double d2 = 0;
        for (std::size_t k = 0; k < 3; ++k) {
            const double c = acc.first[k] / acc.second;
            d2 += std::pow((x[k] - c) / scale[k], 2);
        }
        const double d = std::sqrt(d2);
        out.distances.emplace_back(label, d);
        if (d < best) {  // map order makes ties fall to the smaller label
            best = d;
            out.label = label;
        }
    }
    return out;
}

}  // namespace yarnscope::grade
