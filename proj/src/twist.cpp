#include "yarnscope/twist.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>

#include "yarnscope/skeleton.hpp"

namespace yarnscope::twist {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = 180.0 / kPi;

// FFTW planning is not thread-safe; execution on per-call buffers is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

double parabolic_offset(double left, double mid, double right) {
    const double denom = left - 2 * mid + right;
    if (denom >= 0) return 0;
    return std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
}

Segment fit_segment(const std::vector<Point>& pts) {
    const double n = static_cast<double>(pts.size());
    double mx = 0;
    double my = 0;
    for (const auto& p : pts) {
        mx += p.x;
        my += p.y;
    }
    mx /= n;
    my /= n;
    double sxx = 0;
    double syy = 0;
    double sxy = 0;
    for (const auto& p : pts) {
        sxx += (p.x - mx) * (p.x - mx);
        syy += (p.y - my) * (p.y - my);
        sxy += (p.x - mx) * (p.y - my);
    }
    // Principal axis of the scatter.
    const double theta = 0.5 * std::atan2(2 * sxy, sxx - syy);
    double dx = std::cos(theta);
    double dy = std::sin(theta);
    if (dy < 0 || (dy == 0 && dx < 0)) {
        dx = -dx;
        dy = -dy;
    }
    double lo = 0;
    double hi = 0;
    for (const auto& p : pts) {
        const double t = (p.x - mx) * dx + (p.y - my) * dy;
        lo = std::min(lo, t);
        hi = std::max(hi, t);
    }
    return {mx, my, dx, dy, hi - lo + 1};
}

double perpendicular_distance(const Segment& s, double x, double y) {
    return std::abs((x - s.cx) * s.dy - (y - s.cy) * s.dx);
}

double angle_gap(double a, double b) {
    double g = std::fmod(std::abs(a - b), 180.0);
    return std::min(g, 180.0 - g);
}

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
    std::size_t find(std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

std::string to_string(Direction d) { return d == Direction::S ? "S" : "Z"; }

double neckar_twist(double alpha_m, double nm) {
    if (!(alpha_m > 0) || !(nm > 0)) throw ParameterError("twist factor and metric count must be positive");
    return alpha_m * std::pow(nm, 0.6);
}

double ring_twist(const RingFrameParams& p, Direction direction) {
    if (!(p.n_bobbin > 0) || !(p.v_f > 0) || !(p.d_bobbin > 0)) {
        throw ParameterError("ring frame parameters must be positive");
    }
    const double correction = 1.0 / (kPi * p.d_bobbin);
    const double base = p.n_bobbin / p.v_f;
    return direction == Direction::S ? base - correction : base + correction;
}

double angle_to_tpm(double angle_deg, double diameter_mm) {
    if (!(angle_deg >= 0 && angle_deg < 90)) throw ParameterError("twist angle must lie in [0, 90)");
    if (!(diameter_mm > 0)) throw ParameterError("diameter must be positive");
    return std::tan(angle_deg / kDeg) / (kPi * diameter_mm * 1e-3);
}

double tpm_to_angle(double tpm, double diameter_mm) {
    if (!(tpm >= 0)) throw ParameterError("tpm must be >= 0");
    if (!(diameter_mm > 0)) throw ParameterError("diameter must be positive");
    return std::atan(kPi * diameter_mm * 1e-3 * tpm) * kDeg;
}

double accuracy_pct(double ref_tpm, double est_tpm) {
    if (!(ref_tpm > 0)) throw ParameterError("reference tpm must be positive");
    return 100.0 * (1.0 - std::abs(ref_tpm - est_tpm) / ref_tpm);
}

CoreBand extract_core(const GrayImage& img, double fraction) {
    if (!(fraction > 0 && fraction < 1)) throw ParameterError("core fraction must lie in (0, 1)");
    const auto rows = row_projection(img);
    const auto [mn, mx] = std::minmax_element(rows.begin(), rows.end());
    if (*mx == *mn) throw AnalysisError("no core found");
    const double level = static_cast<double>(*mn) + fraction * static_cast<double>(*mx - *mn);
    const int peak = static_cast<int>(mx - rows.begin());
    int top = peak;
    while (top > 0 && static_cast<double>(rows[top - 1]) > level) --top;
    int bottom = peak;
    while (bottom + 1 < img.height() && static_cast<double>(rows[bottom + 1]) > level) ++bottom;
    return {crop(img, 0, top, img.width(), bottom - top + 1), top, bottom};
}

AngleEstimate dominant_angle_fft(const GrayImage& core, const FftOptions& options) {
    if (options.pad_factor < 1 || options.dc_guard < 0) throw ParameterError("invalid FFT options");
    const int w = core.width();
    const int h = core.height();
    if (w < 4 || h < 4) throw AnalysisError("no periodic structure: core too small");
    const int pw = next_pow2(w * options.pad_factor);
    const int ph = next_pow2(h * options.pad_factor);
    const int cw = pw / 2 + 1;

    const double mean = std::accumulate(core.pixels().begin(), core.pixels().end(), 0.0) / (double(w) * h);
    std::unique_ptr<double, decltype(&fftw_free)> in(fftw_alloc_real(std::size_t(pw) * ph), &fftw_free);
    std::unique_ptr<fftw_complex, decltype(&fftw_free)> out(fftw_alloc_complex(std::size_t(cw) * ph), &fftw_free);
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_r2c_2d(ph, pw, in.get(), out.get(), FFTW_ESTIMATE);
    }
    std::fill(in.get(), in.get() + std::size_t(pw) * ph, 0.0);
    auto hann = [](int i, int n) { return n > 1 ? 0.5 - 0.5 * std::cos(2 * kPi * i / (n - 1)) : 1.0; };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            in.get()[std::size_t(y) * pw + x] = (core(x, y) - mean) * hann(x, w) * hann(y, h);
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }

    auto power = [&](int kx, int ky) {
        const auto& c = out.get()[std::size_t((ky + ph) % ph) * cw + kx];
        return c[0] * c[0] + c[1] * c[1];
    };
    const double guard_x = double(options.dc_guard) * pw / w;
    const double guard_y = double(options.dc_guard) * ph / h;
    double best = -1;
    int bx = 0;
    int by = 0;
    double total = 0;
    std::size_t counted = 0;
    for (int iy = 0; iy < ph; ++iy) {
        const int ky = iy <= ph / 2 ? iy : iy - ph;
        for (int kx = 0; kx < cw; ++kx) {
            if (std::abs(kx) <= guard_x && std::abs(ky) <= guard_y) continue;
            const double p = power(kx, ky);
            total += p;
            ++counted;
            if (p > best) {
                best = p;
                bx = kx;
                by = ky;
            }
        }
    }
    if (counted == 0 || best <= 0 || best < options.min_peak_ratio * total / double(counted)) {
        throw AnalysisError("no periodic structure");
    }
    double fx = bx;
    double fy = by;
    if (bx > 0 && bx + 1 < cw) fx += parabolic_offset(power(bx - 1, by), best, power(bx + 1, by));
    fy += parabolic_offset(power(bx, by - 1), best, power(bx, by + 1));
    const double nx = fx / pw;
    const double ny = fy / ph;
    const double angle = std::atan2(std::abs(ny), std::abs(nx)) * kDeg;
    if (!(angle < 90)) throw AnalysisError("no periodic structure across the yarn axis");
    return {angle, nx * ny < 0 ? Direction::Z : Direction::S, 0};
}

double Segment::signed_angle() const { return std::atan2(dx, dy) * kDeg; }

std::vector<Segment> extract_segments(const GrayImage& core, const LineOptions& options) {
    if (options.low_pass_radius < 0 || !(options.min_len >= 0) || !(options.bin_deg > 0)) {
        throw ParameterError("invalid line options");
    }
    const GrayImage smooth = low_pass(core, options.low_pass_radius);
    const Gradient grad = sobel_gradient(smooth);
    const BinaryImage edges = otsu_binarize(grad.magnitude);
    const BinaryImage skel = skeletonize(edges);
    const auto paths = skeleton_paths(skel, Connectivity::Eight);

    std::vector<std::vector<Point>> groups;
    std::vector<Segment> segs;
    for (const auto& path : paths) {
        if (path.size() < 2) continue;
        groups.push_back(path);
        segs.push_back(fit_segment(path));
    }

    UnionFind uf(segs.size());
    for (std::size_t i = 0; i < segs.size(); ++i)
        for (std::size_t j = i + 1; j < segs.size(); ++j) {
            if (angle_gap(segs[i].signed_angle(), segs[j].signed_angle()) >= options.merge_angle_deg) continue;
            const double d = std::max(perpendicular_distance(segs[i], segs[j].cx, segs[j].cy),
                                      perpendicular_distance(segs[j], segs[i].cx, segs[i].cy));
            if (d < options.merge_dist_px) uf.unite(i, j);
        }
    std::map<std::size_t, std::vector<Point>> merged;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        auto& dst = merged[uf.find(i)];
        dst.insert(dst.end(), groups[i].begin(), groups[i].end());
    }
    std::vector<Segment> out;
    for (const auto& [root, pts] : merged) {
        Segment s = fit_segment(pts);
        if (s.length >= options.min_len) out.push_back(s);
    }
    return out;
}

AngleEstimate dominant_angle_lines(const GrayImage& core, const LineOptions& options) {
    const auto segs = extract_segments(core, options);
    if (segs.empty()) throw AnalysisError("no line segments survive filtering");

    std::map<int, double> votes;
    for (const auto& s : segs) votes[static_cast<int>(std::floor((s.signed_angle() + 90.0) / options.bin_deg))] += s.length;
    const int mode = std::max_element(votes.begin(), votes.end(), [](const auto& a, const auto& b) {
                         return a.second < b.second;
                     })->first;

    auto weighted_mean = [&](auto&& keep) {
        double wsum = 0;
        double asum = 0;
        int n = 0;
        for (const auto& s : segs) {
            const double a = s.signed_angle();
            if (!keep(a)) continue;
            wsum += s.length;
            asum += s.length * a;
            ++n;
        }
        return std::pair{asum / wsum, n};
    };
    const auto [modal_mean, n_modal] = weighted_mean([&](double a) {
        return static_cast<int>(std::floor((a + 90.0) / options.bin_deg)) == mode;
    });
    const auto [mean, n] = weighted_mean([&, m = modal_mean](double a) {
        return std::abs(a - m) <= options.bin_deg / 2;
    });
    const double angle = std::abs(mean);
    if (!(angle < 90)) throw AnalysisError("dominant lines run along the yarn axis");
    return {angle, mean > 0 ? Direction::Z : Direction::S, n};
}

}  // namespace yarnscope::twist
