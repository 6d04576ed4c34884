#include "yarnscope/texture.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace yarnscope::texture {

namespace {

constexpr int kDx[] = {1, -1, 0, 0, 1, 1, -1, -1};
constexpr int kDy[] = {0, 0, 1, -1, 1, -1, 1, -1};

bool is_junction(const BinaryImage& img, int x, int y) {
    return img.or_zero(x, y) && crossing_number(img, x, y) >= 3;
}

// Pixels from an endpoint up to (excluding) the first junction; empty when the
// walk ends without meeting one or runs longer than limit.
std::vector<Point> spur_from(const BinaryImage& img, Point start, int limit) {
    std::vector<Point> walk{start};
    Point prev{-1, -1};
    Point cur = start;
    while (static_cast<int>(walk.size()) < limit) {
        Point next{-1, -1};
        for (int k = 0; k < 8; ++k) {
            const Point p{cur.x + kDx[k], cur.y + kDy[k]};
            if (!img.or_zero(p.x, p.y) || (p.x == prev.x && p.y == prev.y)) continue;
            if (std::find_if(walk.begin(), walk.end(), [&](Point q) { return q.x == p.x && q.y == p.y; }) !=
                walk.end()) {
                continue;
            }
            if (is_junction(img, p.x, p.y)) return walk;
            if (next.x < 0) next = p;
        }
        if (next.x < 0) return {};
        prev = cur;
        cur = next;
        walk.push_back(cur);
    }
    return {};
}

}  // namespace

BinaryImage corrective_procedure(const BinaryImage& skel, int spur_len) {
    if (spur_len < 1) throw ParameterError("spur length must be >= 1");
    BinaryImage cur = skel;
    for (;;) {
        BinaryImage next = cur;
        bool changed = false;
        for (int y = 0; y < cur.height(); ++y)
            for (int x = 0; x < cur.width(); ++x) {
                if (!cur(x, y) || neighbor_count(cur, x, y) != 1) continue;
                for (const Point& p : spur_from(cur, {x, y}, spur_len)) {
                    next(p.x, p.y) = 0;
                    changed = true;
                }
            }
        if (!changed) return cur;
        cur = skeletonize(next);
    }
}

std::vector<FiberTrace> trace_fibers(const BinaryImage& skel, Connectivity neighborhood, int min_trace_len,
                                     int chord) {
    if (min_trace_len < 2) throw ParameterError("min trace length must be >= 2");
    if (chord < 2) throw ParameterError("chord must be >= 2 px");
    std::vector<FiberTrace> out;
    for (auto& path : skeleton_paths(skel, neighborhood)) {
        if (static_cast<int>(path.size()) < min_trace_len) continue;
        FiberTrace t;
        t.path = std::move(path);
        const std::size_t n = t.path.size();
        const std::size_t step = static_cast<std::size_t>(chord - 1);
        for (std::size_t a = 0; a + 1 < n; a += step) {
            const std::size_t b = std::min(a + step, n - 1);
            // A trailing stub shorter than half a chord is folded into the previous one.
            if (b - a < step / 2 && !t.segment_lengths.empty()) break;
            const double dx = t.path[b].x - t.path[a].x;
            const double dy = t.path[b].y - t.path[a].y;
            const double len = std::hypot(dx, dy);
            if (len == 0) continue;
            t.segment_angles_deg.push_back(std::atan2(std::abs(dy), std::abs(dx)) * 180.0 / std::numbers::pi);
            t.segment_lengths.push_back(len);
        }
        double wsum = 0;
        double asum = 0;
        for (std::size_t i = 0; i < t.segment_lengths.size(); ++i) {
            wsum += t.segment_lengths[i];
            asum += t.segment_lengths[i] * t.segment_angles_deg[i];
        }
        if (wsum == 0) continue;
        t.length = wsum;
        t.angle_deg = asum / wsum;
        out.push_back(std::move(t));
    }
    return out;
}

OrientationResult orientation_stats(const std::vector<FiberTrace>& traces) {
    if (traces.empty()) throw AnalysisError("no fiber traces");
    double w = 0;
    double a = 0;
    double s2 = 0;
    for (const auto& t : traces)
        for (std::size_t i = 0; i < t.segment_lengths.size(); ++i) {
            const double len = t.segment_lengths[i];
            const double ang = t.segment_angles_deg[i];
            const double s = std::sin(ang * std::numbers::pi / 180.0);
            w += len;
            a += len * ang;
            s2 += len * s * s;
        }
    if (w == 0) throw AnalysisError("no fiber traces");
    OrientationResult r;
    r.n_traces = static_cast<int>(traces.size());
    r.mean_angle_deg = a / w;
    double var = 0;
    for (const auto& t : traces)
        for (std::size_t i = 0; i < t.segment_lengths.size(); ++i) {
            const double d = t.segment_angles_deg[i] - r.mean_angle_deg;
            var += t.segment_lengths[i] * d * d;
        }
    var /= w;
    r.cv_pct = r.mean_angle_deg > 0 ? 100.0 * std::sqrt(var) / r.mean_angle_deg : 0.0;
    r.orientation_index = 1.0 - 1.5 * s2 / w;
    return r;
}

OrientationResult analyze_texture(const GrayImage& img, const TextureOptions& options) {
    const BinaryImage skel = corrective_procedure(skeletonize(otsu_binarize(img, options.polarity)), options.spur_len);
    return orientation_stats(trace_fibers(skel, options.neighborhood, options.min_trace_len, options.chord));
}

AngleCheck angle_accuracy_check(const std::vector<GrayImage>& images, const std::vector<double>& manual_deg,
                                const TextureOptions& options) {
    if (images.size() != manual_deg.size()) throw ParameterError("images and manual angles differ in count");
    AngleCheck c;
    for (std::size_t i = 0; i < images.size(); ++i) {
        const double err = std::abs(analyze_texture(images[i], options).mean_angle_deg - manual_deg[i]);
        c.abs_error_deg.push_back(err);
        c.max_abs_error_deg = std::max(c.max_abs_error_deg, err);
        c.mean_abs_error_deg += err;
    }
    if (!images.empty()) c.mean_abs_error_deg /= static_cast<double>(images.size());
    return c;
}

}  // namespace yarnscope::texture
