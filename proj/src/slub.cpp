#include "yarnscope/slub.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace yarnscope::slub {

namespace {

std::vector<double> median_smooth(const std::vector<int>& w, int window) {
    const int n = static_cast<int>(w.size());
    const int r = window / 2;
    std::vector<double> out(w.size());
    std::vector<int> buf;
    for (int i = 0; i < n; ++i) {
        buf.clear();
        for (int d = -r; d <= r; ++d) buf.push_back(w[std::clamp(i + d, 0, n - 1)]);
        std::nth_element(buf.begin(), buf.begin() + r, buf.end());
        out[i] = buf[r];
    }
    return out;
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)); }

}  // namespace

int detect_base_width(const metrology::WidthProfile& profile) {
    const auto& w = profile.widths;
    if (w.empty() || 2 * profile.nonzero_columns() < w.size()) throw AnalysisError("no base width: too few yarn columns");
    std::map<int, std::size_t> hist;
    for (int v : w)
        if (v > 0) ++hist[v];
    int best = 0;
    std::size_t best_count = 0;
    for (const auto& [width, count] : hist) {
        if (count > best_count) {
            best = width;
            best_count = count;
        }
    }
    return best;
}

SlubReport detect_slubs(const metrology::WidthProfile& profile, const metrology::Calibration& cal,
                        const SlubOptions& options) {
    if (!(options.amplitude_threshold_pct > 100) || !(options.min_len_mm >= 0) || options.median_window < 1 ||
        options.median_window % 2 == 0) {
        throw ParameterError("invalid slub options");
    }
    SlubReport rep;
    rep.base_width_px = detect_base_width(profile);
    const auto smooth = median_smooth(profile.widths, options.median_window);
    const double level = options.amplitude_threshold_pct / 100.0 * rep.base_width_px;
    const int n = static_cast<int>(smooth.size());
    for (int x = 0; x < n;) {
        if (smooth[x] < level) {
            ++x;
            continue;
        }
        int end = x;
        while (end + 1 < n && smooth[end + 1] >= level) ++end;
        const double len_mm = cal.to_mm(end - x + 1);
        if (len_mm >= options.min_len_mm) {
            double sum = 0;
            for (int i = x; i <= end; ++i) sum += profile.widths[i];
            SlubSegment s;
            s.start_col = x;
            s.end_col = end;
            s.start_mm = cal.to_mm(x);
            s.length_mm = len_mm;
            s.mean_width_px = sum / (end - x + 1);
            s.amplitude_pct = 100.0 * s.mean_width_px / rep.base_width_px;
            rep.segments.push_back(s);
        }
        x = end + 1;
    }
    rep.scanned_length_mm = cal.to_mm(n);
    for (std::size_t i = 1; i < rep.segments.size(); ++i) {
        rep.distances_mm.push_back(cal.to_mm(rep.segments[i].start_col - rep.segments[i - 1].end_col - 1));
    }
    if (!rep.segments.empty()) {
        rep.leading_margin_mm = cal.to_mm(rep.segments.front().start_col);
        rep.trailing_margin_mm = cal.to_mm(n - 1 - rep.segments.back().end_col);
    } else {
        rep.leading_margin_mm = rep.scanned_length_mm;
    }
    return rep;
}

std::optional<int> slub_period(const SlubReport& report, double tolerance) {
    const auto& s = report.segments;
    const std::size_t n = s.size();
    if (n < 3) throw AnalysisError("period detection needs at least three slubs");
    if (!(tolerance >= 0)) throw ParameterError("tolerance must be >= 0");
    for (std::size_t p = 1; p <= n / 2; ++p) {
        bool ok = true;
        for (std::size_t i = 0; ok && i + p < n; ++i) {
            ok = close(s[i].length_mm, s[i + p].length_mm, tolerance) &&
                 close(s[i].amplitude_pct, s[i + p].amplitude_pct, tolerance);
            if (ok && i + p < report.distances_mm.size()) {
                ok = close(report.distances_mm[i], report.distances_mm[i + p], tolerance);
            }
        }
        if (ok) return static_cast<int>(p);
    }
    return std::nullopt;
}

std::vector<std::pair<int, int>> split_lanes(const BinaryImage& bin, double valley_fraction) {
    if (!(valley_fraction >= 0 && valley_fraction < 1)) throw ParameterError("valley fraction must lie in [0, 1)");
    const auto rows = row_projection(bin);
    const auto peak = *std::max_element(rows.begin(), rows.end());
    std::vector<std::pair<int, int>> lanes;
    if (peak == 0) return lanes;
    const double level = valley_fraction * static_cast<double>(peak);
    const int h = bin.height();
    for (int y = 0; y < h;) {
        if (static_cast<double>(rows[y]) <= level) {
            ++y;
            continue;
        }
        int end = y;
        while (end + 1 < h && static_cast<double>(rows[end + 1]) > level) ++end;
        lanes.emplace_back(y, end);
        y = end + 1;
    }
    return lanes;
}

}  // namespace yarnscope::slub
